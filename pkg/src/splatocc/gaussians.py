"""Anisotropic 3D Gaussian primitives carrying semantic class logits.

A primitive is an ellipsoidal kernel: mean position (m), per-axis standard
deviations (m), a unit-quaternion orientation, an opacity in [0, 1], and a
vector of class logits. Collections are stored as packed arrays
(:class:`GaussianSet`) so splatting and fusion stay vectorized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from . import quaternions
from .sampling import SampleBatch, SamplePoint

SCALE_FLOOR = 1e-4
DEFAULT_PRUNE_TAU = 0.01
CAMERA_FRAME = "camera"
WORLD_FRAME = "world"

# Implied covariance condition number above which evaluation refuses to run.
_CONDITION_LIMIT = 1e12


class DegenerateGaussianError(ValueError):
    """Raised when a covariance is too ill-conditioned to evaluate."""


def _clean_scale(scale):
    scale = np.asarray(scale, dtype=np.float64)
    if not np.all(np.isfinite(scale)) or np.any(scale <= 0.0):
        raise ValueError("scales must be finite and > 0")
    return np.maximum(scale, SCALE_FLOOR)


@dataclass(frozen=True)
class GaussianPrimitive:
    """One Gaussian kernel. Scales are floored at SCALE_FLOOR on construction."""

    mean: np.ndarray
    scale: np.ndarray
    rotation: np.ndarray
    opacity: float
    logits: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        if mean.shape != (3,) or not np.all(np.isfinite(mean)):
            raise ValueError("mean must be a finite 3-vector")
        scale = _clean_scale(self.scale)
        if scale.shape != (3,):
            raise ValueError("scale must be a 3-vector")
        rotation = quaternions.normalize_if_needed(self.rotation)
        if rotation.shape != (4,):
            raise ValueError("rotation must be a quaternion (w, x, y, z)")
        opacity = float(self.opacity)
        if not np.isfinite(opacity) or not 0.0 <= opacity <= 1.0:
            raise ValueError("opacity must lie in [0, 1]")
        logits = np.asarray(self.logits, dtype=np.float64)
        if logits.ndim != 1 or logits.size < 2 or not np.all(np.isfinite(logits)):
            raise ValueError("logits must be a finite vector of length >= 2")
        for name, value in (
            ("mean", mean),
            ("scale", scale),
            ("rotation", rotation),
            ("opacity", opacity),
            ("logits", logits),
        ):
            object.__setattr__(self, name, value)

    @property
    def num_classes(self) -> int:
        return self.logits.size

    def covariance(self) -> np.ndarray:
        return covariance(self)


class GaussianSet:
    """Packed, immutable collection of primitives sharing one class count.

    ``frame`` tags whether means/rotations live in camera or world
    coordinates; splatting and fusion require world frame.
    """

    __slots__ = ("means", "scales", "rotations", "opacities", "logits", "frame")

    def __init__(self, means, scales, rotations, opacities, logits, frame=CAMERA_FRAME):
        if frame not in (CAMERA_FRAME, WORLD_FRAME):
            raise ValueError(f"unknown frame tag {frame!r}")
        means = np.atleast_2d(np.asarray(means, dtype=np.float64))
        scales = np.atleast_2d(np.asarray(scales, dtype=np.float64))
        rotations = np.atleast_2d(np.asarray(rotations, dtype=np.float64))
        opacities = np.atleast_1d(np.asarray(opacities, dtype=np.float64))
        logits = np.atleast_2d(np.asarray(logits, dtype=np.float64))
        n = means.shape[0]
        if means.shape != (n, 3):
            raise ValueError("means must have shape (n, 3)")
        if scales.shape != (n, 3) or rotations.shape != (n, 4):
            raise ValueError("scales must be (n, 3) and rotations (n, 4)")
        if opacities.shape != (n,) or logits.shape[0] != n or logits.shape[1] < 2:
            raise ValueError("opacities must be (n,) and logits (n, num_classes >= 2)")
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(logits))):
            raise ValueError("means and logits must be finite")
        if np.any(~np.isfinite(opacities)) or np.any(opacities < 0) or np.any(opacities > 1):
            raise ValueError("opacities must lie in [0, 1]")
        if n:
            scales = _clean_scale(scales)
            rotations = quaternions.normalize_if_needed(rotations)
        for arr in (means, scales, rotations, opacities, logits):
            arr.flags.writeable = False
        self.means = means
        self.scales = scales
        self.rotations = rotations
        self.opacities = opacities
        self.logits = logits
        self.frame = frame

    @classmethod
    def empty(cls, num_classes: int, frame=CAMERA_FRAME) -> "GaussianSet":
        return cls(
            np.zeros((0, 3)),
            np.zeros((0, 3)),
            np.zeros((0, 4)),
            np.zeros(0),
            np.zeros((0, num_classes)),
            frame=frame,
        )

    @classmethod
    def from_primitives(cls, primitives: Iterable[GaussianPrimitive], frame=CAMERA_FRAME):
        prims = list(primitives)
        if not prims:
            raise ValueError("from_primitives needs at least one primitive; use empty()")
        num_classes = prims[0].num_classes
        if any(p.num_classes != num_classes for p in prims):
            raise ValueError("primitives disagree on class count")
        return cls(
            np.stack([p.mean for p in prims]),
            np.stack([p.scale for p in prims]),
            np.stack([p.rotation for p in prims]),
            np.array([p.opacity for p in prims]),
            np.stack([p.logits for p in prims]),
            frame=frame,
        )

    @property
    def num_classes(self) -> int:
        return self.logits.shape[1]

    def __len__(self) -> int:
        return self.means.shape[0]

    def __getitem__(self, i: int) -> GaussianPrimitive:
        return GaussianPrimitive(
            self.means[i], self.scales[i], self.rotations[i], self.opacities[i], self.logits[i]
        )

    def __iter__(self) -> Iterator[GaussianPrimitive]:
        for i in range(len(self)):
            yield self[i]

    def subset(self, index) -> "GaussianSet":
        return GaussianSet(
            self.means[index],
            self.scales[index],
            self.rotations[index],
            self.opacities[index],
            self.logits[index],
            frame=self.frame,
        )

    def rotation_matrices(self) -> np.ndarray:
        return quaternions.to_matrix(self.rotations)

    def covariances(self) -> np.ndarray:
        return covariance_matrices(self.scales, self.rotations)


def covariance_matrices(scales, rotations) -> np.ndarray:
    """R diag(s^2) R^T as (..., 3, 3), built from the factored form."""
    rot = quaternions.to_matrix(rotations)
    scaled = rot * np.asarray(scales, dtype=np.float64)[..., None, :]
    return scaled @ np.swapaxes(scaled, -1, -2)


def covariance(g: GaussianPrimitive) -> np.ndarray:
    """Covariance of one primitive; eigenvalues are the squared scales."""
    return covariance_matrices(g.scale, g.rotation)


def evaluate(g: GaussianPrimitive, points) -> np.ndarray:
    """Kernel value exp(-0.5 * d^T Sigma^-1 d) at one or more points.

    The inverse covariance is applied in factored form (rotate into the
    kernel's axes, divide by the scales), never via a general matrix
    inverse. Equals 1 exactly at the mean and decays with Mahalanobis
    distance.
    """
    points = np.asarray(points, dtype=np.float64)
    if not np.all(np.isfinite(points)):
        raise ValueError("points must be finite")
    ratio = float(np.max(g.scale) / np.min(g.scale))
    if ratio * ratio > _CONDITION_LIMIT:
        raise DegenerateGaussianError(
            f"covariance condition number {ratio * ratio:.3e} exceeds {_CONDITION_LIMIT:.0e}"
        )
    rot = quaternions.to_matrix(g.rotation)
    local = (points - g.mean) @ rot / g.scale
    m2 = np.sum(local * local, axis=-1)
    return np.exp(-0.5 * m2)


def prune(gset: GaussianSet, tau: float = DEFAULT_PRUNE_TAU) -> GaussianSet:
    """Drop members with opacity below tau, preserving order.

    Idempotent; tau = 0 keeps everything.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    return gset.subset(gset.opacities >= tau)


@dataclass(frozen=True)
class AttributeConfig:
    """Heuristic Gaussian attributes for depth-derived sample points.

    This stands in for a learned attribute head: isotropic kernels sized
    by the along-ray sample spacing, opacity decaying with sample depth
    index, and one-hot class logits. All knobs are explicit because none
    of them are canonical.
    """

    num_classes: int = 12
    sigma_factor: float = 0.75
    base_opacity: float = 0.9
    opacity_decay: float = 0.15
    logit_gain: float = 6.0

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        if self.sigma_factor <= 0 or self.base_opacity <= 0 or self.base_opacity > 1:
            raise ValueError("sigma_factor must be > 0 and base_opacity in (0, 1]")
        if self.opacity_decay < 0:
            raise ValueError("opacity_decay must be >= 0")


def heuristic_attributes(
    sample: SamplePoint, label: int, cfg: AttributeConfig = AttributeConfig()
) -> GaussianPrimitive:
    """Primitive for one sample point: see :class:`AttributeConfig`.

    opacity = base_opacity * exp(-opacity_decay * (k - 1)), so deeper
    interior samples fade; sigma = sigma_factor * spacing, isotropic.
    """
    label = int(label)
    if not 1 <= label <= cfg.num_classes - 1:
        raise ValueError(f"label {label} outside valid range 1..{cfg.num_classes - 1}")
    sigma = cfg.sigma_factor * sample.spacing
    opacity = cfg.base_opacity * float(np.exp(-cfg.opacity_decay * (sample.k - 1)))
    logits = np.zeros(cfg.num_classes)
    logits[label] = cfg.logit_gain
    return GaussianPrimitive(
        mean=np.asarray(sample.position, dtype=np.float64),
        scale=np.full(3, max(sigma, SCALE_FLOOR)),
        rotation=quaternions.IDENTITY,
        opacity=opacity,
        logits=logits,
    )


def heuristic_attributes_batch(
    samples: SampleBatch, labels, cfg: AttributeConfig = AttributeConfig()
) -> GaussianSet:
    """Vectorized :func:`heuristic_attributes` over a whole sample batch.

    ``labels`` gives one class id per sample (camera-frame output).
    """
    labels = np.asarray(labels)
    if labels.shape != (len(samples),):
        raise ValueError("labels must have one entry per sample")
    if labels.size and (labels.min() < 1 or labels.max() > cfg.num_classes - 1):
        bad = labels[(labels < 1) | (labels > cfg.num_classes - 1)][0]
        raise ValueError(f"label {bad} outside valid range 1..{cfg.num_classes - 1}")
    if not len(samples):
        return GaussianSet.empty(cfg.num_classes, frame=CAMERA_FRAME)
    sigma = np.maximum(cfg.sigma_factor * samples.spacings, SCALE_FLOOR)
    opacities = cfg.base_opacity * np.exp(-cfg.opacity_decay * (samples.ks - 1))
    logits = np.zeros((len(samples), cfg.num_classes))
    logits[np.arange(len(samples)), labels] = cfg.logit_gain
    return GaussianSet(
        means=samples.positions,
        scales=np.repeat(sigma[:, None], 3, axis=1),
        rotations=np.tile(quaternions.IDENTITY, (len(samples), 1)),
        opacities=opacities,
        logits=logits,
        frame=CAMERA_FRAME,
    )
