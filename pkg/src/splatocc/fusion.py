"""Training-free streaming fusion of per-frame Gaussians into a memory bank.

The bank holds world-frame Gaussians plus a uniform-grid spatial hash over
their means (cell size = match radius epsilon). Fusing a frame:

1. every incoming Gaussian is matched to its nearest bank member within
   epsilon (at most one anchor per incoming, so nothing is double counted);
2. each anchor with matches is updated per attribute theta in
   {mean, covariance, opacity, logits} by the confidence-weighted average

       theta <- (gamma * p_mem * theta_mem + (1 - gamma) * sum_j p_j * theta_j)
                / (gamma * p_mem + (1 - gamma) * sum_j p_j)

   where p is top-1 softmax confidence and gamma < 0.5 biases toward the
   newer evidence;
3. unmatched incoming Gaussians are inserted verbatim.

Covariances are averaged as full matrices and re-factored into (scales,
rotation) by eigendecomposition, which keeps the average rotation-consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quaternions
from .gaussians import SCALE_FLOOR, GaussianPrimitive, GaussianSet, WORLD_FRAME, covariance_matrices
from .spatial_hash import SpatialHashGrid


@dataclass(frozen=True)
class FusionConfig:
    epsilon: float = 0.08
    gamma: float = 0.4

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie strictly inside (0, 1)")


@dataclass(frozen=True)
class FusionStats:
    matched: int
    inserted: int


def _softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    ez = np.exp(z)
    return ez / ez.sum(axis=-1, keepdims=True)


def top1_confidence(g):
    """Max softmax probability of the class logits.

    Accepts a GaussianPrimitive (returns float) or a GaussianSet (returns an
    array of per-member confidences).
    """
    if isinstance(g, GaussianPrimitive):
        return float(_softmax(g.logits).max())
    if isinstance(g, GaussianSet):
        return _softmax(g.logits).max(axis=-1)
    raise TypeError(f"expected GaussianPrimitive or GaussianSet, got {type(g).__name__}")


def _refactor_covariances(covs):
    """Recover (scales, quaternions) from SPD matrices via eigendecomposition.

    Scales are floored at SCALE_FLOOR; eigenvector bases with det -1 get one
    column flipped so the rotation is proper.
    """
    covs = 0.5 * (covs + np.swapaxes(covs, -1, -2))
    eigvals, eigvecs = np.linalg.eigh(covs)
    scales = np.sqrt(np.clip(eigvals, SCALE_FLOOR * SCALE_FLOOR, None))
    flip = np.linalg.det(eigvecs) < 0
    if np.any(flip):
        eigvecs = eigvecs.copy()
        eigvecs[flip, :, 0] *= -1.0
    return scales, quaternions.from_matrix(eigvecs)


class GaussianMemoryBank:
    """World-frame Gaussian accumulator with an epsilon-cell spatial hash.

    Single writer: fuse_frame mutates the bank and must not run concurrently
    with queries. Frames are expected in timestamp order.
    """

    def __init__(self, num_classes: int, config: FusionConfig = FusionConfig()):
        if num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        self.config = config
        self.num_classes = int(num_classes)
        self.frame_count = 0
        self.means = np.zeros((0, 3))
        self.scales = np.zeros((0, 3))
        self.rotations = np.zeros((0, 4))
        self.opacities = np.zeros(0)
        self.logits = np.zeros((0, self.num_classes))
        self._index = SpatialHashGrid(config.epsilon)

    @classmethod
    def from_set(cls, gset: GaussianSet, config: FusionConfig = FusionConfig()):
        """Restore a bank from a checkpointed world-frame GaussianSet."""
        bank = cls(gset.num_classes, config)
        if len(gset):
            if gset.frame != WORLD_FRAME:
                raise ValueError("bank checkpoints must be world frame")
            bank._append(gset.means, gset.scales, gset.rotations, gset.opacities, gset.logits)
        return bank

    def __len__(self) -> int:
        return self.means.shape[0]

    def to_set(self) -> GaussianSet:
        return GaussianSet(
            self.means.copy(), self.scales.copy(), self.rotations.copy(),
            self.opacities.copy(), self.logits.copy(), frame=WORLD_FRAME,
        )

    def _append(self, means, scales, rotations, opacities, logits) -> None:
        start = len(self)
        self.means = np.concatenate([self.means, means])
        self.scales = np.concatenate([self.scales, scales])
        self.rotations = np.concatenate([self.rotations, rotations])
        self.opacities = np.concatenate([self.opacities, opacities])
        self.logits = np.concatenate([self.logits, logits])
        self._index.insert_many(range(start, len(self)), means)

    def radius_neighbors(self, query, eps: float = None) -> np.ndarray:
        """Ids of members whose mean lies within the closed ball of radius
        eps (default: the match radius) around ``query``."""
        eps = self.config.epsilon if eps is None else float(eps)
        if not eps > 0:
            raise ValueError("eps must be > 0")
        cand = self._index.candidates(query, eps)
        if not cand:
            return np.zeros(0, dtype=np.int64)
        cand = np.asarray(cand, dtype=np.int64)
        diff = self.means[cand] - np.asarray(query, dtype=np.float64)
        keep = np.einsum("ij,ij->i", diff, diff) <= eps * eps
        return cand[keep]

    def _nearest_within(self, query) -> int:
        """Nearest member id within epsilon, or -1. Ties break to the lowest id."""
        eps = self.config.epsilon
        cand = self._index.candidates(query, eps)
        if not cand:
            return -1
        cand = np.asarray(cand, dtype=np.int64)
        cand.sort()
        diff = self.means[cand] - query
        d2 = np.einsum("ij,ij->i", diff, diff)
        best = int(np.argmin(d2))
        if d2[best] <= eps * eps:
            return int(cand[best])
        return -1

    def fuse_frame(self, incoming: GaussianSet) -> FusionStats:
        """Fuse one frame's world-frame Gaussians into the bank.

        Matched incoming members are consumed by their anchors; the rest are
        inserted. matched + inserted == len(incoming).
        """
        if incoming.frame != WORLD_FRAME:
            raise ValueError("fuse_frame requires a world-frame GaussianSet")
        if incoming.num_classes != self.num_classes:
            raise ValueError(
                f"class count mismatch: incoming {incoming.num_classes}, bank {self.num_classes}"
            )

        n_in = len(incoming)
        anchors = np.full(n_in, -1, dtype=np.int64)
        if len(self) and n_in:
            for i in range(n_in):
                anchors[i] = self._nearest_within(incoming.means[i])
        matched = anchors >= 0
        n_matched = int(np.count_nonzero(matched))

        if n_matched:
            gamma = self.config.gamma
            p_in = top1_confidence(incoming)
            w_in = (1.0 - gamma) * p_in[matched]
            idx = anchors[matched]
            nb = len(self)

            sum_w = np.zeros(nb)
            np.add.at(sum_w, idx, w_in)
            sum_mu = np.zeros((nb, 3))
            np.add.at(sum_mu, idx, w_in[:, None] * incoming.means[matched])
            cov_in = covariance_matrices(incoming.scales[matched], incoming.rotations[matched])
            sum_cov = np.zeros((nb, 9))
            np.add.at(sum_cov, idx, w_in[:, None] * cov_in.reshape(-1, 9))
            sum_a = np.zeros(nb)
            np.add.at(sum_a, idx, w_in * incoming.opacities[matched])
            sum_c = np.zeros((nb, self.num_classes))
            np.add.at(sum_c, idx, w_in[:, None] * incoming.logits[matched])

            ua = np.unique(idx)
            p_mem = _softmax(self.logits[ua]).max(axis=-1)
            w_mem = gamma * p_mem
            denom = w_mem + sum_w[ua]

            old_means = self.means[ua].copy()
            cov_mem = covariance_matrices(self.scales[ua], self.rotations[ua])
            fused_cov = (
                w_mem[:, None, None] * cov_mem + sum_cov[ua].reshape(-1, 3, 3)
            ) / denom[:, None, None]
            new_scales, new_rotations = _refactor_covariances(fused_cov)

            self.means[ua] = (w_mem[:, None] * self.means[ua] + sum_mu[ua]) / denom[:, None]
            self.scales[ua] = new_scales
            self.rotations[ua] = new_rotations
            self.opacities[ua] = (w_mem * self.opacities[ua] + sum_a[ua]) / denom
            self.logits[ua] = (w_mem[:, None] * self.logits[ua] + sum_c[ua]) / denom[:, None]

            for row, member in enumerate(ua):
                self._index.move(int(member), old_means[row], self.means[member])

        if n_in - n_matched:
            ins = ~matched
            self._append(
                incoming.means[ins], incoming.scales[ins], incoming.rotations[ins],
                incoming.opacities[ins], incoming.logits[ins],
            )

        self.frame_count += 1
        return FusionStats(matched=n_matched, inserted=n_in - n_matched)


def radius_neighbors(bank: GaussianMemoryBank, query, eps: float = None) -> np.ndarray:
    return bank.radius_neighbors(query, eps)


def fuse_frame(bank: GaussianMemoryBank, incoming: GaussianSet,
               config: FusionConfig = None) -> FusionStats:
    """Functional wrapper over :meth:`GaussianMemoryBank.fuse_frame`.

    Passing a config different from the bank's is an error; the hash cell
    size is fixed at bank construction.
    """
    if config is not None and config != bank.config:
        raise ValueError("config differs from the bank's; rebuild the bank instead")
    return bank.fuse_frame(incoming)
