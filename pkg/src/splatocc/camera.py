"""Pinhole camera geometry: rays, backprojection, projection, rigid transforms.

Conventions: the camera looks along +z in its own frame, the image origin is
the top-left corner, u runs along width and v along height. Depth values are
metric distances along the normalized ray; a converter from z-depth is
provided for inputs that use the other convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import quaternions
from .gaussians import GaussianPrimitive, GaussianSet, WORLD_FRAME


class Pixel(NamedTuple):
    u: float
    v: float


@dataclass(frozen=True)
class RigidTransform:
    """Rotation + translation; rotation must be orthonormal with det +1."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64)
        if rot.shape != (3, 3) or t.shape != (3,):
            raise ValueError("rotation must be 3x3 and translation a 3-vector")
        if not (np.all(np.isfinite(rot)) and np.all(np.isfinite(t))):
            raise ValueError("transform entries must be finite")
        if np.max(np.abs(rot @ rot.T - np.eye(3))) > 1e-6:
            raise ValueError("rotation is not orthonormal (tolerance 1e-6)")
        if abs(np.linalg.det(rot) - 1.0) > 1e-6:
            raise ValueError("rotation determinant must be +1")
        rot.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        return points @ self.rotation.T + self.translation

    def rotate(self, vectors) -> np.ndarray:
        return np.asarray(vectors, dtype=np.float64) @ self.rotation.T

    def inverse(self) -> "RigidTransform":
        return RigidTransform(self.rotation.T, -self.rotation.T @ self.translation)


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics plus a camera-to-world pose."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    pose: RigidTransform = field(default_factory=RigidTransform.identity)

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be > 0")
        if self.width < 1 or self.height < 1:
            raise ValueError("image size must be >= 1 pixel per side")
        if not all(np.isfinite([self.fx, self.fy, self.cx, self.cy])):
            raise ValueError("intrinsics must be finite")

    @property
    def position(self) -> np.ndarray:
        return self.pose.translation


def _split_pixel(pixel):
    px = np.asarray(pixel, dtype=np.float64)
    if px.shape[-1] != 2:
        raise ValueError("pixel must have a trailing dimension of 2 (u, v)")
    if not np.all(np.isfinite(px)):
        raise ValueError("pixel coordinates must be finite")
    return px[..., 0], px[..., 1]


def ray_direction(cam: CameraModel, pixel) -> np.ndarray:
    """Unit ray through a pixel, camera frame; z-component always > 0.

    Accepts a single (u, v) pair or an array with trailing dimension 2.
    """
    u, v = _split_pixel(pixel)
    x = (u - cam.cx) / cam.fx
    y = (v - cam.cy) / cam.fy
    inv = 1.0 / np.sqrt(x * x + y * y + 1.0)
    return np.stack([x * inv, y * inv, inv], axis=-1)


def backproject(cam: CameraModel, pixel, distance) -> np.ndarray:
    """3-point at metric ray distance ``distance`` along the pixel's ray."""
    distance = np.asarray(distance, dtype=np.float64)
    if np.any(~np.isfinite(distance)) or np.any(distance <= 0.0):
        raise ValueError("ray distance must be finite and > 0")
    return distance[..., None] * ray_direction(cam, pixel)


def project(cam: CameraModel, point):
    """Inverse of backproject: returns (u, v, ray distance).

    Points with z <= 0 lie behind the camera and raise.
    """
    point = np.asarray(point, dtype=np.float64)
    if point.shape[-1] != 3:
        raise ValueError("point must have a trailing dimension of 3")
    z = point[..., 2]
    if np.any(z <= 0.0) or not np.all(np.isfinite(point)):
        raise ValueError("point is behind the camera (z <= 0)")
    u = cam.fx * point[..., 0] / z + cam.cx
    v = cam.fy * point[..., 1] / z + cam.cy
    d = np.linalg.norm(point, axis=-1)
    return u, v, d


def z_depth_to_ray_distance(cam: CameraModel, pixel, z):
    """Convert z-depth to metric distance along the pixel's normalized ray."""
    z = np.asarray(z, dtype=np.float64)
    if np.any(~np.isfinite(z)) or np.any(z <= 0.0):
        raise ValueError("z-depth must be finite and > 0")
    u, v = _split_pixel(pixel)
    x = (u - cam.cx) / cam.fx
    y = (v - cam.cy) / cam.fy
    return z * np.sqrt(x * x + y * y + 1.0)


def to_world(cam: CameraModel, g):
    """Map a GaussianPrimitive or GaussianSet from camera to world frame.

    Means are rotated and translated, orientations composed with the pose
    rotation; scales, opacities and logits are untouched, so covariance
    eigenvalues are preserved exactly.
    """
    pose_quat = quaternions.from_matrix(cam.pose.rotation)
    if isinstance(g, GaussianPrimitive):
        return GaussianPrimitive(
            mean=cam.pose.apply(g.mean),
            scale=g.scale,
            rotation=quaternions.multiply(pose_quat, g.rotation),
            opacity=g.opacity,
            logits=g.logits,
        )
    if isinstance(g, GaussianSet):
        return GaussianSet(
            means=cam.pose.apply(g.means),
            scales=g.scales,
            rotations=quaternions.multiply(pose_quat[None, :], g.rotations),
            opacities=g.opacities,
            logits=g.logits,
            frame=WORLD_FRAME,
        )
    raise TypeError(f"expected GaussianPrimitive or GaussianSet, got {type(g).__name__}")
