"""Synthetic room scenes: analytic depth rendering and oracle occupancy.

A scene is a rectangular room whose interior spans (0, extent) on each axis,
wrapped by a solid shell of configurable thickness (floor, ceiling, walls),
plus axis-aligned solid boxes and flat wall patches (distinctly labeled
rectangles painted on a shell face). Rendering intersects camera rays with
this geometry analytically, so both the depth maps and the voxelized ground
truth are exact, independent references for the splatting pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .camera import CameraModel, RigidTransform
from .sampling import DepthMap
from .splatting import GridSpec, OccupancyGrid

FLOOR_LABEL = 2
CEILING_LABEL = 1
WALL_LABEL = 3

_PATCHABLE_LABELS = (4, 5, 9, 10, 11)  # window, chair, tvs, furniture, objects


@dataclass(frozen=True)
class Box:
    """Solid axis-aligned box with one semantic label."""

    min_corner: np.ndarray
    max_corner: np.ndarray
    label: int

    def __post_init__(self):
        lo = np.asarray(self.min_corner, dtype=np.float64)
        hi = np.asarray(self.max_corner, dtype=np.float64)
        if lo.shape != (3,) or hi.shape != (3,) or np.any(hi <= lo):
            raise ValueError("box corners must be 3-vectors with max > min")
        if self.label < 1:
            raise ValueError("box label must be a semantic class >= 1")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "max_corner", hi)


@dataclass(frozen=True)
class WallPatch:
    """Rectangle painted on one shell face, overriding its class label.

    ``axis``/``side`` pick the face (side "min" is the plane at coordinate 0,
    "max" the one at the room extent); ``lo``/``hi`` bound the rectangle in
    the two remaining axes, in ascending axis order.
    """

    axis: int
    side: str
    lo: tuple
    hi: tuple
    label: int

    def __post_init__(self):
        if self.axis not in (0, 1, 2) or self.side not in ("min", "max"):
            raise ValueError("axis must be 0..2 and side 'min' or 'max'")
        if not (self.lo[0] < self.hi[0] and self.lo[1] < self.hi[1]):
            raise ValueError("patch rectangle must have positive area")


def _face_label(axis: int, side: str, scene: "SyntheticScene") -> int:
    if axis == 2:
        return scene.floor_label if side == "min" else scene.ceiling_label
    return scene.wall_label


@dataclass(frozen=True)
class SyntheticScene:
    extent: np.ndarray
    shell_thickness: float = 0.48
    boxes: tuple = ()
    patches: tuple = ()
    floor_label: int = FLOOR_LABEL
    ceiling_label: int = CEILING_LABEL
    wall_label: int = WALL_LABEL

    def __post_init__(self):
        extent = np.asarray(self.extent, dtype=np.float64)
        if extent.shape != (3,) or np.any(extent <= 0):
            raise ValueError("extent must be a positive 3-vector")
        if not self.shell_thickness > 0:
            raise ValueError("shell_thickness must be > 0")
        for box in self.boxes:
            if np.any(box.min_corner < 0) or np.any(box.max_corner > extent):
                raise ValueError("boxes must lie inside the room extent")
        extent.flags.writeable = False
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(self, "patches", tuple(self.patches))

    @property
    def outer_min(self) -> np.ndarray:
        return -self.shell_thickness * np.ones(3)

    @property
    def outer_max(self) -> np.ndarray:
        return self.extent + self.shell_thickness


def _slab_intervals(origin, dirs, lo, hi):
    """Per-ray (t_enter, t_exit) for an axis-aligned box, robust to zero
    direction components (parallel rays hit iff the origin is in the slab)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (lo - origin) / dirs
        t2 = (hi - origin) / dirs
        tmin = np.minimum(t1, t2)
        tmax = np.maximum(t1, t2)
    parallel = dirs == 0.0
    if np.any(parallel):
        inside = (origin >= lo) & (origin <= hi)
        tmin = np.where(parallel, np.where(inside, -np.inf, np.inf), tmin)
        tmax = np.where(parallel, np.where(inside, np.inf, -np.inf), tmax)
    return tmin.max(axis=-1), tmax.min(axis=-1), tmin, tmax


def render_depth(scene: SyntheticScene, cam: CameraModel):
    """Analytic depth + class id map for every pixel of ``cam``.

    Returns (DepthMap, class map) where depth holds the metric ray distance
    of the nearest surface hit (NaN on miss) and the class map records the
    hit surface's label (0 on miss). The camera must sit inside the room
    interior or entirely outside the shell.
    """
    from .camera import ray_direction

    h, w = cam.height, cam.width
    vv, uu = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    pix = np.stack([uu, vv], axis=-1).astype(np.float64)
    dirs = cam.pose.rotate(ray_direction(cam, pix))
    origin = cam.position

    inside_interior = bool(np.all(origin > 0) and np.all(origin < scene.extent))
    in_shell = (
        np.all(origin >= scene.outer_min)
        and np.all(origin <= scene.outer_max)
        and not inside_interior
    )
    if in_shell:
        raise ValueError("camera may not start inside the solid shell")

    best_t = np.full((h, w), np.inf)
    best_label = np.zeros((h, w), dtype=np.uint8)
    hit_axis = np.full((h, w), -1, dtype=np.int64)
    hit_max_side = np.zeros((h, w), dtype=bool)

    if inside_interior:
        # The shell is hit where the ray exits the open interior.
        _, t_exit, _, tmax = _slab_intervals(origin, dirs, np.zeros(3), scene.extent)
        axis = np.argmin(tmax, axis=-1)
        shell_t = t_exit
        shell_ok = shell_t > 0
    else:
        t_enter, t_exit, tmin, _ = _slab_intervals(
            origin, dirs, scene.outer_min, scene.outer_max
        )
        axis = np.argmax(tmin, axis=-1)
        shell_t = t_enter
        shell_ok = (t_enter <= t_exit) & (t_enter > 0)

    take = shell_ok & (shell_t < best_t)
    best_t = np.where(take, shell_t, best_t)
    hit_axis = np.where(take, axis, hit_axis)
    side = np.take_along_axis(dirs, axis[..., None], axis=-1)[..., 0] > 0
    if not inside_interior:
        side = ~side  # entering from outside flips which plane was struck
    hit_max_side = np.where(take, side, hit_max_side)

    for a in (0, 1, 2):
        for s in ("min", "max"):
            face = take & (hit_axis == a) & (hit_max_side == (s == "max"))
            if face.any():
                best_label[face] = _face_label(a, s, scene)

    for patch in scene.patches:
        face = (
            take
            & (hit_axis == patch.axis)
            & (hit_max_side == (patch.side == "max"))
        )
        if not face.any():
            continue
        point = origin + best_t[..., None] * dirs
        others = [a for a in (0, 1, 2) if a != patch.axis]
        in_rect = (
            (point[..., others[0]] >= patch.lo[0]) & (point[..., others[0]] <= patch.hi[0])
            & (point[..., others[1]] >= patch.lo[1]) & (point[..., others[1]] <= patch.hi[1])
        )
        best_label[face & in_rect] = patch.label

    for box in scene.boxes:
        t_enter, t_exit, _, _ = _slab_intervals(origin, dirs, box.min_corner, box.max_corner)
        hit = (t_enter <= t_exit) & (t_enter > 1e-12) & (t_enter < best_t)
        best_t = np.where(hit, t_enter, best_t)
        best_label[hit] = box.label

    depth = np.where(np.isfinite(best_t), best_t, np.nan)
    return DepthMap(depth), best_label


def oracle_occupancy(scene: SyntheticScene, spec: GridSpec) -> OccupancyGrid:
    """Exact voxelization: each voxel takes the label of the solid containing
    its center. Boxes override the shell, later boxes override earlier ones,
    and floor/ceiling take precedence over walls at shell corners."""
    centers = spec.voxel_centers()
    labels = np.zeros(centers.shape[0], dtype=np.uint8)

    in_outer = np.all(centers >= scene.outer_min, axis=1) & np.all(
        centers <= scene.outer_max, axis=1
    )
    in_interior = np.all(centers > 0, axis=1) & np.all(centers < scene.extent, axis=1)
    shell = in_outer & ~in_interior
    labels[shell] = scene.wall_label
    labels[shell & (centers[:, 2] >= scene.extent[2])] = scene.ceiling_label
    labels[shell & (centers[:, 2] <= 0)] = scene.floor_label

    for patch in scene.patches:
        a = patch.axis
        if patch.side == "max":
            in_slab = (centers[:, a] >= scene.extent[a]) & (
                centers[:, a] <= scene.extent[a] + scene.shell_thickness
            )
        else:
            in_slab = (centers[:, a] >= -scene.shell_thickness) & (centers[:, a] <= 0)
        others = [ax for ax in (0, 1, 2) if ax != a]
        in_rect = (
            (centers[:, others[0]] >= patch.lo[0]) & (centers[:, others[0]] <= patch.hi[0])
            & (centers[:, others[1]] >= patch.lo[1]) & (centers[:, others[1]] <= patch.hi[1])
        )
        region = shell & in_slab & in_rect & (labels == _face_label(a, patch.side, scene))
        labels[region] = patch.label

    for box in scene.boxes:
        inside = np.all(centers >= box.min_corner, axis=1) & np.all(
            centers <= box.max_corner, axis=1
        )
        labels[inside] = box.label

    labels = labels.reshape(spec.dims)
    return OccupancyGrid(spec=spec, labels=labels, scores=(labels > 0).astype(np.float64))


# Camera forward (+z) maps to world +x before yaw; world +z stays image-up.
_BASE_ROTATION = np.array([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])


def standard_pose(position, yaw_deg: float = 0.0) -> RigidTransform:
    """Upright camera pose at ``position`` looking horizontally; yaw rotates
    the view direction counterclockwise (seen from above) away from +x."""
    yaw = np.deg2rad(yaw_deg)
    rz = np.array(
        [
            [np.cos(yaw), -np.sin(yaw), 0.0],
            [np.sin(yaw), np.cos(yaw), 0.0],
            [0.0, 0.0, 1.0],
        ]
    )
    return RigidTransform(rz @ _BASE_ROTATION, np.asarray(position, dtype=np.float64))


def standard_camera(position, yaw_deg: float = 0.0, width: int = 240, height: int = 180,
                    focal: float = 260.0) -> CameraModel:
    return CameraModel(
        fx=focal, fy=focal, cx=width / 2.0, cy=height / 2.0,
        width=width, height=height, pose=standard_pose(position, yaw_deg),
    )


def frontal_grid(cam: CameraModel, dims=(60, 60, 36), voxel_size: float = 0.08,
                 num_classes: int = 12) -> GridSpec:
    """Single-view grid placed in front of an upright camera: the volume
    starts at the camera plane along its (cardinal) view direction, is
    centered laterally, and rests on z = 0."""
    forward = cam.pose.rotation @ np.array([0.0, 0.0, 1.0])
    axis = int(np.argmax(np.abs(forward[:2])))
    sign = 1.0 if forward[axis] > 0 else -1.0
    lateral = 1 - axis
    origin = np.zeros(3)
    origin[axis] = cam.position[axis] if sign > 0 else cam.position[axis] - dims[axis] * voxel_size
    origin[lateral] = cam.position[lateral] - dims[lateral] * voxel_size / 2.0
    origin[2] = 0.0
    origin = np.round(origin / voxel_size) * voxel_size
    return GridSpec(tuple(dims), voxel_size, origin, num_classes)


def scene_grid(scene: SyntheticScene, voxel_size: float = 0.08,
               num_classes: int = 12) -> GridSpec:
    """Scene-level grid covering the room plus its shell."""
    return GridSpec.for_extent(scene.outer_min, scene.outer_max, voxel_size, num_classes)


def _quantize(value, step=0.08):
    return float(np.round(value / step) * step)


def generate_frontal_room(seed: int, shell_thickness: float = 0.48,
                          num_patches=(2, 4)) -> tuple:
    """Seeded room viewed head-on: the camera looks along +x at the far wall,
    which carries a few distinctly labeled flat patches.

    Geometry is quantized to the 0.08 m voxel pitch and kept so that every
    camera ray lands on the far wall (floor, ceiling and side walls stay
    outside the view). Returns (scene, camera).
    """
    rng = np.random.default_rng(seed)
    ext_x = _quantize(rng.uniform(3.3, 4.2))
    ext_y = _quantize(rng.uniform(4.8, 5.6))
    ext_z = 2.88
    cam_pos = np.array([0.24, _quantize(ext_y / 2.0), 1.44])

    n_patches = int(rng.integers(num_patches[0], num_patches[1] + 1))
    labels = rng.choice(_PATCHABLE_LABELS, size=n_patches, replace=False)
    patches = []
    taken = []
    attempts = 0
    while len(patches) < n_patches and attempts < 200:
        attempts += 1
        width = _quantize(rng.uniform(0.8, 1.2))
        height = _quantize(rng.uniform(0.56, 0.8))
        y0 = _quantize(rng.uniform(cam_pos[1] - 1.2, cam_pos[1] + 1.2 - width))
        z0 = _quantize(rng.uniform(0.72, 2.16 - height))
        rect = (y0, z0, y0 + width, z0 + height)
        if any(
            rect[0] < other[2] and other[0] < rect[2]
            and rect[1] < other[3] and other[1] < rect[3]
            for other in taken
        ):
            continue
        taken.append(rect)
        patches.append(
            WallPatch(axis=0, side="max", lo=(rect[0], rect[1]), hi=(rect[2], rect[3]),
                      label=int(labels[len(patches)]))
        )

    scene = SyntheticScene(
        extent=np.array([ext_x, ext_y, ext_z]),
        shell_thickness=shell_thickness,
        patches=tuple(patches),
    )
    return scene, standard_camera(cam_pos)


def thick_box_room(depth: float = 1.2) -> tuple:
    """Room with one box much deeper than the sampling extent, for studying
    how interior coverage grows with the per-ray sample count.

    Returns (scene, camera, box).
    """
    extent = np.array([4.4, 4.8, 2.88])
    cam_pos = np.array([0.24, 2.4, 1.44])
    box = Box(
        min_corner=np.array([2.0, 1.6, 0.8]),
        max_corner=np.array([2.0 + depth, 3.2, 2.08]),
        label=5,
    )
    scene = SyntheticScene(extent=extent, boxes=(box,))
    return scene, standard_camera(cam_pos), box
