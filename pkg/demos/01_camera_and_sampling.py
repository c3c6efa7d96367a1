"""
Camera rays and volumetric sampling
===================================

A depth map tells you where visible surfaces are; occupancy needs the space
behind them too. This walk-through builds camera rays, backprojects a depth
value, and then extends it into a train of interior sample points.
"""

import numpy as np

import splatocc as so

# A pinhole camera: focal lengths and principal point in pixels. The camera
# looks along +z of its own frame; u runs along width, v along height.
cam = so.CameraModel(fx=260.0, fy=260.0, cx=120.0, cy=90.0, width=240, height=180)

print("ray through the principal point:", so.ray_direction(cam, (120, 90)))
print("ray through the image corner:  ", so.ray_direction(cam, (0, 0)))

# Depth here means metric distance along the normalized ray, not z-depth.
# backproject() puts a point at that distance; project() inverts it.
point = so.backproject(cam, (30, 160), 2.5)
u, v, d = so.project(cam, point)
print(f"\nbackproject(30, 160, d=2.5) -> {np.round(point, 4)}")
print(f"project back                 -> u={u:.6f} v={v:.6f} d={d:.6f}")

# If your source encodes z-depth instead, convert it first:
d_ray = so.z_depth_to_ray_distance(cam, (30, 160), 2.5)
print(f"z-depth 2.5 at that pixel is ray distance {d_ray:.6f}")

# Now the interesting part. Take a tiny synthetic depth map and sample K
# points per ray: the first sample sits exactly on the surface, the rest
# step uniformly up to `scale` meters into the interior.
depth = so.DepthMap(np.full((4, 4), 3.0))
small_cam = so.CameraModel(fx=40.0, fy=40.0, cx=2.0, cy=2.0, width=4, height=4)
cfg = so.SamplingConfig(k=4, scale=0.48, stride=1)

print("\ninward offsets:", so.sample_offsets(cfg))

batch = so.volumetric_sample(depth, small_cam, cfg)
print(f"{len(batch)} samples from {depth.width}x{depth.height} pixels "
      f"({batch.num_invalid} invalid)")

# Samples for one pixel are collinear with its ray and march strictly
# outward; distances are exactly depth + offset.
first_ray = batch.positions[:4]
print("one ray's samples:\n", np.round(first_ray, 4))
print("distances:", np.round(np.linalg.norm(first_ray, axis=1), 4))

# Invalid pixels (NaN or non-positive) are skipped, not an error.
holes = np.full((4, 4), 3.0)
holes[1, 1] = np.nan
holes[2, 3] = -1.0
batch = so.volumetric_sample(so.DepthMap(holes), small_cam, cfg)
print(f"\nwith two bad pixels: {len(batch)} samples, {batch.num_invalid} skipped")
