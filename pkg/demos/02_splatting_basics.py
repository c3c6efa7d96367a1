"""
Gaussian kernels and probabilistic splatting
============================================

Sample points become anisotropic Gaussians, and Gaussians become occupancy
by evaluating every kernel at nearby voxel centers. The score at a voxel is
1 - prod(1 - opacity * kernel): bounded, monotone, and zero far from all
kernels, so empty space stays empty by construction.
"""

import numpy as np

import splatocc as so

# One anisotropic Gaussian: per-axis scales, quaternion orientation (w first),
# an opacity, and class logits (class 0 is reserved for "empty").
g = so.GaussianPrimitive(
    mean=[0.8, 0.8, 0.4],
    scale=[0.2, 0.08, 0.08],
    rotation=[1.0, 0.0, 0.0, 0.0],
    opacity=0.9,
    logits=[0, 0, 0, 0, 0, 6.0],
)
print("kernel at its own mean:     ", so.evaluate(g, g.mean))
print("kernel one sigma away in x: ", so.evaluate(g, g.mean + [0.2, 0, 0]))
print("same Mahalanobis step in y: ", so.evaluate(g, g.mean + [0, 0.08, 0]))
print("covariance eigenvalues:     ", np.sort(np.linalg.eigvalsh(so.covariance(g))))

# Splat a single kernel into a small grid and look at a horizontal slice.
spec = so.GridSpec((16, 16, 8), 0.1, np.zeros(3), num_classes=6)
gset = so.GaussianSet.from_primitives([g], frame="world")
grid = so.splat(gset, spec)

iz = 4
print(f"\noccupancy scores, slice z={iz} (tenths, '.' = 0):")
for row in grid.scores[:, :, iz].T[::-1]:
    print("  " + "".join("." if s < 0.05 else str(min(9, int(s * 10))) for s in row))

# Culling: the kernel only touches voxels inside its support box.
lo, hi = so.neighbor_cull(g, spec)
print(f"\nsupport box spans voxels {lo} .. {hi} (half-open)")

# Superposition is monotone: adding a second kernel never lowers any score.
g2 = so.GaussianPrimitive([0.5, 0.8, 0.4], [0.1] * 3, [1, 0, 0, 0], 0.7,
                          [0, 0, 6.0, 0, 0, 0])
both = so.splat(so.GaussianSet.from_primitives([g, g2], frame="world"), spec)
print("monotone superposition:", bool(np.all(both.scores >= grid.scores - 1e-12)))
print("max score with overlap:", both.scores.max(), "(never exceeds 1)")

# Opacity pruning drops faint kernels before splatting.
faint = so.GaussianPrimitive([1.2, 1.2, 0.4], [0.1] * 3, [1, 0, 0, 0], 0.005,
                             [0, 6.0, 0, 0, 0, 0])
trio = so.GaussianSet.from_primitives([g, g2, faint], frame="world")
kept = so.prune(trio, tau=0.01)
print(f"\npruning at tau=0.01 keeps {len(kept)} of {len(trio)} kernels")
