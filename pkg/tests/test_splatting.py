"""Splatting: neighbor culling, superposition semantics, oracle equivalence."""

import numpy as np
import pytest

import splatocc as so
from splatocc.camera import CameraModel, RigidTransform

from oracles import dense_evaluate, naive_splat, random_gaussian_set


def small_spec(nc=4):
    return so.GridSpec((16, 16, 16), 0.1, np.zeros(3), nc)


def single(mean, scale, opacity, logits, nc=4):
    vec = np.zeros(nc)
    for idx, val in logits.items():
        vec[idx] = val
    return so.GaussianSet(
        means=[mean], scales=[[scale] * 3], rotations=[[1, 0, 0, 0]],
        opacities=[opacity], logits=[vec], frame="world",
    )


class TestNeighborCull:
    def test_isotropic_box_span(self):
        spec = so.GridSpec((60, 60, 36), 0.08, np.zeros(3), 4)
        center = spec.origin + (np.array([30, 30, 18]) + 0.5) * spec.voxel_size
        g = so.GaussianPrimitive(center, [0.08] * 3, [1, 0, 0, 0], 0.5, np.zeros(4))
        lo, hi = so.neighbor_cull(g, spec)
        np.testing.assert_array_equal(hi - lo, [7, 7, 7])
        np.testing.assert_array_equal(lo, [27, 27, 15])

    def test_far_outside_grid_is_empty(self):
        spec = so.GridSpec((60, 60, 36), 0.08, np.zeros(3), 4)
        g = so.GaussianPrimitive([14.8, 0.4, 0.4], [0.1] * 3, [1, 0, 0, 0], 0.5, np.zeros(4))
        lo, hi = so.neighbor_cull(g, spec)
        assert np.all(hi <= lo)

    def test_box_covers_significant_contributions(self):
        rng = np.random.default_rng(8)
        spec = small_spec()
        centers = spec.voxel_centers()
        for _ in range(30):
            g = so.GaussianPrimitive(
                rng.uniform(-0.2, 1.8, 3), rng.uniform(0.02, 0.3, 3),
                rng.normal(size=4), 1.0, np.zeros(4),
            )
            lo, hi = so.neighbor_cull(g, spec)
            values = dense_evaluate(g.mean, g.scale, g.rotation, centers)
            hot = centers[values >= np.exp(-4.5)]
            if hot.size == 0:
                continue
            idx = np.floor((hot - spec.origin) / spec.voxel_size).astype(int)
            assert np.all(idx >= lo) and np.all(idx < hi)


class TestClassifyVoxel:
    def test_zero_score_is_empty(self):
        assert so.classify_voxel(0.0, np.ones(4)) == 0

    def test_one_hot_mass(self):
        masses = np.zeros(8)
        masses[5] = 1.0
        assert so.classify_voxel(0.9, masses) == 5

    def test_tie_breaks_to_lowest_class(self):
        masses = np.zeros(8)
        masses[3] = masses[7] = 2.5
        assert so.classify_voxel(0.9, masses) == 3

    def test_negative_mass_rejected(self):
        with pytest.raises(ValueError):
            so.classify_voxel(0.5, np.array([0.0, -1.0, 0.0]))


class TestSplat:
    def test_empty_set_all_empty(self):
        grid = so.splat(so.GaussianSet.empty(4, frame="world"), small_spec())
        assert grid.labels.sum() == 0
        assert grid.scores.sum() == 0.0

    def test_single_gaussian_on_voxel_center(self):
        spec = small_spec()
        center = spec.origin + (np.array([8, 8, 8]) + 0.5) * spec.voxel_size
        grid = so.splat(single(center, 0.05, 0.9, {2: 5.0}), spec)
        assert grid.scores[8, 8, 8] == pytest.approx(0.9, abs=1e-12)
        assert grid.labels[8, 8, 8] == 2

    def test_camera_frame_rejected(self):
        gset = so.GaussianSet.empty(4, frame="camera")
        with pytest.raises(ValueError, match="world"):
            so.splat(gset, small_spec())

    def test_class_count_mismatch_rejected(self):
        gset = so.GaussianSet.empty(6, frame="world")
        with pytest.raises(ValueError, match="class count"):
            so.splat(gset, small_spec(nc=4))

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(9)
        spec = small_spec(nc=5)
        for n in (3, 40, 200):
            gset = random_gaussian_set(rng, n, 5)
            grid = so.splat(gset, spec, keep_masses=True)
            scores, labels, masses = naive_splat(gset, spec)
            assert np.abs(grid.scores.ravel() - scores).max() <= 1e-6
            np.testing.assert_array_equal(grid.labels.ravel(), labels)
            assert np.abs(grid.masses.reshape(-1, 5) - masses).max() <= 1e-6

    def test_adding_gaussian_never_decreases_scores(self):
        rng = np.random.default_rng(10)
        spec = small_spec()
        gset = random_gaussian_set(rng, 30, 4)
        extra = random_gaussian_set(rng, 31, 4)
        base = so.splat(gset, spec)
        grown = so.splat(extra.subset(range(31)), spec)
        sub = so.splat(extra.subset(range(30)), spec)
        assert np.all(grown.scores - sub.scores >= -1e-12)
        assert np.all(base.scores >= 0.0) and np.all(base.scores <= 1.0)

    def test_scores_bounded_with_heavy_overlap(self):
        n = 500
        gset = so.GaussianSet(
            means=np.full((n, 3), 0.8), scales=np.full((n, 3), 0.2),
            rotations=np.tile([1.0, 0, 0, 0], (n, 1)), opacities=np.full(n, 1.0),
            logits=np.zeros((n, 4)), frame="world",
        )
        grid = so.splat(gset, small_spec())
        assert np.all(grid.scores <= 1.0) and np.all(grid.scores >= 0.0)

    def test_permutation_stability(self):
        rng = np.random.default_rng(11)
        spec = small_spec()
        gset = random_gaussian_set(rng, 120, 4)
        perm = rng.permutation(120)
        a = so.splat(gset, spec)
        b = so.splat(gset.subset(perm), spec)
        assert np.abs(a.scores - b.scores).max() <= 1e-9
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_rigid_consistency_quarter_turn(self):
        # Rotate the set and the grid together by 90 degrees about z plus a
        # voxel-multiple translation; per-voxel scores must be preserved.
        rng = np.random.default_rng(12)
        spec = so.GridSpec((10, 14, 8), 0.1, np.array([0.2, -0.3, 0.1]), 4)
        gset = random_gaussian_set(rng, 60, 4, span=1.2)
        rot = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        shift = np.array([0.5, -0.2, 0.3])
        pose = RigidTransform(rot, shift)
        cam = CameraModel(fx=1, fy=1, cx=0, cy=0, width=1, height=1, pose=pose)
        moved = so.to_world(cam, so.GaussianSet(
            gset.means, gset.scales, gset.rotations, gset.opacities, gset.logits,
            frame="camera",
        ))

        corners = spec.origin + np.array(
            [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0], [1, 0, 1],
             [0, 1, 1], [1, 1, 1]]
        ) * spec.extent
        moved_corners = pose.apply(corners)
        new_origin = moved_corners.min(axis=0)
        new_spec = so.GridSpec((14, 10, 8), 0.1, new_origin, 4)

        base = so.splat(gset.subset(slice(None)), spec)
        turned = so.splat(moved, new_spec)

        centers = spec.voxel_centers()
        mapped = pose.apply(centers)
        idx = np.floor((mapped - new_spec.origin) / new_spec.voxel_size).astype(int)
        flat = idx[:, 0] * (new_spec.dims[1] * new_spec.dims[2]) + idx[:, 1] * new_spec.dims[2] + idx[:, 2]
        assert np.abs(base.scores.ravel() - turned.scores.ravel()[flat]).max() <= 1e-6

    def test_scene_scale_grid_from_extent(self):
        spec = so.GridSpec.for_extent([-0.5, 0.0, 0.0], [3.7, 4.0, 2.9], voxel_size=0.08)
        assert spec.dims == (53, 50, 37)
        np.testing.assert_allclose(spec.origin, [-0.5, 0.0, 0.0])

    def test_monocular_default_geometry(self):
        spec = so.GridSpec.monocular()
        assert spec.dims == (60, 60, 36)
        assert spec.voxel_size == 0.08
        np.testing.assert_allclose(spec.extent, [4.8, 4.8, 2.88])
        assert spec.num_classes == 12
