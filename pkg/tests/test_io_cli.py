"""File formats (bit-identical round trips) and the command-line interface."""

import numpy as np
import pytest

import splatocc as so
from splatocc import io
from splatocc.cli import main
from splatocc.scenes import Box, SyntheticScene, WallPatch

from oracles import random_gaussian_set


def file_bytes(path):
    return path.read_bytes()


class TestDepthMapFormat:
    def test_roundtrip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(35)
        values = rng.uniform(0.1, 9.0, (13, 17))
        values[2, 3] = np.nan
        first = tmp_path / "a.dmap"
        second = tmp_path / "b.dmap"
        io.save_depth_map(first, so.DepthMap(values))
        loaded = io.load_depth_map(first)
        io.save_depth_map(second, loaded)
        assert file_bytes(first) == file_bytes(second)
        assert loaded.width == 17 and loaded.height == 13
        assert np.isnan(loaded.values[2, 3])

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.dmap"
        path.write_bytes(b"WRONG" + b"\x00" * 32)
        with pytest.raises(ValueError, match="magic"):
            io.load_depth_map(path)

    def test_truncated_rejected(self, tmp_path):
        path = tmp_path / "short.dmap"
        io.save_depth_map(path, so.DepthMap(np.ones((4, 4))))
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ValueError, match="truncated"):
            io.load_depth_map(path)


class TestClassMapFormat:
    def test_roundtrip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(36)
        classes = rng.integers(0, 12, (9, 11)).astype(np.uint8)
        first = tmp_path / "a.cmap"
        second = tmp_path / "b.cmap"
        io.save_class_map(first, classes)
        loaded = io.load_class_map(first)
        io.save_class_map(second, loaded)
        assert file_bytes(first) == file_bytes(second)
        np.testing.assert_array_equal(loaded, classes)


class TestGaussianSetFormat:
    def test_roundtrip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(37)
        gset = random_gaussian_set(rng, 50, 12)
        first = tmp_path / "a.gset"
        second = tmp_path / "b.gset"
        io.save_gaussians(first, gset)
        loaded = io.load_gaussians(first)
        io.save_gaussians(second, loaded)
        assert file_bytes(first) == file_bytes(second)
        assert loaded.frame == "world"
        assert loaded.num_classes == 12 and len(loaded) == 50

    def test_empty_set_roundtrip(self, tmp_path):
        path = tmp_path / "empty.gset"
        io.save_gaussians(path, so.GaussianSet.empty(12, frame="world"))
        loaded = io.load_gaussians(path)
        assert len(loaded) == 0 and loaded.num_classes == 12

    def test_frame_parameter(self, tmp_path):
        rng = np.random.default_rng(38)
        path = tmp_path / "cam.gset"
        io.save_gaussians(path, random_gaussian_set(rng, 3, 4, frame="camera"))
        assert io.load_gaussians(path, frame="camera").frame == "camera"


class TestGridFormat:
    def test_roundtrip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(39)
        spec = so.GridSpec((7, 6, 5), 0.08, np.array([0.4, -0.8, 0.0]), 12)
        labels = rng.integers(0, 12, spec.dims).astype(np.uint8)
        scores = rng.uniform(0, 1, spec.dims)
        scores[labels == 0] = 0.0
        grid = so.OccupancyGrid(spec=spec, labels=labels, scores=scores)
        first = tmp_path / "a.ogrid"
        second = tmp_path / "b.ogrid"
        io.save_grid(first, grid)
        loaded = io.load_grid(first)
        io.save_grid(second, loaded)
        assert file_bytes(first) == file_bytes(second)
        np.testing.assert_array_equal(loaded.labels, labels)
        assert loaded.spec.dims == (7, 6, 5)
        assert loaded.spec.num_classes == 12


class TestSceneFormat:
    def test_roundtrip(self, tmp_path):
        scene = SyntheticScene(
            extent=np.array([4.0, 4.8, 2.88]),
            shell_thickness=0.4,
            boxes=(Box(np.array([1.0, 1.0, 0.0]), np.array([2.0, 2.0, 1.0]), 7),),
            patches=(WallPatch(axis=0, side="max", lo=(1.0, 1.0), hi=(2.0, 2.0), label=4),),
        )
        path = tmp_path / "scene.json"
        io.save_scene(path, scene)
        loaded = io.load_scene(path)
        np.testing.assert_array_equal(loaded.extent, scene.extent)
        assert loaded.shell_thickness == scene.shell_thickness
        assert loaded.boxes[0].label == 7
        assert loaded.patches[0].hi == (2.0, 2.0)


class TestConfigFormat:
    def test_parse_and_comments(self):
        text = "# settings\nk = 8\nscale = 0.4  # meters\n\ntau=0.02\n"
        mapping = io.parse_config(text)
        assert mapping == {"k": "8", "scale": "0.4", "tau": "0.02"}

    def test_malformed_line_rejected(self):
        with pytest.raises(ValueError, match="line 2"):
            io.parse_config("k = 8\nnot a pair\n")

    def test_pipeline_config_mapping_roundtrip(self):
        from splatocc.pipeline import config_from_mapping, config_to_mapping

        cfg = so.PipelineConfig(
            sampling=so.SamplingConfig(k=8, scale=0.3, stride=2),
            attributes=so.AttributeConfig(num_classes=10, opacity_decay=0.0),
            fusion=so.FusionConfig(epsilon=0.1, gamma=0.25),
            tau=0.02, theta_occ=0.6, near=0.05, far=8.0,
        )
        text = io.format_config(config_to_mapping(cfg))
        assert config_from_mapping(io.parse_config(text)) == cfg


class TestCli:
    def test_full_synthetic_workflow(self, tmp_path, capsys):
        scene_path = tmp_path / "scene.json"
        assert main(["gen-scene", "--seed", "1", "--out", str(scene_path)]) == 0
        out = capsys.readouterr().out
        assert "extent = " in out

        depth_path = tmp_path / "d.dmap"
        cmap_path = tmp_path / "c.cmap"
        scene = io.load_scene(scene_path)
        cam_pos = f"0.24,{scene.extent[1] / 2:.4f},1.44"
        assert main([
            "render", "--scene", str(scene_path), "--pose", cam_pos,
            "--out", str(depth_path), "--classes-out", str(cmap_path),
        ]) == 0

        gset_path = tmp_path / "g.gset"
        assert main([
            "sample", "--depth", str(depth_path), "--classes", str(cmap_path),
            "--pose", cam_pos, "--out", str(gset_path), "--k", "8", "--stride", "8",
        ]) == 0
        counted = io.load_gaussians(gset_path)
        assert len(counted) > 0

        pruned_path = tmp_path / "p.gset"
        assert main([
            "prune", "--gaussians", str(gset_path), "--tau", "0.01",
            "--out", str(pruned_path),
        ]) == 0

        grid_path = tmp_path / "o.ogrid"
        cam = so.standard_camera([0.24, scene.extent[1] / 2, 1.44])
        grid_spec = so.frontal_grid(cam)
        origin = ",".join(str(v) for v in grid_spec.origin)
        assert main([
            "splat", "--gaussians", str(pruned_path), "--out", str(grid_path),
            "--grid-dims", "60,60,36", "--voxel-size", "0.08",
            "--grid-origin", origin, "--theta-occ", "0.6",
        ]) == 0

        capsys.readouterr()
        assert main([
            "eval", "--pred", str(grid_path), "--gt-scene", str(scene_path),
            "--pose", cam_pos,
        ]) == 0
        out = capsys.readouterr().out
        assert "iou = " in out and "miou = " in out

    def test_stream_command(self, tmp_path, capsys):
        scene_path = tmp_path / "scene.json"
        scene = SyntheticScene(extent=np.array([4.0, 4.8, 2.88]), shell_thickness=0.48)
        io.save_scene(scene_path, scene)
        poses = tmp_path / "poses.txt"
        poses.write_text("0.3 2.4 1.44 0\n3.7 2.4 1.44 180\n")
        out_grid = tmp_path / "scene.ogrid"
        out_bank = tmp_path / "bank.gset"
        assert main([
            "stream", "--scene", str(scene_path), "--poses", str(poses),
            "--out-grid", str(out_grid), "--out-bank", str(out_bank),
            "--k", "4", "--stride", "8",
        ]) == 0
        out = capsys.readouterr().out
        assert "frame_0_inserted" in out and "bank_size" in out
        assert io.load_grid(out_grid).spec.num_classes == 12
        assert len(io.load_gaussians(out_bank)) > 0

    def test_bench_index_small(self, capsys):
        assert main(["bench-index", "--count", "2000", "--queries", "100"]) == 0
        out = capsys.readouterr().out
        assert "speedup = " in out and "fuse_seconds = " in out

    def test_error_exit_code(self, tmp_path, capsys):
        missing = tmp_path / "nope.dmap"
        code = main(["sample", "--depth", str(missing), "--classes", str(missing),
                     "--out", str(tmp_path / "x.gset")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_config_file_drives_pipeline(self, tmp_path):
        cfg_path = tmp_path / "run.cfg"
        cfg_path.write_text("k = 2\nscale = 0.3\nstride = 8\n")
        scene_path = tmp_path / "scene.json"
        io.save_scene(scene_path, SyntheticScene(extent=np.array([4.0, 4.8, 2.88])))
        depth_path = tmp_path / "d.dmap"
        cmap_path = tmp_path / "c.cmap"
        main(["render", "--scene", str(scene_path), "--pose", "0.3,2.4,1.44",
              "--out", str(depth_path), "--classes-out", str(cmap_path)])
        gset_path = tmp_path / "g.gset"
        assert main([
            "sample", "--config", str(cfg_path), "--depth", str(depth_path),
            "--classes", str(cmap_path), "--out", str(gset_path),
        ]) == 0
        n_pixels = len(range(0, 240, 8)) * len(range(0, 180, 8))
        assert len(io.load_gaussians(gset_path)) == n_pixels * 2
