import numpy as np
import pytest

import occond


def test_occ_cfg_scalar_and_uniform():
    u = np.zeros((1, 2), np.float32)
    c = np.ones((1, 2), np.float32)
    m = np.array([[1.0, 0.0]], np.float32)
    out = occond.occ_cfg(u, c, m)
    assert out.tolist() == [[5.0, 3.0]]
    rng = np.random.default_rng(0)
    u = rng.standard_normal((8, 8, 4)).astype(np.float32)
    c = rng.standard_normal((8, 8, 4)).astype(np.float32)
    zero = np.zeros((8, 8), np.float32)
    assert np.array_equal(occond.occ_cfg(u, c, zero), occond.uniform_cfg(u, c, 3.0))


def test_occ_cfg_shape_mismatch():
    with pytest.raises(occond.DimensionError):
        occond.occ_cfg(np.zeros((2, 2), np.float32), np.zeros((2, 3), np.float32),
                       np.zeros((2, 2), np.float32))


def test_compose_residuals_in_order():
    base = np.zeros((2, 2, 1), np.float32)
    field = np.ones((2, 2, 1), np.float32)
    mask = np.array([[1, 0], [0, 1]], np.float32)
    out = occond.compose_residuals(base, [(field, mask, 0.8)])
    assert np.allclose(out[..., 0], [[0.8, 0.0], [0.0, 0.8]])


def test_mask_and_shapes():
    count = np.array([[0, 2, 3], [4, 1, 6]], np.uint32)
    assert occond.occlusion_mask(count).tolist() == [[0, 0, 1], [1, 0, 1]]
    a, b = [1.0, 0.0], [3.0, 0.0]
    assert occond.blend_shapes(a, b, 0.5) == [2.0, 0.0]
    assert occond.shape_distance(a, b) == pytest.approx(1.0)


def test_render_and_verify(tmp_path):
    scene = occond.fixture_scene(64, 64)
    depth, normal, count = occond.rasterize_scene(scene, threads=1)
    assert depth.shape == (64, 64) and normal.shape == (64, 64, 3)
    assert count.max() >= 4
    manifest = occond.render_bundle(scene, tmp_path / "b")
    assert set(manifest["files"]) >= {"depth.pfm", "mask.png", "edges.png"}
    assert occond.verify_bundle(tmp_path / "b") == []


def test_scene_validation_error():
    scene = occond.fixture_scene(32, 32)
    scene["humans"][0]["beta"] = [0.0]
    with pytest.raises(occond.ValidationError) as info:
        occond.rasterize_scene(scene)
    assert "humans[0].beta" in str(info.value)


def test_evaluate_self():
    human = {"betas": [1.0, 2.0], "embedding": [1.0] * 512}
    report = occond.evaluate({"version": "occond-eval/1",
                              "images": [{"id": "a", "reference": [human], "generated": [human]}]},
                             metrics=["face", "body"])
    assert report["summary"]["s_face"] == 1.0
    assert report["summary"]["s_body"] == 1.0
