import math

import numpy as np
import pytest

import latcomp


@pytest.fixture(scope="module")
def seq():
    return latcomp.synthetic("corridor", frames=12, seed=3, width=160, height=90)


def test_identity_render_reproduces_frame(seq):
    image, depth, pose, _ = seq.frame(0)
    assert image.shape == (90, 160, 3) and image.dtype == np.float32
    assert depth.shape == (90, 160)
    out, holes, blended = latcomp.render(image, depth, seq.intrinsics, pose, pose)
    assert not holes.any()
    assert latcomp.psnr(out, image) >= 40.0
    assert np.all(np.isfinite(blended))


def test_future_frame_beats_stale(seq):
    image, _, _, _ = seq.frame(0)
    truth, _, future, _ = seq.frame(5)
    out, _ = latcomp.compensate(seq, 0, future)
    assert latcomp.psnr(out, truth) > latcomp.psnr(image, truth)


def test_backproject_counts_valid_pixels(seq):
    image, depth, _, _ = seq.frame(0)
    depth = depth.copy()
    depth[:10] = np.nan
    pts, cols, px = latcomp.backproject(seq.intrinsics, depth, image)
    assert pts.shape == (160 * 80, 3) and cols.shape == pts.shape
    assert px[0] == 10 * 160
    np.testing.assert_allclose(pts[:, 2], depth.reshape(-1)[px])


def test_inpaint_keeps_known_pixels():
    rng = np.random.default_rng(0)
    img = rng.random((20, 30, 3), dtype=np.float32)
    holes = rng.random((20, 30)) < 0.3
    out = latcomp.inpaint(img, holes)
    assert np.array_equal(out[~holes], img[~holes])
    assert out.min() >= 0.0 and out.max() <= 1.0


def test_metrics():
    a = np.full((8, 8, 3), 0.2, np.float32)
    b = np.full((8, 8, 3), 0.3, np.float32)
    assert latcomp.psnr(a, b) == pytest.approx(20.0, abs=1e-5)
    t = np.linspace(1, 5, 64).reshape(8, 8)
    assert latcomp.depth_metrics(1.3 * t, t)[:2] == pytest.approx((0.3, 0.0))
    assert latcomp.si_loss(4.0 * t, t, 1.0) == 0.0
    with pytest.raises(ValueError):
        latcomp.ms_ssim(a, a)


def test_kinematics():
    x, y, th = latcomp.step((0, 0, 0), 1.0, math.pi / 2, 1.0)
    assert (x, y, th) == pytest.approx((2 / math.pi, 2 / math.pi, math.pi / 2), abs=1e-12)
    pose, none = latcomp.predict((0, 0, 0), 0.0, [], 1.0)
    assert none and pose == (0, 0, 0)


def test_homography_identity():
    k = latcomp.CameraIntrinsics.centered(64, 48)
    h = latcomp.plane_homography(k, np.eye(4), np.eye(4), np.array([0, 0, 1.0]), 3.0)
    np.testing.assert_allclose(h, np.eye(3), atol=1e-12)


def test_link_and_live(seq):
    d = latcomp.emulate_link(seq.timestamps, delay=0.1, skip=2)
    assert [i for i, _, _ in d] == list(range(0, 12, 2))
    log = latcomp.simulate(seq, delay=0.1, skip=2)
    # repr so that NaN scores compare equal
    assert repr(log) == repr(latcomp.simulate(seq, delay=0.1, skip=2))
    for r in log:
        if not r["waiting"]:
            assert r["source_arrival_time"] <= r["display_time"] + 1e-12


def test_evaluate_rows(seq):
    rows = latcomp.evaluate(seq, delays=[1, 2], methods=["pointcloud", "cropscale"])
    assert len(rows) == (12 - 2) * 2 * 2
    assert {r["method"] for r in rows} == {"pointcloud", "cropscale"}


def test_errors(tmp_path):
    with pytest.raises(latcomp.DataError):
        latcomp.open_sequence(str(tmp_path / "missing"))
    with pytest.raises(ValueError):
        latcomp.synthetic("meadow")
    with pytest.raises(ValueError):
        latcomp.inpaint(np.zeros((4, 4, 3), np.float32), np.zeros((4, 5), bool))
