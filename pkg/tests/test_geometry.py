import math

import numpy as np
import pytest

from beamlab.geometry import (
    Box,
    Orientation,
    Scene,
    angles_from_direction,
    direction_from_angles,
    global_to_local_angles,
    living_room_scene,
    rotation_matrix,
    sample_rx_pose,
)

CHI2_CRIT_9DF_P01 = 21.666  # chi-square critical value, 9 dof, p = 0.01


def test_zero_rotation_is_identity():
    r = rotation_matrix(Orientation(0.0, 0.0, 0.0))
    np.testing.assert_allclose(r, np.eye(3), atol=1e-15)


def test_quarter_turn_about_z():
    r = rotation_matrix(Orientation(math.pi / 2))
    np.testing.assert_allclose(r @ np.array([1.0, 0.0, 0.0]),
                               np.array([0.0, 1.0, 0.0]), atol=1e-12)


def test_rotation_matches_elementary_composition():
    alpha, beta, gamma = math.pi / 3, math.pi / 8, -math.pi / 8
    ca, sa = math.cos(alpha), math.sin(alpha)
    cb, sb = math.cos(beta), math.sin(beta)
    cg, sg = math.cos(gamma), math.sin(gamma)
    rz = np.array([[ca, -sa, 0], [sa, ca, 0], [0, 0, 1.0]])
    ry = np.array([[cb, 0, sb], [0, 1.0, 0], [-sb, 0, cb]])
    rx = np.array([[1.0, 0, 0], [0, cg, -sg], [0, sg, cg]])
    expected = rz @ ry @ rx
    np.testing.assert_allclose(rotation_matrix(Orientation(alpha, beta, gamma)),
                               expected, atol=1e-14)


def test_rotation_orthonormal_with_unit_determinant():
    rng = np.random.default_rng(7)
    for _ in range(200):
        o = Orientation(rng.uniform(0, 2 * math.pi),
                        rng.uniform(-math.pi / 4, math.pi / 4),
                        rng.uniform(-math.pi / 4, math.pi / 4))
        r = rotation_matrix(o)
        np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
        assert abs(np.linalg.det(r) - 1.0) < 1e-12


def test_orientation_range_validation():
    with pytest.raises(ValueError):
        Orientation(-0.1)
    with pytest.raises(ValueError):
        Orientation(0.0, beta=math.pi / 2)
    with pytest.raises(ValueError):
        Orientation(0.0, gamma=-math.pi)


def test_local_angles_of_x_axis_unrotated():
    phi, theta = global_to_local_angles(np.array([1.0, 0.0, 0.0]), Orientation(0.0))
    assert phi == pytest.approx(0.0, abs=1e-12)
    assert theta == pytest.approx(math.pi / 2, abs=1e-12)


def test_z_axis_invariant_under_z_rotation():
    for alpha in (0.0, 1.0, 3.0, 6.0):
        _, theta = global_to_local_angles(np.array([0.0, 0.0, 1.0]), Orientation(alpha))
        assert theta == pytest.approx(0.0, abs=1e-12)


def test_local_angles_after_quarter_turn():
    # A target along +y seen by an array rotated to face +y lies on its local x-axis.
    phi, theta = global_to_local_angles(np.array([0.0, 1.0, 0.0]),
                                        Orientation(math.pi / 2))
    assert phi == pytest.approx(0.0, abs=1e-12)
    assert theta == pytest.approx(math.pi / 2, abs=1e-12)


def test_angle_roundtrip_recovers_direction():
    rng = np.random.default_rng(3)
    for _ in range(300):
        v = rng.standard_normal(3)
        v /= np.linalg.norm(v)
        o = Orientation(rng.uniform(0, 2 * math.pi),
                        rng.uniform(-math.pi / 4, math.pi / 4),
                        rng.uniform(-math.pi / 4, math.pi / 4))
        phi, theta = global_to_local_angles(v, o)
        assert 0.0 <= phi < 2 * math.pi
        assert 0.0 <= theta <= math.pi
        back = rotation_matrix(o) @ direction_from_angles(phi, theta)
        np.testing.assert_allclose(back, v, atol=1e-9)


def test_angles_from_direction_matches_inverse():
    rng = np.random.default_rng(5)
    for _ in range(100):
        v = rng.standard_normal(3)
        v /= np.linalg.norm(v)
        phi, theta = angles_from_direction(v)
        np.testing.assert_allclose(direction_from_angles(phi, theta), v, atol=1e-12)


def test_zero_direction_rejected():
    with pytest.raises(ValueError):
        global_to_local_angles(np.zeros(3), Orientation(0.0))
    with pytest.raises(ValueError):
        global_to_local_angles(np.array([0.5, 0.0, 0.0]), Orientation(0.0))


def _point_scene():
    return Scene(
        room=Box(lo=(-1.0, -1.0, -1.0), hi=(7.0, 1.0, 1.0)),
        tx_position=(0.0, 0.0, 0.0),
        tx_orientation=Orientation(0.0),
        rx_region=Box(lo=(3.0, 0.0, 0.0), hi=(3.0, 0.0, 0.0)),
    )


def test_point_region_sampling():
    loc, ori = sample_rx_pose(_point_scene(), rng_seed=123)
    np.testing.assert_allclose(loc, [3.0, 0.0, 0.0])
    assert ori.beta == 0.0 and ori.gamma == 0.0


def test_pose_sampling_deterministic():
    scene = living_room_scene()
    assert repr(sample_rx_pose(scene, 99)) == repr(sample_rx_pose(scene, 99))
    loc_a, _ = sample_rx_pose(scene, 99)
    loc_b, _ = sample_rx_pose(scene, 100)
    assert not np.allclose(loc_a, loc_b)


def test_pose_sampling_statistics():
    scene = living_room_scene()
    n = 10_000
    locs = np.empty((n, 3))
    alphas = np.empty(n)
    for i in range(n):
        loc, ori = sample_rx_pose(scene, i)
        locs[i] = loc
        alphas[i] = ori.alpha
    assert locs[:, 0].min() >= 1.5 and locs[:, 0].max() <= 5.5
    assert locs[:, 1].min() >= -3.5 and locs[:, 1].max() <= 3.5
    assert np.all(locs[:, 2] == 0.0)
    # Spread should nearly fill the region.
    assert locs[:, 0].max() - locs[:, 0].min() > 3.8
    counts, _ = np.histogram(alphas, bins=10, range=(0.0, 2 * math.pi))
    expected = n / 10
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    assert chi2 < CHI2_CRIT_9DF_P01


def test_sampled_positions_avoid_obstacles():
    scene = living_room_scene(planar_rx=True)
    for i in range(2000):
        loc, ori = sample_rx_pose(scene, i)
        assert scene.rx_region.contains_point(loc)
        for box in scene.obstacles:
            assert not box.contains_point(loc, strict=True)
        assert -math.pi / 4 <= ori.beta < math.pi / 4
        assert -math.pi / 4 <= ori.gamma < math.pi / 4


def test_scene_validation():
    room = Box(lo=(0.0, 0.0, 0.0), hi=(5.0, 5.0, 3.0))
    with pytest.raises(ValueError):
        Scene(room=room, tx_position=(9.0, 1.0, 1.0), tx_orientation=Orientation(0.0),
              rx_region=Box(lo=(1, 1, 1), hi=(2, 2, 2)))
    with pytest.raises(ValueError):
        Scene(room=room, tx_position=(1.0, 1.0, 1.0), tx_orientation=Orientation(0.0),
              rx_region=Box(lo=(1, 1, 1), hi=(9, 2, 2)))
    with pytest.raises(ValueError):
        Scene(room=room, tx_position=(1.0, 1.0, 1.0), tx_orientation=Orientation(0.0),
              rx_region=Box(lo=(1, 1, 1), hi=(2, 2, 2)),
              obstacles=(Box(lo=(4, 4, 0), hi=(6, 5, 1)),))


def test_scene_fingerprint_stability():
    a = living_room_scene()
    b = living_room_scene()
    assert a.fingerprint() == b.fingerprint()
    assert living_room_scene(planar_rx=True).fingerprint() != a.fingerprint()
