import math

import numpy as np
import pytest

from beamlab.channel import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    PathComponent,
    array_response,
    channel_matrix,
    path_gain,
    trace_paths,
)
from beamlab.geometry import Box, Orientation, Scene

CARRIER = 60e9
WAVELENGTH = SPEED_OF_LIGHT / CARRIER


def _empty_room(obstacles=()):
    return Scene(
        room=Box(lo=(-1.0, -3.5, -1.0), hi=(5.0, 3.5, 1.0)),
        tx_position=(0.0, 0.0, 0.0),
        tx_orientation=Orientation(0.0),
        rx_region=Box(lo=(1.0, -3.0, 0.0), hi=(4.5, 3.0, 0.0)),
        obstacles=obstacles,
    )


def test_los_only_path():
    scene = _empty_room()
    rx = np.array([4.0, 0.0, 0.0])
    paths = trace_paths(scene, rx, Orientation(0.0), max_order=0, carrier_hz=CARRIER)
    assert len(paths) == 1
    p = paths[0]
    assert p.order == 0
    assert p.length == pytest.approx(4.0, abs=1e-12)
    # Departure toward +x in an unrotated frame.
    assert p.aod[0] == pytest.approx(0.0, abs=1e-12)
    assert p.aod[1] == pytest.approx(math.pi / 2, abs=1e-12)
    # Arrival direction points back toward the TX.
    assert p.aoa[0] == pytest.approx(math.pi, abs=1e-12)


def test_single_wall_reflection_geometry():
    # Mirror of the TX across the wall y = 3.5 sits at (0, 7, 0); the
    # reflected path to an RX at (4, 0, 0) unfolds to sqrt(16 + 49).
    scene = _empty_room()
    rx = np.array([4.0, 0.0, 0.0])
    paths = trace_paths(scene, rx, Orientation(0.0), max_order=1, carrier_hz=CARRIER)
    lengths = sorted(p.length for p in paths if p.order == 1)
    expected = math.sqrt(16.0 + 49.0)
    assert any(abs(l - expected) < 1e-9 for l in lengths)
    # The mirrored path meets the wall halfway in x at y = 3.5.
    assert len(paths) >= 3  # LOS plus several wall bounces


def test_blocked_los_removed():
    blocker = Box(lo=(1.5, -0.5, -0.5), hi=(2.5, 0.5, 0.5), name="slab")
    scene = _empty_room(obstacles=(blocker,))
    rx = np.array([4.0, 0.0, 0.0])
    paths = trace_paths(scene, rx, Orientation(0.0), max_order=2, carrier_hz=CARRIER)
    assert all(p.order != 0 for p in paths)
    # The same pose with no blocker has a LOS path.
    paths_free = trace_paths(_empty_room(), rx, Orientation(0.0), max_order=2,
                             carrier_hz=CARRIER)
    assert any(p.order == 0 for p in paths_free)


def test_rx_outside_room_rejected():
    scene = _empty_room()
    with pytest.raises(ValueError):
        trace_paths(scene, np.array([40.0, 0.0, 0.0]), Orientation(0.0),
                    carrier_hz=CARRIER)


def test_trace_deterministic_and_sorted():
    scene = _empty_room()
    rx = np.array([3.1, 1.2, 0.0])
    a = trace_paths(scene, rx, Orientation(1.0), carrier_hz=CARRIER)
    b = trace_paths(scene, rx, Orientation(1.0), carrier_hz=CARRIER)
    assert a == b
    gains = [p.rho for p in a]
    assert gains == sorted(gains, reverse=True)


def test_max_paths_truncation():
    scene = _empty_room()
    rx = np.array([3.1, 1.2, 0.0])
    short = trace_paths(scene, rx, Orientation(0.0), max_paths=3, carrier_hz=CARRIER)
    full = trace_paths(scene, rx, Orientation(0.0), max_paths=50, carrier_hz=CARRIER)
    assert len(short) == 3
    assert short == full[:3]


def test_path_gain_reference_distance():
    rho, _ = path_gain(WAVELENGTH / (4.0 * math.pi), order=0, carrier_hz=CARRIER)
    assert rho == pytest.approx(1.0, rel=1e-12)


def test_path_gain_inverse_square():
    rho_1, _ = path_gain(2.0, order=0, carrier_hz=CARRIER)
    rho_2, _ = path_gain(4.0, order=0, carrier_hz=CARRIER)
    assert rho_1 / rho_2 == pytest.approx(4.0, rel=1e-12)


def test_path_gain_numeric_case():
    # 60 GHz, 5 m, one bounce at 10 dB loss.
    rho, vartheta = path_gain(5.0, order=1, carrier_hz=CARRIER,
                              reflection_loss_db=10.0)
    expected = (WAVELENGTH / (4.0 * math.pi * 5.0)) ** 2 * 0.1
    assert rho == pytest.approx(expected, rel=1e-12)
    assert rho == pytest.approx(6.32e-10, rel=5e-3)
    assert 0.0 <= vartheta < 2.0 * math.pi
    assert vartheta == pytest.approx((-2.0 * math.pi * 5.0 / WAVELENGTH) % (2 * math.pi),
                                     rel=1e-9)


def test_path_gain_rejects_bad_length():
    with pytest.raises(ValueError):
        path_gain(0.0, 0, CARRIER)
    with pytest.raises(ValueError):
        path_gain(-1.0, 0, CARRIER)


def test_array_response_single_element():
    np.testing.assert_allclose(array_response(ArrayGeometry(1), 0.3, 1.1), [1.0])


def test_array_response_broadside():
    v = array_response(ArrayGeometry(8), math.pi / 2, math.pi / 2)
    np.testing.assert_allclose(v, np.full(8, 1.0 / math.sqrt(8)), atol=1e-15)


def test_array_response_planar_enumeration():
    # 2x2 panel: flat order (i, j) = (0,0), (0,1), (1,0), (1,1) with phase
    # pi*(i*sin(theta)*cos(phi) + j*cos(theta)).
    phi, theta = 0.4, 1.2
    v = array_response(ArrayGeometry(2, 2), phi, theta)
    h = math.sin(theta) * math.cos(phi)
    z = math.cos(theta)
    expected = 0.5 * np.exp(1j * math.pi * np.array([0.0, z, h, h + z]))
    np.testing.assert_allclose(v, expected, atol=1e-15)


def test_array_response_unit_norm():
    rng = np.random.default_rng(11)
    for _ in range(100):
        g = ArrayGeometry(int(rng.integers(1, 12)), int(rng.integers(1, 6)))
        phi = rng.uniform(0, 2 * math.pi)
        theta = rng.uniform(0, math.pi)
        assert abs(np.linalg.norm(array_response(g, phi, theta)) - 1.0) < 1e-12


def _random_paths(rng, count):
    paths = []
    for _ in range(count):
        paths.append(PathComponent(
            rho=float(rng.uniform(0.1, 2.0)),
            vartheta=float(rng.uniform(0, 2 * math.pi)),
            aod=(float(rng.uniform(0, 2 * math.pi)), float(rng.uniform(0, math.pi))),
            aoa=(float(rng.uniform(0, 2 * math.pi)), float(rng.uniform(0, math.pi))),
            order=int(rng.integers(0, 3)),
            length=float(rng.uniform(1, 10)),
        ))
    return paths


def test_channel_single_unit_path():
    p = PathComponent(rho=1.0, vartheta=0.0, aod=(0.3, 1.2), aoa=(2.0, 0.9),
                      order=0, length=3.0)
    tx, rx = ArrayGeometry(4), ArrayGeometry(3)
    h = channel_matrix([p], tx, rx)
    outer = np.outer(array_response(rx, 2.0, 0.9),
                     array_response(tx, 0.3, 1.2).conj())
    np.testing.assert_allclose(h, outer, atol=1e-15)
    assert np.linalg.matrix_rank(h) == 1
    assert np.linalg.norm(h) == pytest.approx(1.0, abs=1e-12)


def test_channel_empty_paths():
    h = channel_matrix([], ArrayGeometry(4), ArrayGeometry(2))
    assert h.shape == (2, 4)
    assert np.all(h == 0)


def test_channel_matches_bruteforce_sum():
    rng = np.random.default_rng(19)
    paths = _random_paths(rng, 5)
    tx, rx = ArrayGeometry(4), ArrayGeometry(3)
    expected = np.zeros((3, 4), dtype=complex)
    for p in paths:
        expected += (math.sqrt(p.rho) * np.exp(1j * p.vartheta)
                     * np.outer(array_response(rx, *p.aoa),
                                array_response(tx, *p.aod).conj()))
    np.testing.assert_allclose(channel_matrix(paths, tx, rx), expected, atol=1e-14)


def test_channel_permutation_bitwise_stable():
    rng = np.random.default_rng(23)
    paths = _random_paths(rng, 7)
    tx, rx = ArrayGeometry(5), ArrayGeometry(4)
    h = channel_matrix(paths, tx, rx)
    for _ in range(5):
        rng.shuffle(paths)
        h_perm = channel_matrix(paths, tx, rx)
        assert np.array_equal(h, h_perm)


def test_channel_frobenius_bound():
    rng = np.random.default_rng(29)
    paths = _random_paths(rng, 6)
    tx, rx = ArrayGeometry(6), ArrayGeometry(2)
    h = channel_matrix(paths, tx, rx)
    bound = sum(math.sqrt(p.rho) for p in paths)
    assert np.linalg.norm(h) <= bound + 1e-12
