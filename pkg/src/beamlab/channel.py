"""Geometric multipath channel synthesis.

Propagation paths are enumerated with the image-source method over the six
room walls (up to two bounces). Obstacles block rays but do not reflect
them. Each path carries a linear power gain, a phase, and departure/arrival
angles expressed in the local frames of the TX and RX arrays; the channel
matrix is the sum of the per-path rank-1 outer products of the array
responses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    Box,
    Orientation,
    Scene,
    Vec3,
    global_to_local_angles,
)

SPEED_OF_LIGHT = 299_792_458.0

# Default per-bounce reflection power loss (plasterboard-like).
DEFAULT_REFLECTION_LOSS_DB = 6.0

# Tolerances for ray/box and ray/plane intersection bookkeeping.
_EPS = 1e-9


@dataclass(frozen=True)
class ArrayGeometry:
    """Half-wavelength-spaced array: linear when ``n_v == 1``, planar otherwise."""

    n_h: int
    n_v: int = 1

    def __post_init__(self):
        if self.n_h < 1 or self.n_v < 1:
            raise ValueError("element counts must be >= 1")

    @property
    def size(self) -> int:
        return self.n_h * self.n_v

    @property
    def is_planar(self) -> bool:
        return self.n_v > 1


@dataclass(frozen=True)
class PathComponent:
    """One propagation path: gain, phase, local-frame angles, bounce count."""

    rho: float                 # linear power gain, >= 0
    vartheta: float            # phase in [0, 2*pi)
    aod: tuple                 # (phi, theta) at the TX, TX-local frame
    aoa: tuple                 # (phi, theta) at the RX, RX-local frame
    order: int                 # number of wall bounces, 0 = line of sight
    length: float              # unfolded propagation length in meters


def path_gain(length: float, order: int, carrier_hz: float,
              reflection_loss_db: float = DEFAULT_REFLECTION_LOSS_DB) -> tuple:
    """Free-space power gain and propagation phase for one path.

    Gain follows the inverse-square law referenced to the wavelength,
    attenuated by ``reflection_loss_db`` per wall bounce. The phase is the
    carrier phase accumulated over the path length.
    """
    if length <= 0.0:
        raise ValueError("path length must be positive")
    lam = SPEED_OF_LIGHT / carrier_hz
    per_bounce = 10.0 ** (-reflection_loss_db / 10.0)
    rho = (lam / (4.0 * math.pi * length)) ** 2 * per_bounce ** order
    vartheta = (-2.0 * math.pi * length / lam) % (2.0 * math.pi)
    return rho, vartheta


def array_response(g: ArrayGeometry, phi: float, theta: float) -> np.ndarray:
    """Unit-norm steering vector for a plane wave along (phi, theta).

    Element (i, j) of a planar array contributes a phase of
    ``pi * (i*sin(theta)*cos(phi) + j*cos(theta))`` with i the horizontal
    index and j the vertical index, both zero-based; the flat element order
    is horizontal-major. A linear array is the ``n_v == 1`` special case.
    """
    horiz = math.sin(theta) * math.cos(phi)
    vert = math.cos(theta)
    i = np.repeat(np.arange(g.n_h), g.n_v)
    j = np.tile(np.arange(g.n_v), g.n_h)
    phase = math.pi * (i * horiz + j * vert)
    return np.exp(1j * phase) / math.sqrt(g.size)


# ---------------------------------------------------------------------------
# Image-source path tracing


def _walls(room: Box) -> list:
    """Six wall planes as (axis, plane coordinate) pairs."""
    out = []
    for axis in range(3):
        out.append((axis, float(room.lo[axis])))
        out.append((axis, float(room.hi[axis])))
    return out


def _mirror(point: np.ndarray, wall: tuple) -> np.ndarray:
    axis, value = wall
    out = point.copy()
    out[axis] = 2.0 * value - out[axis]
    return out


def _plane_hit(src: np.ndarray, dst: np.ndarray, wall: tuple, room: Box):
    """Point where segment src->dst crosses the wall plane, if strictly between
    the endpoints and within the wall face; None otherwise."""
    axis, value = wall
    denom = dst[axis] - src[axis]
    if abs(denom) < _EPS:
        return None
    t = (value - src[axis]) / denom
    if not _EPS < t < 1.0 - _EPS:
        return None
    point = src + t * (dst - src)
    for other in range(3):
        if other == axis:
            continue
        if not room.lo[other] - _EPS <= point[other] <= room.hi[other] + _EPS:
            return None
    return point


def _segment_hits_box(a: np.ndarray, b: np.ndarray, box: Box) -> bool:
    """Slab test: does the open segment a->b pass through the box?"""
    d = b - a
    t_lo, t_hi = 0.0, 1.0
    for axis in range(3):
        if abs(d[axis]) < _EPS:
            if a[axis] < box.lo[axis] or a[axis] > box.hi[axis]:
                return False
            continue
        t1 = (box.lo[axis] - a[axis]) / d[axis]
        t2 = (box.hi[axis] - a[axis]) / d[axis]
        if t1 > t2:
            t1, t2 = t2, t1
        t_lo = max(t_lo, t1)
        t_hi = min(t_hi, t2)
        if t_lo > t_hi:
            return False
    # Require a real overlap, not a grazing contact at a corner or endpoint.
    return t_hi - t_lo > _EPS and t_hi > _EPS and t_lo < 1.0 - _EPS


def _blocked(points: list, obstacles: tuple) -> bool:
    for a, b in zip(points[:-1], points[1:]):
        for box in obstacles:
            if _segment_hits_box(a, b, box):
                return True
    return False


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def trace_paths(scene: Scene, rx_position: Vec3, rx_orientation: Orientation,
                max_order: int = 2, max_paths: int = 20, *,
                carrier_hz: float,
                reflection_loss_db: float = DEFAULT_REFLECTION_LOSS_DB) -> list:
    """Enumerate LOS and wall-reflected paths from the scene TX to the RX.

    Returns at most ``max_paths`` unblocked paths sorted by descending power
    gain. Departure angles are expressed in the TX array frame, arrival
    angles in the RX array frame (pointing from the array toward the last
    interaction point along the path).
    """
    if max_order not in (0, 1, 2):
        raise ValueError("max_order must be 0, 1, or 2")
    if max_paths < 1:
        raise ValueError("max_paths must be >= 1")
    p_t = np.asarray(scene.tx_position, dtype=float)
    p_r = np.asarray(rx_position, dtype=float)
    if not scene.room.contains_point(p_r):
        raise ValueError("rx position lies outside the room")
    if np.allclose(p_t, p_r):
        raise ValueError("tx and rx positions coincide")

    walls = _walls(scene.room)
    candidates = []  # (order, length, first_leg_dir, last_leg_dir_from_rx)

    los_len = float(np.linalg.norm(p_r - p_t))
    if not _blocked([p_t, p_r], scene.obstacles):
        candidates.append((0, los_len, _unit(p_r - p_t), _unit(p_t - p_r)))

    if max_order >= 1:
        for wall in walls:
            image = _mirror(p_t, wall)
            if np.allclose(image, p_t):
                continue  # TX on the wall plane: degenerate image
            hit = _plane_hit(image, p_r, wall, scene.room)
            if hit is None:
                continue
            if _blocked([p_t, hit, p_r], scene.obstacles):
                continue
            length = float(np.linalg.norm(p_r - image))
            candidates.append((1, length, _unit(hit - p_t), _unit(hit - p_r)))

    if max_order >= 2:
        for w1 in walls:
            image1 = _mirror(p_t, w1)
            if np.allclose(image1, p_t):
                continue
            for w2 in walls:
                if w2 == w1:
                    continue
                image2 = _mirror(image1, w2)
                hit2 = _plane_hit(image2, p_r, w2, scene.room)
                if hit2 is None:
                    continue
                hit1 = _plane_hit(image1, hit2, w1, scene.room)
                if hit1 is None:
                    continue
                if _blocked([p_t, hit1, hit2, p_r], scene.obstacles):
                    continue
                length = float(np.linalg.norm(p_r - image2))
                candidates.append((2, length, _unit(hit1 - p_t), _unit(hit2 - p_r)))

    paths = []
    for order, length, dep_dir, arr_dir in candidates:
        rho, vartheta = path_gain(length, order, carrier_hz, reflection_loss_db)
        aod = global_to_local_angles(dep_dir, scene.tx_orientation)
        aoa = global_to_local_angles(arr_dir, rx_orientation)
        paths.append(PathComponent(rho=rho, vartheta=vartheta, aod=aod, aoa=aoa,
                                   order=order, length=length))
    paths.sort(key=_path_sort_key)
    return paths[:max_paths]


def _path_sort_key(p: PathComponent) -> tuple:
    # Strongest first; remaining fields fix a total order for reproducibility.
    return (-p.rho, p.order, p.length, p.aod, p.aoa)


def channel_matrix(paths: list, tx_geom: ArrayGeometry,
                   rx_geom: ArrayGeometry) -> np.ndarray:
    """N_r x N_t channel: sum over paths of sqrt(rho)*e^{j*vartheta}*a_r*a_t^H.

    The accumulation order is fixed by sorting, so any permutation of the
    input path list produces a bitwise-identical matrix.
    """
    h = np.zeros((rx_geom.size, tx_geom.size), dtype=complex)
    for p in sorted(paths, key=_path_sort_key):
        a_r = array_response(rx_geom, *p.aoa)
        a_t = array_response(tx_geom, *p.aod)
        h += math.sqrt(p.rho) * np.exp(1j * p.vartheta) * np.outer(a_r, a_t.conj())
    return h
