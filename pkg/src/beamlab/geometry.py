"""Room scenario, poses, and frame transforms.

Coordinates are meters in a global right-handed frame. Spherical angles
follow the physics convention: ``theta`` is the polar angle measured from
+z in [0, pi], ``phi`` is the azimuth in the x-y plane measured from +x
in [0, 2*pi). Orientations are extrinsic rotations composed as
``Rz(alpha) @ Ry(beta) @ Rx(gamma)``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .seeding import make_rng

Vec3 = np.ndarray

TWO_PI = 2.0 * math.pi
TILT_LIMIT = math.pi / 4.0  # beta/gamma stay within [-pi/4, pi/4)


@dataclass(frozen=True)
class Orientation:
    """Array orientation: z-rotation ``alpha``, tilts ``beta`` (y) and ``gamma`` (x)."""

    alpha: float
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.alpha < TWO_PI:
            raise ValueError(f"alpha {self.alpha} outside [0, 2*pi)")
        for name, angle in (("beta", self.beta), ("gamma", self.gamma)):
            if not -TILT_LIMIT <= angle < TILT_LIMIT:
                raise ValueError(f"{name} {angle} outside [-pi/4, pi/4)")

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma])


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by its min/max corners."""

    lo: Vec3
    hi: Vec3
    name: str = ""

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo.shape != (3,) or hi.shape != (3,):
            raise ValueError("box corners must be 3-vectors")
        if np.any(hi < lo):
            raise ValueError(f"box {self.name!r} has hi < lo")

    def contains_point(self, p: Vec3, *, strict: bool = False) -> bool:
        if strict:
            return bool(np.all(p > self.lo) and np.all(p < self.hi))
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))

    def contains_box(self, other: "Box") -> bool:
        return bool(np.all(other.lo >= self.lo) and np.all(other.hi <= self.hi))


@dataclass(frozen=True)
class Scene:
    """Static room layout plus the TX pose and the RX sampling region."""

    room: Box
    tx_position: Vec3
    tx_orientation: Orientation
    rx_region: Box
    # Per-angle half-open sampling intervals (lo, hi) for alpha, beta, gamma.
    rx_orientation_ranges: tuple = ((0.0, TWO_PI), (0.0, 0.0), (0.0, 0.0))
    obstacles: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "tx_position", np.asarray(self.tx_position, dtype=float))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        ranges = tuple((float(lo), float(hi)) for lo, hi in self.rx_orientation_ranges)
        if len(ranges) != 3:
            raise ValueError("rx_orientation_ranges needs one (lo, hi) pair per angle")
        object.__setattr__(self, "rx_orientation_ranges", ranges)
        self._validate()

    def _validate(self):
        if not self.room.contains_point(self.tx_position, strict=True):
            raise ValueError("tx position must lie strictly inside the room")
        if not self.room.contains_box(self.rx_region):
            raise ValueError("rx region must lie inside the room")
        for box in self.obstacles:
            if not self.room.contains_box(box):
                raise ValueError(f"obstacle {box.name!r} extends outside the room")
        for lo, hi in self.rx_orientation_ranges:
            if hi < lo:
                raise ValueError("orientation range has hi < lo")

    def fingerprint(self) -> int:
        """Stable 64-bit hash of the scene layout, recorded in dataset headers."""
        parts = [
            _fmt_vec(self.room.lo), _fmt_vec(self.room.hi),
            _fmt_vec(self.tx_position), _fmt_vec(self.tx_orientation.as_array()),
            _fmt_vec(self.rx_region.lo), _fmt_vec(self.rx_region.hi),
        ]
        for lo, hi in self.rx_orientation_ranges:
            parts.append(f"{lo!r},{hi!r}")
        for box in sorted(self.obstacles, key=lambda b: (tuple(b.lo), tuple(b.hi))):
            parts.append(_fmt_vec(box.lo))
            parts.append(_fmt_vec(box.hi))
        digest = hashlib.blake2b("|".join(parts).encode(), digest_size=8).digest()
        return int.from_bytes(digest, "little")


def _fmt_vec(v: np.ndarray) -> str:
    return ",".join(repr(float(x)) for x in v)


def rotation_matrix(o: Orientation) -> np.ndarray:
    """3x3 rotation taking array-local coordinates to global coordinates."""
    ca, sa = math.cos(o.alpha), math.sin(o.alpha)
    cb, sb = math.cos(o.beta), math.sin(o.beta)
    cg, sg = math.cos(o.gamma), math.sin(o.gamma)
    rz = np.array([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cg, -sg], [0.0, sg, cg]])
    return rz @ ry @ rx


def direction_from_angles(phi: float, theta: float) -> np.ndarray:
    """Unit direction vector for spherical angles (phi, theta)."""
    st = math.sin(theta)
    return np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])


def angles_from_direction(direction: Vec3) -> tuple:
    """Spherical angles (phi, theta) of a unit vector; phi in [0, 2*pi), theta in [0, pi]."""
    x, y, z = float(direction[0]), float(direction[1]), float(direction[2])
    theta = math.acos(min(1.0, max(-1.0, z)))
    phi = math.atan2(y, x) % TWO_PI
    return phi, theta


def global_to_local_angles(direction: Vec3, o: Orientation) -> tuple:
    """Express a global unit direction as (phi, theta) in the rotated array frame."""
    direction = np.asarray(direction, dtype=float)
    norm = float(np.linalg.norm(direction))
    if norm < 1e-12:
        raise ValueError("direction vector has zero length")
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"direction vector norm {norm} is not 1")
    local = rotation_matrix(o).T @ direction
    return angles_from_direction(local)


def sample_rx_pose(scene: Scene, rng_seed: int) -> tuple:
    """Draw one RX pose: location uniform in the region, angles uniform in their ranges.

    Locations falling inside an obstacle volume are rejected and redrawn, so
    the law is uniform over the obstacle-free part of the region.
    """
    rng = make_rng(rng_seed)
    lo, hi = scene.rx_region.lo, scene.rx_region.hi
    for _ in range(10_000):
        location = lo + (hi - lo) * rng.random(3)
        if not any(box.contains_point(location) for box in scene.obstacles):
            break
    else:
        raise ValueError("rx region appears to be fully covered by obstacles")
    angles = []
    for a_lo, a_hi in scene.rx_orientation_ranges:
        angles.append(a_lo if a_hi == a_lo else a_lo + (a_hi - a_lo) * rng.random())
    return location, Orientation(*angles)


def living_room_scene(planar_rx: bool = False) -> Scene:
    """Default 7m x 7m x 3m living-room layout.

    The TX sits at the global origin, 1.5 m above the floor plane (the
    vertical coordinate is centered on the TX). Five furniture boxes act as
    signal blockers; their dimensions are plausible defaults, not surveyed
    values. With ``planar_rx`` the RX region gains vertical extent and the
    full 3-angle orientation ranges used with planar arrays.
    """
    room = Box(lo=(-0.5, -3.5, -1.5), hi=(6.5, 3.5, 1.5), name="room")
    obstacles = (
        Box(lo=(2.0, 2.3, -1.5), hi=(3.8, 3.1, -0.7), name="sofa_a"),
        Box(lo=(2.0, -3.1, -1.5), hi=(3.8, -2.3, -0.7), name="sofa_b"),
        Box(lo=(2.6, -0.4, -1.5), hi=(4.0, 0.4, -0.76), name="table"),
        Box(lo=(4.4, 0.8, -1.5), hi=(4.9, 1.3, -0.6), name="chair"),
        Box(lo=(4.6, -1.6, -1.5), hi=(5.1, -0.8, 0.3), name="cabinet"),
    )
    if planar_rx:
        rx_region = Box(lo=(1.5, -3.5, -0.5), hi=(5.5, 3.5, 1.0), name="rx_region")
        ranges = ((0.0, TWO_PI), (-TILT_LIMIT, TILT_LIMIT), (-TILT_LIMIT, TILT_LIMIT))
    else:
        rx_region = Box(lo=(1.5, -3.5, 0.0), hi=(5.5, 3.5, 0.0), name="rx_region")
        ranges = ((0.0, TWO_PI), (0.0, 0.0), (0.0, 0.0))
    return Scene(
        room=room,
        tx_position=np.zeros(3),
        tx_orientation=Orientation(0.0),
        rx_region=rx_region,
        rx_orientation_ranges=ranges,
        obstacles=obstacles,
    )
