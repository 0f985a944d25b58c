"""Labeled sample generation and dataset persistence.

Each sample is one user pose, the noiseless RSS of every beam pair at that
pose, and the index of the strongest pair. Samples are generated from
per-index derived seeds, so generation is reproducible and embarrassingly
parallel. Files use a fixed-stride little-endian binary layout behind a
versioned header; a CSV export exists for inspection.
"""

from __future__ import annotations

import csv
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import (
    DEFAULT_REFLECTION_LOSS_DB,
    ArrayGeometry,
    channel_matrix,
    trace_paths,
)
from .codebook import Codebook, SystemParams, dft_codebook, rss_matrix
from .errors import (
    DataDimensionError,
    DataFormatError,
    DataTruncatedError,
    DataVersionError,
)
from .geometry import TILT_LIMIT, TWO_PI, Orientation, Scene, sample_rx_pose
from .seeding import derive_seed, make_rng

MAGIC = b"BMAL"
VERSION = 1
_HEADER_FMT = "<4sI4I6ddII3Q"  # magic, version, geoms, params, channel, hashes/counts


@dataclass(frozen=True)
class ChannelSettings:
    """Knobs of the path tracer recorded alongside the data."""

    max_order: int = 2
    max_paths: int = 20
    reflection_loss_db: float = DEFAULT_REFLECTION_LOSS_DB


@dataclass(frozen=True)
class DatasetHeader:
    tx_geom: ArrayGeometry
    rx_geom: ArrayGeometry
    params: SystemParams
    channel: ChannelSettings
    scene_hash: int
    master_seed: int

    @property
    def planar(self) -> bool:
        return self.tx_geom.is_planar or self.rx_geom.is_planar


@dataclass(frozen=True)
class Sample:
    location: np.ndarray
    orientation: Orientation
    rss: np.ndarray      # (n_tx_beams, n_rx_beams), float32 watts
    label: tuple         # (tx_beam, rx_beam) of the strongest pair


@dataclass(frozen=True)
class Dataset:
    """Columnar sample store; immutable once built."""

    header: DatasetHeader
    locations: np.ndarray     # (n, 3) float64
    orientations: np.ndarray  # (n, 3) float64, angles alpha/beta/gamma
    rss: np.ndarray           # (n, n_tx_beams, n_rx_beams) float32
    labels: np.ndarray        # (n, 2) int32

    def __post_init__(self):
        n = self.locations.shape[0]
        shape = (n, self.header.tx_geom.size, self.header.rx_geom.size)
        if self.rss.shape != shape:
            raise DataDimensionError(f"rss shape {self.rss.shape}, expected {shape}")
        if self.orientations.shape != (n, 3) or self.labels.shape != (n, 2):
            raise DataDimensionError("column lengths disagree")

    def __len__(self) -> int:
        return self.locations.shape[0]

    def sample(self, i: int) -> Sample:
        return Sample(
            location=self.locations[i].copy(),
            orientation=Orientation(*self.orientations[i]),
            rss=self.rss[i].copy(),
            label=(int(self.labels[i, 0]), int(self.labels[i, 1])),
        )

    def subset(self, indices: np.ndarray) -> "Dataset":
        return Dataset(
            header=self.header,
            locations=self.locations[indices].copy(),
            orientations=self.orientations[indices].copy(),
            rss=self.rss[indices].copy(),
            labels=self.labels[indices].copy(),
        )


def label(rss: np.ndarray) -> tuple:
    """Index pair of the strongest beam pair; ties go to the lowest flat index."""
    if rss.size == 0:
        raise ValueError("rss matrix is empty")
    p, q = np.unravel_index(int(np.argmax(rss)), rss.shape)
    return int(p), int(q)


def pose_rss(scene: Scene, location, orientation: Orientation,
             tx_cb: Codebook, rx_cb: Codebook, params: SystemParams,
             channel: ChannelSettings) -> np.ndarray:
    """Noiseless RSS of all beam pairs for one pose (float64)."""
    paths = trace_paths(scene, location, orientation,
                        max_order=channel.max_order, max_paths=channel.max_paths,
                        carrier_hz=params.carrier_hz,
                        reflection_loss_db=channel.reflection_loss_db)
    h = channel_matrix(paths, tx_cb.geometry, rx_cb.geometry)
    return rss_matrix(h, tx_cb, rx_cb, params)


def generate_dataset(scene: Scene, tx_geom: ArrayGeometry, rx_geom: ArrayGeometry,
                     params: SystemParams, n_samples: int, master_seed: int,
                     channel: ChannelSettings = ChannelSettings(),
                     threads: int = 1) -> Dataset:
    """Draw poses, synthesize channels, and label the strongest beam pair.

    Sample ``i`` depends only on ``(master_seed, i)``, so the result is
    identical for any thread count.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    tx_cb = dft_codebook(tx_geom)
    rx_cb = dft_codebook(rx_geom)
    locations = np.empty((n_samples, 3))
    orientations = np.empty((n_samples, 3))
    rss = np.empty((n_samples, tx_geom.size, rx_geom.size), dtype=np.float32)
    labels = np.empty((n_samples, 2), dtype=np.int32)

    def build(i: int):
        loc, ori = sample_rx_pose(scene, derive_seed(master_seed, "sample", i))
        full = pose_rss(scene, loc, ori, tx_cb, rx_cb, params, channel)
        locations[i] = loc
        orientations[i] = ori.as_array()
        # Label the narrowed matrix: the stored RSS is the ground truth the
        # evaluation scans, so the label must be its exact argmax.
        rss[i] = full.astype(np.float32)
        labels[i] = label(rss[i])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(build, range(n_samples)))
    else:
        for i in range(n_samples):
            build(i)

    header = DatasetHeader(tx_geom=tx_geom, rx_geom=rx_geom, params=params,
                           channel=channel, scene_hash=scene.fingerprint(),
                           master_seed=master_seed)
    return Dataset(header=header, locations=locations, orientations=orientations,
                   rss=rss, labels=labels)


# ---------------------------------------------------------------------------
# Pose perturbation


def perturb_poses(locations: np.ndarray, orientations: np.ndarray,
                  sigma_p: float, sigma_o: float, rng: np.random.Generator,
                  planar: bool = False) -> tuple:
    """Gaussian location/orientation noise, vectorized over samples.

    The z-rotation wraps around; tilt angles clamp to their valid interval.
    Only the pose copies are touched: labels and stored RSS always describe
    the true pose.
    """
    if sigma_p < 0 or sigma_o < 0:
        raise ValueError("perturbation scales must be >= 0")
    locations = locations + sigma_p * rng.standard_normal(locations.shape)
    orientations = orientations.copy()
    n_angles = 3 if planar else 1
    noise = sigma_o * rng.standard_normal((orientations.shape[0], n_angles))
    orientations[:, 0] = (orientations[:, 0] + noise[:, 0]) % TWO_PI
    if planar:
        tilt_hi = np.nextafter(TILT_LIMIT, -np.inf)
        for k in (1, 2):
            orientations[:, k] = np.clip(orientations[:, k] + noise[:, k],
                                         -TILT_LIMIT, tilt_hi)
    return locations, orientations


def perturb(s: Sample, sigma_p: float, sigma_o: float, rng: np.random.Generator,
            planar: bool = False) -> Sample:
    """Noisy copy of one sample's pose; RSS and label are carried over unchanged."""
    loc, ori = perturb_poses(s.location[None, :], s.orientation.as_array()[None, :],
                             sigma_p, sigma_o, rng, planar)
    return Sample(location=loc[0], orientation=Orientation(*ori[0]),
                  rss=s.rss, label=s.label)


def split(d: Dataset, train_fraction: float = 0.8, seed: int = 0) -> tuple:
    """Seeded shuffle into disjoint, exhaustive train/test subsets."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    n = len(d)
    perm = make_rng(seed, "split").permutation(n)
    n_train = int(round(n * train_fraction))
    return d.subset(perm[:n_train]), d.subset(perm[n_train:])


# ---------------------------------------------------------------------------
# Binary persistence


def _record_dtype(n_t: int, n_r: int) -> np.dtype:
    return np.dtype([
        ("loc", "<f8", (3,)),
        ("ori", "<f8", (3,)),
        ("p", "<u4"),
        ("q", "<u4"),
        ("rss", "<f4", (n_t, n_r)),
    ])


def save(d: Dataset, path) -> None:
    h = d.header
    header = struct.pack(
        _HEADER_FMT, MAGIC, VERSION,
        h.tx_geom.n_h, h.tx_geom.n_v, h.rx_geom.n_h, h.rx_geom.n_v,
        h.params.p_t, h.params.sigma_n2, h.params.t_fr, h.params.t_s,
        h.params.carrier_hz, h.params.snr_th,
        h.channel.reflection_loss_db, h.channel.max_order, h.channel.max_paths,
        h.scene_hash, h.master_seed, len(d),
    )
    records = np.empty(len(d), dtype=_record_dtype(h.tx_geom.size, h.rx_geom.size))
    records["loc"] = d.locations
    records["ori"] = d.orientations
    records["p"] = d.labels[:, 0]
    records["q"] = d.labels[:, 1]
    records["rss"] = d.rss
    Path(path).write_bytes(header + records.tobytes())


def load(path) -> Dataset:
    data = Path(path).read_bytes()
    header_size = struct.calcsize(_HEADER_FMT)
    if len(data) < 4 or data[:4] != MAGIC:
        raise DataFormatError(f"{path} is not a beamlab dataset (bad magic)")
    if len(data) < header_size:
        raise DataTruncatedError(f"{path} ends inside the header", len(data))
    fields = struct.unpack(_HEADER_FMT, data[:header_size])
    (_, version, tx_h, tx_v, rx_h, rx_v, p_t, sigma_n2, t_fr, t_s, carrier_hz,
     snr_th, refl_db, max_order, max_paths, scene_hash, master_seed, n) = fields
    if version != VERSION:
        raise DataVersionError(f"dataset version {version} not supported "
                               f"(expected {VERSION})")
    if min(tx_h, tx_v, rx_h, rx_v) < 1:
        raise DataDimensionError("array geometry with zero elements")
    header = DatasetHeader(
        tx_geom=ArrayGeometry(tx_h, tx_v),
        rx_geom=ArrayGeometry(rx_h, rx_v),
        params=SystemParams(p_t=p_t, sigma_n2=sigma_n2, t_fr=t_fr, t_s=t_s,
                            carrier_hz=carrier_hz, snr_th=snr_th),
        channel=ChannelSettings(max_order=max_order, max_paths=max_paths,
                                reflection_loss_db=refl_db),
        scene_hash=scene_hash,
        master_seed=master_seed,
    )
    dtype = _record_dtype(header.tx_geom.size, header.rx_geom.size)
    expected = header_size + n * dtype.itemsize
    if len(data) < expected:
        raise DataTruncatedError(
            f"{path} holds {len(data) - header_size} payload bytes of "
            f"{n * dtype.itemsize} declared", len(data))
    records = np.frombuffer(data, dtype=dtype, count=n, offset=header_size)
    labels = np.stack([records["p"], records["q"]], axis=1).astype(np.int32)
    if len(records) and (labels[:, 0].max() >= header.tx_geom.size
                         or labels[:, 1].max() >= header.rx_geom.size):
        raise DataDimensionError("stored label outside the codebook range")
    return Dataset(
        header=header,
        locations=records["loc"].astype(np.float64),
        orientations=records["ori"].astype(np.float64),
        rss=records["rss"].copy(),
        labels=labels,
    )


def export_csv(d: Dataset, path, include_rss: bool = False) -> None:
    """One row per sample: pose, label pair, and optionally every RSS entry."""
    planar = d.header.planar
    n_t, n_r = d.header.tx_geom.size, d.header.rx_geom.size
    columns = ["x", "y", "z", "alpha"] + (["beta", "gamma"] if planar else [])
    columns += ["p", "q"]
    if include_rss:
        columns += [f"rss_{p}_{q}" for p in range(n_t) for q in range(n_r)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for i in range(len(d)):
            row = [repr(float(v)) for v in d.locations[i]]
            row.append(repr(float(d.orientations[i, 0])))
            if planar:
                row += [repr(float(v)) for v in d.orientations[i, 1:3]]
            row += [int(d.labels[i, 0]), int(d.labels[i, 1])]
            if include_rss:
                row += [repr(float(v)) for v in d.rss[i].ravel()]
            writer.writerow(row)
