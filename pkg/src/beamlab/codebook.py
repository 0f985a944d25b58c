"""DFT beam codebooks and per-beam-pair link metrics (RSS, SNR, ESE)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ArrayGeometry, array_response


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0.0:
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * math.log10(watts) + 30.0


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class SystemParams:
    """Link-level constants. Powers are linear watts; convert from dBm once
    at config-parse time. The pilot symbol is fixed at unit power."""

    p_t: float          # transmit power, W
    sigma_n2: float     # noise power, W
    t_fr: float         # frame duration, s
    t_s: float          # per-beam-pair scan time, s
    carrier_hz: float
    snr_th: float       # linear detectability threshold for scanning

    def __post_init__(self):
        for name in ("p_t", "sigma_n2", "t_fr", "t_s", "carrier_hz", "snr_th"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.t_s >= self.t_fr:
            raise ValueError("t_s must be smaller than t_fr")

    @classmethod
    def from_db(cls, p_t_dbm: float, sigma_n2_dbm: float, t_fr: float, t_s: float,
                carrier_hz: float, snr_th_db: float) -> "SystemParams":
        return cls(
            p_t=dbm_to_watts(p_t_dbm),
            sigma_n2=dbm_to_watts(sigma_n2_dbm),
            t_fr=t_fr,
            t_s=t_s,
            carrier_hz=carrier_hz,
            snr_th=db_to_linear(snr_th_db),
        )


@dataclass(frozen=True)
class Codebook:
    """Ordered beam set: one unit-norm steering vector per pointing direction.

    ``weights`` is (n_beams, n_elements); ``azimuths``/``elevations`` hold the
    (phi, theta) pointing angles. Planar-array beams are flattened
    horizontal-major: beam (a, b) sits at flat index a * n_v + b.
    """

    weights: np.ndarray
    azimuths: np.ndarray
    elevations: np.ndarray
    geometry: ArrayGeometry

    def __len__(self) -> int:
        return self.weights.shape[0]


def dft_codebook(g: ArrayGeometry) -> Codebook:
    """DFT codebook with arccos-spaced pointing angles.

    Linear arrays get ``n_h`` broadside-elevation beams with azimuths
    ``arccos((2p - 1 - N) / N)``; planar arrays get one beam per element
    index pair with the analogous azimuth/elevation grids.
    """
    az_grid = [math.acos((2 * a + 1 - g.n_h) / g.n_h) for a in range(g.n_h)]
    if g.is_planar:
        el_grid = [math.acos((2 * b + 1 - g.n_v) / g.n_v) for b in range(g.n_v)]
    else:
        el_grid = [math.pi / 2.0]
    azimuths, elevations, rows = [], [], []
    for phi in az_grid:
        for theta in el_grid:
            azimuths.append(phi)
            elevations.append(theta)
            rows.append(array_response(g, phi, theta))
    return Codebook(
        weights=np.array(rows),
        azimuths=np.array(azimuths),
        elevations=np.array(elevations),
        geometry=g,
    )


def rss(h: np.ndarray, u: np.ndarray, v: np.ndarray, params: SystemParams,
        noise: np.ndarray | None = None) -> float:
    """Received signal strength for precoder ``u`` and combiner ``v`` (watts).

    ``noise``, when given, is a complex noise vector applied at the combiner;
    omitted, the measurement is noiseless.
    """
    if h.shape != (v.shape[0], u.shape[0]):
        raise ValueError(f"channel shape {h.shape} does not match beams "
                         f"({v.shape[0]}, {u.shape[0]})")
    signal = math.sqrt(params.p_t) * (v.conj() @ h @ u)
    if noise is not None:
        if noise.shape != v.shape:
            raise ValueError("noise vector must match the combiner length")
        signal = signal + v.conj() @ noise
    return float(abs(signal) ** 2)


def snr(h: np.ndarray, u: np.ndarray, v: np.ndarray, params: SystemParams) -> float:
    """Noiseless RSS over the noise power (linear ratio)."""
    return rss(h, u, v, params) / params.sigma_n2


def ese(snr_value: float, n_b: int, params: SystemParams) -> float:
    """Effective spectral efficiency after spending ``n_b`` scan slots per frame."""
    if n_b < 0:
        raise ValueError("n_b must be >= 0")
    if n_b * params.t_s > params.t_fr:
        raise ValueError("scan time n_b * t_s exceeds the frame duration")
    prefactor = (params.t_fr - n_b * params.t_s) / params.t_fr
    return prefactor * math.log2(1.0 + snr_value)


def rss_matrix(h: np.ndarray, tx_cb: Codebook, rx_cb: Codebook,
               params: SystemParams) -> np.ndarray:
    """Noiseless RSS of every beam pair; entry (p, q) pairs TX beam p with RX beam q."""
    if h.shape != (rx_cb.geometry.size, tx_cb.geometry.size):
        raise ValueError(f"channel shape {h.shape} does not match codebooks "
                         f"({rx_cb.geometry.size}, {tx_cb.geometry.size})")
    cross = rx_cb.weights.conj() @ h @ tx_cb.weights.T  # (n_rx_beams, n_tx_beams)
    return params.p_t * np.abs(cross.T) ** 2
