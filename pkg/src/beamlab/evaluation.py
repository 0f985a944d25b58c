"""Beam-alignment evaluation: candidate scanning, misalignment, ESE, RSS.

A trained model proposes the most probable beam pairs; the harness scans
the top ``n_b`` of them against the sample's stored RSS, keeps only pairs
whose SNR clears the detectability threshold, and compares the winner with
the true strongest pair. Samples where no candidate is detectable count as
misaligned and contribute zero spectral efficiency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .codebook import SystemParams, ese, watts_to_dbm
from .dataset import Dataset, perturb_poses
from .seeding import make_rng


@dataclass(frozen=True)
class EvalRow:
    model: str
    n_b: int
    sigma_p: float
    sigma_o: float
    misalignment: float
    ese_bps_hz: float
    rss_dbm: float
    n_samples: int


@dataclass(frozen=True)
class EvalReport:
    rows: list = field(default_factory=list)


def measure_and_select(candidates: list, sample_rss: np.ndarray,
                       params: SystemParams):
    """Strongest detectable candidate pair, or None when nothing clears SNR_TH.

    Ties keep the earliest candidate in scan order.
    """
    if not candidates:
        raise ValueError("candidate set is empty")
    floor = params.snr_th * params.sigma_n2
    best = None
    best_rss = -math.inf
    for p, q in candidates:
        value = float(sample_rss[p, q])
        if value >= floor and value > best_rss:
            best = (p, q)
            best_rss = value
    return best


def _evaluate_rankings(rankings: np.ndarray, test_set: Dataset, n_b_list: list,
                       model_name: str, params: SystemParams,
                       sigma_p: float = 0.0, sigma_o: float = 0.0) -> list:
    """Shared scoring: one ranked candidate list per sample, many n_b cuts."""
    n = len(test_set)
    n_r = test_set.header.rx_geom.size
    n_pairs = test_set.header.tx_geom.size * n_r
    rows = []
    for n_b in n_b_list:
        if not 1 <= n_b <= n_pairs:
            raise ValueError(f"n_b {n_b} out of range [1, {n_pairs}]")
        misaligned = 0
        ese_sum = 0.0
        rss_sum = 0.0
        rss_count = 0
        for i in range(n):
            flat = rankings[i, :n_b]
            candidates = [(int(ix) // n_r, int(ix) % n_r) for ix in flat]
            choice = measure_and_select(candidates, test_set.rss[i], params)
            if choice is None:
                misaligned += 1
                continue
            if choice != (int(test_set.labels[i, 0]), int(test_set.labels[i, 1])):
                misaligned += 1
            chosen_rss = float(test_set.rss[i][choice])
            ese_sum += ese(chosen_rss / params.sigma_n2, n_b, params)
            rss_sum += chosen_rss
            rss_count += 1
        rows.append(EvalRow(
            model=model_name,
            n_b=n_b,
            sigma_p=sigma_p,
            sigma_o=sigma_o,
            misalignment=misaligned / n,
            ese_bps_hz=ese_sum / n,
            rss_dbm=watts_to_dbm(rss_sum / rss_count) if rss_count else math.nan,
            n_samples=n,
        ))
    return rows


def rank_pairs(model, locations: np.ndarray, orientations: np.ndarray) -> np.ndarray:
    """Flat beam-pair indices sorted by descending model probability.

    Stable sort keeps the lower flat index first among ties.
    """
    probs = model.pair_probabilities_batch(locations, orientations)
    flat = probs.reshape(probs.shape[0], -1)
    return np.argsort(-flat, axis=1, kind="stable")


def evaluate(model, test_set: Dataset, n_b_list: list,
             params: SystemParams) -> EvalReport:
    """Misalignment probability, mean ESE, and mean RSS per candidate-set size."""
    if len(test_set) == 0:
        raise ValueError("test set is empty")
    rankings = rank_pairs(model, test_set.locations, test_set.orientations)
    rows = _evaluate_rankings(rankings, test_set, n_b_list, model.kind, params)
    return EvalReport(rows=rows)


def robustness_sweep(model, test_set: Dataset, sigma_p_list: list,
                     sigma_o_list: list, params: SystemParams,
                     n_b_list: list, seed: int = 0) -> EvalReport:
    """Evaluate with noisy poses fed to the model; labels stay pinned to truth."""
    if len(test_set) == 0:
        raise ValueError("test set is empty")
    rows = []
    planar = test_set.header.planar
    for sigma_p in sigma_p_list:
        for sigma_o in sigma_o_list:
            rng = make_rng(seed, "robustness", repr(float(sigma_p)),
                           repr(float(sigma_o)))
            locs, oris = perturb_poses(test_set.locations, test_set.orientations,
                                       sigma_p, sigma_o, rng, planar)
            rankings = rank_pairs(model, locs, oris)
            rows.extend(_evaluate_rankings(rankings, test_set, n_b_list,
                                           model.kind, params,
                                           sigma_p=float(sigma_p),
                                           sigma_o=float(sigma_o)))
    return EvalReport(rows=rows)


def oracle_rankings(test_set: Dataset) -> np.ndarray:
    """Rank pairs by the true stored RSS (a perfect predictor), for baselines."""
    flat = test_set.rss.reshape(len(test_set), -1).astype(np.float64)
    return np.argsort(-flat, axis=1, kind="stable")


def evaluate_oracle(test_set: Dataset, n_b_list: list,
                    params: SystemParams) -> EvalReport:
    """Evaluation of the perfect-alignment reference."""
    rankings = oracle_rankings(test_set)
    return EvalReport(rows=_evaluate_rankings(rankings, test_set, n_b_list,
                                              "oracle", params))
