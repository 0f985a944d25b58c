"""Experiment orchestration: staged runs that leave CSV/SVG/manifest artifacts.

Every stage is deterministic given the config file: dataset seeds come from
the config, model seeds derive from the training seed, and all outputs are
plain files in the chosen artifact directory.
"""

from __future__ import annotations

import csv
import json
import logging
import platform
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    ExperimentConfig,
    build_arrays,
    build_channel_settings,
    build_dnn_hyperparams,
    build_gnn_hyperparams,
    build_norm_bounds,
    build_scene,
    build_system_params,
    build_train_config,
)
from .dataset import Dataset, generate_dataset, split
from .evaluation import EvalRow, evaluate, evaluate_oracle, robustness_sweep
from .models import (
    DnnBeamSelector,
    GnnBeamSelector,
    count_dnn_multiplications,
    count_gnn_multiplications,
    count_gnn_parameters,
    count_model_parameters,
    save_model,
)
from .seeding import derive_seed, make_rng
from .training import train

log = logging.getLogger(__name__)

CSV_COLUMNS = ["model", "n_b", "sigma_p", "sigma_o", "misalignment",
               "ese_bps_hz", "rss_dbm", "n_samples"]


def write_rows_csv(rows: list, path) -> None:
    """The one metrics schema every stage emits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([r.model, r.n_b, repr(float(r.sigma_p)),
                             repr(float(r.sigma_o)), repr(float(r.misalignment)),
                             repr(float(r.ese_bps_hz)), repr(float(r.rss_dbm)),
                             r.n_samples])


def line_chart(path, series: dict, x_label: str, y_label: str, title: str) -> None:
    """One SVG line chart; ``series`` maps a legend label to (xs, ys)."""
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for name, (xs, ys) in sorted(series.items()):
        ax.plot(xs, ys, marker="o", label=name)
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    ax.set_title(title)
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def metric_charts(rows: list, out_dir: Path, x_field: str = "n_b",
                  x_label: str = "scanned beam pairs") -> list:
    """misalignment/ESE/RSS charts against the chosen x field, per model."""
    written = []
    for metric, label in (("misalignment", "misalignment probability"),
                          ("ese_bps_hz", "effective spectral efficiency (bit/s/Hz)"),
                          ("rss_dbm", "received signal strength (dBm)")):
        series = {}
        for r in rows:
            xs, ys = series.setdefault(r.model, ([], []))
            xs.append(getattr(r, x_field))
            ys.append(getattr(r, metric))
        path = out_dir / f"{metric}.svg"
        line_chart(path, series, x_label, label, f"{label} vs {x_label}")
        written.append(path)
    return written


def write_manifest(out_dir: Path, *, stage: str, config_digest: str,
                   seeds: dict, extra: dict | None = None) -> Path:
    manifest = {
        "stage": stage,
        "config_sha256": config_digest,
        "seeds": seeds,
        "versions": {
            "beamlab": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
    }
    if extra:
        manifest.update(extra)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


# ---------------------------------------------------------------------------
# Stage helpers


def generate_from_config(config: ExperimentConfig, n_samples: int | None = None,
                         seed: int | None = None, threads: int = 1) -> Dataset:
    scene = build_scene(config.scene)
    tx_geom, rx_geom = build_arrays(config.arrays)
    params = build_system_params(config.system)
    channel = build_channel_settings(config.channel)
    return generate_dataset(
        scene, tx_geom, rx_geom, params,
        n_samples=n_samples if n_samples is not None else config.dataset.n_samples,
        master_seed=seed if seed is not None else config.dataset.seed,
        channel=channel, threads=threads,
    )


def split_for_eval(dataset: Dataset, train_fraction: float) -> tuple:
    """Deterministic train/test split tied to the dataset's own seed."""
    return split(dataset, train_fraction,
                 seed=derive_seed(dataset.header.master_seed, "split"))


def build_selector(kind: str, config: ExperimentConfig, dataset: Dataset,
                   init_seed: int):
    bounds = build_norm_bounds(config.scene)
    tx_geom, rx_geom = dataset.header.tx_geom, dataset.header.rx_geom
    if kind == "gnn":
        return GnnBeamSelector(tx_geom, rx_geom, bounds,
                               build_gnn_hyperparams(config.models.gnn), init_seed)
    if kind == "dnn":
        return DnnBeamSelector(tx_geom, rx_geom, bounds,
                               build_dnn_hyperparams(config.models.dnn), init_seed)
    raise ValueError(f"unknown model kind {kind!r}")


def train_model(kind: str, config: ExperimentConfig, train_set: Dataset,
                seed_override: int | None = None):
    """Build and train one selector; returns (selector, result)."""
    cfg = build_train_config(config.training, seed_override)
    selector = build_selector(kind, config, train_set,
                              init_seed=derive_seed(cfg.seed, "init", kind))
    result = train(selector, train_set, cfg)
    log.info("trained %s: %d epochs, best %d, final train loss %.4f",
             kind, result.epochs_run, result.best_epoch, result.final_train_loss)
    return selector, result


def complexity_rows(config: ExperimentConfig) -> list:
    """(method, multiplications, parameters) rows for the configured sizes."""
    tx_geom, rx_geom = build_arrays(config.arrays)
    n_t, n_r = tx_geom.size, rx_geom.size
    g = config.models.gnn
    d = config.models.dnn
    gnn_mults = count_gnn_multiplications(n_t, n_r, g.feature_dim, g.message_dim,
                                          g.rounds, g.hidden_layers, g.hidden_dim)
    dnn_mults = count_dnn_multiplications(n_t, n_r, d.hidden_layers, d.hidden_dim)
    gnn_params = count_gnn_parameters(g.feature_dim, g.message_dim,
                                      g.hidden_layers, g.hidden_dim)
    return [
        ("gnn", gnn_mults, gnn_params),
        ("dnn", dnn_mults, dnn_mults),  # weight count equals its multiplications
    ]


def write_complexity_csv(config: ExperimentConfig, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "multiplications", "parameters"])
        for row in complexity_rows(config):
            writer.writerow(row)


# ---------------------------------------------------------------------------
# Sweeps


def _mean_rows(groups: list, model_tag: str) -> list:
    """Average aligned EvalRow lists (one per seed) into a single tagged list."""
    out = []
    for per_nb in zip(*groups):
        first = per_nb[0]
        out.append(EvalRow(
            model=model_tag,
            n_b=first.n_b,
            sigma_p=first.sigma_p,
            sigma_o=first.sigma_o,
            misalignment=float(np.mean([r.misalignment for r in per_nb])),
            ese_bps_hz=float(np.mean([r.ese_bps_hz for r in per_nb])),
            rss_dbm=float(np.nanmean([r.rss_dbm for r in per_nb])),
            n_samples=first.n_samples,
        ))
    return out


def sweep_size(config: ExperimentConfig, out_dir: Path, threads: int = 1) -> list:
    """Training-set-size sweep: every model at every fraction, seed-averaged."""
    dataset = generate_from_config(config, threads=threads)
    train_set, test_set = split_for_eval(dataset, config.dataset.train_fraction)
    params = dataset.header.params
    n_b_list = config.evaluation.n_b
    rows = []
    for kind in ("gnn", "dnn"):
        for fraction in config.sweep.size.fractions:
            per_seed = []
            for seed in config.sweep.size.seeds:
                if fraction < 1.0:
                    keep = int(round(len(train_set) * fraction))
                    idx = make_rng(seed, "subsample", repr(float(fraction)))\
                        .permutation(len(train_set))[:keep]
                    subset = train_set.subset(idx)
                else:
                    subset = train_set
                selector, _ = train_model(kind, config, subset, seed_override=seed)
                per_seed.append(evaluate(selector, test_set, n_b_list, params).rows)
            rows.extend(_mean_rows(per_seed, f"{kind}_f{fraction:g}"))
    rows.extend(evaluate_oracle(test_set, n_b_list, params).rows)
    write_rows_csv(rows, out_dir / "size_results.csv")
    metric_charts(rows, out_dir)
    return rows


def sweep_noise(config: ExperimentConfig, out_dir: Path, threads: int = 1) -> list:
    """Pose-error robustness sweep for models trained on clean poses."""
    dataset = generate_from_config(config, threads=threads)
    train_set, test_set = split_for_eval(dataset, config.dataset.train_fraction)
    params = dataset.header.params
    noise_cfg = config.sweep.noise
    rows = []
    for kind in ("gnn", "dnn"):
        selector, _ = train_model(kind, config, train_set)
        report = robustness_sweep(selector, test_set, noise_cfg.sigma_p,
                                  noise_cfg.sigma_o, params,
                                  n_b_list=config.evaluation.n_b,
                                  seed=noise_cfg.seed)
        rows.extend(report.rows)
    write_rows_csv(rows, out_dir / "noise_results.csv")
    top1 = [r for r in rows if r.n_b == min(config.evaluation.n_b)]
    series = {}
    for r in top1:
        xs, ys = series.setdefault(f"{r.model} sigma_o={r.sigma_o:g}", ([], []))
        xs.append(r.sigma_p)
        ys.append(r.misalignment)
    line_chart(out_dir / "misalignment_vs_sigma.svg", series,
               "location error std (m)", "misalignment probability",
               "robustness to pose errors")
    return rows


def sweep_antenna(config: ExperimentConfig, out_dir: Path, threads: int = 1) -> list:
    """Array-size sweep: regenerate, retrain, and score Top-1 per TX width."""
    rows = []
    for n_t in config.sweep.antenna.tx_n_h:
        cfg_nt = config.model_copy(deep=True)
        cfg_nt.arrays.tx.n_h = n_t
        cfg_nt.arrays.rx = config.sweep.antenna.rx.model_copy()
        dataset = generate_from_config(cfg_nt, threads=threads)
        train_set, test_set = split_for_eval(dataset, cfg_nt.dataset.train_fraction)
        params = dataset.header.params
        for kind in ("gnn", "dnn"):
            selector, _ = train_model(kind, cfg_nt, train_set)
            report = evaluate(selector, test_set, [1], params)
            row = report.rows[0]
            rows.append(EvalRow(model=f"{kind}_nt{n_t}", n_b=row.n_b,
                                sigma_p=row.sigma_p, sigma_o=row.sigma_o,
                                misalignment=row.misalignment,
                                ese_bps_hz=row.ese_bps_hz, rss_dbm=row.rss_dbm,
                                n_samples=row.n_samples))
    write_rows_csv(rows, out_dir / "antenna_results.csv")
    series = {}
    for r in rows:
        kind, n_t = r.model.split("_nt")
        xs, ys = series.setdefault(kind, ([], []))
        xs.append(int(n_t))
        ys.append(r.misalignment)
    line_chart(out_dir / "misalignment_vs_antennas.svg", series,
               "TX beams", "Top-1 misalignment probability",
               "misalignment vs TX array size")
    return rows


SWEEP_KINDS = {"size": sweep_size, "noise": sweep_noise, "antenna": sweep_antenna}


def run_standard(config: ExperimentConfig, out_dir: Path, threads: int = 1) -> list:
    """Generate, train both models, evaluate, and archive everything."""
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = generate_from_config(config, threads=threads)
    train_set, test_set = split_for_eval(dataset, config.dataset.train_fraction)
    params = dataset.header.params
    rows = []
    for kind in ("gnn", "dnn"):
        selector, result = train_model(kind, config, train_set)
        save_model(selector, out_dir / f"{kind}.ckpt",
                   extra_meta={"epochs_trained": result.epochs_run,
                               "best_epoch": result.best_epoch})
        rows.extend(evaluate(selector, test_set, config.evaluation.n_b, params).rows)
        log.info("%s parameters (actual): %d", kind, count_model_parameters(selector))
    rows.extend(evaluate_oracle(test_set, config.evaluation.n_b, params).rows)
    write_rows_csv(rows, out_dir / "results.csv")
    metric_charts(rows, out_dir)
    write_complexity_csv(config, out_dir / "complexity.csv")
    return rows
