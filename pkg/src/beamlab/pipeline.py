"""Command handlers shared by the CLI and the HTTP service.

Each handler takes one request model and returns one response model, so the
two front-ends stay thin and behave identically.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from . import dataset as ds
from .config import config_hash, load_config, parse_config
from .errors import ConfigError
from .evaluation import evaluate
from .experiment import (
    SWEEP_KINDS,
    complexity_rows,
    generate_from_config,
    split_for_eval,
    train_model,
    write_complexity_csv,
    write_manifest,
    write_rows_csv,
)
from .geometry import Orientation
from .graph import angular_correlation, build_graph
from .models import (
    UeContext,
    count_model_parameters,
    load_model,
    pair_probabilities,
    save_model,
    top_nb_candidates,
)
from .service import schemas

log = logging.getLogger(__name__)


def _load_config_or_default(path: str | None):
    if path is None:
        return parse_config({})
    return load_config(path)


def run_complexity(req: schemas.ComplexityRequest) -> schemas.ComplexityResponse:
    config = _load_config_or_default(req.config_path)
    entries = [schemas.ComplexityEntry(method=m, multiplications=mults, parameters=params)
               for m, mults, params in complexity_rows(config)]
    if req.out_csv:
        write_complexity_csv(config, req.out_csv)
    return schemas.ComplexityResponse(entries=entries, out_csv=req.out_csv)


def run_generate(req: schemas.GenerateRequest) -> schemas.GenerateResponse:
    config = load_config(req.config_path)
    data = generate_from_config(config, n_samples=req.n_samples, seed=req.seed,
                                threads=req.threads)
    ds.save(data, req.out_path)
    flat = data.labels[:, 0].astype(np.int64) * data.header.rx_geom.size + data.labels[:, 1]
    return schemas.GenerateResponse(
        out_path=str(req.out_path),
        n_samples=len(data),
        distinct_labels=int(np.unique(flat).size),
        scene_hash=f"{data.header.scene_hash:016x}",
    )


def run_train(req: schemas.TrainRequest) -> schemas.TrainResponse:
    config = load_config(req.config_path)
    data = ds.load(req.data_path)
    train_set, _ = split_for_eval(data, config.dataset.train_fraction)
    selector, result = train_model(req.model, config, train_set,
                                   seed_override=req.seed)
    save_model(selector, req.out_path,
               extra_meta={"epochs_trained": result.epochs_run,
                           "best_epoch": result.best_epoch,
                           "train_fraction": config.dataset.train_fraction})
    return schemas.TrainResponse(
        out_path=str(req.out_path),
        model=req.model,
        epochs_run=result.epochs_run,
        best_epoch=result.best_epoch,
        final_train_loss=result.final_train_loss,
        parameter_count=count_model_parameters(selector),
        train_samples=len(train_set),
    )


def run_evaluate(req: schemas.EvaluateRequest) -> schemas.EvaluateResponse:
    selector, _ = load_model(req.model_path)
    data = ds.load(req.data_path)
    if req.split == "all":
        subset = data
    else:
        train_set, test_set = split_for_eval(data, req.train_fraction)
        subset = train_set if req.split == "train" else test_set
    report = evaluate(selector, subset, req.n_b, data.header.params)
    if req.out_csv:
        write_rows_csv(report.rows, req.out_csv)
    rows = [schemas.EvalRowModel(**r.__dict__) for r in report.rows]
    return schemas.EvaluateResponse(rows=rows, out_csv=req.out_csv)


def run_sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
    config = load_config(req.config_path)
    out_dir = Path(req.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = SWEEP_KINDS[req.kind](config, out_dir, threads=req.threads)
    write_manifest(out_dir, stage=f"sweep:{req.kind}",
                   config_digest=config_hash(req.config_path),
                   seeds={"dataset": config.dataset.seed,
                          "training": config.training.seed})
    return schemas.SweepResponse(
        out_dir=str(out_dir),
        csv_path=str(out_dir / f"{req.kind}_results.csv"),
        n_rows=len(rows),
    )


def run_export_csv(req: schemas.ExportCsvRequest) -> schemas.ExportCsvResponse:
    data = ds.load(req.data_path)
    ds.export_csv(data, req.out_csv, include_rss=req.include_rss)
    return schemas.ExportCsvResponse(out_csv=str(req.out_csv), n_rows=len(data))


def run_graph_export(req: schemas.GraphExportRequest) -> schemas.GraphExportResponse:
    from .codebook import dft_codebook
    from .config import build_arrays
    from .graph import write_edge_csv

    config = _load_config_or_default(req.config_path)
    tx_geom, rx_geom = build_arrays(config.arrays)
    geom = tx_geom if req.side == "tx" else rx_geom
    if geom.size < 3:
        raise ConfigError(f"{req.side} array has {geom.size} beams; "
                          "a beam graph needs at least 3")
    graph = build_graph(dft_codebook(geom))
    edges = [schemas.GraphEdge(
        src=src, dst=dst,
        delta=angular_correlation((graph.azimuths[src], graph.elevations[src]),
                                  (graph.azimuths[dst], graph.elevations[dst])))
        for src, dst in graph.edges]
    if req.out_csv:
        write_edge_csv(graph, req.out_csv)
    return schemas.GraphExportResponse(side=req.side, node_count=graph.node_count,
                                       edges=edges, out_csv=req.out_csv)


_MODEL_CACHE: dict = {}


def _cached_model(path: str):
    key = (str(path), Path(path).stat().st_mtime_ns)
    if key not in _MODEL_CACHE:
        _MODEL_CACHE.clear()
        _MODEL_CACHE[key] = load_model(path)
    return _MODEL_CACHE[key]


def run_predict(req: schemas.PredictRequest) -> schemas.PredictResponse:
    selector, _ = _cached_model(req.model_path)
    ctx = UeContext(location=np.array(req.location),
                    orientation=Orientation(req.alpha, req.beta, req.gamma))
    probs = selector.pair_probabilities_batch(
        np.asarray(ctx.location)[None, :], ctx.orientation.as_array()[None, :])[0]
    n_pairs = probs.size
    if req.n_b > n_pairs:
        raise ConfigError(f"n_b {req.n_b} exceeds the {n_pairs} available beam pairs")
    candidates = top_nb_candidates(probs, req.n_b)
    return schemas.PredictResponse(
        model=selector.kind,
        candidates=[schemas.Candidate(tx_beam=p, rx_beam=q,
                                      probability=float(probs[p, q]))
                    for p, q in candidates],
    )
