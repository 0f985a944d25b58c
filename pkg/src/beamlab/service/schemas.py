"""Request/response models for the HTTP service and the CLI front-end.

Heavy artifacts (datasets, checkpoints, result CSVs) stay on the server
filesystem; requests reference them by path and responses return summaries.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class ComplexityRequest(BaseModel):
    config_path: Optional[str] = None
    out_csv: Optional[str] = None


class ComplexityEntry(BaseModel):
    method: str
    multiplications: int
    parameters: int


class ComplexityResponse(BaseModel):
    entries: list[ComplexityEntry]
    out_csv: Optional[str] = None


class GenerateRequest(BaseModel):
    config_path: str
    out_path: str
    n_samples: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)
    threads: int = Field(default=1, ge=1)


class GenerateResponse(BaseModel):
    out_path: str
    n_samples: int
    distinct_labels: int
    scene_hash: str


class TrainRequest(BaseModel):
    config_path: str
    data_path: str
    model: Literal["gnn", "dnn"]
    out_path: str
    seed: Optional[int] = Field(default=None, ge=0)


class TrainResponse(BaseModel):
    out_path: str
    model: str
    epochs_run: int
    best_epoch: int
    final_train_loss: float
    parameter_count: int
    train_samples: int


class EvalRowModel(BaseModel):
    model: str
    n_b: int
    sigma_p: float
    sigma_o: float
    misalignment: float
    ese_bps_hz: float
    rss_dbm: float
    n_samples: int


class EvaluateRequest(BaseModel):
    model_path: str
    data_path: str
    n_b: list[int]
    out_csv: Optional[str] = None
    split: Literal["test", "train", "all"] = "test"
    train_fraction: float = Field(default=0.8, gt=0.0, lt=1.0)


class EvaluateResponse(BaseModel):
    rows: list[EvalRowModel]
    out_csv: Optional[str] = None


class SweepRequest(BaseModel):
    kind: Literal["size", "noise", "antenna"]
    config_path: str
    out_dir: str
    threads: int = Field(default=1, ge=1)


class SweepResponse(BaseModel):
    out_dir: str
    csv_path: str
    n_rows: int


class ExportCsvRequest(BaseModel):
    data_path: str
    out_csv: str
    include_rss: bool = False


class ExportCsvResponse(BaseModel):
    out_csv: str
    n_rows: int


class GraphExportRequest(BaseModel):
    config_path: Optional[str] = None
    side: Literal["tx", "rx"] = "tx"
    out_csv: Optional[str] = None


class GraphEdge(BaseModel):
    src: int
    dst: int
    delta: float


class GraphExportResponse(BaseModel):
    side: str
    node_count: int
    edges: list[GraphEdge]
    out_csv: Optional[str] = None


class PredictRequest(BaseModel):
    model_path: str
    location: list[float] = Field(min_length=3, max_length=3)
    alpha: float = Field(ge=0.0, lt=6.283185307179587)
    beta: float = 0.0
    gamma: float = 0.0
    n_b: int = Field(default=5, ge=1)


class Candidate(BaseModel):
    tx_beam: int
    rx_beam: int
    probability: float


class PredictResponse(BaseModel):
    model: str
    candidates: list[Candidate]


class ErrorResponse(BaseModel):
    kind: str
    detail: str
