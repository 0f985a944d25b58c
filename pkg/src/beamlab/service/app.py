"""FastAPI application wrapping the pipeline handlers.

Request bodies reference server-side files; the service is a control plane
for a directory of datasets, checkpoints, and result artifacts, plus a
low-latency prediction endpoint for trained models.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, pipeline
from ..errors import ConfigError, DataError, NumericError
from . import schemas


def create_app() -> FastAPI:
    app = FastAPI(
        title="beamlab",
        version=__version__,
        description="Location- and orientation-assisted mmWave beam alignment lab",
    )

    @app.exception_handler(ConfigError)
    async def _config_error(request: Request, exc: ConfigError):
        return _error_response(400, "config", exc)

    @app.exception_handler(DataError)
    async def _data_error(request: Request, exc: DataError):
        return _error_response(422, "data", exc)

    @app.exception_handler(NumericError)
    async def _numeric_error(request: Request, exc: NumericError):
        return _error_response(500, "numeric", exc)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return _error_response(400, "invalid-input", exc)

    @app.exception_handler(FileNotFoundError)
    async def _missing_file(request: Request, exc: FileNotFoundError):
        return _error_response(422, "data", exc)

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/complexity", response_model=schemas.ComplexityResponse)
    def complexity(req: schemas.ComplexityRequest):
        return pipeline.run_complexity(req)

    @app.post("/datasets/generate", response_model=schemas.GenerateResponse)
    def generate(req: schemas.GenerateRequest):
        return pipeline.run_generate(req)

    @app.post("/datasets/export-csv", response_model=schemas.ExportCsvResponse)
    def export_csv(req: schemas.ExportCsvRequest):
        return pipeline.run_export_csv(req)

    @app.post("/models/train", response_model=schemas.TrainResponse)
    def train(req: schemas.TrainRequest):
        return pipeline.run_train(req)

    @app.post("/models/evaluate", response_model=schemas.EvaluateResponse)
    def evaluate(req: schemas.EvaluateRequest):
        return pipeline.run_evaluate(req)

    @app.post("/sweeps/run", response_model=schemas.SweepResponse)
    def sweep(req: schemas.SweepRequest):
        return pipeline.run_sweep(req)

    @app.post("/graph/export", response_model=schemas.GraphExportResponse)
    def graph_export(req: schemas.GraphExportRequest):
        return pipeline.run_graph_export(req)

    @app.post("/predict", response_model=schemas.PredictResponse)
    def predict(req: schemas.PredictRequest):
        return pipeline.run_predict(req)

    return app


def _error_response(status: int, kind: str, exc: Exception) -> JSONResponse:
    body = schemas.ErrorResponse(kind=kind, detail=str(exc))
    return JSONResponse(status_code=status, content=body.model_dump())
