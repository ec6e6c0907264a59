"""FastAPI application exposing the pipelines over HTTP.

Domain validation failures (WorkbenchError) map to 422 with the error class
name; anything else is a 500.  All endpoints are POST except the health
check, since every operation takes a document-sized payload.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import WorkbenchError
from . import handlers, schemas


def create_app() -> FastAPI:
    app = FastAPI(title="gazecomplex", version=handlers.health().version)

    @app.exception_handler(WorkbenchError)
    async def workbench_error_handler(_request: Request, exc: WorkbenchError):
        return JSONResponse(status_code=422, content={
            "error": type(exc).__name__,
            "detail": str(exc),
        })

    @app.get("/v1/health", response_model=schemas.HealthResponse)
    def health():
        return handlers.health()

    @app.post("/v1/profile", response_model=schemas.ProfileResponse)
    def profile(req: schemas.ProfileRequest):
        return handlers.profile(req)

    @app.post("/v1/gaze/aggregate", response_model=schemas.GazeAggregateResponse)
    def gaze_aggregate(req: schemas.GazeAggregateRequest):
        return handlers.gaze_aggregate(req)

    @app.post("/v1/scramble", response_model=schemas.ScrambleResponse)
    def scramble(req: schemas.ScrambleRequest):
        return handlers.scramble(req)

    @app.post("/v1/svr/train", response_model=schemas.SvrTrainResponse)
    def train_svr(req: schemas.SvrTrainRequest):
        return handlers.train_svr_handler(req)

    @app.post("/v1/head/train", response_model=schemas.HeadTrainResponse)
    def train_head(req: schemas.HeadTrainRequest):
        return handlers.train_head_handler(req)

    @app.post("/v1/probe", response_model=schemas.ProbeResponse)
    def probe(req: schemas.ProbeRequest):
        return handlers.probe_handler(req)

    @app.post("/v1/evaluate", response_model=schemas.EvaluateResponse)
    def evaluate(req: schemas.EvaluateRequest):
        return handlers.evaluate(req)

    @app.post("/v1/baseline", response_model=schemas.BaselineResponse)
    def baseline(req: schemas.BaselineRequest):
        return handlers.baseline(req)

    @app.post("/v1/run", response_model=schemas.RunResponse)
    def run(req: schemas.RunRequest):
        return handlers.run(req)

    @app.post("/v1/embeddings/validate",
              response_model=schemas.ValidateEmbeddingsResponse)
    def validate_embeddings(req: schemas.ValidateEmbeddingsRequest):
        return handlers.validate_embeddings(req)

    return app


app = create_app()
