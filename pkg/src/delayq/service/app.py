"""FastAPI wiring around the handlers.

Run with `delayq serve` or `uvicorn delayq.service.app:app`.
"""

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import DelayQError, IntegrationDivergedError
from . import handlers
from .schemas import (AnalyzeRequest, AnalyzeResponse, SimulateRequest,
                      SimulateResponse, SweepRequest, SweepResponse,
                      ValidateRequest, ValidateResponse)

app = FastAPI(title="delayq",
              description="Parallel queues with delayed queue-length-plus-"
                          "velocity announcements: simulation, stability "
                          "analysis, weight design, amplitude prediction.",
              version=__version__)


@app.get("/")
def root() -> dict:
    return {"name": "delayq", "version": __version__,
            "endpoints": ["/simulate", "/analyze", "/sweep", "/validate"]}


@app.post("/simulate", response_model=SimulateResponse,
          response_model_exclude_none=True)
def simulate(req: SimulateRequest) -> SimulateResponse:
    try:
        response, _ = handlers.run_simulate(req)
    except IntegrationDivergedError as exc:
        raise HTTPException(status_code=422, detail={
            "error": "integration-diverged", "last_time": exc.last_time})
    except DelayQError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return response


@app.post("/analyze", response_model=AnalyzeResponse,
          response_model_exclude_none=True)
def analyze(req: AnalyzeRequest) -> AnalyzeResponse:
    try:
        return handlers.run_analyze(req)
    except DelayQError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.post("/sweep", response_model=SweepResponse,
          response_model_exclude_none=True)
def sweep(req: SweepRequest) -> SweepResponse:
    try:
        return handlers.run_sweep(req)
    except DelayQError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.post("/validate", response_model=ValidateResponse)
def validate(req: ValidateRequest) -> ValidateResponse:
    return handlers.run_validate(req)
