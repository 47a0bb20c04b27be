"""HTTP front end over :mod:`hybridqc.runner`."""
from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse, PlainTextResponse

from . import __version__
from .runner import RunFailure, execute, rows_to_csv, run_sweep
from .schemas import SCHEMA_VERSION, RunConfig, RunRecord, SweepConfig
from .statevector import ResourceLimitError, max_qubits

app = FastAPI(title="hybridqc", version=__version__)


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__, "schema_version": SCHEMA_VERSION,
            "max_qubits": max_qubits()}


@app.post("/runs", response_model=RunRecord)
def create_run(cfg: RunConfig):
    try:
        return execute(cfg)
    except ResourceLimitError as exc:
        return JSONResponse(status_code=413, content={"detail": str(exc)})
    except RunFailure as exc:
        return JSONResponse(status_code=500, content=exc.record.model_dump(mode="json"))
    except (ValueError, OSError) as exc:
        return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.post("/sweeps", response_class=PlainTextResponse)
def create_sweep(cfg: SweepConfig) -> str:
    return rows_to_csv(run_sweep(cfg))
