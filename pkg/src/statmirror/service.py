"""FastAPI service wrapping the laboratory.

Every computation endpoint takes a pydantic request model and returns a
pre-serialized JSON document (17-significant-digit floats, stable key
order), so responses are byte-identical for identical requests.  Domain and
input problems map to HTTP 400, numeric failures to HTTP 409; the CLI turns
these into exit codes 2 and 3.
"""

from __future__ import annotations

from typing import Literal, Optional

from fastapi import FastAPI
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from . import reports
from .errors import StatMirrorError
from .potentials import catalogue_names

app = FastAPI(
    title="statmirror",
    description=(
        "Numerical laboratory for Hessian-manifold geometry: curvature "
        "reports, Legendre duality checks, Monge-Ampere flow runs and WDVV "
        "verification."
    ),
    version=reports.ARTIFACT_VERSION,
)


class ReportRequest(BaseModel):
    spec: str
    side: Literal["primal", "dual"] = "primal"
    point: Optional[list[float]] = None
    samples: int = Field(default=50, ge=1, le=5000)
    seed: int = 0


class LegendreRequest(BaseModel):
    spec: str
    side: Literal["primal", "dual"] = "primal"
    point: Optional[list[float]] = None
    samples: int = Field(default=50, ge=1, le=5000)
    seed: int = 0
    tol: Optional[float] = Field(default=None, gt=0)


class WdvvRequest(BaseModel):
    spec: str
    side: Literal["primal", "dual"] = "primal"
    samples: int = Field(default=20, ge=1, le=1000)
    seed: int = 0
    with_dual: bool = True


class MirrorRequest(BaseModel):
    spec: str
    point: Optional[list[float]] = None
    samples: int = Field(default=20, ge=1, le=1000)
    seed: int = 0


class FlowRunRequest(BaseModel):
    init: str = "quad-2"
    grid: str = "33x33"
    dt: Optional[float] = Field(default=None, gt=0)  # None means auto
    steps: int = Field(default=100, ge=1, le=100000)
    record_every: int = Field(default=0, ge=0)
    seed: int = 0
    include_csv: bool = False


class SolitonCheckRequest(BaseModel):
    tmin: float = Field(default=0.1, gt=0)
    tmax: float = Field(default=10.0, gt=0)
    samples: int = Field(default=100, ge=1, le=10000)
    seed: int = 0


def _json_response(doc: dict) -> Response:
    return Response(content=reports.to_json(doc) + "\n", media_type="application/json")


@app.exception_handler(StatMirrorError)
async def _statmirror_error(_, exc: StatMirrorError):
    status = 400 if exc.exit_code == 2 else 409
    return JSONResponse(
        status_code=status,
        content={
            "error": {
                "type": type(exc).__name__,
                "message": str(exc),
                "exit_code": exc.exit_code,
            }
        },
    )


@app.get("/health")
def health():
    return {"status": "ok", "version": reports.ARTIFACT_VERSION}


@app.get("/catalogue")
def catalogue(max_dim: int = 5):
    return {"potentials": catalogue_names(max_dim=max_dim)}


@app.post("/report")
def report(req: ReportRequest) -> Response:
    doc = reports.curvature_report(
        req.spec, side=req.side, point=req.point, samples=req.samples, seed=req.seed
    )
    return _json_response(doc)


@app.post("/legendre")
def legendre(req: LegendreRequest) -> Response:
    doc = reports.legendre_report(
        req.spec,
        side=req.side,
        point=req.point,
        samples=req.samples,
        seed=req.seed,
        tol=req.tol,
    )
    return _json_response(doc)


@app.post("/wdvv")
def wdvv_endpoint(req: WdvvRequest) -> Response:
    doc = reports.wdvv_report(
        req.spec,
        side=req.side,
        samples=req.samples,
        seed=req.seed,
        with_dual=req.with_dual,
    )
    return _json_response(doc)


@app.post("/mirror")
def mirror(req: MirrorRequest) -> Response:
    doc = reports.mirror_report(
        req.spec, point=req.point, samples=req.samples, seed=req.seed
    )
    return _json_response(doc)


@app.post("/flow/run")
def flow_run(req: FlowRunRequest) -> Response:
    doc = reports.flow_run_report(
        init=req.init,
        grid=req.grid,
        dt="auto" if req.dt is None else req.dt,
        steps=req.steps,
        record_every=req.record_every,
        seed=req.seed,
        include_csv=req.include_csv,
    )
    return _json_response(doc)


@app.post("/flow/soliton")
def flow_soliton(req: SolitonCheckRequest) -> Response:
    doc = reports.flow_soliton_report(
        tmin=req.tmin, tmax=req.tmax, samples=req.samples, seed=req.seed
    )
    return _json_response(doc)
