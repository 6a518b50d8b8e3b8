"""FastAPI application exposing presets, duality checks, and gap-ratio runs.

Endpoints execute synchronously: desk-scale runs take seconds to minutes, so
clients should use generous timeouts.  The handler layer is also called
directly by the CLI's in-process transport, keeping both paths identical.
"""

from __future__ import annotations

from functools import partial

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import __version__
from ..duality import verify_duality
from ..ensemble import DisorderModel, draw_fields, run_ensemble
from ..errors import EnsembleError, ParameterError, ResourceLimitError, SpinLadderError
from ..experiments import (
    mean_r_task,
    preset_config,
    preset_names,
    run_preset,
)
from ..spectra import R_GOE, R_POISSON
from . import schemas


def handle_health() -> schemas.HealthResponse:
    return schemas.HealthResponse(status="ok", version=__version__)


def handle_presets() -> list[schemas.PresetInfo]:
    out = []
    for name in preset_names():
        cfg = preset_config(name)
        out.append(
            schemas.PresetInfo(
                name=name,
                kind=cfg.kind,
                config={
                    k: v
                    for k, v in cfg.__dict__.items()
                    if k not in ("preset", "kind")
                },
            )
        )
    return out


def handle_experiment(request: schemas.ExperimentRequest) -> schemas.ExperimentResponse:
    result = run_preset(
        request.preset, workers=request.workers, **request.overrides.as_kwargs()
    )
    return schemas.ExperimentResponse(
        preset=request.preset,
        manifest=result.manifest,
        tables=[schemas.TableModel(**t.to_payload()) for t in result.tables],
    )


def handle_duality(request: schemas.DualityRequest) -> schemas.DualityResponse:
    reports = []
    if request.fields is not None:
        if len(request.fields) != request.L // 2:
            raise ParameterError("fields must have length L/2")
        reports.append(
            verify_duality(request.L, request.J, request.g, request.fields)
        )
    else:
        model = DisorderModel(
            "uniform_box", request.seed, request.n_draws, D=request.D
        )
        for draw in range(request.n_draws):
            fields = draw_fields(model, draw, request.L // 2)
            reports.append(verify_duality(request.L, request.J, request.g, fields))
    models = [schemas.DualityReportModel(**r.to_dict()) for r in reports]
    return schemas.DualityResponse(
        reports=models, worst_mismatch=max(r.max_mismatch for r in models)
    )


def handle_gap_ratio(request: schemas.GapRatioRequest) -> schemas.GapRatioResponse:
    task = partial(
        mean_r_task,
        L=request.L,
        D=request.D,
        J=request.J,
        g=request.g,
        boundary=request.boundary,
        master_seed=request.seed,
        n_samples=request.samples,
    )
    result = run_ensemble(task, request.samples, workers=request.workers)
    return schemas.GapRatioResponse(
        L=request.L,
        D=request.D,
        n_samples=request.samples,
        mean_r=float(result.means["mean_r"][0]),
        stderr_r=float(result.stderrs["mean_r"][0]),
        dropped_fraction=float(result.means["dropped_fraction"][0]),
        reference_poisson=R_POISSON,
        reference_goe=R_GOE,
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="spinladder",
        version=__version__,
        description="Exact diagonalization service for the disordered spin "
        "ladder / dual chain: figure presets, duality checks, level statistics.",
    )

    @app.exception_handler(ParameterError)
    async def _parameter_error(request, exc):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(ResourceLimitError)
    async def _resource_error(request, exc):
        return JSONResponse(status_code=413, content={"detail": str(exc)})

    @app.exception_handler(EnsembleError)
    async def _ensemble_error(request, exc):
        return JSONResponse(
            status_code=500,
            content={"detail": str(exc), "manifest": list(exc.manifest)},
        )

    @app.exception_handler(SpinLadderError)
    async def _generic_error(request, exc):
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return handle_health()

    @app.get("/presets", response_model=list[schemas.PresetInfo])
    def presets():
        return handle_presets()

    @app.post("/experiments/run", response_model=schemas.ExperimentResponse)
    def experiments_run(request: schemas.ExperimentRequest):
        return handle_experiment(request)

    @app.post("/duality", response_model=schemas.DualityResponse)
    def duality(request: schemas.DualityRequest):
        return handle_duality(request)

    @app.post("/gap-ratio", response_model=schemas.GapRatioResponse)
    def gap_ratio(request: schemas.GapRatioRequest):
        return handle_gap_ratio(request)

    return app


app = create_app()
