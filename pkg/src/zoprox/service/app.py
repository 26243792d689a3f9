"""FastAPI service wrapping the benchmark runner.

The handler functions (`execute_validate`, `execute_run`) are plain functions
over the pydantic models; the CLI calls them directly in local mode and over
HTTP in remote mode, so both paths share one implementation.
"""

from __future__ import annotations

import math

from fastapi import FastAPI

from .. import __version__
from .. import bench
from .schemas import (
    ExperimentRequest,
    HealthResponse,
    RunResponse,
    RunResultModel,
    ValidateResponse,
)


def _merged(request: ExperimentRequest) -> tuple[dict[str, str], list[str]]:
    mapping, parse_errors = bench.parse_spec_text(request.spec_text)
    return bench.merge_mappings(mapping, request.overrides), parse_errors


def execute_validate(request: ExperimentRequest) -> ValidateResponse:
    mapping, errors = _merged(request)
    errors = errors + bench.validate_mapping(mapping)
    return ValidateResponse(ok=not errors, errors=errors)


def execute_run(request: ExperimentRequest) -> RunResponse:
    mapping, parse_errors = _merged(request)
    spec, spec_errors = bench.compile_spec(mapping)
    errors = parse_errors + spec_errors
    if errors or spec is None:
        return RunResponse(ok=False, errors=errors)

    result = bench.run_experiment(spec)
    runs = []
    for outcome in result.outcomes:
        report = outcome.report
        final_h = None
        if report is not None and math.isfinite(report.h):
            final_h = report.h
        runs.append(
            RunResultModel(
                solver=outcome.solver,
                repeat=outcome.repeat_index,
                seed=outcome.seed,
                eta=outcome.eta,
                iterations=0 if report is None else report.iterations,
                final_h=final_h,
                total_evals=0 if report is None else report.total_evals,
                termination_reason="error" if report is None else report.reason,
                error=outcome.error,
                trace_name=outcome.trace_name,
                trace_csv=outcome.trace_csv,
            )
        )
    return RunResponse(
        ok=not result.all_failed,
        out=spec.out,
        runs=runs,
        summary_csv=result.summary_csv,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="zoprox", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/experiments/validate", response_model=ValidateResponse)
    def validate_experiment(request: ExperimentRequest) -> ValidateResponse:
        return execute_validate(request)

    @app.post("/experiments/run", response_model=RunResponse)
    def run_experiment(request: ExperimentRequest) -> RunResponse:
        return execute_run(request)

    return app


app = create_app()
