"""HTTP service exposing the benchmark runner."""

from .app import app, create_app, execute_run, execute_validate
from .schemas import (
    ExperimentRequest,
    HealthResponse,
    RunResponse,
    RunResultModel,
    ValidateResponse,
)

__all__ = [
    "app",
    "create_app",
    "execute_run",
    "execute_validate",
    "ExperimentRequest",
    "HealthResponse",
    "RunResponse",
    "RunResultModel",
    "ValidateResponse",
]
