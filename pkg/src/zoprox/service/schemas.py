"""Pydantic request/response models for the experiment service.

Experiments travel as the same flat ``key = value`` mapping the spec files
use: ``spec_text`` carries a whole file, ``overrides`` individual keys that
take precedence. Responses embed the rendered CSV bodies so clients own all
file placement.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class ExperimentRequest(BaseModel):
    spec_text: str = ""
    overrides: dict[str, str] = Field(default_factory=dict)


class ValidateResponse(BaseModel):
    ok: bool
    errors: list[str] = Field(default_factory=list)


class RunResultModel(BaseModel):
    solver: str
    repeat: int
    seed: int
    eta: Optional[float] = None
    iterations: int = 0
    final_h: Optional[float] = None  # None when the run failed or overflowed
    total_evals: int = 0
    termination_reason: str = "error"
    error: Optional[str] = None
    trace_name: str
    trace_csv: str


class RunResponse(BaseModel):
    ok: bool
    errors: list[str] = Field(default_factory=list)
    out: Optional[str] = None  # the spec's own output-directory hint, if any
    runs: list[RunResultModel] = Field(default_factory=list)
    summary_csv: str = ""


class HealthResponse(BaseModel):
    status: str
    version: str
