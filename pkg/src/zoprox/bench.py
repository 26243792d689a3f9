"""Reproducible benchmark experiments.

An experiment is described by a flat ``key = value`` text spec (or the same
keys supplied as overrides). Each (solver, repeat) pair becomes one run with
seed ``base_seed + repeat_index``; a run emits a per-iteration trace CSV and
the experiment emits one summary CSV. Reruns of an identical spec produce
byte-identical CSV bodies once timing columns are disabled.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .errors import ZoproxError
from .problems import (
    ClassificationInstance,
    gen_lasso,
    lasso_blackbox,
    load_libsvm,
    seeded_rng,
    sigmoid_objective,
    standard_normal,
)
from .solvers import (
    SolverConfig,
    SolverReport,
    constant_sigma,
    heuristic_sigma,
    ipzopm,
    with_stepsize,
    zopg,
)

OUT_ENV = "ZOPROX_OUT"
DEFAULT_OUT = "zoprox-out"
GRID_ETAS = (1.0, 0.1, 0.01, 0.001)
SOLVER_NAMES = ("ipzopm", "zopg")

TRACE_HEADER = "iter,h,evals,delta,sigma,epsilon,inner_iters,gap_bound,stationarity,step_norm,wall_ms"
SUMMARY_HEADER = (
    "solver,repeat,seed,eta,iterations,final_h,total_evals,termination_reason,error,trace_file"
)

_KNOWN_KEYS = {
    "problem", "solvers", "seed", "repeat", "out", "jobs", "no_timing",
    "n", "m", "mu",
    "data", "lambda", "fold_l2", "n_features",
    "max_iter", "termination_tol", "gamma", "curvature_cap", "max_inner",
    "sigma_mode", "sigma_value", "sigma_scale", "sigma_initial",
    "delta_mode", "delta_value", "delta_scale",
    "epsilon_mode", "epsilon_value", "epsilon_scale",
    "eta",
}
_LASSO_ONLY = {"n", "m"}
_CLASSIFY_ONLY = {"data", "lambda", "fold_l2", "n_features"}


# ---------------------------------------------------------------------------
# Spec model
# ---------------------------------------------------------------------------

@dataclass
class LassoProblemSpec:
    n: int
    m: int
    mu: float


@dataclass
class ClassifyProblemSpec:
    data: str
    lam: float
    mu: float
    fold_l2: bool
    n_features: Optional[int]


@dataclass
class ConfigSpec:
    """Wire-level solver settings; schedules are named families with scalars."""

    max_iter: int = 1000
    termination_tol: float = 1e-3
    gamma: Optional[float] = None
    curvature_cap: float = 1e8
    max_inner: int = 10_000
    sigma_mode: str = "heuristic"
    sigma_value: Optional[float] = None
    sigma_scale: float = 5000.0
    sigma_initial: float = 1.0
    delta_mode: str = "inverse_sqrt"
    delta_value: Optional[float] = None
    delta_scale: float = 1.0
    epsilon_mode: str = "inverse_square"
    epsilon_value: Optional[float] = None
    epsilon_scale: float = 1.0
    eta: Union[str, float] = "grid"


@dataclass
class ExperimentSpec:
    problem: Union[LassoProblemSpec, ClassifyProblemSpec]
    solvers: list[str]
    seed: int = 0
    repeat: int = 1
    jobs: int = 1
    no_timing: bool = False
    out: Optional[str] = None
    config: ConfigSpec = field(default_factory=ConfigSpec)


# ---------------------------------------------------------------------------
# Parsing and validation
# ---------------------------------------------------------------------------

def parse_spec_text(text: str) -> tuple[dict[str, str], list[str]]:
    """Parse ``key = value`` lines; '#' starts a comment, blanks are skipped.

    Returns the mapping and a list of malformed-line messages.
    """
    mapping: dict[str, str] = {}
    errors: list[str] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        hash_pos = raw.find("#")
        line = (raw[:hash_pos] if hash_pos >= 0 else raw).strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or not key:
            errors.append(f"line {line_number}: expected 'key = value', got {raw.strip()!r}")
            continue
        if key in mapping:
            errors.append(f"line {line_number}: duplicate key '{key}'")
            continue
        mapping[key] = value
    return mapping, errors


class _Reader:
    """Typed getters over a string mapping that collect every violation."""

    def __init__(self, mapping: dict[str, str]):
        self.mapping = mapping
        self.errors: list[str] = []

    def _raw(self, key: str) -> Optional[str]:
        return self.mapping.get(key)

    def int_(self, key: str, default=None, minimum=None, required=False):
        raw = self._raw(key)
        if raw is None:
            if required:
                self.errors.append(f"missing required key '{key}'")
            return default
        try:
            value = int(raw)
        except ValueError:
            self.errors.append(f"key '{key}': expected an integer, got {raw!r}")
            return default
        if minimum is not None and value < minimum:
            self.errors.append(f"key '{key}': must be >= {minimum}, got {value}")
            return default
        return value

    def float_(self, key: str, default=None, minimum=None, strict=False, required=False):
        raw = self._raw(key)
        if raw is None:
            if required:
                self.errors.append(f"missing required key '{key}'")
            return default
        try:
            value = float(raw)
        except ValueError:
            self.errors.append(f"key '{key}': expected a number, got {raw!r}")
            return default
        if not math.isfinite(value):
            self.errors.append(f"key '{key}': must be finite, got {raw!r}")
            return default
        if minimum is not None and (value < minimum or (strict and value == minimum)):
            bound = f"> {minimum}" if strict else f">= {minimum}"
            self.errors.append(f"key '{key}': must be {bound}, got {value}")
            return default
        return value

    def bool_(self, key: str, default=False):
        raw = self._raw(key)
        if raw is None:
            return default
        lowered = raw.lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        self.errors.append(f"key '{key}': expected a boolean, got {raw!r}")
        return default

    def choice(self, key: str, choices, default=None, required=False):
        raw = self._raw(key)
        if raw is None:
            if required:
                self.errors.append(f"missing required key '{key}'")
            return default
        if raw not in choices:
            self.errors.append(f"key '{key}': expected one of {sorted(choices)}, got {raw!r}")
            return default
        return raw

    def str_(self, key: str, default=None, required=False):
        raw = self._raw(key)
        if raw is None:
            if required:
                self.errors.append(f"missing required key '{key}'")
            return default
        if not raw:
            self.errors.append(f"key '{key}': value is empty")
            return default
        return raw


def compile_spec(mapping: dict[str, str]) -> tuple[Optional[ExperimentSpec], list[str]]:
    """Validate a mapping and build the typed spec; returns every violation."""
    reader = _Reader(mapping)
    errors = reader.errors

    for key in sorted(mapping):
        if key not in _KNOWN_KEYS:
            errors.append(f"unknown key '{key}'")

    kind = reader.choice("problem", ("lasso", "classify"), required=True)
    problem: Optional[Union[LassoProblemSpec, ClassifyProblemSpec]] = None
    if kind == "lasso":
        for key in sorted(_CLASSIFY_ONLY & mapping.keys()):
            errors.append(f"key '{key}' only applies to problem = classify")
        n = reader.int_("n", minimum=1, required=True)
        m = reader.int_("m", minimum=1, required=True)
        mu = reader.float_("mu", minimum=0.0, required=True)
        if n is not None and m is not None and mu is not None:
            problem = LassoProblemSpec(n=n, m=m, mu=mu)
    elif kind == "classify":
        for key in sorted(_LASSO_ONLY & mapping.keys()):
            errors.append(f"key '{key}' only applies to problem = lasso")
        data = reader.str_("data", required=True)
        lam = reader.float_("lambda", default=1e-3, minimum=0.0)
        mu = reader.float_("mu", default=1e-3, minimum=0.0)
        fold = reader.bool_("fold_l2", default=False)
        n_features = reader.int_("n_features", minimum=1)
        if data is not None and lam is not None and mu is not None:
            problem = ClassifyProblemSpec(
                data=data, lam=lam, mu=mu, fold_l2=fold, n_features=n_features
            )

    solvers_raw = mapping.get("solvers", "ipzopm,zopg")
    solvers = [token.strip() for token in solvers_raw.split(",") if token.strip()]
    if not solvers:
        errors.append("key 'solvers': at least one solver is required")
    for name in solvers:
        if name not in SOLVER_NAMES:
            errors.append(f"key 'solvers': unknown solver {name!r}")
    if len(set(solvers)) != len(solvers):
        errors.append("key 'solvers': duplicate solver names")

    seed = reader.int_("seed", default=0, minimum=0)
    repeat = reader.int_("repeat", default=1, minimum=1)
    jobs = reader.int_("jobs", default=1, minimum=1)
    no_timing = reader.bool_("no_timing", default=False)
    out = reader.str_("out")

    config = ConfigSpec()
    config.max_iter = reader.int_("max_iter", default=config.max_iter, minimum=1)
    config.termination_tol = reader.float_(
        "termination_tol", default=config.termination_tol, minimum=0.0
    )
    gamma_raw = mapping.get("gamma")
    if gamma_raw is not None and gamma_raw != "auto":
        config.gamma = reader.float_("gamma", minimum=0.0, strict=True)
    config.curvature_cap = reader.float_(
        "curvature_cap", default=config.curvature_cap, minimum=0.0, strict=True
    )
    config.max_inner = reader.int_("max_inner", default=config.max_inner, minimum=1)

    config.sigma_mode = reader.choice(
        "sigma_mode", ("heuristic", "constant"), default=config.sigma_mode
    )
    config.sigma_value = reader.float_("sigma_value", minimum=0.0, strict=True)
    if config.sigma_mode == "constant" and config.sigma_value is None:
        errors.append("key 'sigma_value': required when sigma_mode = constant")
    config.sigma_scale = reader.float_(
        "sigma_scale", default=config.sigma_scale, minimum=0.0, strict=True
    )
    config.sigma_initial = reader.float_(
        "sigma_initial", default=config.sigma_initial, minimum=0.0, strict=True
    )

    config.delta_mode = reader.choice(
        "delta_mode", ("inverse_sqrt", "constant"), default=config.delta_mode
    )
    config.delta_value = reader.float_("delta_value", minimum=0.0, strict=True)
    if config.delta_mode == "constant" and config.delta_value is None:
        errors.append("key 'delta_value': required when delta_mode = constant")
    config.delta_scale = reader.float_(
        "delta_scale", default=config.delta_scale, minimum=0.0, strict=True
    )

    config.epsilon_mode = reader.choice(
        "epsilon_mode", ("inverse_square", "constant"), default=config.epsilon_mode
    )
    config.epsilon_value = reader.float_("epsilon_value", minimum=0.0, strict=True)
    if config.epsilon_mode == "constant" and config.epsilon_value is None:
        errors.append("key 'epsilon_value': required when epsilon_mode = constant")
    config.epsilon_scale = reader.float_(
        "epsilon_scale", default=config.epsilon_scale, minimum=0.0, strict=True
    )

    eta_raw = mapping.get("eta")
    if eta_raw is not None and eta_raw != "grid":
        eta = reader.float_("eta", minimum=0.0, strict=True)
        if eta is not None:
            config.eta = eta

    if errors or problem is None:
        return None, errors
    spec = ExperimentSpec(
        problem=problem,
        solvers=solvers,
        seed=seed,
        repeat=repeat,
        jobs=jobs,
        no_timing=no_timing,
        out=out,
        config=config,
    )
    return spec, []


def validate_mapping(mapping: dict[str, str]) -> list[str]:
    """All spec violations, empty when the mapping describes a runnable experiment."""
    _, errors = compile_spec(mapping)
    return errors


def merge_mappings(base: dict[str, str], overrides: dict[str, str]) -> dict[str, str]:
    merged = dict(base)
    merged.update({k: v for k, v in overrides.items()})
    return merged


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

def to_solver_config(cs: ConfigSpec, seed: int = 0) -> SolverConfig:
    """Materialize schedule closures from the wire-level settings."""
    if cs.delta_mode == "constant":
        delta_value = float(cs.delta_value)
        delta_schedule = lambda k: delta_value  # noqa: E731
    else:
        delta_scale = float(cs.delta_scale)
        delta_schedule = lambda k: delta_scale / math.sqrt(k + 1)  # noqa: E731

    if cs.epsilon_mode == "constant":
        eps_value = float(cs.epsilon_value)
        epsilon_schedule = lambda k: eps_value  # noqa: E731
    else:
        eps_scale = float(cs.epsilon_scale)
        epsilon_schedule = lambda k: eps_scale / (k + 1) ** 2  # noqa: E731

    if cs.sigma_mode == "constant":
        sigma_schedule = constant_sigma(float(cs.sigma_value))
    else:
        sigma_schedule = heuristic_sigma(scale=cs.sigma_scale, initial=cs.sigma_initial)

    return SolverConfig(
        delta_schedule=delta_schedule,
        sigma_schedule=sigma_schedule,
        epsilon_schedule=epsilon_schedule,
        gamma=cs.gamma,
        termination_tol=cs.termination_tol,
        max_iter=cs.max_iter,
        seed=seed,
        curvature_cap=cs.curvature_cap,
        max_inner=cs.max_inner,
    )


def _prepare_problem(problem):
    if isinstance(problem, ClassifyProblemSpec):
        return load_libsvm(problem.data, n_features=problem.n_features)
    return None


def _make_model(problem, seed: int, prepared):
    if isinstance(problem, LassoProblemSpec):
        inst = gen_lasso(problem.n, problem.m, problem.mu, seed=seed)
        model = lasso_blackbox(inst)
    else:
        inst = ClassificationInstance(dataset=prepared, lam=problem.lam, mu=problem.mu)
        model = sigmoid_objective(inst, fold_l2=problem.fold_l2)
    x0 = standard_normal(seeded_rng(seed, stream=1), model.dimension)
    return model, x0


@dataclass
class RunOutcome:
    solver: str
    repeat_index: int
    seed: int
    eta: Optional[float]
    report: Optional[SolverReport]
    error: Optional[str]
    trace_name: str
    trace_csv: str

    @property
    def failed(self) -> bool:
        return self.report is None or self.report.reason == "error"


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    outcomes: list[RunOutcome]
    summary_csv: str

    @property
    def all_failed(self) -> bool:
        return all(outcome.failed for outcome in self.outcomes)


def _rank_key(report: SolverReport) -> float:
    return report.h if math.isfinite(report.h) else math.inf


def _run_one(spec: ExperimentSpec, solver: str, repeat_index: int, prepared) -> RunOutcome:
    seed = spec.seed + repeat_index
    trace_name = f"{solver}_rep{repeat_index}.csv"
    try:
        model, x0 = _make_model(spec.problem, seed, prepared)
        config = to_solver_config(spec.config, seed=seed)
        eta: Optional[float] = None
        if solver == "ipzopm":
            report = ipzopm(model, config, x0)
        else:
            if spec.config.eta == "grid":
                report = None
                for candidate in GRID_ETAS:
                    probe = zopg(model, with_stepsize(config, candidate), x0)
                    if report is None or _rank_key(probe) < _rank_key(report):
                        report, eta = probe, candidate
            else:
                eta = float(spec.config.eta)
                report = zopg(model, with_stepsize(config, eta), x0)
        return RunOutcome(
            solver=solver,
            repeat_index=repeat_index,
            seed=seed,
            eta=eta,
            report=report,
            error=report.error,
            trace_name=trace_name,
            trace_csv=render_trace(report, no_timing=spec.no_timing),
        )
    except (ZoproxError, OSError) as exc:
        return RunOutcome(
            solver=solver,
            repeat_index=repeat_index,
            seed=seed,
            eta=None,
            report=None,
            error=str(exc),
            trace_name=trace_name,
            trace_csv=TRACE_HEADER + "\n",
        )


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Execute every (solver, repeat) run and render all CSV bodies.

    Runs are independent; with ``jobs > 1`` they execute on a thread pool.
    Output order and content follow the spec alone, never scheduling.
    """
    tasks = [
        (solver, repeat_index)
        for solver in spec.solvers
        for repeat_index in range(spec.repeat)
    ]
    try:
        prepared = _prepare_problem(spec.problem)
    except (ZoproxError, OSError) as exc:
        outcomes = [
            RunOutcome(
                solver=solver,
                repeat_index=repeat_index,
                seed=spec.seed + repeat_index,
                eta=None,
                report=None,
                error=str(exc),
                trace_name=f"{solver}_rep{repeat_index}.csv",
                trace_csv=TRACE_HEADER + "\n",
            )
            for solver, repeat_index in tasks
        ]
        return ExperimentResult(
            spec=spec, outcomes=outcomes, summary_csv=render_summary(outcomes)
        )
    if spec.jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=spec.jobs) as pool:
            outcomes = list(
                pool.map(lambda t: _run_one(spec, t[0], t[1], prepared), tasks)
            )
    else:
        outcomes = [_run_one(spec, solver, r, prepared) for solver, r in tasks]
    return ExperimentResult(spec=spec, outcomes=outcomes, summary_csv=render_summary(outcomes))


# ---------------------------------------------------------------------------
# Rendering and file output
# ---------------------------------------------------------------------------

def fmt_float(value: float) -> str:
    """Shortest decimal that round-trips to the same double; '.' separator."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def render_trace(report: SolverReport, no_timing: bool = False) -> str:
    lines = [TRACE_HEADER]
    for rec in report.records:
        wall_ms = 0.0 if no_timing else rec.wall_time * 1000.0
        lines.append(
            ",".join(
                (
                    str(rec.k),
                    fmt_float(rec.h),
                    str(rec.evals),
                    fmt_float(rec.delta),
                    fmt_float(rec.sigma),
                    fmt_float(rec.epsilon),
                    str(rec.inner_iters),
                    fmt_float(rec.gap_bound),
                    fmt_float(rec.stationarity),
                    fmt_float(rec.step_norm),
                    fmt_float(wall_ms),
                )
            )
        )
    return "\n".join(lines) + "\n"


def render_summary(outcomes: list[RunOutcome]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER.split(","))
    for outcome in outcomes:
        report = outcome.report
        writer.writerow(
            (
                outcome.solver,
                outcome.repeat_index,
                outcome.seed,
                "" if outcome.eta is None else fmt_float(outcome.eta),
                0 if report is None else report.iterations,
                "" if report is None else fmt_float(report.h),
                0 if report is None else report.total_evals,
                "error" if report is None else report.reason,
                outcome.error or "",
                outcome.trace_name,
            )
        )
    return buffer.getvalue()


def write_outputs(result: ExperimentResult, out_dir) -> list[Path]:
    """Write every trace plus ``summary.csv`` under ``out_dir`` (created if
    needed); returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for outcome in result.outcomes:
        path = out / outcome.trace_name
        path.write_text(outcome.trace_csv, encoding="utf-8", newline="\n")
        written.append(path)
    summary_path = out / "summary.csv"
    summary_path.write_text(result.summary_csv, encoding="utf-8", newline="\n")
    written.append(summary_path)
    return written
