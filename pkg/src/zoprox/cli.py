"""Command-line client for the experiment service.

The CLI only parses flags, reads/writes files and talks to the service API:
all experiment logic lives behind the service handlers. Without ``--server``
the handlers run in-process; with it the same requests go over HTTP.

Exit codes: 0 on success (at least one run finished), 1 when every run failed
or on I/O trouble, 2 on usage or spec errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import httpx

from .bench import DEFAULT_OUT, OUT_ENV
from .service.app import execute_run, execute_validate
from .service.schemas import ExperimentRequest, RunResponse, ValidateResponse


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zoprox",
        description="Zeroth-order composite optimization benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write trace CSVs")
    _spec_flags(run)
    run.add_argument("--out", help="output directory (default: spec key, then $%s)" % OUT_ENV)
    run.add_argument("--no-timing", action="store_true", help="zero the wall_ms column")
    run.add_argument("--jobs", type=int, help="max concurrent runs")

    val = sub.add_parser("validate", help="check a spec without running it")
    _spec_flags(val)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _spec_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--spec", help="path to a key = value spec file")
    sub.add_argument(
        "--solver",
        action="append",
        dest="solvers",
        metavar="NAME",
        help="solver to run (repeatable; overrides the spec)",
    )
    sub.add_argument("--seed", type=int, help="base seed; repeats add their index")
    sub.add_argument("--repeat", type=int, help="number of repeats with seed offsets")
    sub.add_argument("--server", help="base URL of a running service; default is in-process")


def _read_spec_text(path: str | None) -> str:
    if path is None:
        return ""
    return Path(path).read_text(encoding="utf-8")


def _request_from_args(args: argparse.Namespace) -> ExperimentRequest:
    overrides: dict[str, str] = {}
    if args.solvers:
        overrides["solvers"] = ",".join(args.solvers)
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.repeat is not None:
        overrides["repeat"] = str(args.repeat)
    if getattr(args, "jobs", None) is not None:
        overrides["jobs"] = str(args.jobs)
    if getattr(args, "no_timing", False):
        overrides["no_timing"] = "true"
    return ExperimentRequest(spec_text=_read_spec_text(args.spec), overrides=overrides)


def _make_client(server: str) -> httpx.Client:
    return httpx.Client(base_url=server, timeout=None)


def _remote_post(server: str, path: str, request: ExperimentRequest) -> dict:
    with _make_client(server) as client:
        response = client.post(path, json=request.model_dump())
        response.raise_for_status()
        return response.json()


def _cmd_validate(args: argparse.Namespace) -> int:
    request = _request_from_args(args)
    if args.server:
        result = ValidateResponse.model_validate(
            _remote_post(args.server, "/experiments/validate", request)
        )
    else:
        result = execute_validate(request)
    if result.ok:
        print("spec ok")
        return 0
    for message in result.errors:
        print(f"spec error: {message}", file=sys.stderr)
    return 2


def _cmd_run(args: argparse.Namespace) -> int:
    request = _request_from_args(args)
    if args.server:
        response = RunResponse.model_validate(
            _remote_post(args.server, "/experiments/run", request)
        )
    else:
        response = execute_run(request)

    if response.errors:
        for message in response.errors:
            print(f"spec error: {message}", file=sys.stderr)
        return 2

    out_dir = args.out or response.out or os.environ.get(OUT_ENV) or DEFAULT_OUT
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for run in response.runs:
        (out / run.trace_name).write_text(run.trace_csv, encoding="utf-8", newline="\n")
        status = run.termination_reason if run.error is None else f"error: {run.error}"
        h_text = "nan" if run.final_h is None else repr(run.final_h)
        print(
            f"{run.solver} rep={run.repeat} seed={run.seed}: {status}, "
            f"iterations={run.iterations}, h={h_text}, evals={run.total_evals}"
        )
    (out / "summary.csv").write_text(response.summary_csv, encoding="utf-8", newline="\n")
    print(f"wrote {len(response.runs)} trace(s) and summary.csv to {out}")
    return 0 if response.ok else 1


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_serve(args)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    except httpx.HTTPError as exc:
        print(f"service error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
