import pytest
from fastapi.testclient import TestClient

from zoprox import bench
from zoprox.service import ExperimentRequest, app, execute_run


SPEC_TEXT = """
problem = lasso
n = 12
m = 5
mu = 0.5
seed = 3
repeat = 1
solvers = ipzopm,zopg
max_iter = 25
eta = 0.01
no_timing = true
"""


@pytest.fixture()
def client():
    return TestClient(app)


def test_health(client):
    data = client.get("/health").json()
    assert data["status"] == "ok"
    assert data["version"]


def test_validate_ok(client):
    response = client.post(
        "/experiments/validate", json={"spec_text": SPEC_TEXT, "overrides": {}}
    )
    assert response.status_code == 200
    assert response.json() == {"ok": True, "errors": []}


def test_validate_reports_errors(client):
    response = client.post(
        "/experiments/validate",
        json={"spec_text": SPEC_TEXT, "overrides": {"mu": "-2", "solvers": "nope"}},
    )
    data = response.json()
    assert data["ok"] is False
    assert any("'mu'" in e for e in data["errors"])
    assert any("unknown solver" in e for e in data["errors"])


def test_run_returns_csv_bodies_matching_core(client):
    response = client.post("/experiments/run", json={"spec_text": SPEC_TEXT, "overrides": {}})
    assert response.status_code == 200
    data = response.json()
    assert data["ok"] is True
    assert [run["solver"] for run in data["runs"]] == ["ipzopm", "zopg"]

    mapping, _ = bench.parse_spec_text(SPEC_TEXT)
    spec, _ = bench.compile_spec(mapping)
    direct = bench.run_experiment(spec)
    assert data["summary_csv"] == direct.summary_csv
    for run, outcome in zip(data["runs"], direct.outcomes):
        assert run["trace_csv"] == outcome.trace_csv
        assert run["trace_name"] == outcome.trace_name
        assert run["iterations"] == outcome.report.iterations
        assert run["total_evals"] == outcome.report.total_evals


def test_run_rejects_invalid_spec(client):
    response = client.post(
        "/experiments/run", json={"spec_text": "problem = lasso\n", "overrides": {}}
    )
    data = response.json()
    assert data["ok"] is False
    assert data["runs"] == []
    assert any("missing required key" in e for e in data["errors"])


def test_run_overrides_take_precedence(client):
    response = client.post(
        "/experiments/run",
        json={"spec_text": SPEC_TEXT, "overrides": {"solvers": "ipzopm", "repeat": "2"}},
    )
    data = response.json()
    assert [run["solver"] for run in data["runs"]] == ["ipzopm", "ipzopm"]
    assert [run["seed"] for run in data["runs"]] == [3, 4]


def test_failed_runs_have_null_final_h():
    request = ExperimentRequest(
        spec_text="problem = classify\ndata = /nonexistent/file\nsolvers = ipzopm\n"
    )
    response = execute_run(request)
    assert response.ok is False
    assert response.runs[0].final_h is None
    assert response.runs[0].error
    assert response.out is None


def test_run_echoes_spec_out_hint(client):
    response = client.post(
        "/experiments/run",
        json={"spec_text": SPEC_TEXT, "overrides": {"out": "somewhere/else"}},
    )
    assert response.json()["out"] == "somewhere/else"
