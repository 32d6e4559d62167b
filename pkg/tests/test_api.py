import io

import pytest
from fastapi.testclient import TestClient

from betadyn.api import app
from betadyn.cli import run
from betadyn.errors import PrecisionExhausted
from betadyn.operations import OPERATIONS

client = TestClient(app)


def test_health():
    r = client.get("/health")
    assert r.status_code == 200 and r.json()["status"] == "ok"


def test_every_operation_has_a_route():
    paths = {route.path for route in app.routes}
    assert {f"/{name}" for name in OPERATIONS} <= paths


def test_classify_route():
    r = client.post("/classify", json={"q": "0,0,0,3"})
    assert r.status_code == 200
    body = r.json()
    assert body["command"] == "classify"
    assert body["payload"]["upper"] == "1/4"


def test_examples_route_matches_in_process_run():
    r = client.post("/examples", json={})
    dims = [row["dimension"] for row in r.json()["payload"]]
    assert dims == ["1/4", "1/9", "1/2", "0/1", "1/25", "1/3", "9/20"]


def test_domain_errors_are_422_with_error_body():
    r = client.post("/cylinder", json={"beta": "golden", "word": "11"})
    assert r.status_code == 422
    assert r.json()["error"] == "not_admissible"


def test_unknown_fields_are_rejected():
    r = client.post("/sw", json={"v": "1", "colour": "red"})
    assert r.status_code == 422


def test_precision_exhaustion_is_503(monkeypatch):
    def exhausted(request):
        raise PrecisionExhausted("spent")

    model, _ = OPERATIONS["sw"]
    monkeypatch.setitem(OPERATIONS, "sw", (model, exhausted))
    r = client.post("/sw", json={"v": "1"})
    assert r.status_code == 503
    assert r.json()["error"] == "precision_exhausted"


@pytest.fixture
def live_server(monkeypatch):
    """Route the CLI's HTTP client through the in-memory app."""
    import httpx

    def post(url, json=None, timeout=None):
        path = "/" + url.split("/", 3)[3]
        return client.post(path, json=json)

    monkeypatch.setattr(httpx, "post", post)
    return "http://testserver"


@pytest.mark.parametrize("argv", [
    ["classify", "--q", "0,0,1,3"],
    ["partition", "--beta", "golden", "--n", "3", "--format", "csv"],
    ["examples", "--format", "table"],
])
def test_thin_client_matches_in_process(live_server, argv):
    local, remote = io.StringIO(), io.StringIO()
    assert run(argv, local) == 0
    assert run(argv + ["--server", live_server], remote) == 0
    assert local.getvalue() == remote.getvalue()


def test_thin_client_reports_errors(live_server):
    out = io.StringIO()
    assert run(["cylinder", "--beta", "golden", "--word", "11", "--server", live_server], out) == 1
    assert '"not_admissible"' in out.getvalue()
