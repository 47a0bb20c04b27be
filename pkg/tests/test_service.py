import csv
import io

import pytest
from fastapi.testclient import TestClient

from hybridqc.schemas import RunRecord
from hybridqc.service import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok" and body["schema_version"] == 1


def test_exact_run(client):
    resp = client.post("/runs", json={"command": "exact", "size": 6})
    assert resp.status_code == 200
    rec = RunRecord.model_validate(resp.json())
    assert rec.result.e0 == pytest.approx(-11.2111025509, abs=1e-8)


def test_inline_instance(client):
    resp = client.post("/runs", json={"command": "qaoa", "instance_text": "3 2\n10\n01\n11\n", "p": 2})
    assert resp.status_code == 200
    assert resp.json()["result"]["evals"] <= 200


def test_validation_errors(client):
    assert client.post("/runs", json={"command": "nope"}).status_code == 422
    assert client.post("/runs", json={"command": "exact", "size": 4, "bogus": 1}).status_code == 422
    assert client.post("/runs", json={"command": "quasi", "size": 4, "init": "random"}).status_code == 422
    assert client.post("/runs", json={"command": "qaoa", "instance_text": "x"}).status_code == 400
    assert client.post("/runs", json={"command": "vqe"}).status_code == 400


def test_resource_cap(client, monkeypatch):
    monkeypatch.setenv("HYBRIDQC_MAX_QUBITS", "6")
    assert client.post("/runs", json={"command": "exact", "size": 7}).status_code == 413


def test_solver_failure_returns_partial(client):
    resp = client.post("/runs", json={"command": "exact", "size": 10, "max_iter": 3})
    assert resp.status_code == 500
    assert resp.json()["status"] == "failed"


def test_sweep_csv(client):
    resp = client.post("/sweeps", json={"algorithms": ["aqa"], "sizes": [4, 5]})
    rows = list(csv.DictReader(io.StringIO(resp.text)))
    assert resp.status_code == 200 and [int(r["N"]) for r in rows] == [4, 5]
