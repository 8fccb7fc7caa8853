"""HTTP surface"""
import time

import pytest
from fastapi.testclient import TestClient

from app.main import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as test_client:
        yield test_client


def test_root_and_health(client):
    assert client.get("/").json()["docs"] == "/docs"
    assert client.get("/health").json() == {"status": "healthy"}


def test_partition(client):
    response = client.post("/partition/", json={"n": 40, "p": 0.5, "seed": 1, "params": {"ca": 0.5},
                                                "include_cliques": True})
    assert response.status_code == 200
    body = response.json()
    assert body["verification"]["passed"]
    assert len(body["cliques"]) == body["verification"]["clique_count"]


def test_partition_rejects_bad_p(client):
    assert client.post("/partition/", json={"n": 40, "p": 1.5}).status_code == 422


def test_infeasible_schedule_conflict(client):
    response = client.post("/partition/", json={"n": 200, "p": 0.01, "params": {"ca": 2.0, "allow_q_clamp": False}})
    assert response.status_code == 409
    assert "round 0" in response.json()["detail"]


def test_clamped_schedule_runs(client):
    response = client.post("/partition/", json={"n": 200, "p": 0.01, "params": {"ca": 2.0}})
    assert response.status_code == 200
    body = response.json()
    assert body["schedule"]["k"] == 3
    assert body["verification"]["passed"]


def test_coloring(client):
    response = client.post("/coloring/", json={"n": 12, "r": 3, "m": 400, "checkpoints": [0.0, 0.25]})
    assert response.status_code == 200
    body = response.json()
    assert body["plan"]["q"] == 100
    assert body["verification"]["passed"]
    assert len(body["run"]["snapshots"]) == 2


def test_coloring_limits_complete_instances(client):
    assert client.post("/coloring/", json={"n": 200, "r": 3, "m": 400}).status_code == 422


def test_coloring_bad_mode(client):
    assert client.post("/coloring/", json={"n": 12, "r": 3, "m": 400, "mode": "other"}).status_code == 422


def test_audit(client):
    spec = {"clique_targets": [{"s_size": 1, "j": 2, "samples": 5}],
            "neighborhood_targets": [{"s_size": 1, "samples": 5}]}
    response = client.post("/audit/", json={"n": 80, "p": 0.5, "params": {"ca": 0.5, "max_rounds": 1}, "spec": spec})
    assert response.status_code == 200
    assert len(response.json()["rows"]) == 2


def test_prague(client):
    response = client.post("/prague/", json={"n": 24, "p": 0.5, "params": {"ca": 0.5}, "include_labels": True})
    assert response.status_code == 200
    body = response.json()
    assert body["report"]["passed"]
    assert len(body["labels"]) == 24
    assert all(len(v) == body["d"] for v in body["labels"])


def test_lower_bounds(client):
    response = client.get("/prague/lower-bounds", params={"n": 1024, "p": 0.5})
    assert response.status_code == 200
    assert response.json()["s"] == 20
    assert client.get("/prague/lower-bounds", params={"n": 1024, "p": 1.0}).status_code == 422


def test_experiment_job(client, tmp_path):
    config = {"mode": "lowerbound", "grid": {"n": [64], "p": [0.5], "eps": [0.1]}, "seeds": [0, 1],
              "out_dir": str(tmp_path)}
    response = client.post("/experiments/", json=config)
    assert response.status_code == 202
    job_id = response.json()["job_id"]
    deadline = time.time() + 30
    status = None
    while time.time() < deadline:
        status = client.get(f"/experiments/{job_id}").json()
        if status["status"] in ("done", "failed"):
            break
        time.sleep(0.1)
    assert status["status"] == "done"
    assert status["trials"] == 2


def test_unknown_experiment(client):
    assert client.get("/experiments/nope").status_code == 404
