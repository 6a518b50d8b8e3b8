import numpy as np
import pytest
from fastapi.testclient import TestClient

from spinladder.service.app import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert body["version"]


def test_presets_listing(client):
    body = client.get("/presets").json()
    names = {p["name"] for p in body}
    assert "fig1a" in names and "figA2" in names
    fig5 = next(p for p in body if p["name"] == "fig5")
    assert fig5["config"]["boundary"] == "periodic"


def test_duality_endpoint(client):
    body = client.post(
        "/duality", json={"L": 4, "D": 1.0, "n_draws": 2, "seed": 5}
    ).json()
    assert body["worst_mismatch"] < 1e-10
    assert len(body["reports"]) == 2
    assert body["reports"][0]["dims_match"]


def test_duality_with_explicit_fields(client):
    body = client.post(
        "/duality", json={"L": 2, "J": 0.9, "g": 1.3, "fields": [0.0]}
    ).json()
    assert body["worst_mismatch"] < 1e-12


def test_duality_field_length_validated(client):
    resp = client.post("/duality", json={"L": 4, "fields": [0.1]})
    assert resp.status_code == 422


def test_gap_ratio_endpoint(client):
    body = client.post(
        "/gap-ratio",
        json={"L": 8, "D": 3.0, "samples": 3, "seed": 11, "workers": 1},
    ).json()
    assert 0.3 < body["mean_r"] < 0.6
    assert body["reference_goe"] == pytest.approx(0.5307)
    assert body["n_samples"] == 3


def test_experiment_endpoint_runs_a_small_preset(client):
    request = {
        "preset": "fig4",
        "overrides": {
            "L": 6,
            "h_list": [0.2],
            "grid": {"tmin": 0.1, "tmax": 10.0, "points_per_decade": 4},
        },
        "workers": 1,
    }
    body = client.post("/experiments/run", json=request).json()
    assert body["preset"] == "fig4"
    table = body["tables"][0]
    assert table["columns"][0] == "t"
    values = np.asarray(table["rows"])
    assert values.shape[1] == len(table["columns"])
    assert body["manifest"]["config"]["h_list"] == [0.2]


def test_unknown_preset_is_a_client_error(client):
    resp = client.post("/experiments/run", json={"preset": "fig99"})
    assert resp.status_code == 422
    assert "unknown preset" in resp.json()["detail"]


def test_dimension_cap_maps_to_413(client):
    request = {
        "preset": "figA1",
        "overrides": {"L": 14, "dim_cap": 4096},
    }
    resp = client.post("/experiments/run", json=request)
    assert resp.status_code == 413


def test_bad_override_types_rejected(client):
    resp = client.post(
        "/experiments/run", json={"preset": "fig1b", "overrides": {"samples": 0}}
    )
    assert resp.status_code == 422
