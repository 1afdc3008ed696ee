from pathlib import Path

import pytest

pytestmark = pytest.mark.asyncio

API = "/api/v1/matroid"
DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def matroid_text(name: str) -> str:
    return (DATA_DIR / name).read_text()


async def test_health(async_client):
    response = await async_client.get("/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "healthy"
    assert body["caps"]["max_canonical_size"] == 12


async def test_alpha_of_ground_set(async_client):
    response = await async_client.post(
        f"{API}/alpha", json={"matroid": matroid_text("g841.matroid"), "subset": ["E"]}
    )
    assert response.status_code == 200
    data = response.json()["data"]
    assert data["subset_value"] == -1
    assert data["strict"] is False
    assert data["negative_subset"] == "{1,2,3,4,5,6,7,8}"
    assert data["values"]["{1,3,7,8}"] == 1


async def test_decide_u24(async_client):
    response = await async_client.post(
        f"{API}/decide", json={"matroid": matroid_text("u24.matroid"), "include_trace": True}
    )
    assert response.status_code == 200
    body = response.json()
    assert body["success"] is True
    assert body["data"]["decision"] == "gammoid"
    assert body["data"]["case"] == "i"
    assert body["data"]["trace"][-1].endswith("decisive, case (i)")


async def test_decide_mk4(async_client):
    response = await async_client.post(f"{API}/decide", json={"matroid": matroid_text("mk4.matroid")})
    data = response.json()["data"]
    assert data["decision"] == "notGammoid"
    assert data["description"].startswith("NOT A GAMMOID: excluded minor M(K4)")
    assert data["trace"] is None


async def test_decide_exhausted(async_client):
    response = await async_client.post(
        f"{API}/decide", json={"matroid": matroid_text("g841.matroid"), "max_iterations": 1}
    )
    assert response.status_code == 200
    body = response.json()
    assert body["success"] is False
    assert "partial tableau" in body["message"]


async def test_decide_over_size_cap(async_client):
    text = "ELEMENTS 13\nBASES\n-\n"
    response = await async_client.post(f"{API}/decide", json={"matroid": text})
    assert response.status_code == 413
    assert response.json()["detail"]["error_code"] == "SIZE_EXCEEDED"


async def test_sbo_mk4(async_client):
    response = await async_client.post(f"{API}/sbo", json={"matroid": matroid_text("mk4.matroid")})
    body = response.json()
    assert body["message"] == "not strongly base-orderable"
    assert body["data"]["orderable"] is False
    assert body["data"]["failing_bijections"] == 6


async def test_malformed_matroid(async_client):
    response = await async_client.post(f"{API}/sbo", json={"matroid": "BASES\n0\n"})
    assert response.status_code == 400
    assert response.json()["detail"]["error_code"] == "MATROID_FORMAT_ERROR"


async def test_axiom_violation(async_client):
    response = await async_client.post(f"{API}/alpha", json={"matroid": "ELEMENTS 4\nBASES\n0 1\n2 3\n"})
    assert response.status_code == 422


async def test_gamma(async_client):
    response = await async_client.post(f"{API}/gamma", json={"digraph": matroid_text("u12.digraph")})
    assert response.status_code == 200
    assert response.json()["data"].startswith("ELEMENTS 2\n")


async def test_missing_field_is_rejected(async_client):
    response = await async_client.post(f"{API}/decide", json={})
    assert response.status_code == 422


async def test_unexpected_library_error_is_500(async_client, monkeypatch):
    from app.api.services.engine_service import engine_service
    from app.core.exceptions import NotDecisiveError

    def fail(*args, **kwargs):
        raise NotDecisiveError()

    monkeypatch.setattr(engine_service, "decide", fail)
    response = await async_client.post(f"{API}/decide", json={"matroid": matroid_text("u24.matroid")})
    assert response.status_code == 500
    assert response.json()["detail"]["error_code"] == "NOT_DECISIVE"
