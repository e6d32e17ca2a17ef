import pytest
from fastapi import FastAPI

pytest.importorskip("httpx")

from fastapi.testclient import TestClient

from src.model.experiment_model import RunSummary
from src.model.report_model import BoundCheck, CertificateReport, Verdict
from src.router.experiment import router as experiment_router
from src.service.experiment_service import ExperimentService
from src.tests.cases import ELLIPSOID_PROBLEM, GEOMETRIC_PROBLEM


def _client() -> TestClient:
    app = FastAPI()
    app.include_router(experiment_router)
    return TestClient(app)


def test_certify_with_stubbed_service(monkeypatch: pytest.MonkeyPatch):
    async def fake_certify(self, problem, budget=None) -> CertificateReport:
        return CertificateReport(
            verdict=Verdict.UNBOUNDED,
            witness=[0.3, 0.9],
            witness_kind="p",
            trigger_index=12,
            bound_formula="nag-detection",
            iterations=12,
        )

    monkeypatch.setattr(ExperimentService, "certify", fake_certify)

    response = _client().post("/experiment/certify", json={"problem": GEOMETRIC_PROBLEM, "budget": 50})

    assert response.status_code == 200
    body = response.json()
    assert body["success"] is True
    assert body["data"]["verdict"] == "UNBOUNDED"
    assert body["data"]["trigger_index"] == 12


def test_run_with_stubbed_service(monkeypatch: pytest.MonkeyPatch):
    async def fake_run(self, config, write=True) -> RunSummary:
        assert write is False
        return RunSummary(
            name=config.name,
            algorithm=config.algorithm,
            checks=[BoundCheck(name="gd-p-error", passed=True, max_slack=0.5)],
            max_bound_slack=0.5,
            runtime_ms=1.0,
        )

    monkeypatch.setattr(ExperimentService, "run", fake_run)

    payload = {"name": "api_gd", "problem": ELLIPSOID_PROBLEM, "algorithm": "gd", "k_max": 10}
    response = _client().post("/experiment/run", json=payload)

    assert response.status_code == 200
    body = response.json()
    assert body["success"] is True
    assert body["data"]["name"] == "api_gd"
    assert body["data"]["checks"][0]["name"] == "gd-p-error"


def test_certify_geometric_program():
    response = _client().post("/experiment/certify", json={"problem": GEOMETRIC_PROBLEM, "budget": 100})

    assert response.status_code == 200
    body = response.json()
    assert body["success"] is True
    assert body["data"]["verdict"] == "UNBOUNDED"
    assert body["data"]["trigger_index"] <= 20


def test_certify_reports_errors():
    # ||x||^2/2 没有共轭上界，certify 无法给出阈值
    response = _client().post("/experiment/certify", json={"problem": {"type": "quadratic", "dim": 2}, "budget": 10})

    assert response.status_code == 200
    body = response.json()
    assert body["success"] is False
    assert body["error"]


def test_run_rejects_invalid_config():
    payload = {"name": "api_gd", "problem": ELLIPSOID_PROBLEM, "algorithm": "gd"}
    response = _client().post("/experiment/run", json=payload)

    assert response.status_code == 422
