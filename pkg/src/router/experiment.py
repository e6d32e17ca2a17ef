from fastapi.routing import APIRouter

from src.model.experiment_model import (
    APIErrorResponse,
    CertifyRequest,
    CertifyResponse,
    CertifySuccessResponse,
    ExperimentConfig,
    RunResponse,
    RunSuccessResponse,
)
from src.service.experiment_service import ExperimentService


router = APIRouter(prefix="/experiment", tags=["experiment"])


@router.post("/certify", response_model=CertifyResponse)
async def certify_problem(request: CertifyRequest) -> CertifyResponse:
    experiment_service = ExperimentService()
    try:
        report = await experiment_service.certify(request.problem, request.budget)
        return CertifySuccessResponse(data=report)
    except Exception as e:
        return APIErrorResponse(error=str(e))


@router.post("/run", response_model=RunResponse)
async def run_experiment(config: ExperimentConfig) -> RunResponse:
    """outputs 字段被忽略，不写文件。"""
    experiment_service = ExperimentService()
    try:
        summary = await experiment_service.run(config, write=False)
        return RunSuccessResponse(data=summary)
    except Exception as e:
        return APIErrorResponse(error=str(e))
