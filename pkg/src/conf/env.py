from dotenv import load_dotenv
from pydantic_settings import BaseSettings
from pydantic import Field
from pathlib import Path

env_path = Path(__file__).parent.parent.parent / ".env"

load_dotenv(env_path)


class Settings(BaseSettings):
    DEBUG_MODE: bool = Field(default=False)
    LOG_LEVEL: str = Field(default="INFO")
    OUTPUT_DIR: str = Field(default="outputs")
    # sweep 时同时运行的实验数
    SWEEP_CONCURRENCY: int = Field(default=4, ge=1)
    CERTIFY_BUDGET: int = Field(default=10_000, ge=1)
    FD_STEP: float = Field(default=1e-5, gt=0)
    WOLFE_MAX_ITER: int = Field(default=10_000, ge=1)
    ODE_SAMPLES_PER_DECADE: int = Field(default=32, ge=1)
    ODE_REPORT_T_MIN: float = Field(default=1.0, gt=0)
    # ODE 界检查的乘性松弛
    ODE_BOUND_SLACK: float = Field(default=1e-3, ge=0)
    API_HOST: str = Field(default="0.0.0.0")
    API_PORT: int = Field(default=8001)


settings = Settings()  # type: ignore

if __name__ == "__main__":
    print(settings.model_dump_json(indent=2, exclude_none=True))
