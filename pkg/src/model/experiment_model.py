from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.model.problem_model import ProblemSpec
from src.model.report_model import BoundCheck, CertificateReport, Verdict

Algorithm = Literal["gd", "nag", "mirror", "nag_ode", "amd_ode"]
ScheduleName = Literal["constant-eta", "nesterov", "polynomial", "custom"]
ExtraCheck = Literal["correspondence", "tightness"]

DISCRETE_ALGORITHMS = {"gd", "nag", "mirror"}


class APIErrorResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    success: Literal[False] = Field(
        default=False,
        description="是否成功，失败时固定为 false",
    )
    error: str = Field(..., min_length=1, description="错误信息")


class OutputPaths(BaseModel):
    model_config = ConfigDict(extra="forbid")

    csv: str | None = Field(default=None, description="逐迭代 CSV 路径，相对路径基于 --out 目录")
    summary: str | None = Field(default=None, description="汇总 JSON 路径")


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., min_length=1, description="实验名")
    problem: ProblemSpec = Field(..., description="目标函数")
    algorithm: Algorithm = Field(..., description="算法")
    schedule: ScheduleName | None = Field(default=None, description="步长序列；gd/mirror 为 constant-eta，nag 默认 polynomial")
    eta: float | None = Field(default=None, gt=0, description="constant-eta 的步长，默认 1/L")
    custom_A: list[float] | None = Field(default=None, description="custom 序列的 A_0, A_1, ...")
    L: float | None = Field(default=None, gt=0, description="覆盖目标的光滑常数")
    x0: list[float] | None = Field(default=None, description="初始点，默认原点")
    k_max: int | None = Field(default=None, ge=1, description="离散算法的迭代数")
    t_end: float | None = Field(default=None, gt=0, description="ODE 积分终点")
    dt: float | None = Field(default=None, gt=0, description="ODE 步长")
    t0: float | None = Field(default=None, gt=0, description="ODE 起点，默认 dt")
    r: float | None = Field(default=None, gt=0, description="nag_ode 的 r（默认 2）或 amd_ode 的 R（默认 4）")
    mirror_F: ProblemSpec | None = Field(default=None, description="镜像下降的 F，默认 ||·||^2/2")
    inf_g: float | None = Field(default=None, description="已知的 inf g，覆盖解析值")
    extra_checks: list[ExtraCheck] = Field(default_factory=list, description="附加检查")
    outputs: OutputPaths = Field(default_factory=OutputPaths, description="输出文件")
    assert_bounds: bool = Field(default=False, description="界检查失败时以退出码 2 结束")
    seed: int = Field(default=0, description="随机参考点采样的种子")

    @model_validator(mode="after")
    def check_consistency(self) -> "ExperimentConfig":
        if self.algorithm in DISCRETE_ALGORITHMS:
            if self.k_max is None:
                raise ValueError(f"algorithm '{self.algorithm}' needs k_max")
            for field in ("t_end", "dt", "t0", "r"):
                if getattr(self, field) is not None:
                    raise ValueError(f"'{field}' is only valid with an ODE algorithm")
        else:
            if self.t_end is None or self.dt is None:
                raise ValueError(f"algorithm '{self.algorithm}' needs t_end and dt")
            if self.dt > self.t_end:
                raise ValueError("dt must not exceed t_end")
            if self.t0 is not None and self.t0 > self.t_end:
                raise ValueError("t0 must not exceed t_end")
            for field in ("k_max", "schedule", "eta", "custom_A"):
                if getattr(self, field) is not None:
                    raise ValueError(f"'{field}' is only valid with a discrete algorithm")
        if self.algorithm in ("gd", "mirror") and self.schedule not in (None, "constant-eta"):
            raise ValueError(f"algorithm '{self.algorithm}' supports only the constant-eta schedule")
        if self.algorithm == "nag":
            if self.schedule == "constant-eta":
                raise ValueError("algorithm 'nag' needs an A_k schedule: nesterov, polynomial or custom")
            if (self.schedule == "custom") != (self.custom_A is not None):
                raise ValueError("custom_A is required by, and only valid with, the custom schedule")
            if self.eta is not None:
                raise ValueError("'eta' is only valid with the constant-eta schedule")
        if self.mirror_F is not None and self.algorithm != "mirror":
            raise ValueError("'mirror_F' is only valid with algorithm 'mirror'")
        if "correspondence" in self.extra_checks and self.algorithm != "nag_ode":
            raise ValueError("the correspondence check runs with algorithm 'nag_ode'")
        if "tightness" in self.extra_checks and (self.algorithm != "nag_ode" or self.problem.type != "onedim_tight"):
            raise ValueError("the tightness check needs algorithm 'nag_ode' on an onedim_tight problem")
        return self


class RunSummary(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., description="实验名")
    algorithm: Algorithm = Field(..., description="算法")
    verdict: Verdict | None = Field(default=None, description="检测结论，算法不做检测时为空")
    trigger_index: int | None = Field(default=None, description="检测触发的迭代序号")
    witness: list[float] | None = Field(default=None, description="检测见证点")
    max_bound_slack: float | None = Field(default=None, description="所有界检查中最大的观测值/界之比")
    checks: list[BoundCheck] = Field(default_factory=list, description="各项界检查")
    runtime_ms: float = Field(..., ge=0, description="运行耗时（毫秒）")

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


class SweepReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    total: int = Field(..., ge=0, description="配置总数")
    passed: int = Field(..., ge=0, description="全部检查通过的配置数")
    failed: list[str] = Field(default_factory=list, description="失败的配置名")
    results: list[RunSummary] = Field(default_factory=list, description="各配置的汇总")


class CertifyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    problem: ProblemSpec = Field(..., description="目标函数")
    budget: int | None = Field(default=None, ge=1, le=1_000_000, description="最大迭代数，默认 CERTIFY_BUDGET")


class CertifySuccessResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    success: Literal[True] = Field(default=True, description="是否成功")
    data: CertificateReport = Field(..., description="检测报告")


CertifyResponse = CertifySuccessResponse | APIErrorResponse


class RunSuccessResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    success: Literal[True] = Field(default=True, description="是否成功")
    data: RunSummary = Field(..., description="实验汇总")


RunResponse = RunSuccessResponse | APIErrorResponse
