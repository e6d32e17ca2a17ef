from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field


class Verdict(StrEnum):
    UNBOUNDED = "UNBOUNDED"
    INCONCLUSIVE = "INCONCLUSIVE"


class WitnessKind(StrEnum):
    P = "p"
    Q = "q"
    GRAD = "grad"


class CertificateReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    verdict: Verdict = Field(..., description="UNBOUNDED 表示已证明下无界，INCONCLUSIVE 表示预算内未触发")
    witness: list[float] | None = Field(default=None, description="触发时的对偶点")
    witness_kind: WitnessKind | None = Field(default=None, description="见证点类型 p / q / grad")
    trigger_index: int | None = Field(default=None, ge=0, description="首次触发的迭代序号")
    threshold_used: float | None = Field(default=None, description="触发时比较的阈值")
    bound_formula: str = Field(..., description="所用判据的标签")
    iterations: int = Field(..., ge=0, description="实际检查的迭代数")
    p_trigger_index: int | None = Field(default=None, description="p 判据首次触发的序号")
    q_trigger_index: int | None = Field(default=None, description="q 判据首次触发的序号")
    guaranteed_index: int | None = Field(default=None, description="已知 p* 时理论保证触发的序号")
    gradient_evaluations: int | None = Field(default=None, ge=0, description="梯度求值次数")


class BoundCheck(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., description="界的标签")
    passed: bool = Field(..., description="观测值是否在界内（含容差）")
    max_slack: float = Field(..., description="观测值与界之比的最大值，不超过 1 即通过")
