from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


class GeometricProblem(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["geometric"] = Field(..., description="对数-求和-指数目标")
    c: list[float] = Field(..., min_length=1, description="正系数 c_l")
    omega: list[list[float]] = Field(..., min_length=1, description="指数向量 ω_l，每行一个")

    @model_validator(mode="after")
    def check_shape(self) -> "GeometricProblem":
        widths = {len(row) for row in self.omega}
        if len(widths) != 1 or 0 in widths:
            raise ValueError(f"omega rows must all have the same positive length, got lengths {[len(row) for row in self.omega]}")
        if len(self.omega) != len(self.c):
            raise ValueError(f"omega has {len(self.omega)} rows but c has {len(self.c)} entries")
        return self


class EllipsoidProblem(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["ellipsoid"] = Field(..., description="对偶域为椭球的目标 sqrt(1 + x^T A x) + b^T x")
    A: list[list[float]] = Field(..., min_length=1, description="对称正定矩阵 A")
    b: list[float] = Field(..., min_length=1, description="椭球中心 b")

    @model_validator(mode="after")
    def check_shape(self) -> "EllipsoidProblem":
        n = len(self.b)
        if len(self.A) != n or any(len(row) != n for row in self.A):
            raise ValueError(f"A must be a {n}x{n} matrix to match b, got row lengths {[len(row) for row in self.A]}")
        return self


class OneDimTightProblem(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["onedim_tight"] = Field(..., description="连续时间界的紧性例子")
    alpha: float = Field(..., gt=0, description="衰减参数 α")
    dim: int = Field(default=1, ge=1, description="嵌入维数，只有第一个坐标非平凡")


class LinearProblem(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["linear"] = Field(..., description="线性目标 <c, x>")
    c: list[float] = Field(..., min_length=1, description="系数向量 c")


class QuadraticProblem(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["quadratic"] = Field(..., description="有界对照 ||x||^2 / 2")
    dim: int = Field(..., ge=1, description="维数")


class ShiftedProblem(BaseModel):
    model_config = ConfigDict(extra="forbid")

    type: Literal["shifted"] = Field(..., description="平移目标 f(x) - <p, x>")
    base: "ProblemSpec" = Field(..., description="被平移的目标")
    p: list[float] = Field(..., min_length=1, description="平移向量")


ProblemSpec = Annotated[
    Union[GeometricProblem, EllipsoidProblem, OneDimTightProblem, LinearProblem, QuadraticProblem, ShiftedProblem],
    Field(discriminator="type"),
]

ShiftedProblem.model_rebuild()
