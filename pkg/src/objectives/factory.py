from functools import singledispatch

from src.core.oracle import ObjectiveOracle
from src.model.problem_model import (
    EllipsoidProblem,
    GeometricProblem,
    LinearProblem,
    OneDimTightProblem,
    QuadraticProblem,
    ShiftedProblem,
)
from src.objectives.ellipsoid import EllipsoidObjective
from src.objectives.geometric import GeometricProgram
from src.objectives.onedim import OneDimTight
from src.objectives.shifted import ShiftedObjective
from src.objectives.simple import LinearObjective, QuadraticObjective


@singledispatch
def build_oracle(problem) -> ObjectiveOracle:
    """由问题 JSON 模型构造目标；各构造函数负责数值合法性检查。"""
    raise TypeError(f"Unsupported problem description: {type(problem).__name__}.")


@build_oracle.register
def _(problem: GeometricProblem) -> ObjectiveOracle:
    return GeometricProgram(c=problem.c, omega=problem.omega)


@build_oracle.register
def _(problem: EllipsoidProblem) -> ObjectiveOracle:
    return EllipsoidObjective(A=problem.A, b=problem.b)


@build_oracle.register
def _(problem: OneDimTightProblem) -> ObjectiveOracle:
    return OneDimTight(alpha=problem.alpha, dim=problem.dim)


@build_oracle.register
def _(problem: LinearProblem) -> ObjectiveOracle:
    return LinearObjective(c=problem.c)


@build_oracle.register
def _(problem: QuadraticProblem) -> ObjectiveOracle:
    return QuadraticObjective(dim=problem.dim)


@build_oracle.register
def _(problem: ShiftedProblem) -> ObjectiveOracle:
    return ShiftedObjective(base=build_oracle(problem.base), shift=problem.p)
