import math
from dataclasses import dataclass

import numpy as np

from src.core.errors import DegenerateInput
from src.core.oracle import ObjectiveOracle
from src.core.vector import Vector, check_dim
from src.dualgeom.dual_set import Interval, Polytope

_DOMAIN_TOL = 1e-12


def onedim_eval_grad(ot: "OneDimTight", x: float) -> tuple[float, float]:
    """
    x >= 0: (x + 1)^(-α) - x - 1；x < 0: -(1 + α)x。
    两段在 0 处值与一阶导数都连续，二阶导数在 0 处跳变。
    """
    alpha = ot.alpha
    if x >= 0:
        base = x + 1.0
        return base ** (-alpha) - base, -alpha * base ** (-alpha - 1.0) - 1.0
    return -(1.0 + alpha) * x, -(1.0 + alpha)


@dataclass(frozen=True, eq=False)
class OneDimTight(ObjectiveOracle):
    """
    下无界的一维例子，dom f* = [-(1+α), -1]，p* = -1。
    dim > 1 时按第一个坐标嵌入 R^dim，其余坐标不影响 f。
    """

    alpha: float
    dim: int = 1

    def __post_init__(self):
        if not self.alpha > 0 or not math.isfinite(self.alpha):
            raise DegenerateInput(f"alpha must be a positive finite number, got {self.alpha}.")
        if self.dim < 1:
            raise DegenerateInput(f"dim must be at least 1, got {self.dim}.")
        object.__setattr__(self, "L", self.alpha * (self.alpha + 1.0))

    @property
    def conjugate_bound(self) -> float:
        return 1.0

    @property
    def dual_set(self) -> Interval | Polytope:
        lo, hi = -(1.0 + self.alpha), -1.0
        if self.dim == 1:
            return Interval(lo, hi)
        vertices = np.zeros((2, self.dim))
        vertices[:, 0] = (lo, hi)
        return Polytope(vertices)

    def eval_grad(self, x: Vector) -> tuple[float, Vector]:
        check_dim(x, self.dim)
        value, slope = onedim_eval_grad(self, float(x[0]))
        grad = np.zeros(self.dim)
        grad[0] = slope
        return value, grad

    def conjugate(self, p: Vector) -> float:
        check_dim(p, self.dim)
        if self.dim > 1 and np.abs(p[1:]).max() > _DOMAIN_TOL:
            return math.inf
        p1 = float(p[0])
        if p1 < -(1.0 + self.alpha) - _DOMAIN_TOL or p1 > -1.0 + _DOMAIN_TOL:
            return math.inf
        if p1 >= -1.0:
            return 1.0
        # 上确界在 u = x + 1 = (-(1 + p)/α)^(-1/(1+α)) 处取得
        u = (-(1.0 + p1) / self.alpha) ** (-1.0 / (1.0 + self.alpha))
        # p1 = -(1+α) 附近 u 截断在 x = 0
        return -(1.0 + self.alpha) * max(u, 1.0) ** (-self.alpha) - p1
