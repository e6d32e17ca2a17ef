import math
from dataclasses import dataclass

import numpy as np

from src.core.errors import DegenerateInput
from src.core.oracle import ObjectiveOracle
from src.core.vector import Vector, as_vector, check_dim, frozen
from src.dualgeom.dual_set import FullSpace, Polytope

_DOMAIN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class LinearObjective(ObjectiveOracle):
    """f(x) = <c, x>，dom f* = {c}；c ≠ 0 时下无界。L 取任意正数均成立。"""

    c: Vector
    L: float = 1.0

    def __post_init__(self):
        if not self.L > 0:
            raise DegenerateInput(f"L must be positive, got {self.L}.")
        c = as_vector(self.c)
        object.__setattr__(self, "c", frozen(c))
        object.__setattr__(self, "dim", c.size)

    @property
    def conjugate_bound(self) -> float:
        return 0.0

    @property
    def dual_set(self) -> Polytope:
        return Polytope(self.c.reshape(1, -1))

    def eval_grad(self, x: Vector) -> tuple[float, Vector]:
        return float(self.c @ check_dim(x, self.dim)), self.c.copy()

    def conjugate(self, p: Vector) -> float:
        gap = float(np.abs(check_dim(p, self.dim) - self.c).max())
        return 0.0 if gap <= _DOMAIN_TOL * (1.0 + float(np.abs(self.c).max())) else math.inf


@dataclass(frozen=True, eq=False)
class QuadraticObjective(ObjectiveOracle):
    """f(x) = ||x||^2 / 2，有下界，f* = f。"""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise DegenerateInput(f"dim must be at least 1, got {self.dim}.")
        object.__setattr__(self, "L", 1.0)

    @property
    def dual_set(self) -> FullSpace:
        return FullSpace(self.dim)

    def eval_grad(self, x: Vector) -> tuple[float, Vector]:
        check_dim(x, self.dim)
        # 梯度即 x 本身，GD 与恒等镜像映射下的镜像下降逐位一致
        return 0.5 * float(x @ x), x.copy()

    def conjugate(self, p: Vector) -> float:
        check_dim(p, self.dim)
        return 0.5 * float(p @ p)
