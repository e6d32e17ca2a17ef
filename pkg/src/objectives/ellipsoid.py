import math
from dataclasses import dataclass

import numpy as np

from src.core.errors import DimensionMismatch
from src.core.oracle import ObjectiveOracle
from src.core.vector import Matrix, Vector, as_vector, check_dim, frozen
from src.dualgeom.dual_set import Ellipsoid

# quad_form 超出 1 的容差，用于判断 p 是否在椭球内
CONJUGATE_MEMBERSHIP_TOL = 1e-12


def ellipsoid_eval_grad(eo: "EllipsoidObjective", x: Vector) -> tuple[float, Vector]:
    """f(x) = sqrt(1 + <x, Ax>) + <b, x>，∇f(x) = Ax / sqrt(1 + <x, Ax>) + b。"""
    Ax = eo.A @ check_dim(x, eo.dim)
    root = math.sqrt(1.0 + float(x @ Ax))
    return root + float(eo.b @ x), Ax / root + eo.b


@dataclass(frozen=True, eq=False)
class EllipsoidObjective(ObjectiveOracle):
    A: Matrix
    b: Vector

    def __post_init__(self):
        b = as_vector(self.b)
        A = np.array(self.A, dtype=np.float64)
        if A.shape != (b.size, b.size):
            raise DimensionMismatch(f"Matrix of shape {A.shape} does not match b of dimension {b.size}.")
        # Ellipsoid 负责对称正定检查并缓存特征分解
        dual = Ellipsoid(A=A, center=b)
        object.__setattr__(self, "A", frozen(A))
        object.__setattr__(self, "b", frozen(b))
        object.__setattr__(self, "dim", b.size)
        object.__setattr__(self, "L", float(dual._eigvals.max()))
        object.__setattr__(self, "_dual_set", dual)

    @property
    def conjugate_bound(self) -> float:
        return 0.0

    @property
    def dual_set(self) -> Ellipsoid:
        return self._dual_set

    def eval_grad(self, x: Vector) -> tuple[float, Vector]:
        return ellipsoid_eval_grad(self, x)

    def conjugate(self, p: Vector) -> float:
        """f*(p) = -sqrt(1 - <p - b, A^{-1}(p - b)>)，椭球外为 inf。"""
        quad = self._dual_set.quad_form(check_dim(p, self.dim))
        if quad > 1.0 + CONJUGATE_MEMBERSHIP_TOL:
            return math.inf
        return -math.sqrt(max(0.0, 1.0 - quad))
