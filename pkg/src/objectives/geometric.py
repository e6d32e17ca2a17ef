import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.special import logsumexp, xlogy

from src.core.errors import DegenerateInput, DimensionMismatch
from src.core.oracle import ObjectiveOracle
from src.core.vector import Matrix, Vector, check_dim, frozen
from src.dualgeom.dual_set import Polytope, min_norm_point

# 与 Conv Ω 的距离超过该值时认为 p 不在 dom f* 中
CONJUGATE_MEMBERSHIP_TOL = 1e-9
# linprog 的可行性容差约 1e-7，低于此的权重视为 0
SUPPORT_WEIGHT_TOL = 1e-6

logger = logging.getLogger(__name__)


def geometric_eval_grad(gp: "GeometricProgram", x: Vector) -> tuple[float, Vector]:
    """
    f(x) = log Σ c_l exp(<ω_l, x>)，用 logsumexp 的最大值平移保证对任意有限 x 不溢出；
    梯度 Σ w_l ω_l 复用平移后的 softmax 权重。
    """
    z = gp.omega @ check_dim(x, gp.dim) + gp.log_c
    value = float(logsumexp(z))
    weights = np.exp(z - value)
    return value, weights @ gp.omega


@dataclass(frozen=True, eq=False)
class GeometricProgram(ObjectiveOracle):
    c: Vector
    omega: Matrix

    def __post_init__(self):
        c = np.array(self.c, dtype=np.float64).reshape(-1)
        omega = np.array(self.omega, dtype=np.float64)
        if omega.ndim == 1:
            omega = omega.reshape(-1, 1)
        if c.size < 1:
            raise DegenerateInput("A geometric program needs at least one term.")
        if omega.shape[0] != c.size:
            raise DimensionMismatch(f"Got {c.size} coefficients but {omega.shape[0]} exponent vectors.")
        if np.any(c <= 0) or not np.all(np.isfinite(c)):
            raise DegenerateInput(f"Geometric program coefficients must be positive and finite, got {c.tolist()}.")
        if not np.all(np.isfinite(omega)):
            raise DegenerateInput("Exponent vectors must be finite.")
        object.__setattr__(self, "c", frozen(c))
        object.__setattr__(self, "omega", frozen(omega))
        object.__setattr__(self, "log_c", frozen(np.log(c)))
        object.__setattr__(self, "dim", omega.shape[1])
        # L_Ω = max ||ω||^2
        object.__setattr__(self, "L", float(np.max(np.einsum("ij,ij->i", omega, omega))))
        object.__setattr__(self, "_dual_set", Polytope(omega))

    @property
    def conjugate_bound(self) -> float:
        return -math.log(float(self.c.min()))

    @property
    def dual_set(self) -> Polytope:
        return self._dual_set

    def eval_grad(self, x: Vector) -> tuple[float, Vector]:
        return geometric_eval_grad(self, x)

    @cached_property
    def affinely_independent(self) -> bool:
        """ω_l - ω_0 线性无关时，p 在 Conv Ω 中的凸组合表示唯一。"""
        if self.c.size == 1:
            return True
        return int(np.linalg.matrix_rank(self.omega[1:] - self.omega[0])) == self.c.size - 1

    def weights(self, x: Vector) -> Vector:
        z = self.omega @ x + self.log_c
        return np.exp(z - logsumexp(z))

    def conjugate(self, p: Vector) -> float:
        """
        f*(p) = min{Σ λ_l log(λ_l / c_l) : λ 在单纯形上, Σ λ_l ω_l = p}。
        平移多面体 {ω - p} 的最小范数点权重给出可行值；Ω 仿射相关时表示不唯一，
        改在 p 的最小支撑面上解对偶问题 -min_y log Σ_S c_l exp(<ω_l - p, y>)。
        """
        check_dim(p, self.dim)
        shifted = min_norm_point(Polytope(self.omega - p))
        if shifted.norm > CONJUGATE_MEMBERSHIP_TOL:
            return math.inf
        lam = shifted.convex_weights
        best = float(np.sum(xlogy(lam, lam) - lam * self.log_c))
        if self.affinely_independent:
            # 仿射无关的 Ω 表示唯一，无需再优化
            return best
        support = self._support(p)
        if support.size == 0:
            return best
        directions = self.omega[support] - p
        log_c = self.log_c[support]

        def dual(y: Vector) -> tuple[float, Vector]:
            z = directions @ y + log_c
            value = float(logsumexp(z))
            return value, np.exp(z - value) @ directions

        result = minimize(dual, np.zeros(self.dim), jac=True, method="BFGS", options={"gtol": 1e-12, "maxiter": 1000})
        # 对偶值是 f*(p) 的下界，可行权重给出上界；对偶值越过上界说明支撑面判定失败
        value = -float(result.fun)
        if not math.isfinite(value) or value > best:
            logger.debug(f"Dual refinement of f*({p.tolist()}) gave {value}, keeping {best}")
            return best
        return value

    def _support(self, p: Vector) -> np.ndarray:
        """逐项求 max λ_l（linprog），得到含 p 的最小面的顶点下标。"""
        A_eq = np.vstack((self.omega.T, np.ones((1, self.c.size))))
        b_eq = np.append(p, 1.0)
        support = []
        for l in range(self.c.size):
            objective = np.zeros(self.c.size)
            objective[l] = -1.0
            result = linprog(objective, A_eq=A_eq, b_eq=b_eq, bounds=(0.0, None), method="highs")
            if result.status == 0 and -result.fun > SUPPORT_WEIGHT_TOL:
                support.append(l)
        return np.array(support, dtype=int)
