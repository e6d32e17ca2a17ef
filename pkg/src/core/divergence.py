import math
from dataclasses import dataclass
from typing import NewType, Sequence

import numpy as np

from src.core.errors import MissingConjugate, MissingConjugateBound, NegativeDivergence
from src.core.oracle import ObjectiveOracle
from src.core.vector import Vector, check_dim

DivergenceValue = NewType("DivergenceValue", float)

DIVERGENCE_CLAMP_TOL = 1e-12
FD_STEP = 1e-5
CHECK_TOL = 1e-9


def _clamp(value: float, scale: float, clamp_tol: float, what: str) -> DivergenceValue:
    if value >= 0.0:
        return DivergenceValue(value)
    # 舍入误差与 f 的量级成正比
    if value < -clamp_tol * scale:
        raise NegativeDivergence(f"{what} is {value:.3e} < 0; the oracle is not convex or its gradient is wrong.")
    return DivergenceValue(0.0)


def bregman_divergence(
    oracle: ObjectiveOracle,
    x: Vector,
    y: Vector,
    clamp_tol: float = DIVERGENCE_CLAMP_TOL,
) -> DivergenceValue:
    """D_f(x, ∇f(y)) = f(x) - f(y) - <∇f(y), x - y>。"""
    check_dim(x, oracle.dim)
    check_dim(y, oracle.dim)
    fx = oracle.eval(x)
    fy, gy = oracle.eval_grad(y)
    inner = float(gy @ (x - y))
    value = fx - fy - inner
    return _clamp(value, 1.0 + abs(fx) + abs(fy) + abs(inner), clamp_tol, "Bregman divergence")


def dual_divergence(
    oracle: ObjectiveOracle,
    x: Vector,
    p: Vector,
    clamp_tol: float = DIVERGENCE_CLAMP_TOL,
) -> DivergenceValue:
    """D_f(x, p) = f(x) + f*(p) - <p, x>；p 不在 dom f* 时为 inf。"""
    check_dim(x, oracle.dim)
    check_dim(p, oracle.dim)
    f_star = oracle.conjugate(p)
    if f_star is None:
        raise MissingConjugate(f"{oracle.name} has no analytic conjugate; the dual divergence is unavailable.")
    if math.isinf(f_star):
        return DivergenceValue(math.inf)
    fx = oracle.eval(x)
    inner = float(p @ x)
    value = fx + f_star - inner
    return _clamp(value, 1.0 + abs(fx) + abs(f_star) + abs(inner), clamp_tol, "Dual divergence")


def divergence_upper_bound(oracle: ObjectiveOracle, x0: Vector) -> float:
    """D_f(x0, p*) <= M + f(x0) + ||x0|| ||∇f(x0)||，要求 f* <= M。"""
    M = oracle.conjugate_bound
    if M is None:
        raise MissingConjugateBound(f"{oracle.name} declares no conjugate bound M.")
    f0, g0 = oracle.eval_grad(check_dim(x0, oracle.dim))
    return M + f0 + float(np.linalg.norm(x0)) * float(np.linalg.norm(g0))


@dataclass(frozen=True)
class SmoothConvexReport:
    lipschitz_violation: float
    upper_quadratic_violation: float
    lower_cocoercive_violation: float
    convexity_violation: float
    gradient_bound_violation: float | None
    tolerance: float
    pair_count: int

    @property
    def max_violation(self) -> float:
        values = [
            self.lipschitz_violation,
            self.upper_quadratic_violation,
            self.lower_cocoercive_violation,
            self.convexity_violation,
        ]
        if self.gradient_bound_violation is not None:
            values.append(self.gradient_bound_violation)
        return max(values)

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance


def check_smooth_convex(
    oracle: ObjectiveOracle,
    samples: Sequence[tuple[Vector, Vector]],
    L: float | None = None,
    inf_f: float | None = None,
    tol: float = CHECK_TOL,
) -> SmoothConvexReport:
    """
    在给定点对上检查 L-光滑与凸性的等价刻画：
    (i) ||∇f(x) - ∇f(y)|| <= L||x - y||；(ii) 二次上界；(iii) 带 ||∇f(y) - ∇f(x)||^2/(2L) 的下界；
    以及一阶凸性条件。给出 inf_f 时，额外检查 ||∇f(x)||^2 <= 2L(f(x) - inf f)。
    只报告，不抛错。L 默认取 oracle.L，可传入其他值检验错误的光滑常数。
    """
    if not samples:
        raise ValueError("check_smooth_convex needs at least one sample pair.")
    L = oracle.L if L is None else L
    lipschitz = upper = lower = convexity = 0.0
    grad_bound: float | None = None if inf_f is None else 0.0
    f_scale = 0.0
    for x, y in samples:
        fx, gx = oracle.eval_grad(x)
        fy, gy = oracle.eval_grad(y)
        f_scale = max(f_scale, abs(fx), abs(fy))
        d = y - x
        dg = gy - gx
        linear = fx + float(gx @ d)
        lipschitz = max(lipschitz, float(np.linalg.norm(dg)) - L * float(np.linalg.norm(d)))
        upper = max(upper, fy - linear - 0.5 * L * float(d @ d))
        lower = max(lower, linear + float(dg @ dg) / (2.0 * L) - fy)
        convexity = max(convexity, linear - fy)
        if inf_f is not None:
            grad_bound = max(grad_bound, float(gx @ gx) - 2.0 * L * (fx - inf_f))
    return SmoothConvexReport(
        lipschitz_violation=max(lipschitz, 0.0),
        upper_quadratic_violation=max(upper, 0.0),
        lower_cocoercive_violation=max(lower, 0.0),
        convexity_violation=max(convexity, 0.0),
        gradient_bound_violation=None if grad_bound is None else max(grad_bound, 0.0),
        tolerance=tol * (1.0 + f_scale),
        pair_count=len(samples),
    )


def finite_difference_grad(oracle: ObjectiveOracle, x: Vector, h: float = FD_STEP) -> Vector:
    """中心差分梯度，仅用于测试。"""
    if h <= 0:
        raise ValueError(f"Finite-difference step must be positive, got {h}.")
    check_dim(x, oracle.dim)
    grad = np.empty(oracle.dim)
    for i in range(oracle.dim):
        e = np.zeros(oracle.dim)
        e[i] = h
        grad[i] = (oracle.eval(x + e) - oracle.eval(x - e)) / (2.0 * h)
    return grad
