import math
from dataclasses import dataclass

import numpy as np

from src.core.errors import PreconditionViolation
from src.core.vector import Vector
from src.accel.schedule import ScheduleA
from src.dualgeom.context import BoundsContext


@dataclass(frozen=True, eq=False)
class BoundSeries:
    """
    k = 0..K 的界序列（k = 0 为 nan）。
    C̃ 需要 D > 0；D = 0 时 c_tilde_applicable 为 False，相关序列为 nan。
    """

    B: Vector
    C: Vector
    C_prime: Vector
    B_tilde: Vector
    C_tilde: Vector
    C_tilde_prime: Vector
    c_tilde_applicable: bool

    @property
    def k_max(self) -> int:
        return self.B.size - 1


@dataclass(frozen=True, eq=False)
class BoundCaps:
    B: Vector
    C: Vector
    C_prime: Vector
    B_tilde: Vector
    C_tilde: Vector
    C_tilde_prime: Vector


def _nan_head(values: Vector) -> Vector:
    return np.concatenate(([np.nan], values))


def _check_horizon(sched: ScheduleA, k_max: int) -> None:
    if k_max > sched.k_max:
        raise PreconditionViolation(f"Schedule covers k <= {sched.k_max} but k_max = {k_max} was requested.")


def _b_sequences(sched: ScheduleA, k_max: int) -> tuple[Vector, Vector]:
    A, delta = sched.A, sched.delta
    k = np.arange(1, k_max + 1)
    root_sum = np.cumsum(np.sqrt(A[k]) * delta[k - 1])
    B = 8.0 * ((A[k] * np.sqrt(A[k + 1]) + root_sum) / sched.S1[k]) ** 2
    B_tilde = 8.0 * (root_sum / sched.S0[k]) ** 2
    return B, B_tilde


def detection_thresholds(sched: ScheduleA, k_max: int) -> tuple[Vector, Vector]:
    """只依赖 A_k 的 (B_k, B̃_k)，k = 0..k_max（k = 0 为 nan）。"""
    _check_horizon(sched, k_max)
    B, B_tilde = _b_sequences(sched, k_max)
    return _nan_head(B), _nan_head(B_tilde)


def bound_series(sched: ScheduleA, ctx: BoundsContext, k_max: int) -> BoundSeries:
    """前缀和给出的精确 B_k、C_k、B̃_k、C̃_k 及 C' = B + 2C、C̃' = B̃ + 2C̃。"""
    if ctx.D < 0:
        raise PreconditionViolation(f"D must be nonnegative, got {ctx.D}.")
    _check_horizon(sched, k_max)
    A, delta = sched.A, sched.delta
    k = np.arange(1, k_max + 1)
    S0 = sched.S0[k]
    B, B_tilde = _b_sequences(sched, k_max)
    C = 4.0 * A[k + 1] / sched.S1[k]

    applicable = ctx.D > 0
    if applicable:
        # Σ_{i=1}^{k-1} δ⁺A_i / A_i
        ratio_sum = np.concatenate(([0.0], np.cumsum(delta[k[:-1]] / A[k[:-1]])))[:k_max]
        grad0_term = A[1] * ctx.c_remark * 4.0 * sched.L
        C_tilde = A[k] / S0 * (grad0_term + 4.0 * ratio_sum)
    else:
        C_tilde = np.full(k_max, np.nan)

    return BoundSeries(
        B=_nan_head(B),
        C=_nan_head(C),
        C_prime=_nan_head(B + 2.0 * C),
        B_tilde=_nan_head(B_tilde),
        C_tilde=_nan_head(C_tilde),
        C_tilde_prime=_nan_head(B_tilde + 2.0 * C_tilde),
        c_tilde_applicable=applicable,
    )


def polynomial_caps(L: float, k_max: int, c: float) -> BoundCaps:
    """A_k = k(k+1)/L 时各界的闭式上限，c = <∇g(x0), p*>/(4LD)。"""
    k = np.arange(1, k_max + 1, dtype=np.float64)
    log_k = np.log(k)
    return BoundCaps(
        B=_nan_head(800.0 * L / (3.0 * k + 5.0) ** 2),
        C=_nan_head(24.0 * L / (k * (3.0 * k + 5.0))),
        C_prime=_nan_head(944.0 * L / (3.0 * k * (3.0 * k + 5.0))),
        B_tilde=_nan_head(128.0 * L / (3.0 * k + 1.0) ** 2),
        C_tilde=_nan_head(48.0 * L * (c + 1.0 + log_k) / ((k + 2.0) * (3.0 * k + 1.0))),
        C_tilde_prime=_nan_head(96.0 * L * (c + 2.0 + log_k) / ((k + 2.0) * (3.0 * k + 1.0))),
    )


def gap_bound(C_prime: float, C: float, D: float, p_star_sq: float) -> float:
    """||p||^2 - ||p*||^2 <= C' D + C^2 D^2 / ||p*||^2，要求 p* ≠ 0。"""
    if p_star_sq <= 0:
        raise PreconditionViolation("The norm-gap bound needs p* != 0.")
    return C_prime * D + C**2 * D**2 / p_star_sq


@dataclass(frozen=True)
class TriangularSums:
    i_i1: int
    i2_i1: int
    i_i1_sq: int


def triangular_sums(k: int) -> TriangularSums:
    """Σ i(i+1) = k(k+1)(k+2)/3，Σ i^2(i+1) = k(k+1)(k+2)(3k+1)/12，Σ i(i+1)^2 = k(k+1)(k+2)(3k+5)/12。"""
    if k < 0:
        raise PreconditionViolation(f"k must be nonnegative, got {k}.")
    base = k * (k + 1) * (k + 2)
    return TriangularSums(
        i_i1=base // 3,
        i2_i1=base * (3 * k + 1) // 12,
        i_i1_sq=base * (3 * k + 5) // 12,
    )


def harmonic_bound_holds(k: int) -> bool:
    """Σ_{i<k} 1/i <= 1 + log k。"""
    if k < 1:
        raise PreconditionViolation(f"k must be at least 1, got {k}.")
    return math.fsum(1.0 / i for i in range(1, k)) <= 1.0 + math.log(k)


def guaranteed_trigger_index(B_tilde: Vector, p_star_sq: float, budget: float) -> int | None:
    """第一个满足 B̃_k < ||p*||^2 / (M + f(0)) 的 k；p* = 0 时为 None。"""
    if p_star_sq <= 0 or budget <= 0:
        return None
    hits = np.flatnonzero(B_tilde[1:] < p_star_sq / budget)
    return None if hits.size == 0 else int(hits[0]) + 1
