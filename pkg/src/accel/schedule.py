import math
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from src.core.errors import InvalidCustomSchedule, PreconditionViolation
from src.core.vector import Vector, frozen

# δ⁺A_k <= 2 sqrt(A_{k+1}/L) 的相对容差
STEPSIZE_TOL = 1e-12


class ScheduleKind(StrEnum):
    NESTEROV = "nesterov"
    POLYNOMIAL = "polynomial"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class ScheduleA:
    """
    加速法的参数序列 A_0 = 0 < A_1 < ...，覆盖 k = 0..k_max+1。
    S1_k = Σ_{i=1..k} A_i δ⁺A_i、S0_k = Σ_{i=1..k} A_i δ⁺A_{i-1} 一次性用 cumsum 算好。
    """

    kind: ScheduleKind
    L: float
    A: Vector
    alpha: Vector | None = None

    def __post_init__(self):
        A = frozen(np.array(self.A, dtype=np.float64))
        object.__setattr__(self, "A", A)
        delta = frozen(np.diff(A))
        object.__setattr__(self, "delta", delta)
        # S1[k] 与 S0[k] 对 k = 0..k_max 有定义，S1[0] = S0[0] = 0
        terms1 = A[1:-1] * delta[1:]
        terms0 = A[1:] * delta
        object.__setattr__(self, "S1", frozen(np.concatenate(([0.0], np.cumsum(terms1)))))
        object.__setattr__(self, "S0", frozen(np.concatenate(([0.0], np.cumsum(terms0[:-1])))))

    @property
    def k_max(self) -> int:
        return self.A.size - 2

    def A_at(self, k: int) -> float:
        return float(self.A[k])

    def deltaA(self, k: int) -> float:
        if self.kind is ScheduleKind.POLYNOMIAL:
            return 2.0 * (k + 1) / self.L
        return float(self.delta[k])

    def step(self, k: int) -> float:
        """x^(k+1) = y^(k) - step(k) ∇f(y^(k))，即 (δ⁺A_k)^2 / (4 A_{k+1})。"""
        if self.kind is ScheduleKind.POLYNOMIAL:
            return (k + 1) / ((k + 2) * self.L)
        if self.kind is ScheduleKind.NESTEROV:
            return 1.0 / self.L
        return self.delta[k] ** 2 / (4.0 * self.A[k + 1])

    def momentum(self, k: int) -> float:
        """y^(k+1) = x^(k+1) + momentum(k)(x^(k+1) - x^(k))，即 A_k δ⁺A_{k+1} / (A_{k+2} δ⁺A_k)。"""
        if self.kind is ScheduleKind.POLYNOMIAL:
            return k / (k + 3)
        if self.kind is ScheduleKind.NESTEROV:
            return (self.alpha[k] - 1.0) / self.alpha[k + 1]
        return self.A[k] * self.delta[k + 1] / (self.A[k + 2] * self.delta[k])

    def momentum_from_sequence(self, k: int) -> float:
        return float(self.A[k] * self.delta[k + 1] / (self.A[k + 2] * self.delta[k]))


def _nesterov_alphas(count: int) -> Vector:
    alpha = np.empty(count)
    alpha[0] = 1.0
    for k in range(count - 1):
        alpha[k + 1] = (1.0 + math.sqrt(1.0 + 4.0 * alpha[k] ** 2)) / 2.0
    return alpha


def validate_schedule(A: Vector, L: float) -> None:
    if A.size < 2 or A[0] != 0.0:
        raise InvalidCustomSchedule("A custom schedule must start with A_0 = 0 and have at least two entries.")
    if not np.all(np.isfinite(A)):
        raise InvalidCustomSchedule("A custom schedule must be finite.")
    delta = np.diff(A)
    bad = np.flatnonzero(delta <= 0)
    if bad.size:
        raise InvalidCustomSchedule(f"A_k must be strictly increasing; δ⁺A_{int(bad[0])} = {delta[bad[0]]:.6g}.")
    limit = 2.0 * np.sqrt(A[1:] / L)
    bad = np.flatnonzero(delta > limit * (1.0 + STEPSIZE_TOL))
    if bad.size:
        k = int(bad[0])
        raise InvalidCustomSchedule(
            f"δ⁺A_{k} = {delta[k]:.6g} exceeds 2 sqrt(A_{k + 1}/L) = {limit[k]:.6g}; the step-size condition fails."
        )


def make_schedule(
    kind: ScheduleKind | str,
    L: float,
    k_max: int,
    custom: list[float] | Vector | None = None,
) -> ScheduleA:
    """
    nesterov：α_0 = 1，α_{k+1} = (1 + sqrt(1 + 4α_k^2))/2，A_k = 4α_{k-1}^2/L，δ⁺A_k = 4α_k/L；
    polynomial：A_k = k(k+1)/L；custom：使用给定序列（至少 k_max + 2 项）并检查步长条件。
    """
    if not L > 0:
        raise PreconditionViolation(f"L must be positive, got {L}.")
    if k_max < 0:
        raise PreconditionViolation(f"k_max must be nonnegative, got {k_max}.")
    kind = ScheduleKind(kind)
    count = k_max + 2
    match kind:
        case ScheduleKind.NESTEROV:
            alpha = _nesterov_alphas(count + 1)
            A = np.concatenate(([0.0], 4.0 * alpha[: count - 1] ** 2 / L))
            return ScheduleA(kind=kind, L=L, A=A, alpha=frozen(alpha))
        case ScheduleKind.POLYNOMIAL:
            k = np.arange(count, dtype=np.float64)
            return ScheduleA(kind=kind, L=L, A=k * (k + 1) / L)
        case ScheduleKind.CUSTOM:
            if custom is None:
                raise InvalidCustomSchedule("A custom schedule needs its A_k values.")
            A = np.array(custom, dtype=np.float64).reshape(-1)
            if A.size < count:
                raise InvalidCustomSchedule(f"A custom schedule for k_max = {k_max} needs {count} values, got {A.size}.")
            A = A[:count]
            validate_schedule(A, L)
            return ScheduleA(kind=kind, L=L, A=A)
    raise ValueError(f"Unknown schedule kind: {kind}")
