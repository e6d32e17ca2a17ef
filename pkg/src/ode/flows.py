from dataclasses import dataclass
from enum import StrEnum
from functools import cached_property

import numpy as np

from src.core.errors import PreconditionViolation
from src.core.oracle import ObjectiveOracle
from src.core.vector import Matrix, Vector, as_vector
from src.ode.rk4 import rk4_integrate


class FlowKind(StrEnum):
    NAG = "nag"
    AMD = "amd"


@dataclass(frozen=True, eq=False)
class ODETrajectory:
    """
    NAG 流存 (x, z) 与 r；AMD 流存 (X, Z) 与 R。origin 为 x(0) 或 Z0。
    init_residual 为级数初值代入右端后与级数导数的差，衡量 t0 处的一致性。
    """

    kind: FlowKind
    t: Vector
    first: Matrix
    second: Matrix
    r: float
    origin: Vector
    init_residual: float

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @cached_property
    def p(self) -> Matrix:
        """p(t) = r(r+2)/t^2 (x - z)。"""
        self._require_nag()
        scale = self.r * (self.r + 2.0) / self.t**2
        return scale[:, None] * (self.first - self.second)

    @cached_property
    def q(self) -> Matrix:
        """q(t) = -2(r+2)/t^2 (x - x(0))。"""
        self._require_nag()
        scale = 2.0 * (self.r + 2.0) / self.t**2
        return -scale[:, None] * (self.first - self.origin)

    def p_from_velocity(self) -> Matrix:
        """-(r+2)/t · ẋ，ẋ 取右端 (r/t)(z - x)。"""
        self._require_nag()
        velocity = (self.r / self.t)[:, None] * (self.second - self.first)
        return -((self.r + 2.0) / self.t)[:, None] * velocity

    def report_indices(self, t_min: float, samples_per_decade: int) -> np.ndarray:
        """从 t_min 到 t_end 的几何网格（每十倍 samples_per_decade 个点），取最近的积分步。"""
        t_start = max(t_min, self.t0)
        t_end = float(self.t[-1])
        if t_start >= t_end:
            return np.array([self.t.size - 1])
        decades = np.log10(t_end / t_start)
        count = max(2, int(np.ceil(decades * samples_per_decade)) + 1)
        grid = np.geomspace(t_start, t_end, count)
        idx = np.clip(np.searchsorted(self.t, grid), 0, self.t.size - 1)
        return np.unique(idx)

    def _require_nag(self) -> None:
        if self.kind is not FlowKind.NAG:
            raise PreconditionViolation("p(t) and q(t) are defined for the NAG flow only.")


def integrate_nag_ode(
    oracle: ObjectiveOracle,
    x0: Vector,
    r: float,
    t_end: float,
    dt: float,
    t0: float | None = None,
) -> ODETrajectory:
    """
    ẋ = (r/t)(z - x)，ż = -(t/r)∇f(x)。从 t0（默认 dt）出发，
    x(t0) = x0 - t0^2/(2(r+2)) ∇f(x0)，z(t0) = x0 - t0^2/(2r) ∇f(x0)。
    dt == t_end 时轨迹只有 t0 处的一个样本。
    """
    if not r > 0:
        raise PreconditionViolation(f"r must be positive, got {r}.")
    if not 0 < dt <= t_end:
        raise PreconditionViolation(f"Integration needs 0 < dt <= t_end, got dt={dt}, t_end={t_end}.")
    t0 = dt if t0 is None else t0
    x0 = as_vector(x0, oracle.dim)
    n = oracle.dim
    g0 = oracle.grad(x0)
    x_init = x0 - t0**2 / (2.0 * (r + 2.0)) * g0
    z_init = x0 - t0**2 / (2.0 * r) * g0

    def rhs(t: float, s: Vector) -> Vector:
        x, z = s[:n], s[n:]
        return np.concatenate(((r / t) * (z - x), -(t / r) * oracle.grad(x)))

    series_velocity = np.concatenate((-t0 / (r + 2.0) * g0, -t0 / r * g0))
    state0 = np.concatenate((x_init, z_init))
    residual = float(np.linalg.norm(rhs(t0, state0) - series_velocity))
    ts, states = rk4_integrate(rhs, t0, state0, t_end, dt)
    return ODETrajectory(
        kind=FlowKind.NAG, t=ts, first=states[:, :n], second=states[:, n:], r=r, origin=x0, init_residual=residual
    )


def integrate_amd_ode(
    psi_star: ObjectiveOracle,
    Z0: Vector,
    R: float,
    t_end: float,
    dt: float,
    t0: float | None = None,
) -> ODETrajectory:
    """
    范数极小化情形的 AMD 流：Ẋ = (R/t)(∇Ψ*(Z) - X)，Ż = -(t/R) X。
    X(t0) = ∇Ψ*(Z0)，Z(t0) = Z0 - t0^2/(2R) X(t0)。
    """
    if not R > 0:
        raise PreconditionViolation(f"R must be positive, got {R}.")
    if not 0 < dt <= t_end:
        raise PreconditionViolation(f"Integration needs 0 < dt <= t_end, got dt={dt}, t_end={t_end}.")
    t0 = dt if t0 is None else t0
    Z0 = as_vector(Z0, psi_star.dim)
    n = psi_star.dim
    X_init = psi_star.grad(Z0)
    Z_init = Z0 - t0**2 / (2.0 * R) * X_init

    def rhs(t: float, s: Vector) -> Vector:
        X, Z = s[:n], s[n:]
        return np.concatenate(((R / t) * (psi_star.grad(Z) - X), -(t / R) * X))

    state0 = np.concatenate((X_init, Z_init))
    series_velocity = np.concatenate((np.zeros(n), -t0 / R * X_init))
    residual = float(np.linalg.norm(rhs(t0, state0) - series_velocity))
    ts, states = rk4_integrate(rhs, t0, state0, t_end, dt)
    return ODETrajectory(
        kind=FlowKind.AMD, t=ts, first=states[:, :n], second=states[:, n:], r=R, origin=Z0, init_residual=residual
    )
