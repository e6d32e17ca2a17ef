import logging
from dataclasses import dataclass

import numpy as np

from src.core.errors import PreconditionViolation
from src.core.vector import Matrix, Vector
from src.accel.nag import NAGTrajectory
from src.accel.schedule import ScheduleA, ScheduleKind

logger = logging.getLogger(__name__)

CLOSED_FORM_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class CertificateSeries:
    """
    k = 1..K 的 p^(k) = -P_k(x^(k+1) - x^(k)) 与 q^(k) = -Q_k(x^(k) - x0)。
    数组第 0 行对应 k = 0，没有定义，填 nan。
    """

    P: Vector
    Q: Vector
    p: Matrix
    q: Matrix

    @property
    def k_max(self) -> int:
        return self.p.shape[0] - 1


def polynomial_coefficients(k: Vector | int, L: float) -> tuple[Vector, Vector]:
    """A_k = k(k+1)/L 时 P_k = 12L/(3k+5)，Q_k = 24L/((k+2)(3k+1))。"""
    k = np.asarray(k, dtype=np.float64)
    return 12.0 * L / (3.0 * k + 5.0), 24.0 * L / ((k + 2.0) * (3.0 * k + 1.0))


def certificate_coefficients(sched: ScheduleA, k_max: int) -> tuple[Vector, Vector]:
    """前缀和形式的 P_k、Q_k，k = 0..k_max（k = 0 为 nan）。"""
    if k_max > sched.k_max:
        raise PreconditionViolation(f"Schedule covers k <= {sched.k_max} but k_max = {k_max} was requested.")
    k = np.arange(1, k_max + 1)
    A, delta = sched.A, sched.delta
    P = np.full(k_max + 1, np.nan)
    Q = np.full(k_max + 1, np.nan)
    P[1:] = 4.0 * A[k] * A[k + 1] / (delta[k] * sched.S1[k])
    Q[1:] = 4.0 * A[k] / sched.S0[k]
    return P, Q


def certificates(traj: NAGTrajectory, sched: ScheduleA) -> CertificateSeries:
    K = traj.k_max
    P, Q = certificate_coefficients(sched, K)
    if sched.kind is ScheduleKind.POLYNOMIAL and K >= 1:
        P_closed, Q_closed = polynomial_coefficients(np.arange(1, K + 1), sched.L)
        worst = max(
            float(np.max(np.abs(P[1:] / P_closed - 1.0))),
            float(np.max(np.abs(Q[1:] / Q_closed - 1.0))),
        )
        if worst > CLOSED_FORM_RTOL:
            logger.warning(f"Prefix-sum certificate coefficients differ from the closed form by {worst:.3e}.")
    p = np.full((K + 1, traj.x.shape[1]), np.nan)
    q = np.full((K + 1, traj.x.shape[1]), np.nan)
    p[1:] = -P[1:, None] * (traj.x[2 : K + 2] - traj.x[1 : K + 1])
    q[1:] = -Q[1:, None] * (traj.x[1 : K + 1] - traj.x0)
    return CertificateSeries(P=P, Q=Q, p=p, q=q)


def p_convex_combination(traj: NAGTrajectory, sched: ScheduleA) -> Matrix:
    """p^(k) = Σ_{j=1..k} A_j δ⁺A_j ∇f(y^(j)) / S1_k，用于独立核对 p^(k)。"""
    K = traj.k_max
    j = np.arange(1, K + 1)
    weights = sched.A[j] * sched.delta[j]
    out = np.full((K + 1, traj.x.shape[1]), np.nan)
    out[1:] = np.cumsum(weights[:, None] * traj.grad_y[1:], axis=0) / sched.S1[j, None]
    return out


def q_convex_weights(sched: ScheduleA, k: int) -> Vector:
    """
    q^(k) 关于 (∇f(x0), p^(1), ..., p^(k-1)) 的权重：
    ∇f(x0) 上为 A_k A_1 / S0_k，p^(j) 上为 (A_k/S0_k) δ⁺A_j S1_j / (A_j A_{j+1})。
    权重非负，按伸缩求和之和为 1。
    """
    if not 1 <= k <= sched.k_max:
        raise PreconditionViolation(f"q weights need 1 <= k <= {sched.k_max}, got {k}.")
    A, delta = sched.A, sched.delta
    scale = A[k] / sched.S0[k]
    j = np.arange(1, k)
    tail = delta[j] * sched.S1[j] / (A[j] * A[j + 1])
    return scale * np.concatenate(([A[1]], tail))


def q_from_weights(certs: CertificateSeries, traj: NAGTrajectory, sched: ScheduleA, k: int) -> Vector:
    weights = q_convex_weights(sched, k)
    points = np.vstack((traj.grad_x[0], certs.p[1:k]))
    return weights @ points
