from dataclasses import dataclass

import numpy as np

from src.core.vector import Vector
from src.accel.nag import NAGTrajectory
from src.accel.schedule import ScheduleA
from src.dualgeom.polytope_stats import NewtonPolytopeStats, geometric_value_bound


@dataclass(frozen=True, eq=False)
class DiscreteEnergy:
    """
    V^(k) = (A_k/2)(g(x^(k)) - g(w)) + ||z^(k) + (A_k/4)p* - w||^2，k = 0..K；
    decrement_bound[k] = -(A_k δ⁺A_k / 8) <∇g(y^(k)), p*>，V^(k+1) - V^(k) 不应超过它。
    """

    values: Vector
    decrement_bound: Vector
    scale: float

    @property
    def increments(self) -> Vector:
        return np.diff(self.values)

    def max_excess(self) -> float:
        """max_k (V^(k+1) - V^(k) - decrement_bound[k]) / scale，非正即满足。"""
        if self.values.size < 2:
            return 0.0
        return float(np.max(self.increments - self.decrement_bound[:-1])) / self.scale


def g_values(traj: NAGTrajectory, p_star: Vector) -> Vector:
    return traj.f_x - traj.x[: traj.k_max + 1] @ p_star


def energy_series(
    traj: NAGTrajectory,
    sched: ScheduleA,
    w: Vector,
    p_star: Vector,
    g_of_w: float,
) -> DiscreteEnergy:
    K = traj.k_max
    A = sched.A[: K + 1]
    value_term = 0.5 * A * (g_values(traj, p_star) - g_of_w)
    shifted = traj.z[: K + 1] + (A[:, None] / 4.0) * p_star - w
    distance_term = np.einsum("ij,ij->i", shifted, shifted)
    grad_g_y = traj.grad_y - p_star
    decrement = -(A * sched.delta[: K + 1] / 8.0) * (grad_g_y @ p_star)
    scale = 1.0 + float(max(np.max(np.abs(value_term)), np.max(distance_term)))
    return DiscreteEnergy(values=value_term + distance_term, decrement_bound=decrement, scale=scale)


def value_bound_series(
    traj: NAGTrajectory,
    sched: ScheduleA,
    w: Vector,
    p_star: Vector,
    g_of_w: float,
) -> Vector:
    """g(x^(k)) - g(w) - 2||w - x0||^2/A_k，k = 1..K 上应非正（k = 0 为 nan）。"""
    K = traj.k_max
    out = np.full(K + 1, np.nan)
    radius = float((w - traj.x0) @ (w - traj.x0))
    out[1:] = g_values(traj, p_star)[1:] - g_of_w - 2.0 * radius / sched.A[1 : K + 1]
    return out


def geometric_value_series(
    traj: NAGTrajectory,
    sched: ScheduleA,
    stats: NewtonPolytopeStats,
    p_star: Vector,
    inf_g: float,
) -> tuple[Vector, Vector]:
    """(g(x^(k)) - inf g, 2m^2/(φ^2 A_k)(1 + log^2(βφ^2 A_k/m^2)))；阈值以下的界为 inf。"""
    K = traj.k_max
    gaps = g_values(traj, p_star) - inf_g
    bounds = np.array([np.inf] + [geometric_value_bound(stats, float(sched.A[k])) for k in range(1, K + 1)])
    return gaps, bounds
