import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from src.core.errors import PreconditionViolation
from src.core.oracle import ObjectiveOracle
from src.core.vector import Matrix, Vector
from src.dualgeom.context import BoundsContext
from src.dualgeom.dual_set import membership_gap
from src.model.report_model import BoundCheck
from src.objectives.onedim import OneDimTight
from src.ode.flows import FlowKind, ODETrajectory, integrate_amd_ode, integrate_nag_ode

logger = logging.getLogger(__name__)

SAMPLES_PER_DECADE = 32
REPORT_T_MIN = 1.0
BOUND_REL_SLACK = 1e-3
BOUND_ABS_SLACK = 1e-8
CORRESPONDENCE_TOL = 1e-6
ENERGY_TOL = 1e-8


def slack_ratio(observed: Vector, bound: Vector, rel: float = BOUND_REL_SLACK, abs_tol: float = BOUND_ABS_SLACK) -> float:
    """max observed / (bound (1 + rel) + abs_tol)；不超过 1 即通过。"""
    observed = np.asarray(observed, dtype=np.float64)
    bound = np.asarray(bound, dtype=np.float64)
    if observed.size == 0:
        return 0.0
    return float(np.max(observed / (bound * (1.0 + rel) + abs_tol)))


def bound_check(name: str, observed: Vector, bound: Vector, rel: float, abs_tol: float) -> BoundCheck:
    ratio = slack_ratio(observed, bound, rel, abs_tol)
    return BoundCheck(name=name, passed=ratio <= 1.0, max_slack=ratio)


def _sq_rows(M: Matrix) -> Vector:
    return np.einsum("ij,ij->i", M, M)


@dataclass(frozen=True)
class CorrespondenceReport:
    max_X_gap: float
    max_Z_gap: float
    tolerance: float

    @property
    def max_gap(self) -> float:
        return max(self.max_X_gap, self.max_Z_gap)

    @property
    def passed(self) -> bool:
        return self.max_gap <= self.tolerance


def correspondence_check(
    oracle: ObjectiveOracle,
    x0: Vector,
    r: float,
    t_end: float,
    dt: float,
    t0: float | None = None,
    t_min: float = REPORT_T_MIN,
    samples_per_decade: int = SAMPLES_PER_DECADE,
    tol: float = CORRESPONDENCE_TOL,
) -> CorrespondenceReport:
    """
    同一步进器分别积分 NAG 流（r）与 AMD 流（Ψ* = f，R = r + 2，Z0 = x0），
    在报告网格上比较 X(t) 与 r(r+2)/t^2 (x - z)、Z(t) 与 x(t)。
    """
    nag = integrate_nag_ode(oracle, x0, r, t_end, dt, t0=t0)
    amd = integrate_amd_ode(oracle, x0, r + 2.0, t_end, dt, t0=t0)
    idx = nag.report_indices(t_min, samples_per_decade)
    X_gap = np.linalg.norm(amd.first[idx] - nag.p[idx], axis=1)
    Z_gap = np.linalg.norm(amd.second[idx] - nag.first[idx], axis=1)
    report = CorrespondenceReport(max_X_gap=float(X_gap.max()), max_Z_gap=float(Z_gap.max()), tolerance=tol)
    logger.debug(f"Correspondence at dt={dt}: X gap {report.max_X_gap:.3e}, Z gap {report.max_Z_gap:.3e}")
    return report


def correspondence_order(
    oracle: ObjectiveOracle,
    x0: Vector,
    r: float,
    t_end: float,
    dt: float,
    t0: float,
    t_min: float = REPORT_T_MIN,
) -> float:
    """dt 与 dt/2 下最大差异之比，四阶方法约为 16。t0 固定以免起步误差混入。"""
    coarse = correspondence_check(oracle, x0, r, t_end, dt, t0=t0, t_min=t_min)
    fine = correspondence_check(oracle, x0, r, t_end, dt / 2.0, t0=t0, t_min=t_min)
    return coarse.max_gap / fine.max_gap


def continuous_bounds(
    traj: ODETrajectory,
    ctx: BoundsContext,
    r: float | None = None,
    t_min: float = REPORT_T_MIN,
    samples_per_decade: int = SAMPLES_PER_DECADE,
    rel: float = BOUND_REL_SLACK,
    abs_tol: float = BOUND_ABS_SLACK,
) -> list[BoundCheck]:
    """
    在报告网格上检查：
    ||p||^2 - ||p*||^2 <= 2(r+2)^2 D/t^2，||q - p*||^2 <= 8(r+2)^2 D/t^2；
    r = 2 时另查 ||p - p*||^2 <= 800D/(9t^2)、||q - p*||^2 <= 128D/(9t^2)，
    以及 p* ≠ 0 时 ||p||^2 - ||p*||^2 <= 944D/(9t^2) + 64D^2/(||p*||^2 t^4)。
    """
    r = traj.r if r is None else r
    idx = traj.report_indices(t_min, samples_per_decade)
    t = traj.t[idx]
    p, q = traj.p[idx], traj.q[idx]
    p_star, D = ctx.p_star, ctx.D
    p_star_sq = float(p_star @ p_star)
    p_gap = np.maximum(_sq_rows(p) - p_star_sq, 0.0)
    p_err = _sq_rows(p - p_star)
    q_err = _sq_rows(q - p_star)

    checks = [
        bound_check("ode-p-gap", p_gap, 2.0 * (r + 2.0) ** 2 * D / t**2, rel, abs_tol),
        bound_check("ode-q-error", q_err, 8.0 * (r + 2.0) ** 2 * D / t**2, rel, abs_tol),
    ]
    if r == 2.0:
        checks.append(bound_check("ode-p-error-r2", p_err, 800.0 * D / (9.0 * t**2), rel, abs_tol))
        checks.append(bound_check("ode-q-error-r2", q_err, 128.0 * D / (9.0 * t**2), rel, abs_tol))
        if p_star_sq > 0:
            bound = 944.0 * D / (9.0 * t**2) + 64.0 * D**2 / (p_star_sq * t**4)
            checks.append(bound_check("ode-p-gap-r2", p_gap, bound, rel, abs_tol))
    return checks


def amd_value_check(
    traj: ODETrajectory,
    ctx: BoundsContext,
    oracle: ObjectiveOracle | None = None,
    t_min: float = REPORT_T_MIN,
    samples_per_decade: int = SAMPLES_PER_DECADE,
    rel: float = BOUND_REL_SLACK,
    abs_tol: float = BOUND_ABS_SLACK,
) -> list[BoundCheck]:
    """F = ||·||^2/2 时 ||X||^2/2 - ||p*||^2/2 <= R^2 D/t^2；给出 oracle 时再查 X(t) ∈ dom f*（距离 <= 1e-6）。"""
    if traj.kind is not FlowKind.AMD:
        raise PreconditionViolation("amd_value_check needs an AMD trajectory.")
    idx = traj.report_indices(t_min, samples_per_decade)
    t = traj.t[idx]
    X = traj.first[idx]
    gap = np.maximum(0.5 * _sq_rows(X) - 0.5 * float(ctx.p_star @ ctx.p_star), 0.0)
    checks = [bound_check("amd-value", gap, traj.r**2 * ctx.D / t**2, rel, abs_tol)]
    if oracle is not None and oracle.dual_set is not None:
        gaps = np.array([membership_gap(oracle.dual_set, x) for x in traj.first])
        checks.append(bound_check("amd-membership", gaps, np.zeros_like(gaps), 0.0, 1e-6))
    return checks


def continuous_energy(
    traj: ODETrajectory,
    oracle: ObjectiveOracle,
    p_star: Vector,
    w: Vector,
    g_of_w: float,
) -> Vector:
    """r = 2 时 V_w(t) = (t^2/2)(g(x) - g(w)) + ||z + (t^2/4)p* - w||^2。"""
    if traj.kind is not FlowKind.NAG or traj.r != 2.0:
        raise PreconditionViolation("The continuous energy is defined for the NAG flow with r = 2.")
    f = np.array([oracle.eval(x) for x in traj.first])
    g = f - traj.first @ p_star
    shifted = traj.second + (traj.t**2 / 4.0)[:, None] * p_star - w
    return 0.5 * traj.t**2 * (g - g_of_w) + _sq_rows(shifted)


def energy_excess(energy: Vector, t: Vector, t_min: float = REPORT_T_MIN, tol: float = ENERGY_TOL) -> float:
    """t >= t_min 上相邻差分的最大正增量除以 tol·scale，不超过 1 即视为单调不增。"""
    tail = energy[t >= t_min]
    if tail.size < 2:
        return 0.0
    scale = 1.0 + float(np.max(np.abs(tail)))
    return max(float(np.max(np.diff(tail))), 0.0) / (tol * scale)


def _cumulative(integrand: Matrix, t: Vector) -> Matrix:
    """沿时间轴的累积 Simpson 积分，首项为 0；单点轨迹直接返回 0。"""
    if t.size < 2:
        return np.zeros_like(integrand)
    return cumulative_simpson(integrand, x=t, axis=0, initial=0.0)


def _leading_integral(t0: float, power: float, value: Vector) -> Vector:
    """∫_0^{t0} τ^power dτ · value，[0, t0] 上被积函数取首项。"""
    return t0 ** (power + 1.0) / (power + 1.0) * value


def quadrature_p(traj: ODETrajectory, oracle: ObjectiveOracle) -> Matrix:
    """p(t) = (r+2)/t^{r+2} ∫_0^t τ^{r+1} ∇f(x(τ)) dτ，r = 2 时即 4/t^4 ∫ τ^3 ∇f。"""
    r = traj.r
    grads = np.array([oracle.grad(x) for x in traj.first])
    integrand = traj.t[:, None] ** (r + 1.0) * grads
    integral = _cumulative(integrand, traj.t)
    integral += _leading_integral(traj.t0, r + 1.0, oracle.grad(traj.origin))
    return ((r + 2.0) / traj.t ** (r + 2.0))[:, None] * integral


def quadrature_q(traj: ODETrajectory) -> Matrix:
    """q(t) = (2/t^2) ∫_0^t s p(s) ds。"""
    integrand = traj.t[:, None] * traj.p
    integral = _cumulative(integrand, traj.t)
    integral += _leading_integral(traj.t0, 1.0, traj.p[0])
    return (2.0 / traj.t**2)[:, None] * integral


def quadrature_errors(traj: ODETrajectory, oracle: ObjectiveOracle, t_min: float = REPORT_T_MIN) -> tuple[float, float]:
    mask = traj.t >= t_min
    if not mask.any():
        return 0.0, 0.0
    p_err = float(np.max(np.linalg.norm(quadrature_p(traj, oracle)[mask] - traj.p[mask], axis=1)))
    q_err = float(np.max(np.linalg.norm(quadrature_q(traj)[mask] - traj.q[mask], axis=1)))
    return p_err, q_err


@dataclass(frozen=True)
class TightnessFit:
    alpha: float
    exponent: float
    expected: float
    min_abs_p: float
    max_excess_over_xi: float

    @property
    def passed(self) -> bool:
        return abs(self.exponent - self.expected) <= 0.3


def tightness_fit(
    alpha: float,
    r: float = 2.0,
    t_range: tuple[float, float] = (10.0, 100.0),
    dt: float = 1e-2,
    samples_per_decade: int = SAMPLES_PER_DECADE,
) -> TightnessFit:
    """
    一维例子 x0 = 0 上拟合 |p(t)| - 1 ~ t^e 的指数（log-log 最小二乘），期望 e = -2(1+α)。
    同时给出 min |p(t)| 与 x(t) - ξ(t) 的最大值，ξ(t) = (1+α)t^2/(2(r+2))。
    """
    oracle = OneDimTight(alpha=alpha)
    traj = integrate_nag_ode(oracle, np.zeros(1), r, t_range[1], dt)
    abs_p = np.abs(traj.p[:, 0])
    idx = traj.report_indices(t_range[0], samples_per_decade)
    slope, _ = np.polyfit(np.log(traj.t[idx]), np.log(abs_p[idx] - 1.0), 1)
    xi = (1.0 + alpha) * traj.t**2 / (2.0 * (r + 2.0))
    return TightnessFit(
        alpha=alpha,
        exponent=float(slope),
        expected=-2.0 * (1.0 + alpha),
        min_abs_p=float(abs_p.min()),
        max_excess_over_xi=float(np.max(traj.first[:, 0] - xi)),
    )


def exponent_from_ratio(ratio: float) -> float:
    """Richardson 比值对应的收敛阶 log2(ratio)。"""
    return math.log2(ratio)
