import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from tqdm import tqdm

from src.core.errors import PreconditionViolation
from src.core.oracle import ObjectiveOracle
from src.core.vector import Matrix, Vector, as_vector, ensure_finite
from src.descent.schedule import StepSchedule
from src.model.report_model import CertificateReport, Verdict, WitnessKind

logger = logging.getLogger(__name__)

STEP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class GDTrajectory:
    """x_k、p_k = ∇f(x_k)、f(x_k)，k = 0..k_max；q_k 按需计算。"""

    x: Matrix
    grad: Matrix
    f: Vector
    a: Vector
    etas: Vector

    @property
    def k_max(self) -> int:
        return self.x.shape[0] - 1

    @property
    def x0(self) -> Vector:
        return self.x[0]

    @cached_property
    def q(self) -> Matrix:
        """q_k = -(x_k - x_0)/a_k；第 0 行没有定义，填 nan。"""
        q = np.full_like(self.x, np.nan)
        q[1:] = -(self.x[1:] - self.x0) / self.a[1:, None]
        return q

    def q_weighted_average(self) -> Matrix:
        """(1/a_k) Σ_{i<k} η_i ∇f(x_i)，与 q 相同但走另一条计算路径。"""
        weighted = np.cumsum(self.etas[:, None] * self.grad[:-1], axis=0)
        out = np.full_like(self.x, np.nan)
        out[1:] = weighted / self.a[1:, None]
        return out


def run_gd(
    oracle: ObjectiveOracle,
    x0: Vector,
    sched: StepSchedule,
    k_max: int,
    progress: bool = False,
) -> GDTrajectory:
    """x_{k+1} = x_k - η_k ∇f(x_k)。步长超过 1/L 时只警告，此时各上界不再适用。"""
    x = as_vector(x0, oracle.dim).copy()
    etas = sched.steps(k_max)
    if k_max > 0 and float(etas.max()) > (1.0 + STEP_TOL) / oracle.L:
        logger.warning(f"Step size {float(etas.max()):.6g} exceeds 1/L = {1.0 / oracle.L:.6g}; GD bounds do not apply.")

    xs = np.empty((k_max + 1, oracle.dim))
    grads = np.empty((k_max + 1, oracle.dim))
    fs = np.empty(k_max + 1)
    for k in tqdm(range(k_max + 1), desc="gd", disable=not progress):
        fs[k], grads[k] = oracle.eval_grad(x)
        xs[k] = x
        if k < k_max:
            x = ensure_finite(x - etas[k] * grads[k], k + 1)
    return GDTrajectory(x=xs, grad=grads, f=fs, a=sched.prefix(k_max), etas=etas)


@dataclass(frozen=True)
class GDBounds:
    p_bound: float
    q_bound: float
    q_gap_bound: float | None


def gd_c0(grad0: Vector, p_star: Vector, L: float, D: float) -> float | None:
    """C_0 = 1 + (||∇f(x0)||^2 - ||p*||^2)/(2LD)；D = 0 时没有定义。"""
    if D <= 0:
        return None
    return 1.0 + (float(grad0 @ grad0) - float(p_star @ p_star)) / (2.0 * L * D)


def gd_bounds(k: int, L: float, D: float, C0: float | None = None) -> GDBounds:
    """η = 1/L 时：||∇f(x_k) - p*||^2 <= 2LD/k，||q_k - p*||^2 <= 8LD/k，||q_k||^2 - ||p*||^2 <= 2LD(C0 + log k)/k。"""
    if k < 1 or L <= 0 or D < 0:
        raise PreconditionViolation(f"gd_bounds needs k >= 1, L > 0 and D >= 0, got k={k}, L={L}, D={D}.")
    gap = None if C0 is None else 2.0 * L * D * (C0 + math.log(k)) / k
    return GDBounds(p_bound=2.0 * L * D / k, q_bound=8.0 * L * D / k, q_gap_bound=gap)


def gd_schedule_bound(a_k: float, D: float) -> float:
    """一般步长：||∇f(x_k)||^2 - ||p||^2 <= 2 D_f(x0, p) / a_k。"""
    if a_k <= 0:
        raise PreconditionViolation(f"a_k must be positive, got {a_k}.")
    return 2.0 * D / a_k


def detect_unbounded_gd(
    traj: GDTrajectory,
    L: float,
    M: float | None = None,
    divergence_bound: float | None = None,
    p_star: Vector | None = None,
) -> CertificateReport:
    """
    ||∇f(x_k)||^2 > 2L·budget/k 时判定下无界。

    默认 budget = M + f(0)，要求 x0 = 0（标签 gd-detection）；
    给出 divergence_bound 时对任意 x0 使用 M + f(x0) + ||x0|| ||∇f(x0)||（标签 gd-divergence-bound）。
    """
    if divergence_bound is None:
        if M is None:
            raise PreconditionViolation("GD detection needs either M or a divergence bound.")
        if np.any(traj.x0 != 0.0):
            raise PreconditionViolation("GD detection with M + f(0) requires x0 = 0; pass divergence_bound instead.")
        budget = M + float(traj.f[0])
        tag = "gd-detection"
    else:
        budget = divergence_bound
        tag = "gd-divergence-bound"
    if not np.allclose(traj.etas, 1.0 / L, rtol=STEP_TOL, atol=0.0):
        logger.warning("GD detection assumes the constant step 1/L; the verdict may be unsound.")

    guaranteed = None
    if p_star is not None and float(p_star @ p_star) > 0:
        guaranteed = math.floor(2.0 * L * budget / float(p_star @ p_star)) + 1

    ks = np.arange(1, traj.k_max + 1)
    thresholds = 2.0 * L * budget / ks
    norms = np.einsum("ij,ij->i", traj.grad[1:], traj.grad[1:])
    hits = np.flatnonzero(norms > thresholds)
    if hits.size == 0:
        return CertificateReport(
            verdict=Verdict.INCONCLUSIVE,
            bound_formula=tag,
            iterations=traj.k_max,
            guaranteed_index=guaranteed,
            gradient_evaluations=traj.k_max + 1,
        )
    k = int(ks[hits[0]])
    logger.info(f"GD detection triggered at k={k}: ||grad||^2={norms[hits[0]]:.6g} > {thresholds[hits[0]]:.6g}")
    return CertificateReport(
        verdict=Verdict.UNBOUNDED,
        witness=traj.grad[k].tolist(),
        witness_kind=WitnessKind.GRAD,
        trigger_index=k,
        threshold_used=float(thresholds[hits[0]]),
        bound_formula=tag,
        iterations=traj.k_max,
        guaranteed_index=guaranteed,
        gradient_evaluations=traj.k_max + 1,
    )
