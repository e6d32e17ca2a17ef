import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from src.accel.bounds import bound_series, detection_thresholds, polynomial_caps
from src.accel.certificates import certificates
from src.accel.detection import detect_unbounded_nag
from src.accel.energy import energy_series, g_values, geometric_value_series
from src.accel.nag import run_nag
from src.accel.schedule import ScheduleKind, make_schedule
from src.conf.env import settings
from src.core.divergence import check_smooth_convex, divergence_upper_bound, finite_difference_grad
from src.core.errors import MissingConjugateBound, PreconditionViolation
from src.core.oracle import ObjectiveOracle
from src.core.vector import Vector, as_vector, sample_box
from src.descent.gd import detect_unbounded_gd, gd_bounds, gd_c0, gd_schedule_bound, run_gd
from src.descent.mirror import mirror_constant_rate_bound, mirror_energy, mirror_rate_bound, run_mirror
from src.descent.schedule import StepSchedule
from src.dualgeom.context import BoundsContext, ground_truth, make_bounds_context
from src.dualgeom.polytope_stats import MAX_STATS_DIM, newton_polytope_stats
from src.model.experiment_model import ExperimentConfig, RunSummary
from src.model.report_model import BoundCheck, CertificateReport
from src.objectives.factory import build_oracle
from src.objectives.geometric import GeometricProgram
from src.objectives.simple import QuadraticObjective
from src.ode.checks import (
    amd_value_check,
    bound_check,
    continuous_bounds,
    continuous_energy,
    correspondence_check,
    energy_excess,
    quadrature_errors,
    tightness_fit,
)
from src.ode.flows import integrate_amd_ode, integrate_nag_ode
from src.utils.csv_writer import COLUMNS_BY_ALGORITHM

logger = logging.getLogger(__name__)

# 离散界：精确算术下成立，只留舍入容差
DISCRETE_REL_SLACK = 1e-9
DISCRETE_ABS_SLACK = 1e-12
ENERGY_TOL = 1e-9
QUADRATURE_TOL = 1e-5
TIGHTNESS_EXPONENT_TOL = 0.3
VALUE_SAMPLE_COUNT = 20
ORACLE_SAMPLE_COUNT = 20
APPROX_INF_G_ITERS = 2000


def _sq_rows(M: np.ndarray) -> Vector:
    return np.einsum("ij,ij->i", M, M)


def _discrete_check(name: str, observed: Vector, bound: Vector) -> BoundCheck:
    return bound_check(name, observed, bound, DISCRETE_REL_SLACK, DISCRETE_ABS_SLACK)


def _tolerance_check(name: str, observed: float, tol: float) -> BoundCheck:
    ratio = max(observed, 0.0) / tol
    return BoundCheck(name=name, passed=ratio <= 1.0, max_slack=ratio)


@dataclass
class ProblemContext:
    """一次实验共用的目标、初始点与对偶侧真值。"""

    oracle: ObjectiveOracle
    L: float
    x0: Vector
    p_star: Vector | None
    inf_g: float | None
    # CSV 中 g - inf g 使用的参考值；inf g 未知时是长程 NAG 的近似
    g_ref: float | None
    bounds: BoundsContext | None

    @property
    def p_star_sq(self) -> float:
        return 0.0 if self.p_star is None else float(self.p_star @ self.p_star)

    @property
    def at_origin(self) -> bool:
        return not np.any(self.x0 != 0.0)

    def g(self, x: Vector, f: float) -> float:
        return f - float(self.p_star @ x)


@dataclass
class RunOutcome:
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    checks: list[BoundCheck] = field(default_factory=list)
    report: CertificateReport | None = None


def approximate_inf_g(oracle: ObjectiveOracle, p_star: Vector, x0: Vector, iterations: int = APPROX_INF_G_ITERS) -> float:
    """没有解析共轭时，用加速法长程运行中观测到的最小 g 近似 inf g（是 inf g 的上界）。"""
    sched = make_schedule(ScheduleKind.POLYNOMIAL, oracle.L, iterations)
    traj = run_nag(oracle, x0, sched, iterations)
    value = float(np.min(g_values(traj, p_star)))
    logger.warning(f"inf g of {oracle.name} is approximated by {value:.12g} from {iterations} NAG iterations.")
    return value


def prepare_problem(config: ExperimentConfig) -> ProblemContext:
    oracle = build_oracle(config.problem)
    L = config.L if config.L is not None else oracle.L
    x0 = np.zeros(oracle.dim) if config.x0 is None else as_vector(config.x0, oracle.dim)
    truth = ground_truth(oracle, max_iter=settings.WOLFE_MAX_ITER)
    p_star = None if truth is None else truth.p_star
    inf_g = config.inf_g if config.inf_g is not None else (None if truth is None else truth.inf_g)

    bounds = None
    g_ref = inf_g
    if p_star is None:
        logger.warning(f"{oracle.name} has no dual-set description; bound checks and energies are skipped.")
    else:
        try:
            bounds = make_bounds_context(oracle, x0, p_star, inf_g)
        except MissingConjugateBound as e:
            logger.warning(f"{e} Bound checks are skipped.")
        if g_ref is None:
            g_ref = approximate_inf_g(oracle, p_star, x0)
    return ProblemContext(oracle=oracle, L=L, x0=x0, p_star=p_star, inf_g=inf_g, g_ref=g_ref, bounds=bounds)


def oracle_checks(pc: ProblemContext, seed: int) -> list[BoundCheck]:
    """随机点对上的光滑凸性（使用实验采用的 L）与有限差分梯度核对。"""
    rng = np.random.default_rng(seed)
    dim = pc.oracle.dim
    points = sample_box(rng, 2 * ORACLE_SAMPLE_COUNT, dim)
    pairs = [(points[2 * i], points[2 * i + 1]) for i in range(ORACLE_SAMPLE_COUNT)]
    report = check_smooth_convex(pc.oracle, pairs, L=pc.L)
    grad_error = max(
        float(np.linalg.norm(finite_difference_grad(pc.oracle, x, h=settings.FD_STEP) - pc.oracle.grad(x)))
        for x in points[:ORACLE_SAMPLE_COUNT]
    )
    return [
        _tolerance_check("oracle-smooth-convex", report.max_violation, report.tolerance),
        _tolerance_check("oracle-gradient", grad_error, 1e-5),
    ]


def _g_minus_inf(pc: ProblemContext, xs: np.ndarray, fs: Vector) -> Vector | None:
    if pc.p_star is None or pc.g_ref is None:
        return None
    return fs - xs @ pc.p_star - pc.g_ref


def _cell(series: Vector | None, i: int):
    return None if series is None else series[i]


def run_gd_experiment(config: ExperimentConfig, pc: ProblemContext, progress: bool) -> RunOutcome:
    oracle, L, K = pc.oracle, pc.L, config.k_max
    eta = config.eta if config.eta is not None else 1.0 / L
    traj = run_gd(oracle, pc.x0, StepSchedule.constant(eta), K, progress=progress)
    outcome = RunOutcome(columns=COLUMNS_BY_ALGORITHM["gd"])
    unit_step = math.isclose(eta, 1.0 / L, rel_tol=1e-12)
    ks = np.arange(K + 1)

    grad_sq = _sq_rows(traj.grad)
    g_gap = _g_minus_inf(pc, traj.x, traj.f)
    p_err = p_gap = q_err = q_gap = p_bound = q_bound = None
    if pc.p_star is not None:
        p_err = _sq_rows(traj.grad - pc.p_star)
        p_gap = grad_sq - pc.p_star_sq
        q_err = _sq_rows(traj.q - pc.p_star)
        q_gap = _sq_rows(traj.q) - pc.p_star_sq
    if pc.bounds is not None and K >= 1:
        D = pc.bounds.D
        p_bound = np.full(K + 1, np.nan)
        p_bound[1:] = [gd_schedule_bound(a, D) for a in traj.a[1:]]
        outcome.checks.append(_discrete_check("gd-p-error", p_err[1:], p_bound[1:]))
        outcome.checks.append(_discrete_check("gd-p-gap", p_gap[1:], p_bound[1:]))
        if unit_step:
            C0 = gd_c0(traj.grad[0], pc.p_star, L, D)
            per_k = [gd_bounds(k, L, D, C0) for k in range(1, K + 1)]
            q_bound = np.concatenate(([np.nan], [b.q_bound for b in per_k]))
            outcome.checks.append(_discrete_check("gd-q-error", q_err[1:], q_bound[1:]))
            if C0 is not None:
                gap_bounds = np.array([b.q_gap_bound for b in per_k])
                outcome.checks.append(_discrete_check("gd-q-gap", q_gap[1:], gap_bounds))

    detected = None
    M = oracle.conjugate_bound
    if M is not None:
        if pc.at_origin:
            outcome.report = detect_unbounded_gd(traj, L, M=M, p_star=pc.p_star)
            budget = M + float(traj.f[0])
        else:
            budget = divergence_upper_bound(oracle, pc.x0)
            outcome.report = detect_unbounded_gd(traj, L, divergence_bound=budget, p_star=pc.p_star)
        detected = np.zeros(K + 1, dtype=bool)
        detected[1:] = grad_sq[1:] > 2.0 * L * budget / ks[1:]

    for k in range(K + 1):
        outcome.rows.append({
            "k": k,
            "f": traj.f[k],
            "g_minus_inf": _cell(g_gap, k),
            "grad_norm_sq": grad_sq[k],
            "p_err_sq": _cell(p_err, k),
            "p_gap": _cell(p_gap, k),
            "q_err_sq": _cell(q_err, k),
            "q_gap": _cell(q_gap, k),
            "p_bound": _cell(p_bound, k),
            "q_bound": _cell(q_bound, k),
            "detected": None if detected is None or k == 0 else bool(detected[k]),
        })
    return outcome


def _value_checks(config: ExperimentConfig, pc: ProblemContext, traj, sched) -> list[BoundCheck]:
    """g(x^(k)) - g(w) <= 2||w - x0||^2/A_k 对随机参考点 w。"""
    rng = np.random.default_rng(config.seed)
    ws = pc.x0 + sample_box(rng, VALUE_SAMPLE_COUNT, pc.oracle.dim)
    K = traj.k_max
    g_traj = g_values(traj, pc.p_star)
    worst = -math.inf
    for w in ws:
        g_w = pc.g(w, pc.oracle.eval(w))
        bound = 2.0 * float((w - pc.x0) @ (w - pc.x0)) / sched.A[1 : K + 1]
        check = _discrete_check("nag-value", g_traj[1:] - g_w, bound)
        worst = max(worst, check.max_slack)
    return [BoundCheck(name="nag-value", passed=worst <= 1.0, max_slack=worst)]


def _cap_checks(sched, bounds, ctx: BoundsContext, K: int) -> list[BoundCheck]:
    caps = polynomial_caps(sched.L, K, ctx.c_remark)
    pairs = [
        (bounds.B, caps.B), (bounds.C, caps.C), (bounds.C_prime, caps.C_prime), (bounds.B_tilde, caps.B_tilde),
    ]
    if bounds.c_tilde_applicable:
        pairs += [(bounds.C_tilde, caps.C_tilde), (bounds.C_tilde_prime, caps.C_tilde_prime)]
    worst = max(_discrete_check("nag-caps", exact[1:], cap[1:]).max_slack for exact, cap in pairs)
    return [BoundCheck(name="nag-caps", passed=worst <= 1.0, max_slack=worst)]


def run_nag_experiment(config: ExperimentConfig, pc: ProblemContext, progress: bool) -> RunOutcome:
    oracle, K = pc.oracle, config.k_max
    sched = make_schedule(config.schedule or ScheduleKind.POLYNOMIAL, pc.L, K, custom=config.custom_A)
    traj = run_nag(oracle, pc.x0, sched, K, progress=progress)
    certs = certificates(traj, sched)
    B, B_tilde = detection_thresholds(sched, K)
    outcome = RunOutcome(columns=COLUMNS_BY_ALGORITHM["nag"])

    grad_sq = _sq_rows(traj.grad_x)
    g_gap = _g_minus_inf(pc, traj.x[: K + 1], traj.f_x)
    p_sq, q_sq = _sq_rows(certs.p), _sq_rows(certs.q)
    grad_y_err = p_err = p_gap = q_err = q_gap = energy = None
    if pc.p_star is not None:
        grad_y_err = _sq_rows(traj.grad_y - pc.p_star)
        p_err = _sq_rows(certs.p - pc.p_star)
        q_err = _sq_rows(certs.q - pc.p_star)
        p_gap = p_sq - pc.p_star_sq
        q_gap = q_sq - pc.p_star_sq
        en = energy_series(traj, sched, pc.x0, pc.p_star, pc.g(pc.x0, float(traj.f_x[0])))
        energy = en.values
        outcome.checks.append(_tolerance_check("nag-energy-decrement", en.max_excess(), ENERGY_TOL))
        outcome.checks.append(_tolerance_check("nag-energy-sign", float(np.max(en.values)) / en.scale, ENERGY_TOL))
        outcome.checks += _value_checks(config, pc, traj, sched)

    ctx = pc.bounds
    if ctx is not None:
        bs = bound_series(sched, ctx, K)
        D = ctx.D
        outcome.checks.append(_discrete_check("nag-p-error", p_err[1:], bs.B[1:] * D))
        outcome.checks.append(_discrete_check("nag-q-error", q_err[1:], bs.B_tilde[1:] * D))
        if pc.p_star_sq > 0:
            p_gap_bound = bs.C_prime[1:] * D + bs.C[1:] ** 2 * D**2 / pc.p_star_sq
            outcome.checks.append(_discrete_check("nag-p-gap", p_gap[1:], p_gap_bound))
            if bs.c_tilde_applicable:
                q_gap_bound = bs.C_tilde_prime[1:] * D + bs.C_tilde[1:] ** 2 * D**2 / pc.p_star_sq
                outcome.checks.append(_discrete_check("nag-q-gap", q_gap[1:], q_gap_bound))
        if sched.kind is ScheduleKind.POLYNOMIAL:
            outcome.checks += _cap_checks(sched, bs, ctx, K)
        if (
            isinstance(oracle, GeometricProgram)
            and pc.at_origin
            and ctx.exact
            and oracle.dim <= MAX_STATS_DIM
        ):
            stats = newton_polytope_stats(oracle)
            gaps, value_bounds = geometric_value_series(traj, sched, stats, pc.p_star, pc.inf_g)
            mask = np.isfinite(value_bounds)
            outcome.checks.append(_discrete_check("nag-geometric-value", gaps[mask], value_bounds[mask]))

    detected_p = detected_q = None
    M = oracle.conjugate_bound
    if M is not None and pc.at_origin:
        f0 = float(traj.f_x[0])
        outcome.report = detect_unbounded_nag(certs, B, B_tilde, M, f0, x0=pc.x0, p_star=pc.p_star)
        detected_p = p_sq > B * (M + f0)
        detected_q = q_sq > B_tilde * (M + f0)

    for k in range(K + 1):
        outcome.rows.append({
            "k": k,
            "f": traj.f_x[k],
            "g_minus_inf": _cell(g_gap, k),
            "grad_norm_sq": grad_sq[k],
            "grad_y_err_sq": _cell(grad_y_err, k),
            "p_err_sq": _cell(p_err, k),
            "p_gap": _cell(p_gap, k),
            "q_err_sq": _cell(q_err, k),
            "q_gap": _cell(q_gap, k),
            "B_k": B[k],
            "Btilde_k": B_tilde[k],
            "energy": _cell(energy, k),
            "detected_p": None if detected_p is None or k == 0 else bool(detected_p[k]),
            "detected_q": None if detected_q is None or k == 0 else bool(detected_q[k]),
        })
    return outcome


def run_mirror_experiment(config: ExperimentConfig, pc: ProblemContext, progress: bool) -> RunOutcome:
    """Ψ* 取问题目标，F 默认 ||·||^2/2；θ0 = x0。"""
    psi_star, K = pc.oracle, config.k_max
    F = QuadraticObjective(dim=psi_star.dim) if config.mirror_F is None else build_oracle(config.mirror_F)
    eta = config.eta if config.eta is not None else 1.0 / (F.L * pc.L)
    state = run_mirror(psi_star, F, pc.x0, StepSchedule.constant(eta), K)
    outcome = RunOutcome(columns=COLUMNS_BY_ALGORITHM["mirror"])

    F_X = np.array([F.eval(X) for X in state.X])
    energy = mirror_energy(state, psi_star, F, pc.x0)
    scale = 1.0 + float(np.max(np.abs(energy)))
    rise = float(np.max(np.diff(energy))) / scale if K >= 1 else 0.0
    outcome.checks.append(_tolerance_check("mirror-energy", rise, ENERGY_TOL))

    gap = None
    if pc.p_star is not None:
        gap = _sq_rows(state.X) - pc.p_star_sq
    if pc.bounds is not None and isinstance(F, QuadraticObjective) and K >= 1:
        D = pc.bounds.D
        if math.isclose(eta, 1.0 / (F.L * pc.L), rel_tol=1e-12):
            rate = np.array([mirror_constant_rate_bound(F.L, pc.L, D, k) for k in range(1, K + 1)])
        else:
            rate = np.array([mirror_rate_bound(D, a) for a in state.a[1:]])
        outcome.checks.append(_discrete_check("mirror-rate", F_X[1:] - 0.5 * pc.p_star_sq, rate))

    for k in range(K + 1):
        outcome.rows.append({"k": k, "F_X": F_X[k], "X_norm_sq_gap": _cell(gap, k), "energy": energy[k]})
    return outcome


def run_nag_ode_experiment(config: ExperimentConfig, pc: ProblemContext, progress: bool) -> RunOutcome:
    oracle = pc.oracle
    r = config.r if config.r is not None else 2.0
    t_min, spd = settings.ODE_REPORT_T_MIN, settings.ODE_SAMPLES_PER_DECADE
    rel = settings.ODE_BOUND_SLACK
    traj = integrate_nag_ode(oracle, pc.x0, r, config.t_end, config.dt, t0=config.t0)
    logger.debug(f"Series initialization residual at t0 = {traj.t0:.3g}: {traj.init_residual:.3e}")
    outcome = RunOutcome(columns=COLUMNS_BY_ALGORITHM["nag_ode"])
    idx = traj.report_indices(t_min, spd)

    fs = np.array([oracle.eval(x) for x in traj.first[idx]])
    g_gap = _g_minus_inf(pc, traj.first[idx], fs)
    p, q = traj.p[idx], traj.q[idx]
    p_err = p_gap = q_err = q_gap = energy = None
    if pc.p_star is not None:
        p_err = _sq_rows(p - pc.p_star)
        p_gap = _sq_rows(p) - pc.p_star_sq
        q_err = _sq_rows(q - pc.p_star)
        q_gap = _sq_rows(q) - pc.p_star_sq
        if r == 2.0:
            dense = continuous_energy(traj, oracle, pc.p_star, pc.x0, pc.g(pc.x0, oracle.eval(pc.x0)))
            energy = dense[idx]
            excess = energy_excess(dense, traj.t, t_min)
            outcome.checks.append(BoundCheck(name="ode-energy", passed=excess <= 1.0, max_slack=excess))
    if pc.bounds is not None:
        outcome.checks += continuous_bounds(traj, pc.bounds, r, t_min, spd, rel=rel)

    p_quad, q_quad = quadrature_errors(traj, oracle, t_min)
    outcome.checks.append(_tolerance_check("ode-quadrature-p", p_quad, QUADRATURE_TOL))
    outcome.checks.append(_tolerance_check("ode-quadrature-q", q_quad, QUADRATURE_TOL))

    if "correspondence" in config.extra_checks:
        report = correspondence_check(oracle, pc.x0, r, config.t_end, config.dt, config.t0, t_min, spd)
        outcome.checks.append(_tolerance_check("ode-correspondence", report.max_gap, report.tolerance))
    if "tightness" in config.extra_checks:
        if not pc.at_origin:
            raise PreconditionViolation("The tightness check starts from x0 = 0.")
        fit = tightness_fit(config.problem.alpha, r, (10.0, config.t_end), config.dt, spd)
        outcome.checks.append(
            _tolerance_check("ode-tightness-exponent", abs(fit.exponent - fit.expected), TIGHTNESS_EXPONENT_TOL)
        )
        outcome.checks.append(_tolerance_check("ode-tightness-interval", 1.0 - fit.min_abs_p, 1e-9))
        outcome.checks.append(_tolerance_check("ode-tightness-comparison", fit.max_excess_over_xi, 1e-6))

    for j, i in enumerate(idx):
        outcome.rows.append({
            "t": traj.t[i],
            "f": fs[j],
            "g_minus_inf": _cell(g_gap, j),
            "p_err_sq": _cell(p_err, j),
            "p_gap": _cell(p_gap, j),
            "q_err_sq": _cell(q_err, j),
            "q_gap": _cell(q_gap, j),
            "energy": _cell(energy, j),
        })
    return outcome


def run_amd_ode_experiment(config: ExperimentConfig, pc: ProblemContext, progress: bool) -> RunOutcome:
    """Ψ* 取问题目标、F = ||·||^2/2 的 AMD 流；Z 对应 x，X 对应 p。"""
    oracle = pc.oracle
    R = config.r if config.r is not None else 4.0
    t_min, spd = settings.ODE_REPORT_T_MIN, settings.ODE_SAMPLES_PER_DECADE
    traj = integrate_amd_ode(oracle, pc.x0, R, config.t_end, config.dt, t0=config.t0)
    outcome = RunOutcome(columns=COLUMNS_BY_ALGORITHM["amd_ode"])
    idx = traj.report_indices(t_min, spd)

    Z, X = traj.second[idx], traj.first[idx]
    fs = np.array([oracle.eval(z) for z in Z])
    g_gap = _g_minus_inf(pc, Z, fs)
    p_err = p_gap = None
    if pc.p_star is not None:
        p_err = _sq_rows(X - pc.p_star)
        p_gap = _sq_rows(X) - pc.p_star_sq
    if pc.bounds is not None:
        outcome.checks += amd_value_check(traj, pc.bounds, oracle, t_min, spd, rel=settings.ODE_BOUND_SLACK)

    for j, i in enumerate(idx):
        outcome.rows.append({
            "t": traj.t[i],
            "f": fs[j],
            "g_minus_inf": _cell(g_gap, j),
            "p_err_sq": _cell(p_err, j),
            "p_gap": _cell(p_gap, j),
        })
    return outcome


RUNNERS = {
    "gd": run_gd_experiment,
    "nag": run_nag_experiment,
    "mirror": run_mirror_experiment,
    "nag_ode": run_nag_ode_experiment,
    "amd_ode": run_amd_ode_experiment,
}


def run_experiment(config: ExperimentConfig, progress: bool = False) -> tuple[RunSummary, RunOutcome]:
    """同步执行一个实验，返回汇总与逐行数据。"""
    started = time.perf_counter()
    pc = prepare_problem(config)
    outcome = RUNNERS[config.algorithm](config, pc, progress)
    outcome.checks = oracle_checks(pc, config.seed) + outcome.checks
    report = outcome.report
    summary = RunSummary(
        name=config.name,
        algorithm=config.algorithm,
        verdict=None if report is None else report.verdict,
        trigger_index=None if report is None else report.trigger_index,
        witness=None if report is None else report.witness,
        max_bound_slack=max((c.max_slack for c in outcome.checks), default=None),
        checks=outcome.checks,
        runtime_ms=(time.perf_counter() - started) * 1000.0,
    )
    failed = [c.name for c in outcome.checks if not c.passed]
    if failed:
        logger.warning(f"{config.name}: {len(failed)} check(s) failed: {', '.join(failed)}")
    else:
        logger.info(f"{config.name}: {len(outcome.checks)} checks passed, max slack {summary.max_bound_slack:.3g}")
    return summary, outcome
