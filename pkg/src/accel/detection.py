import logging

import numpy as np
from tqdm import tqdm

from src.core.errors import MissingConjugateBound, PreconditionViolation
from src.core.oracle import ObjectiveOracle
from src.core.vector import Vector
from src.accel.bounds import detection_thresholds, guaranteed_trigger_index
from src.accel.certificates import CertificateSeries, certificate_coefficients
from src.accel.nag import iterate_nag
from src.accel.schedule import ScheduleA, ScheduleKind, make_schedule
from src.model.report_model import CertificateReport, Verdict, WitnessKind

logger = logging.getLogger(__name__)

TAG = "nag-detection"


def _first_hit(points: np.ndarray, thresholds: np.ndarray) -> int | None:
    norms = np.einsum("ij,ij->i", points[1:], points[1:])
    hits = np.flatnonzero(norms > thresholds[1:])
    return None if hits.size == 0 else int(hits[0]) + 1


def detect_unbounded_nag(
    certs: CertificateSeries,
    B: Vector,
    B_tilde: Vector,
    M: float,
    f0: float,
    x0: Vector | None = None,
    p_star: Vector | None = None,
) -> CertificateReport:
    """
    ||q^(k)||^2 > B̃_k (M + f(0)) 或 ||p^(k)||^2 > B_k (M + f(0)) 时判定下无界，要求 x0 = 0。
    trigger_index 取两族中较早者，并列时取 q。
    """
    if x0 is not None and np.any(x0 != 0.0):
        raise PreconditionViolation("NAG detection requires x0 = 0.")
    budget = M + f0
    k_p = _first_hit(certs.p, B * budget)
    k_q = _first_hit(certs.q, B_tilde * budget)
    guaranteed = None
    if p_star is not None:
        guaranteed = guaranteed_trigger_index(B_tilde, float(p_star @ p_star), budget)
    return _report(certs.p, certs.q, B, B_tilde, budget, k_p, k_q, certs.k_max, guaranteed)


def _report(p, q, B, B_tilde, budget, k_p, k_q, iterations, guaranteed, evaluations=None) -> CertificateReport:
    common = dict(
        bound_formula=TAG,
        iterations=iterations,
        p_trigger_index=k_p,
        q_trigger_index=k_q,
        guaranteed_index=guaranteed,
        gradient_evaluations=evaluations if evaluations is not None else 2 * (iterations + 1),
    )
    if k_p is None and k_q is None:
        return CertificateReport(verdict=Verdict.INCONCLUSIVE, **common)
    if k_q is not None and (k_p is None or k_q <= k_p):
        k, kind, witness, threshold = k_q, WitnessKind.Q, q[k_q], B_tilde[k_q] * budget
    else:
        k, kind, witness, threshold = k_p, WitnessKind.P, p[k_p], B[k_p] * budget
    return CertificateReport(
        verdict=Verdict.UNBOUNDED,
        witness=np.asarray(witness).tolist(),
        witness_kind=kind,
        trigger_index=k,
        threshold_used=float(threshold),
        **common,
    )


def certify(
    oracle: ObjectiveOracle,
    budget: int,
    sched: ScheduleA | None = None,
    p_star: Vector | None = None,
    progress: bool = False,
) -> CertificateReport:
    """
    从 x0 = 0 运行加速法，每步同时检查 p、q 两个判据，首次触发即停止。
    默认使用 A_k = k(k+1)/L。需要共轭上界 M。
    """
    M = oracle.conjugate_bound
    if M is None:
        raise MissingConjugateBound(f"{oracle.name} declares no conjugate bound M; certify cannot set a threshold.")
    if budget < 1:
        raise PreconditionViolation(f"Certify budget must be at least 1, got {budget}.")
    sched = sched or make_schedule(ScheduleKind.POLYNOMIAL, oracle.L, budget)
    P, Q = certificate_coefficients(sched, budget)
    B, B_tilde = detection_thresholds(sched, budget)
    x0 = np.zeros(oracle.dim)
    f0 = oracle.eval(x0)
    threshold_scale = M + f0
    guaranteed = None
    if p_star is not None:
        guaranteed = guaranteed_trigger_index(B_tilde, float(p_star @ p_star), threshold_scale)

    dim = oracle.dim
    p = np.full((budget + 1, dim), np.nan)
    q = np.full((budget + 1, dim), np.nan)
    last = 0
    steps = iterate_nag(oracle, x0, sched, budget)
    for step in tqdm(steps, total=budget + 1, desc="certify", disable=not progress):
        k = last = step.k
        if k == 0:
            continue
        p[k] = -P[k] * (step.x_next - step.x)
        q[k] = -Q[k] * (step.x - x0)
        hit_p = float(p[k] @ p[k]) > B[k] * threshold_scale
        hit_q = float(q[k] @ q[k]) > B_tilde[k] * threshold_scale
        if hit_p or hit_q:
            logger.info(f"{oracle.name}: unboundedness certified at k={k} (p: {hit_p}, q: {hit_q}).")
            return _report(
                p, q, B, B_tilde, threshold_scale,
                k if hit_p else None, k if hit_q else None, k, guaranteed, evaluations=2 * (k + 1),
            )
    logger.info(f"{oracle.name}: no certificate within {budget} iterations.")
    return _report(p, q, B, B_tilde, threshold_scale, None, None, last, guaranteed)
