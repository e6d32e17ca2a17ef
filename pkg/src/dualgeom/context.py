import logging
import math
from dataclasses import dataclass

from src.core.divergence import divergence_upper_bound
from src.core.errors import MissingConjugateBound
from src.core.oracle import ObjectiveOracle
from src.core.vector import Vector
from src.dualgeom.dual_set import min_norm_point
from src.dualgeom.wolfe import WOLFE_MAX_ITER

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    p_star: Vector
    # inf g = -f*(p*)；没有解析共轭时为 None
    inf_g: float | None


@dataclass(frozen=True, eq=False)
class BoundsContext:
    D: float
    p_star: Vector
    c_remark: float
    # True: D = g(x0) - inf g 精确；False: D 取 divergence_upper_bound
    exact: bool


def ground_truth(oracle: ObjectiveOracle, max_iter: int = WOLFE_MAX_ITER) -> GroundTruth | None:
    ds = oracle.dual_set
    if ds is None:
        return None
    p_star = min_norm_point(ds, max_iter=max_iter).point
    f_star = oracle.conjugate(p_star)
    inf_g = None if f_star is None or math.isinf(f_star) else -f_star
    return GroundTruth(p_star=p_star, inf_g=inf_g)


def make_bounds_context(
    oracle: ObjectiveOracle,
    x0: Vector,
    p_star: Vector,
    inf_g: float | None = None,
) -> BoundsContext:
    """
    D_f(x0, p*) = g(x0) - inf g（已知 inf g 时）；否则退回 M + f(x0) + ||x0|| ||∇f(x0)||。
    c_remark = <∇g(x0), p*> / (4 L D)，D = 0 时取 0。
    """
    f0, grad0 = oracle.eval_grad(x0)
    g0 = f0 - float(p_star @ x0)
    if inf_g is not None:
        D = max(g0 - inf_g, 0.0)
        exact = True
    else:
        try:
            D = divergence_upper_bound(oracle, x0)
        except MissingConjugateBound:
            raise MissingConjugateBound(
                f"{oracle.name} has neither a known inf g nor a conjugate bound M; D_f(x0, p*) cannot be bounded."
            ) from None
        exact = False
        logger.warning(f"D_f(x0, p*) replaced by its upper bound {D:.6g} for {oracle.name}.")
    c_remark = float((grad0 - p_star) @ p_star) / (4.0 * oracle.L * D) if D > 0 else 0.0
    return BoundsContext(D=D, p_star=p_star, c_remark=c_remark, exact=exact)
