import math
from dataclasses import dataclass
from itertools import combinations
from typing import TYPE_CHECKING

import numpy as np

from src.core.errors import DegenerateInput, PreconditionViolation

if TYPE_CHECKING:
    from src.objectives.geometric import GeometricProgram

MAX_STATS_DIM = 3


@dataclass(frozen=True)
class NewtonPolytopeStats:
    m: int
    phi: float
    beta: float


def newton_polytope_stats(gp: "GeometricProgram", tol: float = 1e-12) -> NewtonPolytopeStats:
    """
    Newton 多面体 Conv Ω 的 (m, φ, β)：
    m 为 Ω 仿射包的维数；φ 为顶点到不含它的 facet 仿射包的最小距离；β = Σc / c_min。
    facet 通过在仿射包坐标中穷举 m 元点组得到，只支持环境维数 <= 3。
    """
    if gp.dim > MAX_STATS_DIM:
        raise PreconditionViolation(f"Newton polytope statistics support dimension <= {MAX_STATS_DIM}, got {gp.dim}.")
    omega = np.unique(gp.omega, axis=0)
    beta = float(gp.c.sum() / gp.c.min())
    if omega.shape[0] < 2:
        raise DegenerateInput("All exponent vectors coincide; phi is undefined.")

    offsets = omega - omega[0]
    scale = max(1.0, float(np.abs(offsets).max()))
    _, singular, vt = np.linalg.svd(offsets)
    m = int(np.sum(singular > tol * scale * max(offsets.shape)))
    coords = offsets @ vt[:m].T

    phi = math.inf
    for face in combinations(range(coords.shape[0]), m):
        anchor = coords[face[0]]
        if m == 1:
            normal = np.ones(1)
        else:
            spans = coords[list(face[1:])] - anchor
            _, s, vt_face = np.linalg.svd(spans)
            if s.min() <= tol * scale:
                continue
            normal = vt_face[-1]
        signed = (coords - anchor) @ normal
        on_plane = np.abs(signed) <= tol * scale
        off = signed[~on_plane]
        if off.size == 0:
            continue
        if np.all(off > 0) or np.all(off < 0):
            phi = min(phi, float(np.abs(off).min()))
    if not math.isfinite(phi):
        raise DegenerateInput("No facet found for the Newton polytope.")
    return NewtonPolytopeStats(m=m, phi=phi, beta=beta)


def geometric_value_threshold(stats: NewtonPolytopeStats) -> float:
    """A_k 超过 m^2/(βφ^2) 后 geometric_value_bound 才成立。"""
    return stats.m**2 / (stats.beta * stats.phi**2)


def geometric_value_bound(stats: NewtonPolytopeStats, A_k: float) -> float:
    """g(x^(k)) - inf g <= 2m^2/(φ^2 A_k) (1 + log^2(βφ^2 A_k / m^2))，x0 = 0。"""
    if A_k <= geometric_value_threshold(stats):
        return math.inf
    ratio = stats.beta * stats.phi**2 * A_k / stats.m**2
    return 2.0 * stats.m**2 / (stats.phi**2 * A_k) * (1.0 + math.log(ratio) ** 2)


def geometric_value_bound_delta(stats: NewtonPolytopeStats, A_k: float, delta: float) -> float:
    """任意 0 < δ < 2β 的形式 δ + (2/A_k)(m/φ · log(2β/δ))^2。"""
    if not 0 < delta < 2 * stats.beta:
        raise ValueError(f"delta must lie in (0, 2*beta) = (0, {2 * stats.beta}), got {delta}.")
    radius = stats.m / stats.phi * math.log(2 * stats.beta / delta)
    return delta + 2.0 * radius**2 / A_k
