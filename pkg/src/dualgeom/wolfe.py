import logging
from itertools import combinations

import numpy as np

from src.core.errors import NonConvergence
from src.core.vector import Matrix, Vector

logger = logging.getLogger(__name__)

WOLFE_TOL = 1e-12
WOLFE_MAX_ITER = 10_000
# 小于该值的重心坐标视为 0，对应顶点移出 corral
_WEIGHT_EPS = 1e-14
# 重新选中 corral 内顶点时，判据间隙超过 _REPEAT_TOL * scale 即不是舍入误差
_REPEAT_TOL = 1e-11


def _affine_minimizer(points: Matrix) -> Vector:
    """
    points 仿射包上范数最小点的仿射坐标。以首点为原点最小二乘求解，
    比直接解 [[0, 1^T], [1, PP^T]] 增广系统条件数更好。
    """
    if points.shape[0] == 1:
        return np.ones(1)
    base = points[0]
    directions = (points[1:] - base).T
    beta, *_ = np.linalg.lstsq(directions, -base, rcond=None)
    return np.concatenate(([1.0 - beta.sum()], beta))


def wolfe_min_norm_point(
    vertices: Matrix,
    tol: float = WOLFE_TOL,
    max_iter: int = WOLFE_MAX_ITER,
) -> tuple[Vector, Vector]:
    """
    Wolfe 最小范数点算法。返回 (p*, 全体顶点上的凸组合权重)。

    终止条件为 Wolfe 判据 ||x||^2 - min_v <v, x> <= tol * max(1, max ||v||^2)，
    即对所有顶点 <x, v - x> >= -tol * scale。
    """
    P = np.asarray(vertices, dtype=np.float64)
    sq_norms = np.einsum("ij,ij->i", P, P)
    scale = max(1.0, float(sq_norms.max()))

    corral = [int(np.argmin(sq_norms))]
    weights = np.ones(1)
    x = P[corral[0]].copy()

    for _ in range(max_iter):
        dots = P @ x
        j = int(np.argmin(dots))
        if float(x @ x) - float(dots[j]) <= tol * scale:
            break
        if j in corral:
            # 判据只差舍入误差时会重新选中 corral 内的点
            gap = float(x @ x) - float(dots[j])
            if gap > _REPEAT_TOL * scale:
                raise NonConvergence(
                    f"Wolfe's algorithm reselected corral vertex {j} with optimality gap {gap:.3e} above {_REPEAT_TOL * scale:.3e}."
                )
            logger.debug(f"Wolfe stopped with a repeated corral point, gap={gap:.3e}")
            break
        corral.append(j)
        weights = np.append(weights, 0.0)

        # minor cycle：仿射极小点不在 corral 的相对内部时，沿线段退回并剔除顶点
        while True:
            alpha = _affine_minimizer(P[corral])
            if np.all(alpha > _WEIGHT_EPS):
                weights = alpha
                break
            denom = weights - alpha
            blocking = (alpha <= _WEIGHT_EPS) & (denom > 0)
            theta = float(np.min(weights[blocking] / denom[blocking])) if blocking.any() else 0.0
            weights = theta * alpha + (1.0 - theta) * weights
            keep = weights > _WEIGHT_EPS
            if keep.all():
                keep[int(np.argmin(weights))] = False
            corral = [idx for idx, flag in zip(corral, keep) if flag]
            weights = weights[keep]
            weights = weights / weights.sum()
        x = weights @ P[corral]
    else:
        raise NonConvergence(f"Wolfe's algorithm did not terminate within {max_iter} major cycles.")

    full_weights = np.zeros(P.shape[0])
    full_weights[corral] = weights
    return x, full_weights


def _segment_closest(a: Vector, b: Vector) -> tuple[float, Vector, float]:
    d = b - a
    dd = float(d @ d)
    if dd == 0.0:
        return float(a @ a), a.copy(), 0.0
    t = min(1.0, max(0.0, -float(a @ d) / dd))
    point = a + t * d
    return float(point @ point), point, t


def _origin_barycentric(a: Vector, b: Vector, c: Vector) -> Vector | None:
    T = np.column_stack((b - a, c - a))
    if abs(np.linalg.det(T)) < 1e-14:
        return None
    s, t = np.linalg.solve(T, -a)
    bary = np.array([1.0 - s - t, s, t])
    if np.all(bary >= -1e-13):
        return np.clip(bary, 0.0, None)
    return None


def bruteforce_min_norm_2d(vertices: Matrix) -> tuple[Vector, Vector]:
    """
    二维独立参照解：原点落在某个三角形内时返回 0；否则枚举所有顶点与顶点对线段，
    逐一闭式求最小范数点。并列时编号最小的面胜出。
    """
    P = np.asarray(vertices, dtype=np.float64)
    n_points = P.shape[0]
    weights = np.zeros(n_points)

    for i, j, k in combinations(range(n_points), 3):
        bary = _origin_barycentric(P[i], P[j], P[k])
        if bary is not None:
            weights[[i, j, k]] = bary
            return np.zeros(2), weights

    best_sq = np.inf
    best_point = P[0]
    best_face: tuple[int, ...] = (0,)
    best_t = 0.0
    for i in range(n_points):
        sq = float(P[i] @ P[i])
        if sq < best_sq:
            best_sq, best_point, best_face = sq, P[i], (i,)
    for i, j in combinations(range(n_points), 2):
        sq, point, t = _segment_closest(P[i], P[j])
        if sq < best_sq:
            best_sq, best_point, best_face, best_t = sq, point, (i, j), t

    if len(best_face) == 1:
        weights[best_face[0]] = 1.0
    else:
        weights[best_face[0]] += 1.0 - best_t
        weights[best_face[1]] += best_t
    return np.array(best_point, dtype=np.float64), weights
