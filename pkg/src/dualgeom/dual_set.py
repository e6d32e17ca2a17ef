from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from src.core.errors import DegenerateInput, DimensionMismatch, NonConvergence
from src.core.vector import Matrix, Vector, as_vector, check_dim, frozen
from src.dualgeom.wolfe import WOLFE_MAX_ITER, WOLFE_TOL, bruteforce_min_norm_2d, wolfe_min_norm_point

ELLIPSOID_ROOT_MAX_ITER = 200
ELLIPSOID_ROOT_XTOL = 1e-15


@dataclass(frozen=True, eq=False)
class Polytope:
    """Conv{v_1, ..., v_N}，按行存放顶点。"""

    vertices: Matrix

    def __post_init__(self):
        V = np.array(self.vertices, dtype=np.float64)
        if V.ndim == 1:
            V = V.reshape(1, -1)
        if V.ndim != 2 or V.shape[0] < 1:
            raise DegenerateInput("A polytope needs at least one vertex.")
        if not np.all(np.isfinite(V)):
            raise DegenerateInput("Polytope vertices must be finite.")
        object.__setattr__(self, "vertices", frozen(V))

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """{q : <q - center, A^{-1}(q - center)> <= 1}，A 对称正定。"""

    A: Matrix
    center: Vector
    _eigvals: Vector = field(init=False, repr=False)
    _eigvecs: Matrix = field(init=False, repr=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=np.float64)
        center = as_vector(self.center)
        if A.shape != (center.shape[0], center.shape[0]):
            raise DimensionMismatch(f"Ellipsoid matrix of shape {A.shape} does not match center of dimension {center.shape[0]}.")
        if not np.allclose(A, A.T, rtol=0.0, atol=1e-12):
            raise DegenerateInput("Ellipsoid matrix must be symmetric.")
        eigvals, eigvecs = np.linalg.eigh(0.5 * (A + A.T))
        if eigvals.min() <= 0:
            raise DegenerateInput(f"Ellipsoid matrix must be positive definite, smallest eigenvalue {eigvals.min():.3e}.")
        object.__setattr__(self, "A", frozen(A))
        object.__setattr__(self, "center", frozen(center))
        object.__setattr__(self, "_eigvals", frozen(eigvals))
        object.__setattr__(self, "_eigvecs", frozen(eigvecs))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def quad_form(self, q: Vector) -> float:
        """<q - center, A^{-1}(q - center)>。"""
        coords = self._eigvecs.T @ (q - self.center)
        return float(np.sum(coords**2 / self._eigvals))

    def translated(self, shift: Vector) -> "Ellipsoid":
        return Ellipsoid(A=self.A, center=self.center - shift)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise DegenerateInput(f"Interval needs lo <= hi, got [{self.lo}, {self.hi}].")

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class FullSpace:
    """dom f* = R^n，例如 f = ||x||^2/2。"""

    dim: int


DualSetDescription = Polytope | Ellipsoid | Interval | FullSpace


@dataclass(frozen=True, eq=False)
class MinNormResult:
    point: Vector
    norm: float
    convex_weights: Vector | None = None
    # 椭球情形下 KKT 条件 p* + mu A^{-1}(p* - b) = 0 的乘子
    multiplier: float | None = None


def _ellipsoid_min_norm(ds: Ellipsoid) -> MinNormResult:
    lam, V = ds._eigvals, ds._eigvecs
    b_coords = V.T @ ds.center
    if float(np.sum(b_coords**2 / lam)) <= 1.0:
        return MinNormResult(point=np.zeros(ds.dim), norm=0.0, multiplier=0.0)

    # <p(mu) - b, A^{-1}(p(mu) - b)> = sum lam_i b_i^2 / (lam_i + mu)^2，关于 mu 单调递减
    def boundary(mu: float) -> float:
        return float(np.sum(lam * b_coords**2 / (lam + mu) ** 2)) - 1.0

    mu_hi = float(lam.max())
    for _ in range(ELLIPSOID_ROOT_MAX_ITER):
        if boundary(mu_hi) < 0:
            break
        mu_hi *= 2.0
    else:
        raise NonConvergence("Could not bracket the ellipsoid min-norm multiplier.")
    mu = brentq(boundary, 0.0, mu_hi, xtol=ELLIPSOID_ROOT_XTOL, rtol=4 * np.finfo(float).eps, maxiter=ELLIPSOID_ROOT_MAX_ITER)
    point = V @ (mu / (lam + mu) * b_coords)
    return MinNormResult(point=point, norm=float(np.linalg.norm(point)), multiplier=float(mu))


def min_norm_point(
    ds: DualSetDescription,
    tol: float = WOLFE_TOL,
    max_iter: int = WOLFE_MAX_ITER,
) -> MinNormResult:
    """集合中唯一的最小范数点。"""
    match ds:
        case Polytope(vertices=V):
            point, weights = wolfe_min_norm_point(V, tol=tol, max_iter=max_iter)
            return MinNormResult(point=point, norm=float(np.linalg.norm(point)), convex_weights=weights)
        case Ellipsoid():
            return _ellipsoid_min_norm(ds)
        case Interval(lo=lo, hi=hi):
            value = min(max(0.0, lo), hi)
            return MinNormResult(point=np.array([value]), norm=abs(value))
        case FullSpace(dim=dim):
            return MinNormResult(point=np.zeros(dim), norm=0.0)
    raise TypeError(f"Unknown dual set description: {type(ds).__name__}")


def min_norm_bruteforce_2d(vertices: Matrix) -> MinNormResult:
    V = np.asarray(vertices, dtype=np.float64)
    if V.ndim != 2 or V.shape[1] != 2:
        raise DimensionMismatch(f"Brute-force min-norm needs 2-D vertices, got shape {V.shape}.")
    point, weights = bruteforce_min_norm_2d(V)
    return MinNormResult(point=point, norm=float(np.linalg.norm(point)), convex_weights=weights)


def membership_gap(ds: DualSetDescription, p: Vector) -> float:
    """p 到集合的欧氏距离，0 表示属于集合。"""
    check_dim(p, ds.dim)
    match ds:
        case Polytope(vertices=V):
            return min_norm_point(Polytope(V - p)).norm
        case Ellipsoid():
            return _ellipsoid_min_norm(ds.translated(p)).norm
        case Interval(lo=lo, hi=hi):
            value = float(p[0])
            return max(lo - value, 0.0, value - hi)
        case FullSpace():
            return 0.0
    raise TypeError(f"Unknown dual set description: {type(ds).__name__}")


def translate(ds: DualSetDescription, shift: Vector) -> DualSetDescription:
    """{q - shift : q in ds}。"""
    match ds:
        case Polytope(vertices=V):
            return Polytope(V - shift)
        case Ellipsoid():
            return ds.translated(shift)
        case Interval(lo=lo, hi=hi):
            return Interval(lo - float(shift[0]), hi - float(shift[0]))
        case FullSpace():
            return ds
    raise TypeError(f"Unknown dual set description: {type(ds).__name__}")
