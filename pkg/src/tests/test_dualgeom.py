import math

import numpy as np
import pytest

from src.core.errors import DegenerateInput, MissingConjugateBound, NonConvergence, PreconditionViolation
from src.dualgeom import wolfe
from src.dualgeom.context import ground_truth, make_bounds_context
from src.dualgeom.dual_set import (
    Ellipsoid,
    FullSpace,
    Interval,
    Polytope,
    membership_gap,
    min_norm_bruteforce_2d,
    min_norm_point,
    translate,
)
from src.dualgeom.polytope_stats import (
    geometric_value_bound,
    geometric_value_bound_delta,
    geometric_value_threshold,
    newton_polytope_stats,
)
from src.dualgeom.wolfe import wolfe_min_norm_point
from src.objectives.geometric import GeometricProgram
from src.objectives.simple import QuadraticObjective
from src.tests.cases import ELLIPSOID_P_STAR, GEOMETRIC_INF_G, GEOMETRIC_P_STAR


def test_geometric_min_norm_point(geometric):
    result = min_norm_point(geometric.dual_set)
    assert np.allclose(result.point, GEOMETRIC_P_STAR, atol=1e-9)
    assert result.convex_weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(result.convex_weights >= 0.0)
    assert np.allclose(result.convex_weights @ geometric.omega, result.point, atol=1e-12)


def test_ellipsoid_min_norm_point(ellipsoid):
    result = min_norm_point(ellipsoid.dual_set)
    assert np.allclose(result.point, ELLIPSOID_P_STAR, atol=1e-9)
    assert result.norm == pytest.approx(math.sqrt(5.0), abs=1e-9)
    assert result.multiplier == pytest.approx(4.0, abs=1e-8)


def test_min_norm_point_for_simple_sets():
    assert min_norm_point(Interval(-1.5, -1.0)).point[0] == -1.0
    assert min_norm_point(Interval(-1.0, 2.0)).norm == 0.0
    assert min_norm_point(Interval(0.5, 2.0)).point[0] == 0.5
    assert min_norm_point(FullSpace(3)).norm == 0.0
    assert min_norm_point(Ellipsoid(A=np.eye(2), center=np.array([0.5, 0.0]))).norm == 0.0


def test_wolfe_agrees_with_bruteforce_on_random_polygons():
    rng = np.random.default_rng(7)
    for trial in range(500):
        count = int(rng.integers(3, 11))
        vertices = rng.uniform(-5.0, 5.0, size=(count, 2))
        wolfe = min_norm_point(Polytope(vertices))
        brute = min_norm_bruteforce_2d(vertices)
        assert np.linalg.norm(wolfe.point - brute.point) <= 1e-9, (trial, vertices)
        assert np.allclose(wolfe.convex_weights @ vertices, wolfe.point, atol=1e-9)


def test_wolfe_agrees_with_bruteforce_on_shifted_polygons():
    # 远离原点的小多边形，p* 落在边或顶点上
    rng = np.random.default_rng(11)
    for trial in range(200):
        count = int(rng.integers(3, 11))
        vertices = rng.uniform(2.0, 5.0, size=2) * rng.choice([-1.0, 1.0], size=2) + rng.uniform(-1.0, 1.0, size=(count, 2))
        wolfe = min_norm_point(Polytope(vertices))
        brute = min_norm_bruteforce_2d(vertices)
        assert np.linalg.norm(wolfe.point - brute.point) <= 1e-9, (trial, vertices)


def test_wolfe_handles_duplicate_and_collinear_vertices():
    vertices = np.array([[1.0, 1.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    point, weights = wolfe_min_norm_point(vertices)
    assert np.allclose(point, [1.0, 1.0])
    assert weights.sum() == pytest.approx(1.0)


def test_wolfe_in_higher_dimension():
    vertices = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    point, _ = wolfe_min_norm_point(vertices)
    assert np.allclose(point, [1.0 / 3.0] * 3, atol=1e-12)


def test_wolfe_rejects_unverified_repeat(monkeypatch: pytest.MonkeyPatch):
    # 仿射极小点算错时会重新选中 corral 内的顶点，间隙远超舍入误差
    def uniform(points: np.ndarray) -> np.ndarray:
        return np.full(points.shape[0], 1.0 / points.shape[0])

    monkeypatch.setattr(wolfe, "_affine_minimizer", uniform)
    with pytest.raises(NonConvergence, match="reselected corral vertex"):
        wolfe_min_norm_point(np.array([[2.0, 0.0], [0.0, 1.0], [3.0, 3.0]]))


def _random_spd(rng: np.random.Generator, dim: int) -> np.ndarray:
    Q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    A = Q @ np.diag(rng.uniform(0.5, 8.0, size=dim)) @ Q.T
    return 0.5 * (A + A.T)


def _assert_projection_inequality(p_star: np.ndarray, members: np.ndarray) -> None:
    """p* 是集合的最小范数点时，||p - p*||^2 <= ||p||^2 - ||p*||^2 对所有成员成立。"""
    lhs = np.einsum("ij,ij->i", members - p_star, members - p_star)
    rhs = np.einsum("ij,ij->i", members, members) - float(p_star @ p_star)
    assert np.all(lhs <= rhs + 1e-9), float(np.max(lhs - rhs))


@pytest.mark.parametrize("dim", [2, 3])
def test_polytope_min_norm_point_optimality(dim):
    rng = np.random.default_rng(100 + dim)
    for _ in range(50):
        vertices = rng.uniform(-5.0, 5.0, size=(int(rng.integers(3, 11)), dim))
        if rng.random() < 0.5:
            vertices += rng.uniform(-6.0, 6.0, size=dim)
        p_star = min_norm_point(Polytope(vertices)).point
        assert np.all((vertices - p_star) @ p_star >= -1e-9)
        weights = rng.dirichlet(np.ones(vertices.shape[0]), size=200)
        _assert_projection_inequality(p_star, weights @ vertices)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_ellipsoid_min_norm_point_optimality(dim):
    rng = np.random.default_rng(200 + dim)
    for _ in range(50):
        A = _random_spd(rng, dim)
        center = rng.uniform(-5.0, 5.0, size=dim)
        ellipsoid = Ellipsoid(A=A, center=center)
        result = min_norm_point(ellipsoid)
        p_star = result.point
        kkt = p_star + result.multiplier * np.linalg.solve(A, p_star - center)
        assert np.linalg.norm(kkt) <= 1e-9
        assert ellipsoid.quad_form(p_star) <= 1.0 + 1e-9
        # 成员 p = b + A^{1/2} u，||u|| <= 1
        eigvals, eigvecs = np.linalg.eigh(A)
        root = eigvecs @ np.diag(np.sqrt(eigvals)) @ eigvecs.T
        directions = rng.normal(size=(200, dim))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii = rng.uniform(0.0, 1.0, size=(200, 1)) ** (1.0 / dim)
        members = center + (radii * directions) @ root
        _assert_projection_inequality(p_star, members)


def test_membership_gap():
    square = Polytope(np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]))
    assert membership_gap(square, np.zeros(2)) == 0.0
    assert membership_gap(square, np.array([3.0, 0.0])) == pytest.approx(2.0, abs=1e-12)
    ellipsoid = Ellipsoid(A=np.diag([8.0, 2.0]), center=np.array([3.0, 3.0]))
    boundary = np.array([3.0 + math.sqrt(8.0), 3.0])
    assert membership_gap(ellipsoid, boundary) <= 1e-9
    assert membership_gap(ellipsoid, boundary + np.array([1e-3, 0.0])) == pytest.approx(1e-3, rel=1e-6)
    assert membership_gap(Interval(-1.5, -1.0), np.array([-0.5])) == pytest.approx(0.5)
    assert membership_gap(FullSpace(2), np.array([1e9, 1e9])) == 0.0


def test_translate_moves_every_kind():
    shift = np.array([1.0, 2.0])
    polygon = translate(Polytope(np.array([[1.0, 2.0], [3.0, 2.0]])), shift)
    assert np.allclose(polygon.vertices, [[0.0, 0.0], [2.0, 0.0]])
    ellipsoid = translate(Ellipsoid(A=np.eye(2), center=np.array([1.0, 2.0])), shift)
    assert np.allclose(ellipsoid.center, 0.0)
    assert translate(Interval(0.0, 1.0), np.array([1.0])) == Interval(-1.0, 0.0)
    assert translate(FullSpace(2), shift) == FullSpace(2)


def test_newton_polytope_stats(geometric):
    stats = newton_polytope_stats(geometric)
    assert stats.m == 2
    assert stats.phi == pytest.approx(1.0 / math.sqrt(5.0), abs=1e-12)
    assert stats.beta == 4.0
    assert geometric_value_threshold(stats) == pytest.approx(5.0)
    assert math.isinf(geometric_value_bound(stats, 4.0))
    assert math.isfinite(geometric_value_bound(stats, 100.0))
    assert geometric_value_bound(stats, 1000.0) < geometric_value_bound(stats, 100.0)


def test_newton_polytope_stats_on_segment():
    gp = GeometricProgram(c=[1.0, 3.0], omega=[[0.0, 0.0], [2.0, 0.0]])
    stats = newton_polytope_stats(gp)
    assert stats.m == 1
    assert stats.phi == pytest.approx(2.0)
    assert stats.beta == 4.0


def test_newton_polytope_stats_rejects_degenerate_input():
    with pytest.raises(DegenerateInput):
        newton_polytope_stats(GeometricProgram(c=[1.0, 2.0], omega=[[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(PreconditionViolation):
        newton_polytope_stats(GeometricProgram(c=[1.0], omega=[[1.0, 0.0, 0.0, 0.0]]))


def test_value_bound_with_free_delta(geometric):
    stats = newton_polytope_stats(geometric)
    assert geometric_value_bound_delta(stats, 100.0, 1.0) > 1.0
    with pytest.raises(ValueError):
        geometric_value_bound_delta(stats, 100.0, 2.0 * stats.beta)


def test_ground_truth(geometric, ellipsoid, onedim):
    truth = ground_truth(geometric)
    assert np.allclose(truth.p_star, GEOMETRIC_P_STAR, atol=1e-9)
    assert truth.inf_g == pytest.approx(GEOMETRIC_INF_G, abs=1e-9)
    assert truth.inf_g == pytest.approx(math.log(3.0**0.2 + 3.0**-1.8), abs=1e-9)
    truth = ground_truth(ellipsoid)
    assert np.allclose(truth.p_star, ELLIPSOID_P_STAR, atol=1e-9)
    assert truth.inf_g == pytest.approx(0.0, abs=1e-9)
    truth = ground_truth(onedim)
    assert truth.p_star[0] == -1.0
    assert truth.inf_g == pytest.approx(-1.0)


def test_bounds_context_exact_and_fallback(geometric):
    x0 = np.zeros(2)
    ctx = make_bounds_context(geometric, x0, GEOMETRIC_P_STAR, GEOMETRIC_INF_G)
    assert ctx.exact
    assert ctx.D == pytest.approx(math.log(4.0) - GEOMETRIC_INF_G)
    grad0 = np.array([7.0 / 4.0, 3.0 / 2.0])
    expected_c = float((grad0 - GEOMETRIC_P_STAR) @ GEOMETRIC_P_STAR) / (4.0 * 18.0 * ctx.D)
    assert ctx.c_remark == pytest.approx(expected_c)
    fallback = make_bounds_context(geometric, x0, GEOMETRIC_P_STAR)
    assert not fallback.exact
    assert fallback.D == pytest.approx(math.log(4.0))
    assert fallback.D >= ctx.D


def test_bounds_context_needs_some_divergence_bound():
    with pytest.raises(MissingConjugateBound):
        make_bounds_context(QuadraticObjective(dim=2), np.ones(2), np.zeros(2))


@pytest.mark.parametrize(
    ("c", "omega", "expected_p_star", "expected_inf_g"),
    [
        # g(0, y) = log(e^{-y} + 1 + e^{y})，在 y = 0 取最小值 log 3
        ([1.0, 1.0, 1.0], [[1.0, -1.0], [1.0, 0.0], [1.0, 1.0]], [1.0, 0.0], math.log(3.0)),
        # 重复的指数向量：f = log 3 + x_1
        ([1.0, 2.0], [[1.0, 0.0], [1.0, 0.0]], [1.0, 0.0], math.log(3.0)),
        # 共线且 p* 落在线段内部
        ([1.0, 1.0, 2.0], [[2.0, -2.0], [2.0, 0.0], [2.0, 2.0]], [2.0, 0.0], math.log(1.0 + 2.0 * math.sqrt(2.0))),
    ],
)
def test_ground_truth_with_affinely_dependent_exponents(c, omega, expected_p_star, expected_inf_g):
    gp = GeometricProgram(c=c, omega=omega)
    assert not gp.affinely_independent
    truth = ground_truth(gp)
    assert np.allclose(truth.p_star, expected_p_star, atol=1e-9)
    assert truth.inf_g == pytest.approx(expected_inf_g, abs=1e-9)
    # 沿 p* 的正交方向直接取样，inf g 不应高于样本最小值
    ys = np.linspace(-3.0, 3.0, 601)
    sampled = min(gp.eval(np.array([0.0, y])) for y in ys)
    assert truth.inf_g <= sampled + 1e-12
