import math

import numpy as np
import pytest
from pydantic import TypeAdapter, ValidationError

from src.core.errors import DegenerateInput, DimensionMismatch
from src.core.vector import sample_box
from src.dualgeom.dual_set import Ellipsoid, FullSpace, Interval, Polytope, membership_gap, min_norm_point
from src.model.problem_model import ProblemSpec
from src.objectives.ellipsoid import EllipsoidObjective
from src.objectives.factory import build_oracle
from src.objectives.geometric import GeometricProgram
from src.objectives.onedim import OneDimTight
from src.objectives.shifted import ShiftedObjective
from src.objectives.simple import LinearObjective, QuadraticObjective
from src.tests.cases import (
    ELLIPSOID_PROBLEM,
    GEOMETRIC_INF_G,
    GEOMETRIC_P_STAR,
    GEOMETRIC_PROBLEM,
)

problem_adapter = TypeAdapter(ProblemSpec)


def test_geometric_value_and_gradient_at_origin(geometric):
    value, grad = geometric.eval_grad(np.zeros(2))
    assert value == pytest.approx(math.log(4.0), abs=1e-15)
    assert np.allclose(grad, [7.0 / 4.0, 3.0 / 2.0], atol=1e-15)
    assert geometric.L == 18.0
    assert geometric.conjugate_bound == 0.0


def test_geometric_stays_finite_far_from_origin(geometric):
    value, grad = geometric.eval_grad(np.array([10.0, -10.0]))
    # 指数 (30, -10, -10, 0)：log(e^30 (1 + 2e^-40 + e^-30))
    assert value == pytest.approx(30.0 + math.log1p(2.0 * math.exp(-40.0) + math.exp(-30.0)), abs=1e-12)
    assert np.allclose(grad, [3.0, 0.0], atol=1e-12)
    value, grad = geometric.eval_grad(np.array([400.0, 400.0]))
    assert math.isfinite(value)
    assert np.allclose(grad, [3.0, 3.0])


def test_geometric_gradient_lies_in_newton_polytope(geometric, rng):
    for x in sample_box(rng, 30, 2):
        weights = geometric.weights(x)
        assert weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert membership_gap(geometric.dual_set, geometric.grad(x)) <= 1e-9


def test_geometric_rejects_bad_input():
    with pytest.raises(DegenerateInput):
        GeometricProgram(c=[1.0, 0.0], omega=[[1.0], [2.0]])
    with pytest.raises(DimensionMismatch):
        GeometricProgram(c=[1.0, 1.0], omega=[[1.0, 0.0]])
    with pytest.raises(DimensionMismatch):
        GeometricProgram(c=[1.0], omega=[[1.0, 0.0]]).eval(np.zeros(3))


def test_geometric_conjugate_on_newton_polytope_edge(geometric):
    # p* = 0.1 (3, 0) + 0.9 (0, 1)，在边上表示唯一
    expected = 0.1 * math.log(0.1) + 0.9 * math.log(0.9)
    assert geometric.conjugate(GEOMETRIC_P_STAR) == pytest.approx(expected, abs=1e-9)
    assert -geometric.conjugate(GEOMETRIC_P_STAR) == pytest.approx(GEOMETRIC_INF_G, abs=1e-9)
    assert math.isinf(geometric.conjugate(np.array([-1.0, -1.0])))


def test_fenchel_young_equality(triangle, ellipsoid, onedim, rng):
    for oracle in (triangle, ellipsoid):
        for x in sample_box(rng, 10, 2, 2.0):
            f, grad = oracle.eval_grad(x)
            assert f + oracle.conjugate(grad) == pytest.approx(float(grad @ x), abs=1e-9 * (1.0 + abs(f)))
    for value in (-3.0, 0.0, 0.7, 3.0, 40.0):
        x = np.array([value])
        f, grad = onedim.eval_grad(x)
        assert f + onedim.conjugate(grad) == pytest.approx(float(grad @ x), abs=1e-10 * (1.0 + abs(f)))


def test_fenchel_young_with_collinear_exponents(rng):
    gp = GeometricProgram(c=[1.0, 1.0, 2.0], omega=[[2.0, -2.0], [2.0, 0.0], [2.0, 2.0]])
    assert not gp.affinely_independent
    for x in sample_box(rng, 20, 2, 2.0):
        f, grad = gp.eval_grad(x)
        assert f + gp.conjugate(grad) == pytest.approx(float(grad @ x), abs=1e-9 * (1.0 + abs(f)))
    assert math.isinf(gp.conjugate(np.array([1.0, 0.0])))


def test_affine_independence_of_exponents(geometric, triangle):
    assert triangle.affinely_independent
    assert not geometric.affinely_independent
    assert GeometricProgram(c=[1.0], omega=[[1.0, 0.0]]).affinely_independent
    assert GeometricProgram(c=[1.0, 1.0], omega=[[1.0, 0.0], [0.0, 1.0]]).affinely_independent


def test_ellipsoid_values(ellipsoid):
    value, grad = ellipsoid.eval_grad(np.zeros(2))
    assert value == 1.0
    assert np.allclose(grad, [3.0, 3.0])
    value, grad = ellipsoid.eval_grad(np.array([1.0, 0.0]))
    assert value == pytest.approx(6.0)
    assert np.allclose(grad, [8.0 / 3.0 + 3.0, 3.0])
    assert ellipsoid.L == pytest.approx(8.0)
    assert ellipsoid.conjugate_bound == 0.0


def test_ellipsoid_gradient_approaches_boundary(ellipsoid):
    ds = ellipsoid.dual_set
    for direction in ([1.0, 0.0], [-1.0, 2.0], [0.0, -1.0]):
        grad = ellipsoid.grad(1e6 * np.array(direction))
        assert ds.quad_form(grad) <= 1.0 + 1e-9
        assert ds.quad_form(grad) >= 1.0 - 1e-6


def test_ellipsoid_conjugate(ellipsoid):
    assert ellipsoid.conjugate(np.array([1.0, 2.0])) == pytest.approx(0.0, abs=1e-12)
    assert ellipsoid.conjugate(np.array([3.0, 3.0])) == -1.0
    assert math.isinf(ellipsoid.conjugate(np.array([3.0 + math.sqrt(8.0) + 1e-3, 3.0])))


def test_ellipsoid_rejects_bad_matrices():
    with pytest.raises(DegenerateInput):
        EllipsoidObjective(A=[[1.0, 0.5], [0.0, 1.0]], b=[0.0, 0.0])
    with pytest.raises(DegenerateInput):
        EllipsoidObjective(A=[[1.0, 0.0], [0.0, -1.0]], b=[0.0, 0.0])
    with pytest.raises(DimensionMismatch):
        EllipsoidObjective(A=[[1.0]], b=[0.0, 0.0])


def test_onedim_tight_pieces(onedim):
    assert onedim.L == pytest.approx(0.75)
    assert onedim.eval_grad(np.zeros(1))[0] == 0.0
    assert onedim.grad(np.zeros(1))[0] == pytest.approx(-1.5)
    value, grad = onedim.eval_grad(np.array([-2.0]))
    assert value == pytest.approx(3.0)
    assert grad[0] == pytest.approx(-1.5)
    value, grad = onedim.eval_grad(np.array([3.0]))
    assert value == pytest.approx(0.5 - 4.0)
    assert grad[0] == pytest.approx(-1.0625)


def test_onedim_tight_conjugate(onedim):
    assert onedim.conjugate(np.array([-1.0])) == pytest.approx(1.0)
    assert onedim.conjugate(np.array([-1.5])) == pytest.approx(0.0, abs=1e-12)
    assert math.isinf(onedim.conjugate(np.array([-0.5])))
    assert math.isinf(onedim.conjugate(np.array([-2.0])))
    assert onedim.dual_set == Interval(-1.5, -1.0)


def test_onedim_tight_embedding():
    oracle = OneDimTight(alpha=0.25, dim=3)
    value, grad = oracle.eval_grad(np.array([-1.0, 5.0, -7.0]))
    assert value == pytest.approx(1.25)
    assert np.allclose(grad, [-1.25, 0.0, 0.0])
    assert np.allclose(min_norm_point(oracle.dual_set).point, [-1.0, 0.0, 0.0])
    assert math.isinf(oracle.conjugate(np.array([-1.0, 0.1, 0.0])))
    with pytest.raises(DegenerateInput):
        OneDimTight(alpha=0.0)


def test_linear_and_quadratic():
    linear = LinearObjective(c=[1.0, -2.0])
    assert linear.eval(np.array([2.0, 1.0])) == 0.0
    assert linear.conjugate(np.array([1.0, -2.0])) == 0.0
    assert math.isinf(linear.conjugate(np.zeros(2)))
    assert isinstance(linear.dual_set, Polytope)
    quadratic = QuadraticObjective(dim=2)
    x = np.array([3.0, 4.0])
    assert quadratic.eval(x) == 12.5
    assert quadratic.conjugate(x) == 12.5
    assert quadratic.grad(x) is not x
    assert quadratic.conjugate_bound is None
    assert isinstance(quadratic.dual_set, FullSpace)


def test_shifted_identities(geometric, rng):
    shift = np.array([0.5, -1.0])
    shifted = ShiftedObjective(base=geometric, shift=shift)
    for x in sample_box(rng, 10, 2):
        f, grad = shifted.eval_grad(x)
        assert f == pytest.approx(geometric.eval(x) - float(shift @ x))
        assert np.allclose(grad, geometric.grad(x) - shift)
    p = np.array([1.0, 1.0])
    assert shifted.conjugate(p) == pytest.approx(geometric.conjugate(p + shift))
    assert shifted.conjugate_bound == geometric.conjugate_bound
    assert shifted.name == "ShiftedGeometricProgram"


def test_shifting_by_p_star_makes_objective_bounded(geometric):
    shifted = ShiftedObjective(base=geometric, shift=GEOMETRIC_P_STAR)
    result = min_norm_point(shifted.dual_set)
    assert result.norm <= 1e-9
    assert -shifted.conjugate(result.point) == pytest.approx(GEOMETRIC_INF_G, abs=1e-9)


def test_shifted_ellipsoid_moves_center(ellipsoid):
    shifted = ShiftedObjective(base=ellipsoid, shift=np.array([3.0, 3.0]))
    assert isinstance(shifted.dual_set, Ellipsoid)
    assert np.allclose(shifted.dual_set.center, [0.0, 0.0])
    assert min_norm_point(shifted.dual_set).norm == 0.0


def test_build_oracle_from_problem_json():
    geometric = build_oracle(problem_adapter.validate_python(GEOMETRIC_PROBLEM))
    assert isinstance(geometric, GeometricProgram)
    assert geometric.dim == 2
    ellipsoid = build_oracle(problem_adapter.validate_python(ELLIPSOID_PROBLEM))
    assert isinstance(ellipsoid, EllipsoidObjective)
    onedim = build_oracle(problem_adapter.validate_python({"type": "onedim_tight", "alpha": 0.5}))
    assert isinstance(onedim, OneDimTight)
    shifted = build_oracle(
        problem_adapter.validate_python({"type": "shifted", "base": {"type": "quadratic", "dim": 2}, "p": [1.0, 0.0]})
    )
    assert isinstance(shifted, ShiftedObjective)
    assert isinstance(shifted.base, QuadraticObjective)
    assert shifted.eval(np.array([1.0, 0.0])) == pytest.approx(-0.5)


def test_problem_json_validation():
    with pytest.raises(ValidationError):
        problem_adapter.validate_python({"type": "onedim_tight", "alpha": -1.0})
    with pytest.raises(ValidationError):
        problem_adapter.validate_python({"type": "cubic"})
    with pytest.raises(ValidationError):
        problem_adapter.validate_python({**GEOMETRIC_PROBLEM, "extra": 1})


@pytest.mark.parametrize(
    "payload",
    [
        {"type": "geometric", "c": [1.0, 1.0], "omega": [[1.0, 0.0], [1.0]]},
        {"type": "geometric", "c": [1.0], "omega": [[1.0, 0.0], [0.0, 1.0]]},
        {"type": "geometric", "c": [1.0], "omega": [[]]},
        {"type": "ellipsoid", "A": [[1.0, 0.0], [0.0]], "b": [0.0, 0.0]},
        {"type": "ellipsoid", "A": [[1.0, 0.0], [0.0, 1.0]], "b": [0.0, 0.0, 0.0]},
        {"type": "shifted", "base": {"type": "ellipsoid", "A": [[1.0, 0.0]], "b": [0.0, 0.0]}, "p": [1.0, 0.0]},
    ],
)
def test_problem_json_rejects_ragged_shapes(payload):
    with pytest.raises(ValidationError):
        problem_adapter.validate_python(payload)
