from dataclasses import dataclass
from typing import Iterator

import numpy as np
from tqdm import tqdm

from src.core.errors import PreconditionViolation
from src.core.oracle import ObjectiveOracle
from src.core.vector import Matrix, Vector, as_vector, ensure_finite
from src.accel.schedule import ScheduleA


@dataclass(frozen=True, eq=False)
class NAGStep:
    k: int
    x: Vector
    y: Vector
    x_next: Vector
    f_x: float
    grad_x: Vector
    grad_y: Vector


@dataclass(frozen=True, eq=False)
class NAGTrajectory:
    """
    x^(0..K+1)、y^(0..K)、z^(0..K+1)，以及 f(x^(k))、∇f(x^(k))、∇f(y^(k))（k = 0..K）。
    z 由 (δ⁺A_k) z^(k+1) = A_{k+1} x^(k+1) - A_k x^(k) 重建。
    """

    x: Matrix
    y: Matrix
    z: Matrix
    f_x: Vector
    grad_x: Matrix
    grad_y: Matrix

    @property
    def k_max(self) -> int:
        return self.y.shape[0] - 1

    @property
    def x0(self) -> Vector:
        return self.x[0]

    @property
    def gradient_evaluations(self) -> int:
        return 2 * (self.k_max + 1)


def _check_horizon(sched: ScheduleA, k_max: int) -> None:
    if k_max > sched.k_max:
        raise PreconditionViolation(f"Schedule covers k <= {sched.k_max} but k_max = {k_max} was requested.")


def iterate_nag(
    oracle: ObjectiveOracle,
    x0: Vector,
    sched: ScheduleA,
    k_max: int | None = None,
) -> Iterator[NAGStep]:
    """
    两序列形式的逐步生成器：
    x^(k+1) = y^(k) - step_k ∇f(y^(k))，y^(k+1) = x^(k+1) + momentum_k (x^(k+1) - x^(k))。
    每步同时给出 ∇f(x^(k)) 以供监控，共两次梯度求值。
    """
    k_max = sched.k_max if k_max is None else k_max
    _check_horizon(sched, k_max)
    x = as_vector(x0, oracle.dim).copy()
    y = x
    for k in range(k_max + 1):
        f_x, grad_x = oracle.eval_grad(x)
        grad_y = grad_x if k == 0 else oracle.grad(y)
        x_next = ensure_finite(y - sched.step(k) * grad_y, k + 1)
        yield NAGStep(k=k, x=x, y=y, x_next=x_next, f_x=f_x, grad_x=grad_x, grad_y=grad_y)
        if k < k_max:
            y = ensure_finite(x_next + sched.momentum(k) * (x_next - x), k + 1)
        x = x_next


def reconstruct_z(x: Matrix, sched: ScheduleA) -> Matrix:
    z = np.empty_like(x)
    z[0] = x[0]
    K = x.shape[0] - 2
    A = sched.A
    delta = sched.delta
    z[1:] = (A[1 : K + 2, None] * x[1:] - A[: K + 1, None] * x[:-1]) / delta[: K + 1, None]
    return z


def run_nag(
    oracle: ObjectiveOracle,
    x0: Vector,
    sched: ScheduleA,
    k_max: int,
    progress: bool = False,
) -> NAGTrajectory:
    _check_horizon(sched, k_max)
    dim = oracle.dim
    xs = np.empty((k_max + 2, dim))
    ys = np.empty((k_max + 1, dim))
    f_x = np.empty(k_max + 1)
    grad_x = np.empty((k_max + 1, dim))
    grad_y = np.empty((k_max + 1, dim))
    steps = iterate_nag(oracle, x0, sched, k_max)
    for step in tqdm(steps, total=k_max + 1, desc="nag", disable=not progress):
        k = step.k
        xs[k], ys[k] = step.x, step.y
        f_x[k], grad_x[k], grad_y[k] = step.f_x, step.grad_x, step.grad_y
        xs[k + 1] = step.x_next
    return NAGTrajectory(x=xs, y=ys, z=reconstruct_z(xs, sched), f_x=f_x, grad_x=grad_x, grad_y=grad_y)


def run_nag_three_sequence(
    oracle: ObjectiveOracle,
    x0: Vector,
    sched: ScheduleA,
    k_max: int,
) -> NAGTrajectory:
    """
    三序列形式：
    y^(k) = x^(k) + (δ⁺A_k/A_{k+1})(z^(k) - x^(k))，z^(k+1) = z^(k) - (δ⁺A_k/4)∇f(y^(k))，
    x^(k+1) = (A_k x^(k) + δ⁺A_k z^(k+1)) / A_{k+1}。
    """
    _check_horizon(sched, k_max)
    dim = oracle.dim
    A = sched.A
    xs = np.empty((k_max + 2, dim))
    ys = np.empty((k_max + 1, dim))
    zs = np.empty((k_max + 2, dim))
    f_x = np.empty(k_max + 1)
    grad_x = np.empty((k_max + 1, dim))
    grad_y = np.empty((k_max + 1, dim))
    xs[0] = zs[0] = as_vector(x0, dim)
    for k in range(k_max + 1):
        dA = sched.deltaA(k)
        ys[k] = xs[k] + (dA / A[k + 1]) * (zs[k] - xs[k])
        f_x[k], grad_x[k] = oracle.eval_grad(xs[k])
        grad_y[k] = oracle.grad(ys[k])
        zs[k + 1] = ensure_finite(zs[k] - (dA / 4.0) * grad_y[k], k + 1)
        xs[k + 1] = (A[k] * xs[k] + dA * zs[k + 1]) / A[k + 1]
    return NAGTrajectory(x=xs, y=ys, z=zs, f_x=f_x, grad_x=grad_x, grad_y=grad_y)
