import logging
from dataclasses import dataclass

import numpy as np

from src.core.divergence import bregman_divergence
from src.core.errors import PreconditionViolation
from src.core.oracle import ObjectiveOracle
from src.core.vector import Matrix, Vector, as_vector, ensure_finite
from src.descent.schedule import StepSchedule

logger = logging.getLogger(__name__)

STEP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MirrorState:
    theta: Matrix
    X: Matrix
    a: Vector

    @property
    def k_max(self) -> int:
        return self.theta.shape[0] - 1


def run_mirror(
    psi_star: ObjectiveOracle,
    F: ObjectiveOracle,
    theta0: Vector,
    sched: StepSchedule,
    k_max: int,
) -> MirrorState:
    """
    对偶空间形式的镜像下降：X_k = ∇Ψ*(θ_k)，θ_{k+1} = θ_k - η_k ∇F(X_k)。
    Ψ* = f、F = ||·||^2/2 时与 run_gd 的算术路径完全一致。
    """
    if psi_star.dim != F.dim:
        raise PreconditionViolation(f"Psi* has dimension {psi_star.dim} but F has dimension {F.dim}.")
    theta = as_vector(theta0, psi_star.dim).copy()
    etas = sched.steps(k_max)
    limit = (1.0 + STEP_TOL) / (F.L * psi_star.L)
    if k_max > 0 and float(etas.max()) > limit:
        logger.warning(f"Step size {float(etas.max()):.6g} exceeds 1/(L_F L_Psi*); the mirror rate does not apply.")

    thetas = np.empty((k_max + 1, psi_star.dim))
    Xs = np.empty((k_max + 1, psi_star.dim))
    for k in range(k_max + 1):
        thetas[k] = theta
        Xs[k] = psi_star.eval_grad(theta)[1]
        if k < k_max:
            theta = ensure_finite(theta - etas[k] * F.eval_grad(Xs[k])[1], k + 1)
    return MirrorState(theta=thetas, X=Xs, a=sched.prefix(k_max))


def mirror_energy(
    state: MirrorState,
    psi_star: ObjectiveOracle,
    F: ObjectiveOracle,
    w_theta: Vector,
) -> Vector:
    """
    V_k = a_k (F(X_k) - F(w)) + D_{Ψ*}(θ_k, w)，w = ∇Ψ*(w_theta)。
    D_{Ψ*}(θ, w) 取 Bregman 形式 Ψ*(θ) - Ψ*(w_theta) - <w, θ - w_theta>。
    """
    w = psi_star.grad(w_theta)
    F_w = F.eval(w)
    energy = np.empty(state.k_max + 1)
    for k in range(state.k_max + 1):
        energy[k] = state.a[k] * (F.eval(state.X[k]) - F_w) + bregman_divergence(psi_star, state.theta[k], w_theta)
    return energy


def mirror_rate_bound(D: float, a_k: float) -> float:
    """F(X_k) - F(w) <= D_{Ψ*}(θ_0, w) / a_k。"""
    if a_k <= 0:
        raise PreconditionViolation(f"a_k must be positive, got {a_k}.")
    return D / a_k


def mirror_constant_rate_bound(L_F: float, L_psi: float, D: float, k: int) -> float:
    """η = 1/(L_F L_Ψ*) 时 F(X_k) - F(w) <= L_F L_Ψ* D / k。"""
    if k < 1:
        raise PreconditionViolation(f"k must be at least 1, got {k}.")
    return L_F * L_psi * D / k
