from typing import Callable

import numpy as np

from src.core.errors import NonFiniteState, PreconditionViolation
from src.core.vector import Matrix, Vector

RightHandSide = Callable[[float, Vector], Vector]


def rk4_integrate(
    rhs: RightHandSide,
    t0: float,
    state0: Vector,
    t_end: float,
    dt: float,
) -> tuple[Vector, Matrix]:
    """
    定步长经典四阶 Runge-Kutta，返回全部步的 (t, state)。
    t_i = t0 + i·dt，步数取 floor((t_end - t0)/dt)，不做自适应；t0 == t_end 时只返回初值。
    """
    if not 0 < dt:
        raise PreconditionViolation(f"dt must be positive, got {dt}.")
    if not t0 <= t_end:
        raise PreconditionViolation(f"Integration needs t0 <= t_end, got t0={t0}, t_end={t_end}.")
    n_steps = int(np.floor((t_end - t0) / dt + 1e-9))
    ts = t0 + dt * np.arange(n_steps + 1, dtype=np.float64)
    states = np.empty((n_steps + 1, state0.size))
    states[0] = state0
    s = state0
    half = 0.5 * dt
    for i in range(n_steps):
        t = ts[i]
        k1 = rhs(t, s)
        k2 = rhs(t + half, s + half * k1)
        k3 = rhs(t + half, s + half * k2)
        k4 = rhs(t + dt, s + dt * k3)
        s = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(s)):
            raise NonFiniteState(f"ODE state became non-finite at t={ts[i + 1]:.6g}; reduce dt.")
        states[i + 1] = s
    return ts, states
