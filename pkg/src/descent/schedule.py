from dataclasses import dataclass

import numpy as np

from src.core.errors import DegenerateInput
from src.core.vector import Vector, frozen


@dataclass(frozen=True, eq=False)
class StepSchedule:
    """
    梯度下降与镜像下降的步长 η_k，以及 a_k = Σ_{i<k} η_i。
    Constant 只存 eta；Sequence 存前若干步的 etas。
    """

    eta: float | None = None
    etas: Vector | None = None

    def __post_init__(self):
        if (self.eta is None) == (self.etas is None):
            raise DegenerateInput("A step schedule needs exactly one of eta or etas.")
        if self.eta is not None and not self.eta > 0:
            raise DegenerateInput(f"Step size must be positive, got {self.eta}.")
        if self.etas is not None:
            etas = np.array(self.etas, dtype=np.float64).reshape(-1)
            if etas.size == 0 or np.any(etas <= 0) or not np.all(np.isfinite(etas)):
                raise DegenerateInput("Every step size of a sequence schedule must be positive and finite.")
            object.__setattr__(self, "etas", frozen(etas))

    @classmethod
    def constant(cls, eta: float) -> "StepSchedule":
        return cls(eta=eta)

    @classmethod
    def sequence(cls, etas) -> "StepSchedule":
        return cls(etas=etas)

    @property
    def horizon(self) -> int | None:
        """Sequence 最多支持的迭代数；Constant 无限制。"""
        return None if self.etas is None else self.etas.size

    def steps(self, k_max: int) -> Vector:
        if self.etas is None:
            return np.full(k_max, self.eta)
        if k_max > self.etas.size:
            raise DegenerateInput(f"Step schedule has {self.etas.size} entries but k_max = {k_max}.")
        return self.etas[:k_max].copy()

    def prefix(self, k_max: int) -> Vector:
        """a_0, ..., a_{k_max}。"""
        if self.etas is None:
            return self.eta * np.arange(k_max + 1, dtype=np.float64)
        return np.concatenate(([0.0], np.cumsum(self.steps(k_max))))

    def max_eta(self, k_max: int) -> float:
        return self.eta if self.etas is None else float(self.steps(k_max).max(initial=0.0))
