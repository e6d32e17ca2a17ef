from dataclasses import dataclass

from src.core.oracle import ObjectiveOracle
from src.core.vector import Vector, as_vector, check_dim, frozen
from src.dualgeom.dual_set import DualSetDescription, translate


@dataclass(frozen=True, eq=False)
class ShiftedObjective(ObjectiveOracle):
    """
    f_s(x) = f(x) - <s, x>。dom f_s* = dom f* - s，f_s*(q) = f*(q + s)，
    因此共轭上界 M 不变。用于构造 p* 的位置可控的测试问题。
    """

    base: ObjectiveOracle
    shift: Vector

    def __post_init__(self):
        shift = as_vector(self.shift, dim=self.base.dim)
        object.__setattr__(self, "shift", frozen(shift))
        object.__setattr__(self, "dim", self.base.dim)
        object.__setattr__(self, "L", self.base.L)

    @property
    def conjugate_bound(self) -> float | None:
        return self.base.conjugate_bound

    @property
    def dual_set(self) -> DualSetDescription | None:
        ds = self.base.dual_set
        return None if ds is None else translate(ds, self.shift)

    def eval_grad(self, x: Vector) -> tuple[float, Vector]:
        value, grad = self.base.eval_grad(check_dim(x, self.dim))
        return value - float(self.shift @ x), grad - self.shift

    def conjugate(self, p: Vector) -> float | None:
        return self.base.conjugate(check_dim(p, self.dim) + self.shift)

    @property
    def name(self) -> str:
        return f"Shifted{self.base.name}"
