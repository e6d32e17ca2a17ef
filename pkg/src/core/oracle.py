from abc import ABC, abstractmethod
from typing import TYPE_CHECKING

from src.core.vector import Vector

if TYPE_CHECKING:
    from src.dualgeom.dual_set import DualSetDescription


class ObjectiveOracle(ABC):
    """
    L-光滑凸函数 f 的求值接口。

    子类负责给出 dim、L；可选给出共轭上界 M（f*(p) <= M 对 dom f* 中所有 p 成立）、
    dom f* 的几何描述 dual_set，以及解析共轭 conjugate(p)。实例构造后不可变，可在并发任务间共享。
    """

    dim: int
    L: float

    @property
    def conjugate_bound(self) -> float | None:
        return None

    @property
    def dual_set(self) -> "DualSetDescription | None":
        return None

    @abstractmethod
    def eval_grad(self, x: Vector) -> tuple[float, Vector]:
        ...

    def eval(self, x: Vector) -> float:
        return self.eval_grad(x)[0]

    def grad(self, x: Vector) -> Vector:
        return self.eval_grad(x)[1]

    def conjugate(self, p: Vector) -> float | None:
        """f*(p)；p 不在 dom f* 时为 inf，没有解析形式时为 None。"""
        return None

    @property
    def name(self) -> str:
        return type(self).__name__
