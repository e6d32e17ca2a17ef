class UnboundedNagError(Exception):
    """本包所有显式错误的基类。"""


class DimensionMismatch(UnboundedNagError, ValueError):
    pass


class NonFiniteInput(UnboundedNagError, ValueError):
    pass


class NegativeDivergence(UnboundedNagError, ArithmeticError):
    """散度明显为负：目标函数非凸，或梯度实现有误。"""


class MissingConjugateBound(UnboundedNagError, ValueError):
    pass


class MissingConjugate(UnboundedNagError, ValueError):
    pass


class NonConvergence(UnboundedNagError, ArithmeticError):
    pass


class DegenerateInput(UnboundedNagError, ValueError):
    pass


class NonFiniteIterate(UnboundedNagError, ArithmeticError):
    """迭代点溢出，通常是步长过大。"""


class NonFiniteState(UnboundedNagError, ArithmeticError):
    pass


class PreconditionViolation(UnboundedNagError, ValueError):
    pass


class InvalidCustomSchedule(UnboundedNagError, ValueError):
    pass


class ConfigError(UnboundedNagError, ValueError):
    """配置文件错误，diagnostics 中逐条给出出错的行号或字段路径。"""

    def __init__(self, message: str, diagnostics: list[str] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        return base + "\n" + "\n".join(f"  - {item}" for item in self.diagnostics)
