from typing import Iterable, TypeAlias

import numpy as np
from numpy.typing import NDArray

from src.core.errors import DimensionMismatch, NonFiniteInput, NonFiniteIterate

Vector: TypeAlias = NDArray[np.float64]
Matrix: TypeAlias = NDArray[np.float64]


def as_vector(values: Iterable[float] | float | Vector, dim: int | None = None) -> Vector:
    """
    转换为一维 float64 数组，并检查维度与有限性。
    """
    arr = np.array(values, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionMismatch(f"Expected a 1-D vector, got an array of shape {arr.shape}.")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"Expected dimension {dim}, got {arr.shape[0]}.")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"Vector has non-finite entries: {arr.tolist()}.")
    return arr


def frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def check_dim(x: Vector, dim: int) -> Vector:
    if x.shape != (dim,):
        raise DimensionMismatch(f"Expected a vector of dimension {dim}, got shape {x.shape}.")
    return x


def ensure_finite(x: Vector, k: int, what: str = "iterate") -> Vector:
    if not np.all(np.isfinite(x)):
        raise NonFiniteIterate(f"The {what} became non-finite at k={k}; the step size is probably too large.")
    return x


def sample_box(rng: np.random.Generator, count: int, dim: int, half_width: float = 5.0) -> Matrix:
    """[-half_width, half_width]^dim 中的均匀采样，每行一个点。"""
    return rng.uniform(-half_width, half_width, size=(count, dim))
