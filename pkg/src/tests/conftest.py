import numpy as np
import pytest

from src.objectives.ellipsoid import EllipsoidObjective
from src.objectives.geometric import GeometricProgram
from src.objectives.onedim import OneDimTight
from src.tests.cases import ELLIPSOID_A, ELLIPSOID_B, GEOMETRIC_C, GEOMETRIC_OMEGA


@pytest.fixture
def geometric() -> GeometricProgram:
    return GeometricProgram(c=GEOMETRIC_C, omega=GEOMETRIC_OMEGA)


@pytest.fixture
def triangle() -> GeometricProgram:
    """三项、仿射无关的 Ω，共轭的单纯形表示唯一。"""
    return GeometricProgram(c=[1.0, 2.0, 0.5], omega=[[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])


@pytest.fixture
def ellipsoid() -> EllipsoidObjective:
    return EllipsoidObjective(A=ELLIPSOID_A, b=ELLIPSOID_B)


@pytest.fixture
def square() -> GeometricProgram:
    """Conv Ω 含原点，f 有下界 log 4。"""
    return GeometricProgram(c=[1.0] * 4, omega=[[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])


@pytest.fixture
def onedim() -> OneDimTight:
    return OneDimTight(alpha=0.5)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260419)
