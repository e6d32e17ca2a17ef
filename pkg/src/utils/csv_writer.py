import csv
import math
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

GD_COLUMNS = [
    "k", "f", "g_minus_inf", "grad_norm_sq", "p_err_sq", "p_gap", "q_err_sq", "q_gap", "p_bound", "q_bound",
    "detected",
]
MIRROR_COLUMNS = ["k", "F_X", "X_norm_sq_gap", "energy"]
NAG_COLUMNS = [
    "k", "f", "g_minus_inf", "grad_norm_sq", "grad_y_err_sq", "p_err_sq", "p_gap", "q_err_sq", "q_gap",
    "B_k", "Btilde_k", "energy", "detected_p", "detected_q",
]
ODE_COLUMNS = ["t", "f", "g_minus_inf", "p_err_sq", "p_gap", "q_err_sq", "q_gap", "energy"]
# AMD 流中 X 对应 p，没有 q 与能量序列
AMD_ODE_COLUMNS = ["t", "f", "g_minus_inf", "p_err_sq", "p_gap"]

COLUMNS_BY_ALGORITHM = {
    "gd": GD_COLUMNS,
    "mirror": MIRROR_COLUMNS,
    "nag": NAG_COLUMNS,
    "nag_ode": ODE_COLUMNS,
    "amd_ode": AMD_ODE_COLUMNS,
}


def format_cell(value: object) -> str:
    """None 与 nan 写成空单元格；浮点数用 repr 精度保证逐字节可复现。"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return ""
    return repr(value)


def write_rows(path: str | Path, columns: list[str], rows: Iterable[Mapping[str, object]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_cell(row.get(column)) for column in columns])
    return path
