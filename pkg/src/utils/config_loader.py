import json
from pathlib import Path

from pydantic import TypeAdapter, ValidationError

from src.core.errors import ConfigError
from src.model.experiment_model import ExperimentConfig
from src.model.problem_model import ProblemSpec

_problem_adapter = TypeAdapter(ProblemSpec)


def _field_path(loc: tuple) -> str:
    parts = []
    for item in loc:
        if isinstance(item, int):
            parts.append(f"[{item}]")
        else:
            parts.append(("." if parts else "") + str(item))
    return "".join(parts) or "<root>"


def validation_diagnostics(error: ValidationError) -> list[str]:
    """把 pydantic 的错误列表转换为 "字段路径: 信息" 形式。"""
    return [f"{_field_path(item['loc'])}: {item['msg']}" for item in error.errors()]


def _read_json(path: Path) -> object:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e.strerror}.") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"Config file {path} is not valid JSON.",
            [f"line {e.lineno}, column {e.colno}: {e.msg}"],
        ) from None


def load_experiment(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    raw = _read_json(path)
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"Config file {path} failed validation.", validation_diagnostics(e)) from None


def load_problem(path: str | Path) -> ProblemSpec:
    """单独的问题文件（certify 子命令使用）。"""
    path = Path(path)
    raw = _read_json(path)
    try:
        return _problem_adapter.validate_python(raw)
    except ValidationError as e:
        raise ConfigError(f"Problem file {path} failed validation.", validation_diagnostics(e)) from None


def list_configs(directory: str | Path) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise ConfigError(f"Sweep directory {directory} does not exist.")
    return sorted(directory.glob("*.json"))
