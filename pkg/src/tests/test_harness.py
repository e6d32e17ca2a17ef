import asyncio
import json

import pytest
from pydantic import ValidationError

from src.cli import EXIT_BOUND_FAILURE, EXIT_CONFIG_ERROR, EXIT_OK, main
from src.core.errors import ConfigError
from src.model.experiment_model import ExperimentConfig
from src.model.report_model import Verdict
from src.service import experiment_service
from src.service.experiment_runner import run_experiment
from src.service.experiment_service import SWEEP_REPORT_NAME, ExperimentService
from src.tests.cases import CONFIG_DIR, ELLIPSOID_PROBLEM, GEOMETRIC_PROBLEM
from src.utils.config_loader import list_configs, load_experiment, load_problem
from src.utils.csv_writer import AMD_ODE_COLUMNS, GD_COLUMNS, format_cell


def _gd_config(**overrides) -> dict:
    config = {"name": "gd_small", "problem": GEOMETRIC_PROBLEM, "algorithm": "gd", "k_max": 200}
    config.update(overrides)
    return config


def _write(path, payload) -> str:
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


@pytest.mark.parametrize(
    "payload",
    [
        _gd_config(k_max=None),
        _gd_config(dt=0.1),
        _gd_config(schedule="nesterov"),
        {"name": "ode", "problem": GEOMETRIC_PROBLEM, "algorithm": "nag_ode", "t_end": 1.0},
        {"name": "ode", "problem": GEOMETRIC_PROBLEM, "algorithm": "nag_ode", "t_end": 1.0, "dt": 2.0},
        {"name": "ode", "problem": GEOMETRIC_PROBLEM, "algorithm": "nag_ode", "t_end": 1.0, "dt": 0.1, "t0": 2.0},
        {"name": "ode", "problem": GEOMETRIC_PROBLEM, "algorithm": "nag_ode", "t_end": 1.0, "dt": 0.1, "k_max": 5},
        {"name": "nag", "problem": GEOMETRIC_PROBLEM, "algorithm": "nag", "k_max": 5, "schedule": "custom"},
        {"name": "nag", "problem": GEOMETRIC_PROBLEM, "algorithm": "nag", "k_max": 5, "custom_A": [0.0, 1.0]},
        {
            "name": "tight",
            "problem": GEOMETRIC_PROBLEM,
            "algorithm": "nag_ode",
            "t_end": 10.0,
            "dt": 0.01,
            "extra_checks": ["tightness"],
        },
        _gd_config(extra_checks=["correspondence"]),
        _gd_config(mirror_F={"type": "quadratic", "dim": 2}),
        _gd_config(unknown=1),
    ],
)
def test_experiment_config_rejects_inconsistent_fields(payload):
    payload = {key: value for key, value in payload.items() if value is not None}
    with pytest.raises(ValidationError):
        ExperimentConfig.model_validate(payload)


def test_load_experiment_reports_json_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"name": "x",\n  "algorithm": }', encoding="utf-8")
    with pytest.raises(ConfigError) as info:
        load_experiment(path)
    assert info.value.diagnostics[0].startswith("line 2, column")
    assert "line 2" in str(info.value)


def test_load_experiment_reports_field_paths(tmp_path):
    path = _write(tmp_path / "bad.json", _gd_config(problem={**GEOMETRIC_PROBLEM, "c": "abc"}))
    with pytest.raises(ConfigError) as info:
        load_experiment(path)
    fields = [item.split(":")[0] for item in info.value.diagnostics]
    assert any(field.startswith("problem.") and field.endswith(".c") for field in fields)

    path = _write(tmp_path / "no_k.json", {key: v for key, v in _gd_config().items() if key != "k_max"})
    with pytest.raises(ConfigError) as info:
        load_experiment(path)
    assert any("needs k_max" in item for item in info.value.diagnostics)

    with pytest.raises(ConfigError):
        load_experiment(tmp_path / "missing.json")


def test_load_problem_and_list_configs(tmp_path):
    problem = load_problem(CONFIG_DIR / "problems" / "geometric_fig1.json")
    assert problem.type == "geometric"
    with pytest.raises(ConfigError):
        load_problem(_write(tmp_path / "p.json", {"type": "cubic"}))
    with pytest.raises(ConfigError):
        list_configs(tmp_path / "nowhere")
    assert list_configs(tmp_path) == [tmp_path / "p.json"]


def test_bundled_configs_load():
    paths = list_configs(CONFIG_DIR) + list_configs(CONFIG_DIR / "acceptance")
    assert len(paths) >= 10
    for path in paths:
        load_experiment(path)
    for path in list_configs(CONFIG_DIR / "problems"):
        load_problem(path)


def test_format_cell():
    assert format_cell(None) == ""
    assert format_cell(float("nan")) == ""
    assert format_cell(True) == "1"
    assert format_cell(3) == "3"
    assert format_cell(0.1) == "0.1"
    assert float(format_cell(1.0 / 3.0)) == 1.0 / 3.0


def test_run_gd_experiment_detects_unboundedness():
    config = ExperimentConfig.model_validate(_gd_config())
    summary, outcome = run_experiment(config)
    assert summary.passed, summary.checks
    assert summary.verdict is Verdict.UNBOUNDED
    assert summary.trigger_index <= 56
    names = {check.name for check in summary.checks}
    assert {"oracle-smooth-convex", "oracle-gradient", "gd-p-error", "gd-q-error", "gd-q-gap"} <= names
    assert outcome.columns == GD_COLUMNS
    assert len(outcome.rows) == 201
    assert outcome.rows[0]["detected"] is None


def test_cli_run_writes_reproducible_files(tmp_path):
    config_path = _write(tmp_path / "gd_small.json", _gd_config())
    first, second = tmp_path / "first", tmp_path / "second"
    assert main(["run", config_path, "--out", str(first)]) == EXIT_OK
    assert main(["run", config_path, "--out", str(second)]) == EXIT_OK
    csv_first = (first / "gd_small.csv").read_bytes()
    assert csv_first == (second / "gd_small.csv").read_bytes()
    assert csv_first.decode().splitlines()[0] == ",".join(GD_COLUMNS)
    summary = json.loads((first / "gd_small.summary.json").read_text(encoding="utf-8"))
    assert summary["verdict"] == "UNBOUNDED"
    assert summary["runtime_ms"] >= 0


def test_cli_rejects_malformed_config_without_output(tmp_path):
    config_path = tmp_path / "broken.json"
    config_path.write_text("{", encoding="utf-8")
    out = tmp_path / "out"
    assert main(["run", str(config_path), "--out", str(out)]) == EXIT_CONFIG_ERROR
    assert not out.exists()


def test_cli_certify_prints_report(tmp_path, capsys):
    problem = str(CONFIG_DIR / "problems" / "geometric_fig1.json")
    assert main(["certify", problem, "--budget", "100", "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "UNBOUNDED"
    assert report["trigger_index"] <= 20
    assert main(["certify", problem, "--budget", "0"]) == EXIT_CONFIG_ERROR


def test_cli_sweep_on_empty_directory(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["sweep", str(empty), "--out", str(tmp_path / "out")]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["total"] == 0
    assert main(["sweep", str(tmp_path / "nowhere")]) == EXIT_CONFIG_ERROR


def test_cli_sweep_flags_wrong_smoothness_constant(tmp_path, capsys):
    configs = tmp_path / "configs"
    configs.mkdir()
    _write(configs / "good.json", _gd_config(name="good"))
    _write(configs / "wrong_l.json", {"name": "wrong_l", "problem": ELLIPSOID_PROBLEM, "algorithm": "gd", "k_max": 50, "L": 0.1})
    (configs / "broken.json").write_text("[", encoding="utf-8")
    out = tmp_path / "out"
    assert main(["sweep", str(configs), "--out", str(out)]) == EXIT_BOUND_FAILURE
    report = json.loads(capsys.readouterr().out)
    assert report["total"] == 3
    assert report["passed"] == 1
    assert sorted(report["failed"]) == ["broken", "wrong_l"]
    saved = json.loads((out / SWEEP_REPORT_NAME).read_text(encoding="utf-8"))
    wrong = next(item for item in saved["results"] if item["name"] == "wrong_l")
    smooth = next(check for check in wrong["checks"] if check["name"] == "oracle-smooth-convex")
    assert smooth["passed"] is False


def test_acceptance_sweep_passes(tmp_path):
    report = asyncio.run(ExperimentService(tmp_path).sweep(CONFIG_DIR / "acceptance"))
    assert report.total == len(list_configs(CONFIG_DIR / "acceptance"))
    assert report.failed == []
    by_name = {summary.name: summary for summary in report.results}
    assert by_name["nag_geometric_polynomial"].verdict is Verdict.UNBOUNDED
    assert by_name["nag_geometric_polynomial"].trigger_index <= 20
    assert by_name["nag_ellipsoid_polynomial"].trigger_index <= 5
    assert by_name["nag_square_bounded"].verdict is Verdict.INCONCLUSIVE
    assert (tmp_path / "gd_geometric.csv").exists()


def test_cli_sweep_records_shape_errors_as_failures(tmp_path, capsys):
    configs = tmp_path / "configs"
    configs.mkdir()
    _write(configs / "good.json", _gd_config(name="good"))
    ragged = {**GEOMETRIC_PROBLEM, "omega": [[1.0, 0.0], [1.0]], "c": [1.0, 1.0]}
    _write(configs / "ragged.json", _gd_config(name="ragged", problem=ragged))
    out = tmp_path / "out"
    assert main(["sweep", str(configs), "--out", str(out)]) == EXIT_BOUND_FAILURE
    report = json.loads(capsys.readouterr().out)
    assert report["total"] == 2
    assert report["passed"] == 1
    assert report["failed"] == ["ragged"]
    assert (out / "good.csv").exists()


def test_sweep_survives_unexpected_errors(tmp_path, monkeypatch: pytest.MonkeyPatch):
    real_run = experiment_service.run_experiment

    def flaky_run(config, progress=False):
        if config.name == "boom":
            raise RuntimeError("solver exploded")
        return real_run(config, progress)

    monkeypatch.setattr(experiment_service, "run_experiment", flaky_run)
    configs = tmp_path / "configs"
    configs.mkdir()
    _write(configs / "boom.json", _gd_config(name="boom"))
    _write(configs / "fine.json", _gd_config(name="fine"))
    report = asyncio.run(ExperimentService(tmp_path / "out").sweep(configs))
    assert report.total == 2
    assert report.failed == ["boom"]
    assert [summary.name for summary in report.results] == ["fine"]


@pytest.mark.parametrize("algorithm", ["nag_ode", "amd_ode"])
def test_ode_run_with_step_equal_to_horizon(algorithm):
    config = ExperimentConfig.model_validate(
        {"name": "one_step", "problem": ELLIPSOID_PROBLEM, "algorithm": algorithm, "t_end": 0.1, "dt": 0.1}
    )
    summary, outcome = run_experiment(config)
    assert len(outcome.rows) == 1
    assert outcome.rows[0]["t"] == pytest.approx(0.1)
    assert summary.checks


def test_amd_ode_columns_are_all_filled():
    config = ExperimentConfig.model_validate(
        {"name": "amd", "problem": ELLIPSOID_PROBLEM, "algorithm": "amd_ode", "t_end": 10.0, "dt": 0.01}
    )
    _, outcome = run_experiment(config)
    assert outcome.columns == AMD_ODE_COLUMNS
    assert "q_err_sq" not in outcome.columns
    for row in outcome.rows:
        assert all(row[column] is not None for column in outcome.columns)
