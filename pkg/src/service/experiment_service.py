import asyncio
import json
import logging
from pathlib import Path

from tqdm import tqdm

from src.accel.detection import certify
from src.conf.env import settings
from src.core.errors import ConfigError, UnboundedNagError
from src.dualgeom.context import ground_truth
from src.model.experiment_model import ExperimentConfig, RunSummary, SweepReport
from src.model.problem_model import ProblemSpec
from src.model.report_model import CertificateReport
from src.objectives.factory import build_oracle
from src.service.experiment_runner import RunOutcome, run_experiment
from src.utils.config_loader import list_configs, load_experiment
from src.utils.csv_writer import write_rows

logger = logging.getLogger(__name__)

SWEEP_REPORT_NAME = "sweep_report.json"


def _resolve(out_dir: Path, path: str | None, default: str) -> Path:
    target = Path(path) if path is not None else Path(default)
    return target if target.is_absolute() else out_dir / target


def write_outputs(config: ExperimentConfig, summary: RunSummary, outcome: RunOutcome, out_dir: Path) -> tuple[Path, Path]:
    """CSV 不含耗时，逐字节可复现；汇总 JSON 带 runtime_ms。"""
    csv_path = _resolve(out_dir, config.outputs.csv, f"{config.name}.csv")
    summary_path = _resolve(out_dir, config.outputs.summary, f"{config.name}.summary.json")
    write_rows(csv_path, outcome.columns, outcome.rows)
    summary_path.parent.mkdir(parents=True, exist_ok=True)
    summary_path.write_text(summary.model_dump_json(indent=2), encoding="utf-8")
    return csv_path, summary_path


class ExperimentService:
    """run / certify / sweep 三种入口；数值计算在线程中执行，不阻塞事件循环。"""

    def __init__(self, out_dir: str | Path | None = None):
        self.out_dir = Path(out_dir or settings.OUTPUT_DIR)

    async def run(self, config: ExperimentConfig, write: bool = True) -> RunSummary:
        summary, outcome = await asyncio.to_thread(run_experiment, config, settings.DEBUG_MODE)
        if write:
            csv_path, summary_path = write_outputs(config, summary, outcome, self.out_dir)
            logger.info(f"{config.name}: wrote {csv_path} and {summary_path}")
        return summary

    async def certify(self, problem: ProblemSpec, budget: int | None = None) -> CertificateReport:
        budget = budget or settings.CERTIFY_BUDGET

        def _certify() -> CertificateReport:
            oracle = build_oracle(problem)
            truth = ground_truth(oracle, max_iter=settings.WOLFE_MAX_ITER)
            p_star = None if truth is None else truth.p_star
            return certify(oracle, budget, p_star=p_star, progress=settings.DEBUG_MODE)

        return await asyncio.to_thread(_certify)

    async def sweep(self, directory: str | Path) -> SweepReport:
        """目录下每个 *.json 是一个实验；配置错误或运行异常都计为失败。"""
        paths = list_configs(directory)
        semaphore = asyncio.Semaphore(settings.SWEEP_CONCURRENCY)
        progress = tqdm(total=len(paths), desc="sweep", disable=not settings.DEBUG_MODE)

        async def _one(path: Path) -> tuple[str, RunSummary | None]:
            async with semaphore:
                try:
                    config = load_experiment(path)
                except ConfigError as e:
                    logger.error(f"{path.name}: {e}")
                    progress.update(1)
                    return path.stem, None
                try:
                    return config.name, await self.run(config)
                except UnboundedNagError as e:
                    logger.error(f"{config.name}: {type(e).__name__}: {e}")
                    return config.name, None
                except Exception as e:
                    # 任何异常只记为该配置失败
                    logger.exception(f"{config.name}: unexpected {type(e).__name__}: {e}")
                    return config.name, None
                finally:
                    progress.update(1)

        outcomes = await asyncio.gather(*(_one(path) for path in paths))
        progress.close()

        results = [summary for _, summary in outcomes if summary is not None]
        failed = [name for name, summary in outcomes if summary is None or not summary.passed]
        report = SweepReport(total=len(paths), passed=len(paths) - len(failed), failed=failed, results=results)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        report_path = self.out_dir / SWEEP_REPORT_NAME
        report_path.write_text(json.dumps(report.model_dump(mode="json"), indent=2), encoding="utf-8")
        logger.info(f"Sweep over {directory}: {report.passed}/{report.total} passed, report at {report_path}")
        return report
