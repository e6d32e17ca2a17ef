import argparse
import asyncio
import logging
import sys
from pathlib import Path


from src.conf.env import settings
from src.conf.log import setup_logging
from src.core.errors import ConfigError, UnboundedNagError
from src.service.experiment_service import ExperimentService
from src.utils.config_loader import load_experiment, load_problem

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_BOUND_FAILURE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unbounded-nag",
        description="一阶方法在可能下无界的光滑凸目标上的实验、界检查与无界性检测",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help=f"输出目录（默认 {settings.OUTPUT_DIR}）")
    common.add_argument("--assert-bounds", action="store_true", help="任何界检查失败时以退出码 2 结束")
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", parents=[common], help="运行一个实验配置，写出 CSV 与汇总 JSON")
    run_parser.add_argument("config", help="实验配置 JSON")

    certify_parser = sub.add_parser("certify", parents=[common], help="从 x0 = 0 运行加速法检测下无界性")
    certify_parser.add_argument("problem", help="问题 JSON")
    certify_parser.add_argument("--budget", type=int, default=settings.CERTIFY_BUDGET, help="最大迭代数")

    sweep_parser = sub.add_parser("sweep", parents=[common], help="运行目录下的全部配置并汇总")
    sweep_parser.add_argument("directory", help="配置目录")
    return parser


async def _run(args: argparse.Namespace, service: ExperimentService) -> int:
    config = load_experiment(args.config)
    summary = await service.run(config)
    print(summary.model_dump_json(indent=2))
    if (config.assert_bounds or args.assert_bounds) and not summary.passed:
        return EXIT_BOUND_FAILURE
    return EXIT_OK


async def _certify(args: argparse.Namespace, service: ExperimentService) -> int:
    if args.budget < 1:
        raise ConfigError(f"--budget must be at least 1, got {args.budget}.")
    problem = load_problem(args.problem)
    report = await service.certify(problem, args.budget)
    print(report.model_dump_json(indent=2, exclude_none=True))
    return EXIT_OK


async def _sweep(args: argparse.Namespace, service: ExperimentService) -> int:
    report = await service.sweep(args.directory)
    print(report.model_dump_json(indent=2, include={"total", "passed", "failed"}))
    return EXIT_BOUND_FAILURE if report.failed else EXIT_OK


COMMANDS = {"run": _run, "certify": _certify, "sweep": _sweep}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging()
    service = ExperimentService(Path(args.out) if args.out else None)
    try:
        return asyncio.run(COMMANDS[args.command](args, service))
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_CONFIG_ERROR
    except UnboundedNagError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
