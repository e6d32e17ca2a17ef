import logging
import sys

from src.conf.env import settings

LOG_FORMAT = "%(asctime)s | %(levelname)-7s | %(name)s:%(lineno)d - %(message)s"


def setup_logging(level: str | None = None) -> None:
    """
    按 settings.LOG_LEVEL 配置根 logger 的 stderr 输出。CLI 与 FastAPI 入口各调用一次。
    """
    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(),
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )
