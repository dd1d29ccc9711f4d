import sys
import traceback

import loguru

from arborlat.enums import loglevelToInt, LogLevel
from arborlat.settings import settings


def format_path(v: tuple[int, ...]) -> str:
    return '/' + '/'.join(str(a) for a in v)


def parse_path(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text.startswith('/'):
        raise ValueError(f'vertex path must start with "/": {text}')
    return tuple(int(p) for p in text.strip('/').split('/') if p)


class ArborlatLogger:
    """
    Thin wrapper around loguru. Pipelines announce their stages through stage(), which keeps a
    running counter so long computations can be followed on stderr.
    """
    def __init__(self):
        self.source = None
        self.stage_count = 0
        self.level = loglevelToInt[LogLevel.info]

    def init(self, source: str, level: LogLevel = LogLevel.info):
        self.source = source
        self.stage_count = 0
        self.level = loglevelToInt[level]

    def log(self, msg: str, level: LogLevel):
        if loglevelToInt[level] < self.level:
            return
        if level == LogLevel.stage:
            loguru_level = 'INFO'
            msg = f'[{self.stage_count}] {msg}'
        else:
            loguru_level = level.name.upper()

        if msg.strip('\n'):
            loguru.logger.log(loguru_level, msg.strip('\n'))

    def stage(self, msg: str):
        self.stage_count += 1
        self.log(msg, LogLevel.stage)

    def debug(self, msg: str):
        self.log(msg, LogLevel.debug)

    def info(self, msg: str):
        self.log(msg, LogLevel.info)

    def warning(self, msg: str):
        self.log(msg, LogLevel.warning)

    def error(self, msg: str):
        self.log(msg, LogLevel.error)

    def exception(self, msg):
        self.log(str(msg) + '\n' + traceback.format_exc() + '\n', LogLevel.error)


logger = ArborlatLogger()


def configure_logging(level: str = None):
    level = (level or settings.LOG_LEVEL).upper()
    loguru.logger.remove()
    loguru.logger.add(sys.stderr, level=level, format='{time:HH:mm:ss} {level} {message}')
    logger.init('arborlat', LogLevel.debug if level == 'DEBUG' else LogLevel.info)
