"""
日志模块 - 结构化文件日志、运算计时、完整性错误追踪
控制台输出走 stderr，stdout 只承载数据（表格 / JSON 行 / CSV / π 位数）
"""
import json
import logging
import os
import sys
import time
import traceback
from contextlib import contextmanager
from datetime import datetime
from functools import wraps
from logging.handlers import RotatingFileHandler
from typing import Any, Dict, Iterator, Optional

from config import settings

try:
    import orjson
except ImportError:
    orjson = None

LOGGER_NAMESPACE = "machin"

# 计时日志的级别阈值（毫秒）
SLOW_OPERATION_MS = 1000
VERY_SLOW_OPERATION_MS = 10000

_LEVELS = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
    "CRITICAL": logging.CRITICAL,
}


def _dumps(data: Dict[str, Any]) -> str:
    # 日志里可能出现超过 64 位的整数（系数、收敛子），orjson 不接受时退回标准库
    if orjson:
        try:
            return orjson.dumps(data, default=str).decode()
        except TypeError:
            pass
    return json.dumps(data, ensure_ascii=False, default=str)


class StructuredFormatter(logging.Formatter):
    """每条记录一行 JSON，附带计时数据与调用方给出的上下文字段"""

    def format(self, record: logging.LogRecord) -> str:
        entry: Dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "location": f"{record.module}.{record.funcName}:{record.lineno}",
            "message": record.getMessage(),
        }

        if record.exc_info and record.exc_info[0]:
            entry["exception"] = {
                "type": record.exc_info[0].__name__,
                "message": str(record.exc_info[1]),
                "traceback": traceback.format_exception(*record.exc_info),
            }

        context = getattr(record, "context", None)
        if context:
            entry["context"] = context

        timing = getattr(record, "timing", None)
        if timing:
            entry["timing"] = timing

        return _dumps(entry)


def _rss_mb() -> Optional[float]:
    """当前进程常驻内存（MB），未安装 psutil 时为 None"""
    try:
        import psutil
    except ImportError:
        return None
    return psutil.Process(os.getpid()).memory_info().rss / 1024 / 1024


class PerformanceLogger:
    """一次运算的计时器，结束时按耗时选择日志级别"""

    def __init__(self, logger: logging.Logger, operation: str):
        self.logger = logger
        self.operation = operation
        self.fields: Dict[str, Any] = {}
        self.duration_ms: Optional[float] = None
        self._start = time.perf_counter()
        self._start_rss = _rss_mb()

    def elapsed_ms(self) -> float:
        """到目前为止的耗时（毫秒）"""
        return (time.perf_counter() - self._start) * 1000

    def annotate(self, **fields: Any) -> None:
        """附加到计时记录上的字段，例如行数、位数、精度"""
        self.fields.update(fields)

    def finish(self, success: bool = True, error: Optional[str] = None) -> None:
        self.duration_ms = round(self.elapsed_ms(), 2)
        timing: Dict[str, Any] = {
            "operation": self.operation,
            "duration_ms": self.duration_ms,
            "success": success,
            **self.fields,
        }
        end_rss = _rss_mb()
        if self._start_rss is not None and end_rss is not None:
            timing["rss_growth_mb"] = round(end_rss - self._start_rss, 2)
        if error:
            timing["error"] = error

        if self.duration_ms > VERY_SLOW_OPERATION_MS:
            level = logging.WARNING
        elif self.duration_ms > SLOW_OPERATION_MS:
            level = logging.INFO
        else:
            level = logging.DEBUG
        self.logger.log(level, f"{self.operation} 用时 {self.duration_ms}ms", extra={"timing": timing})


@contextmanager
def performance_logger(logger: logging.Logger, operation: str) -> Iterator[PerformanceLogger]:
    """计时上下文管理器；异常照常抛出，记录中标明失败"""
    perf = PerformanceLogger(logger, operation)
    try:
        yield perf
    except Exception as exc:
        perf.finish(success=False, error=f"{type(exc).__name__}: {exc}")
        raise
    perf.finish()


class EnhancedLogger:
    """
    日志器注册表

    处理器只建一次：控制台（stderr）总是存在；设置了 LOG_DIR 时
    另有滚动的结构化日志文件与只收 ERROR 的错误文件。
    """

    _loggers: Dict[str, logging.Logger] = {}
    _handlers: Dict[str, logging.Handler] = {}

    @staticmethod
    def _level(name: str, fallback: str) -> int:
        return _LEVELS.get((name or fallback).upper(), _LEVELS[fallback])

    @classmethod
    def _rotating_file(cls, filename: str, level: int) -> logging.Handler:
        log_settings = settings.logging
        handler = RotatingFileHandler(
            os.path.join(log_settings.log_dir, filename),
            maxBytes=log_settings.max_file_size * 1024 * 1024,
            backupCount=log_settings.backup_count,
            encoding="utf-8",
        )
        handler.setLevel(level)
        handler.setFormatter(StructuredFormatter())
        return handler

    @classmethod
    def _setup_handlers(cls) -> None:
        log_settings = settings.logging

        console = logging.StreamHandler(sys.stderr)
        console.setLevel(cls._level(log_settings.console_level, "WARNING"))
        console.setFormatter(logging.Formatter("%(asctime)s | %(levelname)-8s | %(name)-24s | %(message)s"))
        cls._handlers["console"] = console

        if log_settings.log_dir:
            os.makedirs(log_settings.log_dir, exist_ok=True)
            cls._handlers["file"] = cls._rotating_file(
                "machin_refine.log", cls._level(log_settings.file_level, "DEBUG")
            )
            cls._handlers["error"] = cls._rotating_file("machin_refine_errors.log", logging.ERROR)

    @classmethod
    def get_logger(cls, name: str) -> logging.Logger:
        """获取 machin 命名空间下的日志器"""
        if not cls._handlers:
            cls._setup_handlers()

        if not name.startswith(LOGGER_NAMESPACE):
            name = f"{LOGGER_NAMESPACE}.{name}"

        logger = cls._loggers.get(name)
        if logger is None:
            logger = logging.getLogger(name)
            logger.setLevel(logging.DEBUG)
            if not logger.handlers:
                for handler in cls._handlers.values():
                    logger.addHandler(handler)
                logger.propagate = False
            cls._loggers[name] = logger
        return logger

    @classmethod
    def get_app_logger(cls) -> logging.Logger:
        return cls.get_logger(f"{LOGGER_NAMESPACE}.app")

    @classmethod
    def get_performance_logger(cls) -> logging.Logger:
        return cls.get_logger(f"{LOGGER_NAMESPACE}.performance")

    @classmethod
    def log_error(cls, error: Exception, context: Optional[Dict[str, Any]] = None) -> None:
        """记录带调用栈的错误，context 写入结构化日志的 context 字段"""
        cls.get_app_logger().error(
            f"{type(error).__name__}: {error}",
            exc_info=(type(error), error, error.__traceback__),
            extra={"context": context or {}},
        )


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """获取日志器"""
    if name is None:
        return EnhancedLogger.get_app_logger()
    return EnhancedLogger.get_logger(name)


def log_performance(operation: str):
    """计时装饰器"""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            with performance_logger(EnhancedLogger.get_performance_logger(), operation):
                return func(*args, **kwargs)
        return wrapper
    return decorator
