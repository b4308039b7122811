"""
命令行公共部分：退出码、种子参数、运行配置的合并
"""
import argparse
import sys
from enum import IntEnum
from typing import Any, Dict

from dotenv import dotenv_values
from pydantic import ValidationError

from config import settings
from models.schemas import RunConfig, Seed
from services.cf_engine import make_seed
from services.exceptions import (
    DegenerateRatioError,
    IdentityParseError,
    MachinRefineError,
    PrecisionExhaustedError,
    RefinementIntegrityError,
)
from services.identity_service import CORPUS, seed_from_identity
from services.logger import get_logger

logger = get_logger("cli")


class ExitCode(IntEnum):
    OK = 0
    FALSE = 1
    INVALID_INPUT = 2
    DEGENERATE = 3
    INCONCLUSIVE = 4
    PARSE_ERROR = 5


# 配置文件与命令行共用的键
CONFIG_KEYS = ("a0", "a1", "u0", "u1", "depth", "eps", "strategy", "format", "out")

SEED_CHOICES = sorted(name for name, identity in CORPUS.items() if len(identity.terms) == 2)


def add_seed_arguments(parser: argparse.ArgumentParser) -> None:
    """种子与配置文件参数；默认值为 None，便于区分"未给出"与"显式给出" """
    group = parser.add_argument_group("种子")
    group.add_argument("--a0", type=int, default=None, help="种子系数 a0")
    group.add_argument("--a1", type=int, default=None, help="种子系数 a1")
    group.add_argument("--u0", type=str, default=None, help="种子参数 u0，形如 p/q")
    group.add_argument("--u1", type=str, default=None, help="种子参数 u1，形如 p/q")
    group.add_argument("--seed", choices=SEED_CHOICES, default=None, help="使用语料中的两项恒等式作为种子")
    group.add_argument("--strategy", choices=["linear", "doubling"], default=None, help="单步求商策略")
    parser.add_argument("--config", type=str, default=None, help="key=value 格式的配置文件")


def _default_values() -> Dict[str, Any]:
    defaults = settings.defaults
    return {
        "a0": defaults.a0,
        "a1": defaults.a1,
        "u0": defaults.u0,
        "u1": defaults.u1,
        "depth": defaults.depth,
        "eps": defaults.eps,
        "strategy": defaults.strategy,
        "format": defaults.output_format,
        "out": None,
    }


def _config_file_values(path: str) -> Dict[str, Any]:
    """读取 key=value 配置文件，未知键视为输入错误"""
    raw = dotenv_values(path)
    values: Dict[str, Any] = {}
    for key, value in raw.items():
        normalized = key.strip().lower()
        if normalized not in CONFIG_KEYS:
            raise ValueError(f"配置文件 {path} 含未知键: {key}")
        if value is not None and value != "":
            values[normalized] = value
    logger.debug(f"已读取配置文件 {path}: {sorted(values)}")
    return values


def _seed_flag_values(args: argparse.Namespace) -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    if getattr(args, "seed", None):
        seed = seed_from_identity(CORPUS[args.seed])
        values.update(a0=seed.a0, a1=seed.a1, u0=seed.u0, u1=seed.u1)
    for key in ("a0", "a1", "u0", "u1", "depth", "eps", "strategy", "format", "out"):
        value = getattr(args, key, None)
        if value is not None:
            values[key] = value
    return values


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """
    合并运行配置：命令行 > --config 文件 > 环境变量/.env > 内置默认值

    Raises:
        ValidationError / ValueError: 配置值不合法
    """
    values = _default_values()
    if getattr(args, "config", None):
        values.update(_config_file_values(args.config))
    values.update(_seed_flag_values(args))

    return RunConfig(
        a0=values["a0"],
        a1=values["a1"],
        u0=values["u0"],
        u1=values["u1"],
        depth=values["depth"],
        eps=values["eps"],
        strategy=values["strategy"],
        output_format=values["format"],
        output_path=values["out"],
    )


def seed_of(config: RunConfig) -> Seed:
    return make_seed(config.a0, config.a1, config.u0, config.u1)


def exit_code_for(exc: Exception) -> ExitCode:
    """
    异常到退出码的映射

    RefinementIntegrityError 不在此列，调用方应让其直接抛出。
    """
    if isinstance(exc, IdentityParseError):
        return ExitCode.PARSE_ERROR
    if isinstance(exc, DegenerateRatioError):
        return ExitCode.DEGENERATE
    if isinstance(exc, PrecisionExhaustedError):
        return ExitCode.INCONCLUSIVE
    if isinstance(exc, (MachinRefineError, ValidationError, ValueError)):
        return ExitCode.INVALID_INPUT
    raise exc


def report_error(exc: Exception, stream=None) -> ExitCode:
    """在 stderr 输出错误并返回退出码"""
    if isinstance(exc, RefinementIntegrityError):
        raise exc
    stream = stream or sys.stderr
    code = exit_code_for(exc)
    if isinstance(exc, IdentityParseError):
        print(f"解析错误: {exc}", file=stream)
        print(exc.pointer(), file=stream)
    elif isinstance(exc, ValidationError):
        messages = "; ".join(error["msg"] for error in exc.errors())
        print(f"错误: {messages}", file=stream)
    else:
        print(f"错误: {exc}", file=stream)
    logger.debug(f"{type(exc).__name__} → 退出码 {int(code)}")
    return code
