"""
命令行模块包初始化文件
子命令: refine / verify / digits
"""
import argparse
from typing import List, Optional

from config import get_settings
from services.exceptions import RefinementIntegrityError
from services.logger import EnhancedLogger
from utils.formatting import allow_long_integers

from . import digits, refine, verify

COMMANDS = (refine, verify, digits)


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog=settings.app_name,
        description="由两项 Machin 型公式出发，按连分数展开逐步细化，并给出严格的 π 逼近",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """命令行入口，返回退出码"""
    allow_long_integers()
    args = build_parser().parse_args(argv)
    try:
        return int(args.handler(args))
    except RefinementIntegrityError as exc:
        # 内部不变量被破坏：记录后原样抛出
        EnhancedLogger.log_error(exc, {"command": args.command})
        raise


__all__ = ["build_parser", "main"]
