"""
refine 子命令：从种子出发产出细化记录，可写入或续算账本
"""
import argparse
import sys
from itertools import islice
from typing import List, Sequence

from pydantic import ValidationError

from cli.common import ExitCode, add_seed_arguments, load_run_config, report_error, seed_of
from cli.output import to_output_record, write_records
from models.schemas import OutputRecord, RefinementRecord, RunConfig
from services.approx_service import approx_from_records
from services.cf_engine import RefinementState, iter_refinements, refine_stream
from services.exceptions import MachinRefineError
from services.identity_service import refined_identity
from services.logger import get_logger, performance_logger
from utils.ledger import read_ledger, rebuild_records, write_ledger

logger = get_logger("cli.refine")


def register(subparsers) -> None:
    parser = subparsers.add_parser("refine", help="细化种子恒等式")
    add_seed_arguments(parser)
    parser.add_argument("--depth", type=int, default=None, help="输出行数（续算时为追加行数）")
    parser.add_argument("--eps", type=str, default=None, help="π 包围宽度，例如 1/10^30 写作 1e-30")
    parser.add_argument("--format", dest="format", choices=["table", "json", "csv"], default=None)
    parser.add_argument("--out", type=str, default=None, help="把账本写入 JSON 行文件")
    parser.add_argument("--resume", type=str, default=None, help="从已有账本续算")
    parser.set_defaults(handler=run)


def _output_rows(records: Sequence[RefinementRecord], config: RunConfig) -> List[OutputRecord]:
    approx_records = approx_from_records(records, config.eps)
    return [to_output_record(record, approx) for record, approx in zip(records, approx_records)]


def _refine(config: RunConfig) -> int:
    seed = seed_of(config)
    with performance_logger(logger, "refine") as perf:
        perf.annotate(depth=config.depth, strategy=config.strategy.value)
        records = refine_stream(seed, config.depth, config.strategy)
        for record in records:
            refined_identity(record, seed)
        rows = _output_rows(records, config)

    write_records(rows, config.output_format, sys.stdout)
    if config.output_path:
        write_ledger(rows, config.output_path)
    return ExitCode.OK


def _resume(path: str, config: RunConfig) -> int:
    """复核账本后追加 depth 行；给出 --out 时写出完整账本，否则追加到原文件"""
    existing = read_ledger(path)
    with performance_logger(logger, "refine_resume") as perf:
        perf.annotate(ledger_rows=len(existing), appended=config.depth)
        seed, records = rebuild_records(existing, config.strategy)
        start = RefinementState.after(records[-1])
        appended = list(islice(iter_refinements(seed, config.strategy, start=start), config.depth))
        for record in appended:
            refined_identity(record, seed)
        rows = _output_rows(appended, config)

    write_records(rows, config.output_format, sys.stdout)
    if config.output_path:
        write_ledger(list(existing) + rows, config.output_path)
    else:
        write_ledger(rows, path, append=True)
    return ExitCode.OK


def run(args: argparse.Namespace) -> int:
    # ValueError 只来自配置解析；计算过程中的 ValueError 属于内部错误，不转成退出码
    try:
        config = load_run_config(args)
    except (MachinRefineError, ValidationError, ValueError) as exc:
        return report_error(exc)

    try:
        if args.resume:
            return _resume(args.resume, config)
        return _refine(config)
    except OSError as exc:
        print(f"错误: {exc}", file=sys.stderr)
        return ExitCode.INVALID_INPUT
    except (MachinRefineError, ValidationError) as exc:
        return report_error(exc)
