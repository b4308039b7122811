"""
digits 子命令：用第 n 行细化恒等式计算 π 的十进制位
"""
import argparse

from pydantic import ValidationError

from cli.common import ExitCode, add_seed_arguments, load_run_config, report_error, seed_of
from services.approx_service import pi_digits_report
from services.exceptions import MachinRefineError


def register(subparsers) -> None:
    parser = subparsers.add_parser("digits", help="计算 π 的十进制位")
    add_seed_arguments(parser)
    parser.add_argument("--n", type=int, required=True, help="所用细化恒等式的行号（≥ 1）")
    parser.add_argument("--digits", type=int, required=True, help="小数位数（≥ 1）")
    parser.add_argument("--workers", type=int, default=None, help="并行进程数")
    parser.add_argument("--stats", action="store_true", help="输出级数项数与耗时")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    try:
        config = load_run_config(args)
    except (MachinRefineError, ValidationError, ValueError) as exc:
        return report_error(exc)

    try:
        report = pi_digits_report(seed_of(config), args.n, args.digits, args.workers, config.strategy)
    except MachinRefineError as exc:
        return report_error(exc)

    print(report.text)
    if args.stats:
        print(f"identity: {report.identity}")
        print(f"term_counts: {', '.join(str(count) for count in report.term_counts)}")
        print(f"total_terms: {sum(report.term_counts)}")
        print(f"guard_digits: {report.guard_digits}")
        print(f"workers: {report.workers}")
        print(f"elapsed_ms: {report.elapsed_ms}")
    return ExitCode.OK
