"""
verify 子命令：验证一条或一组 Machin 型恒等式
"""
import argparse
import sys
from typing import List

from cli.common import ExitCode, report_error
from models.identity import VerificationResult
from models.schemas import Verdict
from services.exceptions import MachinRefineError
from services.identity_service import CORPUS, format_identity, parse_identity, verify
from utils.formatting import truncate_decimal

_VERDICT_CODES = {
    Verdict.TRUE: ExitCode.OK,
    Verdict.FALSE: ExitCode.FALSE,
    Verdict.INCONCLUSIVE: ExitCode.INCONCLUSIVE,
}


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="验证 Machin 型恒等式")
    parser.add_argument("identity", nargs="?", default=None, help='例如 "4*atan(1/5) - 1*atan(1/239) = pi/4"')
    parser.add_argument(
        "--corpus",
        choices=sorted(CORPUS) + ["all"],
        default=None,
        help="验证语料中的恒等式",
    )
    parser.set_defaults(handler=run)


def print_certificate(result: VerificationResult, stream=None) -> None:
    """输出证书摘要"""
    stream = stream or sys.stdout
    print(f"verdict: {result.verdict.value}", file=stream)
    print(f"identity: {format_identity(result.identity)}", file=stream)
    certificate = result.certificate
    if certificate is not None:
        print(
            f"gaussian: re {certificate.re.bit_length()} bits, im {certificate.im.bit_length()} bits, "
            f"im {'=' if certificate.im == certificate.re else '≠'} re",
            file=stream,
        )
        if certificate.angle_enclosure is not None:
            angle = certificate.angle_enclosure
            print(
                f"angle: [{truncate_decimal(angle.lo, 20)}, {truncate_decimal(angle.hi, 20)}]",
                file=stream,
            )
            print(f"precision_bits: {certificate.precision_bits}", file=stream)
    if result.diagnostic:
        print(f"diagnostic: {result.diagnostic}", file=stream)


def _worst(codes: List[ExitCode]) -> ExitCode:
    if ExitCode.FALSE in codes:
        return ExitCode.FALSE
    if ExitCode.INCONCLUSIVE in codes:
        return ExitCode.INCONCLUSIVE
    return ExitCode.OK


def run(args: argparse.Namespace) -> int:
    try:
        if args.corpus:
            names = sorted(CORPUS) if args.corpus == "all" else [args.corpus]
            identities = [CORPUS[name] for name in names]
        elif args.identity is not None:
            identities = [parse_identity(args.identity)]
        else:
            print("错误: 需要给出恒等式文本或 --corpus", file=sys.stderr)
            return ExitCode.INVALID_INPUT

        codes: List[ExitCode] = []
        for identity in identities:
            result = verify(identity)
            if identity.name:
                print(f"[{identity.name}]")
            print_certificate(result)
            codes.append(_VERDICT_CODES[result.verdict])
        return _worst(codes)
    except MachinRefineError as exc:
        return report_error(exc)
