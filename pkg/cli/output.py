"""
输出记录的转换与序列化
JSON 行、CSV 与人读表格三种格式
"""
import csv
from typing import IO, Iterable, List, Sequence

from config import settings
from models.schemas import ApproxRecord, OutputFormat, OutputRecord, RefinementRecord
from utils.formatting import format_rational, truncate_decimal
from utils.ledger import dumps_json_line

FIELD_NAMES: List[str] = list(OutputRecord.model_fields)


def to_output_record(record: RefinementRecord, approx: ApproxRecord) -> OutputRecord:
    """合并细化记录与逼近记录为一行扁平输出"""
    defaults = settings.defaults
    return OutputRecord(
        n=record.n,
        q=record.q,
        u_n=format_rational(record.u_n),
        u_next=format_rational(record.u_next),
        a_n=record.a_n,
        a_prev=record.a_prev,
        a_next=record.a_next,
        N=record.N,
        D=record.D,
        fib=record.fib,
        r=format_rational(approx.r),
        r_decimal=truncate_decimal(approx.r, defaults.r_decimal_places),
        err_lo=truncate_decimal(approx.err.lo, defaults.err_decimal_places),
        err_hi=truncate_decimal(approx.err.hi, defaults.err_decimal_places),
    )


def write_json_lines(rows: Iterable[OutputRecord], stream: IO[str]) -> None:
    for row in rows:
        stream.write(dumps_json_line(row) + "\n")


def write_csv(rows: Iterable[OutputRecord], stream: IO[str]) -> None:
    writer = csv.DictWriter(stream, fieldnames=FIELD_NAMES, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.model_dump())


def _shorten(text: str, width: int) -> str:
    return text if len(text) <= width else text[: width - 1] + "…"


def write_table(rows: Sequence[OutputRecord], stream: IO[str]) -> None:
    """人读表格，过长的有理数截短显示"""
    header = f"{'n':>3} {'q':>3} {'u_n':>24} {'a_n':>12} {'N':>10} {'D':>10} {'r':>16} {'err_hi':>20}"
    stream.write(header + "\n")
    stream.write("-" * len(header) + "\n")
    for row in rows:
        stream.write(
            f"{row.n:>3} {row.q:>3} {_shorten(row.u_n, 24):>24} {_shorten(str(row.a_n), 12):>12} "
            f"{_shorten(str(row.N), 10):>10} {_shorten(str(row.D), 10):>10} "
            f"{row.r_decimal:>16} {_shorten(row.err_hi, 20):>20}\n"
        )


def write_records(rows: Sequence[OutputRecord], output_format: OutputFormat, stream: IO[str]) -> None:
    output_format = OutputFormat(output_format)
    if output_format is OutputFormat.JSON:
        write_json_lines(rows, stream)
    elif output_format is OutputFormat.CSV:
        write_csv(rows, stream)
    else:
        write_table(rows, stream)
