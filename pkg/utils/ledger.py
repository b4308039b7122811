"""
细化账本
JSON 行格式的持久化，以及续算前的状态重建与复核
"""
import json
import os
from typing import List, Sequence, Tuple

from pydantic import ValidationError

from models.schemas import OutputRecord, RefinementRecord, Seed, StepStrategy, Verdict
from services.arctan_algebra import step
from services.cf_engine import coefficient_closed_form, fibonacci, make_seed
from services.exceptions import LedgerError, PrecisionExhaustedError
from services.identity_service import certify_chain, refined_identity
from services.logger import get_logger
from utils.formatting import parse_rational

try:
    import orjson
except ImportError:
    orjson = None

logger = get_logger("ledger")


def dumps_json_line(row: OutputRecord) -> str:
    """
    单行紧凑 JSON

    orjson 不支持超过 64 位的整数，此时退回标准库并使用相同的紧凑分隔符。
    """
    data = row.model_dump()
    if orjson:
        try:
            return orjson.dumps(data).decode()
        except TypeError:
            pass
    return json.dumps(data, ensure_ascii=False, separators=(",", ":"))


def write_ledger(rows: Sequence[OutputRecord], path: str, append: bool = False) -> None:
    """写入（或追加）账本行"""
    mode = "a" if append else "w"
    with open(path, mode, encoding="utf-8", newline="") as handle:
        for row in rows:
            handle.write(dumps_json_line(row) + "\n")
    logger.info(f"账本 {path} 已{'追加' if append else '写入'} {len(rows)} 行")


def read_ledger(path: str) -> List[OutputRecord]:
    """
    读取账本

    Raises:
        LedgerError: 文件不存在、为空或某行无法解析
    """
    if not os.path.exists(path):
        raise LedgerError(f"账本文件不存在: {path}")

    rows: List[OutputRecord] = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                # 系数与收敛子可能超过 64 位，读取统一走标准库
                rows.append(OutputRecord(**json.loads(line)))
            except (ValueError, ValidationError) as exc:
                raise LedgerError(f"账本 {path} 第 {line_number} 行无法解析: {exc}") from exc

    if not rows:
        raise LedgerError(f"账本为空: {path}")
    return rows


def rebuild_records(
    rows: Sequence[OutputRecord],
    strategy: StepStrategy = StepStrategy.DOUBLING,
) -> Tuple[Seed, List[RefinementRecord]]:
    """
    由账本行重建种子与完整的细化记录，并逐项复核

    第 0 行给出种子；每行的 u_{n+2} 取下一行的 u_{n+1}，最后一行用 step 重新求出。
    复核内容：行号连续、系数递推、收敛子递推与闭式、斐波那契下界、r 值，
    以及链式证书和最后一行恒等式的精确验证。

    Raises:
        LedgerError: 任一复核失败
        PrecisionExhaustedError: 链式证书在精度上限内无法确定
    """
    if rows[0].n != 0:
        raise LedgerError(f"账本必须从第 0 行开始，实际首行为第 {rows[0].n} 行")

    first = rows[0]
    seed = make_seed(first.a_n, first.a_prev, first.u_n, first.u_next)

    records: List[RefinementRecord] = []
    N_prev, D_prev, N_prev2, D_prev2 = 1, 0, 0, 1
    for index, row in enumerate(rows):
        if row.n != index:
            raise LedgerError(f"账本行号不连续: 期望 {index}，实际 {row.n}")

        try:
            u_n, u_next = parse_rational(row.u_n), parse_rational(row.u_next)
            if index + 1 < len(rows):
                u_after = parse_rational(rows[index + 1].u_next)
        except ValueError as exc:
            raise LedgerError(f"第 {row.n} 行参数无法解析: {exc}") from exc
        if index + 1 == len(rows):
            result = step(u_n, u_next, strategy)
            if result.q != row.q:
                raise LedgerError(f"第 {row.n} 行部分商 {row.q} 与重新计算的 {result.q} 不符")
            u_after = result.w

        record = RefinementRecord(
            n=row.n, q=row.q, u_n=u_n, u_next=u_next, u_after=u_after,
            a_n=row.a_n, a_prev=row.a_prev, N=row.N, D=row.D,
            N_prev=N_prev, D_prev=D_prev, fib=row.fib,
        )
        _check_row(seed, row, record, N_prev2, D_prev2)
        if records and (record.a_n, record.a_prev, record.u_n) != (
            records[-1].a_next, records[-1].a_n, records[-1].u_next
        ):
            raise LedgerError(f"第 {row.n} 行与上一行衔接不一致")

        records.append(record)
        N_prev2, D_prev2, N_prev, D_prev = N_prev, D_prev, row.N, row.D

    verdict = certify_chain(seed, records)
    if verdict is Verdict.INCONCLUSIVE:
        raise PrecisionExhaustedError("账本链式证书在精度上限内无法确定")
    if verdict is not Verdict.TRUE:
        raise LedgerError(f"账本链式证书结果为 {verdict.value}")
    refined_identity(records[-1], seed)
    logger.info(f"账本 {len(records)} 行复核通过，种子 {seed.label()}")
    return seed, records


def _check_row(seed: Seed, row: OutputRecord, record: RefinementRecord, N_prev2: int, D_prev2: int) -> None:
    n = row.n
    if row.a_next != record.a_next:
        raise LedgerError(f"第 {n} 行 a_next={row.a_next}，递推值为 {record.a_next}")
    if (row.N, row.D) != (row.q * record.N_prev + N_prev2, row.q * record.D_prev + D_prev2):
        raise LedgerError(f"第 {n} 行收敛子 {row.N}/{row.D} 不满足递推")
    if abs(row.N * record.D_prev - record.N_prev * row.D) != 1:
        raise LedgerError(f"第 {n} 行收敛子行列式不为 ±1")
    if coefficient_closed_form(seed, record) != record.a_next:
        raise LedgerError(f"第 {n} 行系数闭式 a0·N + a1·D 与 a_next 不符")
    if row.fib != fibonacci(n + 1) or row.D < row.fib:
        raise LedgerError(f"第 {n} 行斐波那契下界 fib={row.fib} 不正确")
    expected_r = 4 * (record.a_n * record.u_n + record.a_prev * record.u_next)
    if parse_rational(row.r) != expected_r:
        raise LedgerError(f"第 {n} 行 r={row.r} 与 4(a_n·u_n + a_prev·u_next) 不符")
