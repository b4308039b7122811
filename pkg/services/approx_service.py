"""
π 逼近服务
有理逼近 r_n 的误差包围、衰减诊断，以及由细化恒等式计算 π 的十进制位
"""
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from config import get_max_precision_bits, get_precision_floor, settings
from models.exact import Interval
from models.schemas import ApproxRecord, DigitsReport, RefinementRecord, Seed, StepStrategy
from services.cf_engine import refine_stream
from services.exact_core import (
    RationalInput,
    arctan_enclosure,
    arctan_interval,
    arctan_term_count,
    pi_interval,
)
from services.exceptions import DomainError, PrecisionExhaustedError
from services.identity_service import format_identity, refined_identity
from services.logger import get_logger, performance_logger

logger = get_logger("approx")

# 黄金比例衰减常数 1/Φ² ≈ 0.382 的有理上界
GOLDEN_DECAY = Fraction(382, 1000)
GOLDEN_DECAY_SLACK = Fraction(1, 4)

# π 位数计算的起始保护位数
DEFAULT_GUARD_DIGITS = 2


def approx_record(record: RefinementRecord, pi: Interval) -> ApproxRecord:
    """
    单行的逼近记录

    r_n = 4(a_{-n}u_n + a_{-n+1}u_{n+1})，误差包围 [r − π.hi, r − π.lo]。
    """
    r = 4 * (record.a_n * record.u_n + record.a_prev * record.u_next)
    err = Interval(r - pi.hi, r - pi.lo)
    return ApproxRecord(
        n=record.n,
        r=r,
        err=err,
        err_scaled=err.abs().scale(record.D_prev ** 2),
        coeff_ratio=Interval.point(Fraction(record.a_next, record.D)),
    )


def approx_from_records(records: Sequence[RefinementRecord], eps: RationalInput) -> List[ApproxRecord]:
    """对已有的细化记录计算逼近记录，共用一个宽度 ≤ eps 的 π 包围"""
    pi = pi_interval(eps)
    return [approx_record(record, pi) for record in records]


def approx_sequence(
    seed: Seed,
    depth: int,
    eps: RationalInput,
    strategy: Union[StepStrategy, str] = StepStrategy.DOUBLING,
) -> List[ApproxRecord]:
    """第 0..depth-1 行的逼近记录"""
    eps = Fraction(eps)
    if eps <= 0:
        raise DomainError(f"容差必须为正: {eps}")
    return approx_from_records(refine_stream(seed, depth, strategy), eps)


def asymptotic_coefficient_limit(seed: Seed, eps: RationalInput = Fraction(1, 10 ** 12)) -> Interval:
    """a_{-n-1}/D_n 的极限 (π/4)/arctan u1 的包围区间"""
    eps = Fraction(eps)
    return (pi_interval(eps) / 4) / arctan_enclosure(seed.u1, eps)


def coefficients_eventually_positive(records: Sequence[RefinementRecord]) -> bool:
    """a_{-n-1} 一旦为正，此后各行都保持为正"""
    positive_seen = False
    for record in records:
        if record.a_next > 0:
            positive_seen = True
        elif positive_seen:
            return False
    return positive_seen


def coefficient_asymptotic_check(seed: Seed, records: Sequence[RefinementRecord]) -> Interval:
    """
    最深一行的 a_{-n-1}/D_n（精确值，以点区间返回）

    调用方将其与 asymptotic_coefficient_limit 按相对容差比较。
    """
    if len(records) < 3:
        raise DomainError(f"系数渐近检查至少需要 3 行，实际 {len(records)} 行")
    if not coefficients_eventually_positive(records):
        logger.warning(f"种子 {seed.label()} 的系数序列在前 {len(records)} 行未保持为正")
    deepest = records[-1]
    return Interval.point(Fraction(deepest.a_next, deepest.D))


def error_ratios(approx_records: Sequence[ApproxRecord]) -> List[Interval]:
    """
    相邻两行误差之比 |r_{n+1} − π| / |r_n − π| 的包围区间

    要求生成 approx_records 时的 eps 小于各行的 |r_n − π|，否则分母区间含 0，比值无界。

    Raises:
        DomainError: 某行误差包围含 0（eps 过粗）
    """
    ratios: List[Interval] = []
    for current, following in zip(approx_records, approx_records[1:]):
        if current.err.contains_zero():
            raise DomainError(f"第 {current.n} 行误差包围含 0，需要更小的 eps 才能求比值")
        ratios.append(following.err.abs() / current.err.abs())
    return ratios


def geometric_mean_bound_holds(
    ratios: Sequence[Interval],
    bound: Fraction = GOLDEN_DECAY + GOLDEN_DECAY_SLACK,
) -> bool:
    """各比值上界的几何平均 < bound，比较 Π hi 与 bound^k 的精确大小"""
    if not ratios:
        return True
    product = Fraction(1)
    for ratio in ratios:
        product *= ratio.hi
    return product < Fraction(bound) ** len(ratios)


def scaled_error_witness(approx_records: Sequence[ApproxRecord]) -> Fraction:
    """|r_n − π|·D_{n-1}² 上界的最大值"""
    return max(record.err_scaled.hi for record in approx_records)


# ---------------------------------------------------------------------------
# π 的十进制位
# ---------------------------------------------------------------------------

def _evaluate_arctan(job: Tuple[Fraction, Fraction]) -> Interval:
    """进程池任务：单个 arctan 的包围区间"""
    arg, eps = job
    return arctan_interval(arg, eps)


def _certified_prefix(enclosure: Interval, digits: int) -> Optional[str]:
    """两端点截断到 digits 位一致时返回该十进制文本"""
    scale = 10 ** digits
    low = enclosure.lo.numerator * scale // enclosure.lo.denominator
    high = enclosure.hi.numerator * scale // enclosure.hi.denominator
    if low != high:
        return None
    integer_part, fraction_part = divmod(low, scale)
    return f"{integer_part}.{fraction_part:0{digits}d}"


def pi_digits_report(
    seed: Seed,
    n: int,
    digits: int,
    workers: Optional[int] = None,
    strategy: Union[StepStrategy, str] = StepStrategy.DOUBLING,
) -> DigitsReport:
    """
    用第 n 行细化恒等式计算 π 的前 digits 位小数

    每个 arctan 的级数项数由交错级数余项界预先确定；两端点截断后的公共前缀
    即为输出，不一致时增加保护位数重算。

    Raises:
        DomainError: n < 1、digits < 1，或所选行的参数不全小于 1
        PrecisionExhaustedError: 所需精度超过 settings.precision.max_precision_bits
    """
    if n < 1:
        raise DomainError(f"n 必须 ≥ 1，实际为 {n}")
    if digits < 1:
        raise DomainError(f"位数必须 ≥ 1，实际为 {digits}")
    workers = workers or settings.precision.workers

    with performance_logger(logger, "pi_digits") as perf:
        record = refine_stream(seed, n + 1, strategy)[n]
        identity = refined_identity(record, seed)
        terms = identity.pairs()
        if any(arg >= 1 for _, arg in terms):
            raise DomainError(f"第 {n} 行的参数不全小于 1，无法直接用级数求值")

        total_weight = sum(abs(coef) for coef, _ in terms)
        floor = get_precision_floor()
        guard = DEFAULT_GUARD_DIGITS

        while True:
            target = Fraction(1, 10 ** (digits + guard))
            if target < floor:
                raise PrecisionExhaustedError(
                    f"计算 {digits} 位需要的精度超过上限 {get_max_precision_bits()} 位"
                )

            per_term = target / (4 * total_weight)
            jobs = [(arg, per_term) for _, arg in terms]
            if workers > 1:
                with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as executor:
                    enclosures = list(executor.map(_evaluate_arctan, jobs))
            else:
                enclosures = [_evaluate_arctan(job) for job in jobs]

            total = Interval.point(0)
            for (coef, _), enclosure in zip(terms, enclosures):
                total = total + enclosure.scale(coef)
            total = total.scale(4)

            text = _certified_prefix(total, digits)
            if text is not None:
                break
            logger.debug(f"保护位 {guard} 不足以确定 {digits} 位，加倍重算")
            guard *= 2

        term_counts = [arctan_term_count(arg, per_term) for _, arg in terms]
        perf.annotate(n=n, digits=digits, guard_digits=guard, total_terms=sum(term_counts))
        elapsed = round(perf.elapsed_ms(), 2)

    logger.info(f"π 前 {digits} 位由第 {n} 行恒等式得到，项数 {term_counts}")
    return DigitsReport(
        n=n,
        digits=digits,
        text=text,
        identity=format_identity(identity),
        term_counts=term_counts,
        guard_digits=guard,
        workers=workers,
        elapsed_ms=elapsed,
    )


def pi_digits(seed: Seed, n: int, digits: int, workers: Optional[int] = None) -> str:
    """π 的前 digits 位小数（截断，不舍入）"""
    return pi_digits_report(seed, n, digits, workers).text
