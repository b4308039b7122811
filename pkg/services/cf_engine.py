"""
连分数细化引擎
从种子恒等式出发，按 arctan u0 / arctan u1 的连分数展开逐行产出细化恒等式
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, List, Optional, Union

from pydantic import ValidationError

from config import is_debug_mode
from models.exact import Interval
from models.schemas import RefinementRecord, Seed, StepStrategy, Verdict
from services.arctan_algebra import step
from services.exact_core import RationalInput, arctan_enclosure, tan_combination
from services.exceptions import DomainError, PrecisionExhaustedError, SeedInvalidError, TangentPoleError
from services.identity_service import angle_relation_verdict, verify_seed_identity
from services.logger import get_logger
from utils.formatting import brief_rational
from utils.precision import decimal_digits, escalating_decimal_tolerances

logger = get_logger("cf_engine")

# 比较的余量位数：起始精度取 D² 的位数再加这么多
GUARD_DIGITS = 10


@dataclass(frozen=True)
class RefinementState:
    """
    推进到第 n 行之前的状态

    N_prev/D_prev 为 N_{n-1}/D_{n-1}，N_prev2/D_prev2 为 N_{n-2}/D_{n-2}。
    """
    n: int
    u_n: Fraction
    u_next: Fraction
    a_n: int
    a_prev: int
    N_prev: int
    D_prev: int
    N_prev2: int
    D_prev2: int

    @classmethod
    def initial(cls, seed: Seed) -> "RefinementState":
        # N_{-2}=0, N_{-1}=1, D_{-2}=1, D_{-1}=0
        return cls(
            n=0, u_n=seed.u0, u_next=seed.u1, a_n=seed.a0, a_prev=seed.a1,
            N_prev=1, D_prev=0, N_prev2=0, D_prev2=1,
        )

    @classmethod
    def after(cls, record: RefinementRecord) -> "RefinementState":
        """第 n 行之后的状态，即第 n+1 行之前"""
        return cls(
            n=record.n + 1,
            u_n=record.u_next,
            u_next=record.u_after,
            a_n=record.a_next,
            a_prev=record.a_n,
            N_prev=record.N,
            D_prev=record.D,
            N_prev2=record.N_prev,
            D_prev2=record.D_prev,
        )


def make_seed(
    a0: int,
    a1: int,
    u0: RationalInput,
    u1: RationalInput,
) -> Seed:
    """
    构造种子（只做形式校验，不验证恒等式）

    Raises:
        SeedInvalidError: 不满足 u0 > u1 > 0 或参数无法解析
    """
    try:
        return Seed(a0=a0, a1=a1, u0=u0, u1=u1)
    except ValidationError as exc:
        raise SeedInvalidError(f"种子无效: {exc.errors()[0]['msg']}") from exc


def verify_seed(seed: Seed) -> None:
    """
    验证种子恒等式 a0·arctan u0 + a1·arctan u1 = π/4

    Raises:
        SeedInvalidError: 恒等式不成立
        PrecisionExhaustedError: 精度上限内无法确认，不据此判定种子无效
    """
    result = verify_seed_identity(seed)
    if result.verdict is Verdict.INCONCLUSIVE:
        raise PrecisionExhaustedError(f"种子 {seed.label()} 在精度上限内无法确认: {result.diagnostic}")
    if result.verdict is not Verdict.TRUE:
        raise SeedInvalidError(
            f"种子 {seed.label()} 验证结果为 {result.verdict.value}: {result.diagnostic}"
        )
    logger.debug(f"种子 {seed.label()} 验证通过")


def iter_refinements(
    seed: Seed,
    strategy: Union[StepStrategy, str] = StepStrategy.DOUBLING,
    start: Optional[RefinementState] = None,
    trust_seed: bool = False,
) -> Iterator[RefinementRecord]:
    """
    惰性产出细化记录，只保留当前状态

    Args:
        seed: 种子，产出第一行前先验证
        strategy: 单步求商策略
        start: 续算的起点状态，缺省为种子对应的第 0 行
        trust_seed: 跳过种子验证，仅在调试模式下允许

    Raises:
        SeedInvalidError: 种子未通过验证，或非调试模式下要求跳过验证
        DegenerateRatioError: 比值为有理数，展开终止
    """
    if trust_seed:
        if not is_debug_mode():
            raise SeedInvalidError("跳过种子验证只允许在调试模式下使用")
        logger.warning(f"调试模式：跳过种子 {seed.label()} 的验证")
    else:
        verify_seed(seed)

    state = start or RefinementState.initial(seed)
    fib_current, fib_next = fibonacci(state.n + 1), fibonacci(state.n + 2)

    while True:
        result = step(state.u_n, state.u_next, strategy)
        N = result.q * state.N_prev + state.N_prev2
        D = result.q * state.D_prev + state.D_prev2

        record = RefinementRecord(
            n=state.n,
            q=result.q,
            u_n=state.u_n,
            u_next=state.u_next,
            u_after=result.w,
            a_n=state.a_n,
            a_prev=state.a_prev,
            N=N,
            D=D,
            N_prev=state.N_prev,
            D_prev=state.D_prev,
            fib=fib_current,
        )
        logger.debug(f"n={record.n} q={record.q} a_next={record.a_next} N/D={N}/{D}")
        yield record

        state = RefinementState.after(record)
        fib_current, fib_next = fib_next, fib_current + fib_next


def refine_stream(
    seed: Seed,
    depth: int,
    strategy: Union[StepStrategy, str] = StepStrategy.DOUBLING,
    trust_seed: bool = False,
) -> List[RefinementRecord]:
    """产出第 0..depth-1 行"""
    if depth < 1:
        raise DomainError(f"细化深度必须 ≥ 1，实际为 {depth}")

    records: List[RefinementRecord] = []
    for record in iter_refinements(seed, strategy, trust_seed=trust_seed):
        records.append(record)
        if len(records) == depth:
            break
    return records


def closed_form_coefficient(seed: Seed, N: int, D: int) -> int:
    """a0·N + a1·D"""
    return seed.a0 * N + seed.a1 * D


def coefficient_closed_form(seed: Seed, record: RefinementRecord) -> int:
    """a_{-n-1} 的闭式 a0·N_n + a1·D_n，调用方与递推值比较"""
    return closed_form_coefficient(seed, record.N, record.D)


def argument_closed_form_check(seed: Seed, record: RefinementRecord) -> bool:
    """
    检查 arctan u_n = (−1)^n (D_{n-2}·arctan u0 − N_{n-2}·arctan u1)

    正切精确相等确定了模 π 的角，再由区间判定确定分支。要求 n ≥ 2。
    """
    if record.n < 2:
        raise DomainError(f"闭式检查要求 n ≥ 2，实际为 {record.n}")

    N_prev2 = record.N - record.q * record.N_prev
    D_prev2 = record.D - record.q * record.D_prev
    sign = -1 if record.n % 2 else 1

    try:
        tangent = tan_combination(((D_prev2, seed.u0), (-N_prev2, seed.u1)))
    except TangentPoleError as exc:
        logger.warning(f"第 {record.n} 行闭式检查失败: {exc}")
        return False
    if tangent != sign * record.u_n:
        logger.warning(
            "第 %d 行闭式正切 %s ≠ %s", record.n, brief_rational(tangent), brief_rational(sign * record.u_n)
        )
        return False

    verdict = angle_relation_verdict(((D_prev2, seed.u0), (-N_prev2, seed.u1), (-sign, record.u_n)))
    return verdict is Verdict.TRUE


def fibonacci(n: int) -> int:
    """F_n，按递推 F_{n+2} = F_n + F_{n+1} 计算"""
    if n < 0:
        raise DomainError(f"斐波那契下标必须 ≥ 0，实际为 {n}")
    current, following = 0, 1
    for _ in range(n):
        current, following = following, current + following
    return current


def fibonacci_bound_holds(record: RefinementRecord) -> bool:
    """D_n ≥ F_{n+1}，并核对记录携带的 fib"""
    expected = fibonacci(record.n + 1)
    return record.fib == expected and record.D >= expected


def alpha_interval(seed: Seed, eps: RationalInput) -> Interval:
    """α = arctan u0 / arctan u1 的包围区间"""
    eps = Fraction(eps)
    return arctan_enclosure(seed.u0, eps) / arctan_enclosure(seed.u1, eps)


def _escalate(decide: Callable[[Fraction], Optional[Verdict]], start_digits: int, label: str) -> Verdict:
    """逐级加倍十进制精度直到 decide 给出结论，超出上限则为 INCONCLUSIVE"""
    for digits, eps in escalating_decimal_tolerances(start_digits):
        verdict = decide(eps)
        if verdict is not None:
            logger.debug(f"{label}: {verdict.value}（{digits} 位）")
            return verdict
    logger.warning(f"{label}: 精度上限内无法确定")
    return Verdict.INCONCLUSIVE


def convergent_bound_check(
    seed: Seed,
    record: RefinementRecord,
    next_record: RefinementRecord,
) -> Verdict:
    """
    区间检查 |α − N_n/D_n| ≤ 1/(D_n·D_{n+1})

    起始精度 10^-(D_n² 的位数 + 10)，不确定时位数加倍。
    """
    center = record.convergent
    radius = Fraction(1, record.D * next_record.D)
    target = Interval(center - radius, center + radius)

    def decide(eps: Fraction) -> Optional[Verdict]:
        alpha = alpha_interval(seed, eps)
        if alpha.is_subset_of(target):
            return Verdict.TRUE
        if not alpha.intersects(target):
            return Verdict.FALSE
        return None

    start = decimal_digits(record.D ** 2) + GUARD_DIGITS
    return _escalate(decide, start, f"收敛子误差界 n={record.n}")


def corollary2_check(seed: Seed, record: RefinementRecord) -> Verdict:
    """
    区间检查 arctan u_n ≤ arctan u1 / D_{n-1}，要求 n ≥ 2
    """
    if record.n < 2:
        raise DomainError(f"该检查要求 n ≥ 2，实际为 {record.n}")

    def decide(eps: Fraction) -> Optional[Verdict]:
        left = arctan_enclosure(record.u_n, eps)
        right = arctan_enclosure(seed.u1, eps) / record.D_prev
        if left.hi <= right.lo:
            return Verdict.TRUE
        if left.lo > right.hi:
            return Verdict.FALSE
        return None

    start = decimal_digits(record.D_prev ** 2) + GUARD_DIGITS
    return _escalate(decide, start, f"arctan u_n 上界 n={record.n}")
