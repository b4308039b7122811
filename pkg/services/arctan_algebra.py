"""
反正切代数
System (S) 的单步：arctan u = q·arctan v + arctan w，0 < w < v，全程只用有理运算
"""
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from models.schemas import StepResult, StepStrategy
from services.exact_core import RationalInput, gaussian_integer_product, tan_combination, to_rational
from services.exceptions import (
    AngleRangeError,
    ArgumentOrderError,
    DegenerateRatioError,
    DomainError,
)
from services.logger import get_logger
from utils.formatting import brief_rational

logger = get_logger("arctan_algebra")


def arctan_sub(x: RationalInput, y: RationalInput) -> Fraction:
    """
    arctan x − arctan y = arctan((x − y)/(1 + xy))

    要求 x ≥ y ≥ 0，差角落在 [0, π/2)，不存在分支歧义。
    """
    x, y = to_rational(x), to_rational(y)
    if not x >= y >= 0:
        raise ArgumentOrderError(f"arctan_sub 要求 x ≥ y ≥ 0，实际 x={brief_rational(x)}, y={brief_rational(y)}")
    return (x - y) / (1 + x * y)


def arctan_add(x: RationalInput, y: RationalInput) -> Fraction:
    """
    arctan x + arctan y = arctan((x + y)/(1 − xy))

    要求 x, y ≥ 0 且 xy < 1（和角小于 π/2）。
    """
    x, y = to_rational(x), to_rational(y)
    if x < 0 or y < 0:
        raise DomainError(f"arctan_add 要求非负参数，实际 x={brief_rational(x)}, y={brief_rational(y)}")
    if x * y >= 1:
        raise AngleRangeError(f"arctan {brief_rational(x)} + arctan {brief_rational(y)} ≥ π/2")
    return (x + y) / (1 - x * y)


def _step_linear(u: Fraction, v: Fraction) -> Tuple[int, Fraction]:
    # arctan 严格递增：比较参数即比较角度
    quotient, remainder = 0, u
    while remainder >= v:
        remainder = arctan_sub(remainder, v)
        quotient += 1
    return quotient, remainder


def _probe_sign(u: Fraction, v: Fraction, q: int) -> int:
    """(1 + iu)(1 − iv)^q 虚部的符号，即 arctan u − q·arctan v 的符号"""
    _, im = gaussian_integer_product(((1, u), (-q, v)))
    return (im > 0) - (im < 0)


def _step_doubling(u: Fraction, v: Fraction, probe_log: Optional[List[int]]) -> Tuple[int, Fraction]:
    """
    指数搜索 + 二分搜索求 q

    u < 1 时探测角 arctan u − q·arctan v 始终落在 (−π, π/4]，虚部符号即角的符号。
    q = 1 处的角为正（u > v），首个越界探测点不超过 2q。
    """

    def probe(q: int) -> int:
        if probe_log is not None:
            probe_log.append(q)
        sign = _probe_sign(u, v, q)
        if sign == 0:
            raise DegenerateRatioError(f"arctan {brief_rational(u)} = {q}·arctan {brief_rational(v)}，比值为有理数")
        return sign

    low, high = 1, 2
    while probe(high) > 0:
        low, high = high, high * 2

    # 不变式：low 处角为正，high 处角为负
    while high - low > 1:
        middle = (low + high) // 2
        if probe(middle) > 0:
            low = middle
        else:
            high = middle

    remainder = tan_combination(((1, u), (-low, v)))
    return low, remainder


def step(
    u: RationalInput,
    v: RationalInput,
    strategy: Union[StepStrategy, str] = StepStrategy.DOUBLING,
    probe_log: Optional[List[int]] = None,
) -> StepResult:
    """
    连分数单步：返回 (q, w) 使 arctan u = q·arctan v + arctan w，0 < w < v

    Args:
        u: 较大参数
        v: 较小参数，0 < v < u
        strategy: linear 逐次相减；doubling 倍增搜索（默认）。u ≥ 1 时 doubling 退回 linear
        probe_log: 若提供，doubling 策略把每个探测的 q 追加进去

    Raises:
        ArgumentOrderError: 不满足 u > v > 0
        DegenerateRatioError: 余项为零，arctan u / arctan v 为有理数
    """
    u, v = to_rational(u), to_rational(v)
    if not u > v > 0:
        raise ArgumentOrderError(f"step 要求 u > v > 0，实际 u={brief_rational(u)}, v={brief_rational(v)}")

    strategy = StepStrategy(strategy)
    if strategy is StepStrategy.DOUBLING and u >= 1:
        logger.debug("u=%s ≥ 1，倍增策略的符号判定不再可靠，退回线性策略", brief_rational(u))
        strategy = StepStrategy.LINEAR

    if strategy is StepStrategy.LINEAR:
        quotient, remainder = _step_linear(u, v)
    else:
        quotient, remainder = _step_doubling(u, v, probe_log)

    if remainder == 0:
        raise DegenerateRatioError(f"arctan {brief_rational(u)} = {quotient}·arctan {brief_rational(v)}，比值为有理数")

    logger.debug(
        "step [%s] u 分母 %d 位 → q=%d", strategy.value, u.denominator.bit_length(), quotient
    )
    return StepResult(q=quotient, w=remainder)
