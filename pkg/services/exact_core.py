"""
精确算术核心
有理数与高斯有理数运算，以及 arctan、π 的严格区间包围
"""
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Sequence, Tuple, Union

from models.exact import GaussianRational, Interval
from services.exceptions import (
    DivisionByZeroError,
    DomainError,
    RefinementIntegrityError,
    TangentPoleError,
)
from services.logger import get_logger
from utils.formatting import brief_rational, parse_rational

logger = get_logger("exact_core")

RationalInput = Union[int, str, Fraction]
Term = Tuple[int, Fraction]

# 用于 π 包围的基础恒等式，首次使用前各自独立验证一次
BASE_IDENTITIES: Dict[str, Tuple[Term, ...]] = {
    "euler": ((1, Fraction(1, 2)), (1, Fraction(1, 3))),
    "machin": ((4, Fraction(1, 5)), (-1, Fraction(1, 239))),
}
DEFAULT_PI_BASE = "euler"


class ArithOp(str, Enum):
    """有理数四则运算"""
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"


def to_rational(value: RationalInput) -> Fraction:
    """把 int、"p/q" 文本或 Fraction 统一为 Fraction"""
    if isinstance(value, str):
        return parse_rational(value)
    return Fraction(value)


def rational_arith(a: RationalInput, b: RationalInput, op: Union[ArithOp, str]) -> Fraction:
    """
    精确有理数运算，结果总是规范形式（分母为正且既约）

    Raises:
        DivisionByZeroError: op 为 div 且 b = 0
    """
    a, b, op = to_rational(a), to_rational(b), ArithOp(op)
    if op is ArithOp.ADD:
        return a + b
    if op is ArithOp.SUB:
        return a - b
    if op is ArithOp.MUL:
        return a * b
    if b == 0:
        raise DivisionByZeroError(f"除数为零: {brief_rational(a)} / 0")
    return a / b


def gaussian_mul(z: GaussianRational, w: GaussianRational) -> GaussianRational:
    """高斯有理数乘法：辐角相加"""
    return z * w


def gaussian_pow(z: GaussianRational, k: int, exact_inverse: bool = True) -> GaussianRational:
    """
    平方-乘法求 z^k

    k < 0 时先对共轭 z̄ 求 |k| 次幂，z̄^|k| 是 z^k 的正实数倍（倍数为 |z|^(2|k|)）。
    exact_inverse=True（默认）再除以 |z|^(2|k|)，返回精确的 z^k；
    exact_inverse=False 直接返回共轭幂 z̄^|k|，省去一次除法，只依赖 im/re 的调用方使用这一形式。

    Raises:
        DivisionByZeroError: z = 0
    """
    if z.is_zero():
        raise DivisionByZeroError("零的幂没有定义")

    base = z if k >= 0 else z.conjugate()
    exponent = abs(k)
    result = GaussianRational.one()
    while exponent:
        if exponent & 1:
            result = result * base
        exponent >>= 1
        if exponent:
            base = base * base

    if k < 0 and exact_inverse:
        result = result.scale(Fraction(1) / z.norm() ** abs(k))
    return result


def _gaussian_int_pow(re: int, im: int, exponent: int) -> Tuple[int, int]:
    """整数高斯数的幂"""
    result_re, result_im = 1, 0
    while exponent:
        if exponent & 1:
            result_re, result_im = result_re * re - result_im * im, result_re * im + result_im * re
        exponent >>= 1
        if exponent:
            re, im = re * re - im * im, 2 * re * im
    return result_re, result_im


def gaussian_integer_product(terms: Iterable[Tuple[int, RationalInput]]) -> Tuple[int, int]:
    """
    计算 Π (den + i·num)^coef 的整数高斯数表示

    每个因子 (den + i·num) 是 (1 + i·arg) 的正实数倍，负系数取共轭幂；
    因此结果的辐角就是 Σ coef·arctan(arg)，而所有中间量都是整数。

    Returns:
        (re, im): 与 Π (1 + i·arg)^coef 相差一个正实数因子
    """
    total_re, total_im = 1, 0
    for coef, arg in terms:
        arg = to_rational(arg)
        if arg <= 0:
            raise DomainError(f"arctan 参数必须为正: {brief_rational(arg)}")
        if coef == 0:
            continue
        factor_im = arg.numerator if coef > 0 else -arg.numerator
        power_re, power_im = _gaussian_int_pow(arg.denominator, factor_im, abs(coef))
        total_re, total_im = (
            total_re * power_re - total_im * power_im,
            total_re * power_im + total_im * power_re,
        )
    return total_re, total_im


def tan_combination(terms: Iterable[Tuple[int, RationalInput]]) -> Fraction:
    """
    精确计算 tan(Σ coef·arctan arg)

    正切以 π 为周期，因此不需要角度范围前提。

    Raises:
        TangentPoleError: 组合角 ≡ π/2 (mod π)
    """
    terms = tuple(terms)
    re, im = gaussian_integer_product(terms)
    if re == 0:
        raise TangentPoleError(f"组合角位于正切极点: {[(coef, brief_rational(arg)) for coef, arg in terms]}")
    return Fraction(im, re)


def _check_arctan_argument(x: Fraction, eps: Fraction) -> None:
    if x < 0 or x >= 1:
        raise DomainError(f"arctan 区间求值要求 0 ≤ x < 1，实际为 {brief_rational(x)}")
    if eps <= 0:
        raise DomainError(f"容差必须为正: {eps}")


def arctan_term_count(x: RationalInput, eps: RationalInput) -> int:
    """
    交错级数需要求和的项数 K：第一个被舍去的项 x^(2K+1)/(2K+1) ≤ eps

    0 < x < 1 时各项严格递减，因此这个界同时是包围区间的宽度。
    """
    x, eps = to_rational(x), to_rational(eps)
    _check_arctan_argument(x, eps)
    if x == 0:
        return 0

    x_squared = x * x
    power = x
    count = 0
    while power / (2 * count + 1) > eps:
        count += 1
        power *= x_squared
    return count


def arctan_interval(x: RationalInput, eps: RationalInput) -> Interval:
    """
    arctan x 的严格包围区间，宽度 ≤ eps

    端点是相邻的两个部分和 S_{K-1}、S_K；交错级数余项不超过下一项，
    所以 arctan x 必然落在两者之间。

    Raises:
        DomainError: x < 0、x ≥ 1 或 eps ≤ 0
    """
    x, eps = to_rational(x), to_rational(eps)
    count = arctan_term_count(x, eps)
    if x == 0:
        return Interval.point(0)

    x_squared = x * x
    power = x
    partial = Fraction(0)
    for k in range(count):
        term = power / (2 * k + 1)
        partial = partial + term if k % 2 == 0 else partial - term
        power *= x_squared

    # 第 count 项即第一个被舍去的项
    omitted = power / (2 * count + 1)
    next_partial = partial + omitted if count % 2 == 0 else partial - omitted
    return Interval.hull(partial, next_partial)


def weighted_arctan_sum(terms: Sequence[Term], eps: RationalInput) -> Interval:
    """
    Σ coef·arctan(arg) 的包围区间，总宽度 ≤ eps

    所有参数都必须落在 [0, 1)。
    """
    eps = to_rational(eps)
    total_weight = sum(abs(coef) for coef, _ in terms)
    if total_weight == 0:
        return Interval.point(0)

    per_term = eps / total_weight
    enclosure = Interval.point(0)
    for coef, arg in terms:
        enclosure = enclosure + arctan_interval(arg, per_term).scale(coef)
    return enclosure


@lru_cache(maxsize=None)
def certified_base_identity(name: str) -> Tuple[Term, ...]:
    """
    取出并验证一条用于 π 包围的基础恒等式

    正切阶段确认 Σ ≡ π/4 (mod π)；粗区间落在 (0, 2) 内即排除 π/4 ± π（只用到 3 < π < 4）。
    """
    if name not in BASE_IDENTITIES:
        raise DomainError(f"未知的基础恒等式: {name}")

    terms = BASE_IDENTITIES[name]
    if tan_combination(terms) != 1:
        raise RefinementIntegrityError(f"基础恒等式 {name} 的正切不等于 1")

    coarse = weighted_arctan_sum(terms, Fraction(1, 64))
    if not (coarse.lo > 0 and coarse.hi < 2):
        raise RefinementIntegrityError(f"基础恒等式 {name} 的角度区间 {coarse} 不在 (0, 2) 内")

    logger.debug(f"基础恒等式 {name} 已验证: {terms}")
    return terms


def pi_interval(eps: RationalInput, base: str = DEFAULT_PI_BASE) -> Interval:
    """
    π 的包围区间，宽度 ≤ eps

    π = 4·Σ coef·arctan(arg)，取一条已验证且所有参数 < 1 的基础恒等式（默认 Euler）。
    """
    eps = to_rational(eps)
    if eps <= 0:
        raise DomainError(f"容差必须为正: {eps}")
    terms = certified_base_identity(base)
    return weighted_arctan_sum(terms, eps / 4).scale(4)


def arctan_enclosure(x: RationalInput, eps: RationalInput, base: str = DEFAULT_PI_BASE) -> Interval:
    """
    任意正参数 arctan x 的包围区间，宽度 ≤ eps

    x < 1 直接用级数；x = 1 取 π/4；x > 1 用 arctan x = π/2 − arctan(1/x)。
    π 的包围来自已验证的基础恒等式，其参数全部小于 1。
    """
    x, eps = to_rational(x), to_rational(eps)
    if x < 0:
        raise DomainError(f"arctan 参数必须非负: {brief_rational(x)}")
    if eps <= 0:
        raise DomainError(f"容差必须为正: {eps}")
    if x < 1:
        return arctan_interval(x, eps)

    pi = pi_interval(eps, base)
    if x == 1:
        return pi / 4
    return pi / 2 - arctan_interval(1 / x, eps / 2)
