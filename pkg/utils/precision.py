"""
区间精度提升策略
"""
import math
from fractions import Fraction
from typing import Iterator, Optional, Tuple

from config import settings


def digits_to_bits(digits: int) -> int:
    """十进制位数换算为二进制位数（向上取整）"""
    return max(1, math.ceil(digits * math.log2(10)))


def escalating_tolerances(
    start_bits: Optional[int] = None,
    max_bits: Optional[int] = None,
) -> Iterator[Tuple[int, Fraction]]:
    """
    生成逐级加倍的容差 (bits, 2^-bits)

    起点默认取 settings.precision.start_precision_bits，上限取
    settings.precision.max_precision_bits；超过上限即停止，调用方据此判定为不确定。
    """
    bits = start_bits if start_bits is not None else settings.precision.start_precision_bits
    cap = max_bits if max_bits is not None else settings.precision.max_precision_bits
    while bits <= cap:
        yield bits, Fraction(1, 1 << bits)
        bits *= 2


def decimal_digits(value: int) -> int:
    """整数十进制位数的上界，由位长换算，不做十进制转换"""
    return max(1, math.ceil(abs(value).bit_length() * math.log10(2)) + 1)


def escalating_decimal_tolerances(
    start_digits: int,
    max_bits: Optional[int] = None,
) -> Iterator[Tuple[int, Fraction]]:
    """
    生成逐级加倍的十进制容差 (digits, 10^-digits)

    换算成二进制后超过 max_bits（默认 settings.precision.max_precision_bits）即停止。
    """
    cap = max_bits if max_bits is not None else settings.precision.max_precision_bits
    digits = max(1, start_digits)
    while digits_to_bits(digits) <= cap:
        yield digits, Fraction(1, 10 ** digits)
        digits *= 2
