"""
有理数与十进制文本格式工具
"""
import re
import sys
from fractions import Fraction
from typing import Union

_RATIONAL_PATTERN = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """
    解析 "p/q"、"p" 形式的有理数文本

    Args:
        text: 有理数文本，也接受 int 与 Fraction

    Returns:
        Fraction: 规范形式的有理数

    Raises:
        ValueError: 文本格式错误或分母为零
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)

    match = _RATIONAL_PATTERN.match(text)
    if not match:
        raise ValueError(f"无法解析有理数: {text!r}")

    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        raise ValueError(f"分母为零: {text!r}")
    return Fraction(numerator, denominator)


def format_rational(value: Fraction) -> str:
    """统一输出 "num/den"，整数也带 /1"""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def truncate_decimal(value: Fraction, places: int) -> str:
    """
    截断（不舍入）为 places 位小数的十进制文本

    截断方向为向零，符号单独输出。
    """
    value = Fraction(value)
    sign = "-" if value < 0 else ""
    magnitude = abs(value)
    scaled = magnitude.numerator * 10 ** places // magnitude.denominator
    integer_part, fraction_part = divmod(scaled, 10 ** places)
    if places == 0:
        return f"{sign}{integer_part}"
    return f"{sign}{integer_part}.{fraction_part:0{places}d}"


# 日志与错误信息里的有理数超过该位长时只给出位长
BRIEF_RATIONAL_BITS = 256


def allow_long_integers() -> None:
    """
    取消整数与十进制文本互转的位数上限

    细化十几步后 u_n 的分子分母就超过 4300 位，输出时必须完整写出。
    """
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)


def brief_rational(value: Fraction) -> str:
    """用于日志与错误信息的简短表示，不把大整数转成十进制"""
    value = Fraction(value)
    num_bits = value.numerator.bit_length()
    den_bits = value.denominator.bit_length()
    if max(num_bits, den_bits) <= BRIEF_RATIONAL_BITS:
        return f"{value.numerator}/{value.denominator}"
    return f"<{num_bits} 位>/<{den_bits} 位>"
