"""
精确数值类型
高斯有理数与有理端点区间，均为不可变值对象
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from services.exceptions import DivisionByZeroError

RationalLike = Union[int, Fraction]


@dataclass(frozen=True)
class GaussianRational:
    """高斯有理数 re + i·im，乘以 (1 + i·u) 即把 arctan u 加到辐角上"""

    re: Fraction
    im: Fraction

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def one(cls) -> "GaussianRational":
        return cls(Fraction(1), Fraction(0))

    @classmethod
    def from_argument(cls, u: RationalLike) -> "GaussianRational":
        """构造 1 + i·u，其辐角为 arctan u"""
        return cls(Fraction(1), Fraction(u))

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        """模的平方 re² + im²"""
        return self.re * self.re + self.im * self.im

    def scale(self, factor: RationalLike) -> "GaussianRational":
        return GaussianRational(self.re * factor, self.im * factor)

    def tangent(self) -> Fraction:
        """辐角的正切 im/re，调用方需保证 re ≠ 0"""
        return self.im / self.re

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        if not isinstance(other, GaussianRational):
            return NotImplemented
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def __str__(self) -> str:
        sign = "-" if self.im < 0 else "+"
        return f"({self.re} {sign} {abs(self.im)}i)"


@dataclass(frozen=True)
class Interval:
    """
    有理端点闭区间 [lo, hi]

    端点是精确有理数，运算不产生舍入误差；区间变宽只来自级数截断余项。
    """

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        if lo > hi:
            raise ValueError(f"区间端点颠倒: [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, value: RationalLike) -> "Interval":
        return cls(Fraction(value), Fraction(value))

    @classmethod
    def hull(cls, a: RationalLike, b: RationalLike) -> "Interval":
        return cls(min(a, b), max(a, b))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, value: RationalLike) -> bool:
        return self.lo <= value <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def is_subset_of(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def scale(self, factor: RationalLike) -> "Interval":
        return Interval.hull(self.lo * factor, self.hi * factor)

    def abs(self) -> "Interval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return Interval(-self.hi, -self.lo)
        return Interval(Fraction(0), max(-self.lo, self.hi))

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __add__(self, other: Union["Interval", RationalLike]) -> "Interval":
        other = _as_interval(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __sub__(self, other: Union["Interval", RationalLike]) -> "Interval":
        other = _as_interval(other)
        return Interval(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other: RationalLike) -> "Interval":
        return _as_interval(other) - self

    def __mul__(self, other: Union["Interval", RationalLike]) -> "Interval":
        if not isinstance(other, Interval):
            return self.scale(other)
        products = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Interval(min(products), max(products))

    __rmul__ = __mul__

    def __truediv__(self, other: Union["Interval", RationalLike]) -> "Interval":
        if not isinstance(other, Interval):
            if other == 0:
                raise DivisionByZeroError(f"区间 {self} 除以零")
            return self.scale(Fraction(1) / Fraction(other))
        if other.contains_zero():
            raise DivisionByZeroError(f"除数区间 {other} 含零")
        return self * Interval.hull(1 / other.lo, 1 / other.hi)

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def _as_interval(value: Union[Interval, RationalLike]) -> Interval:
    if isinstance(value, Interval):
        return value
    return Interval.point(value)
