"""
Machin 型恒等式模型
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Tuple

from pydantic import Field, field_validator

from models.exact import Interval
from models.schemas import BaseSchema, Verdict
from utils.formatting import parse_rational


class IdentityTerm(BaseSchema):
    """单项 coef·arctan(arg)"""
    coef: int
    arg: Fraction

    @field_validator("coef")
    @classmethod
    def _nonzero(cls, value: int) -> int:
        if value == 0:
            raise ValueError("系数不能为零")
        return value

    @field_validator("arg", mode="before")
    @classmethod
    def _positive(cls, value) -> Fraction:
        value = parse_rational(value)
        if value <= 0:
            raise ValueError(f"arctan 参数必须为正: {value}")
        return value


class MachinIdentity(BaseSchema):
    """Σ coef·arctan(arg) = π/4，目标固定为 π/4（其正切为 1）"""
    terms: Tuple[IdentityTerm, ...] = Field(..., min_length=1)
    name: Optional[str] = None

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, Fraction]], name: Optional[str] = None) -> "MachinIdentity":
        """由 (coef, arg) 序列构造，零系数项直接略去"""
        terms = tuple(IdentityTerm(coef=coef, arg=arg) for coef, arg in pairs if coef != 0)
        return cls(terms=terms, name=name)

    def pairs(self) -> Tuple[Tuple[int, Fraction], ...]:
        return tuple((term.coef, term.arg) for term in self.terms)


@dataclass(frozen=True)
class VerificationCertificate:
    """
    验证证书

    re、im 是 Π (den + i·num)^coef 的精确整数值，可能非常大，因此不走 pydantic 校验。
    """
    re: int
    im: int
    angle_enclosure: Optional[Interval] = None
    pi_enclosure: Optional[Interval] = None
    precision_bits: Optional[int] = None


@dataclass(frozen=True)
class VerificationResult:
    """验证结果"""
    identity: MachinIdentity
    verdict: Verdict
    certificate: Optional[VerificationCertificate] = None
    diagnostic: str = ""

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.TRUE

    def __bool__(self) -> bool:
        return self.holds
