"""
数据验证Schema定义
种子、细化记录、逼近记录与命令行输出记录
"""
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.exact import Interval
from utils.formatting import parse_rational


class StepStrategy(str, Enum):
    """连分数单步的求商策略"""
    LINEAR = "linear"
    DOUBLING = "doubling"


class Verdict(str, Enum):
    """三值判定：不确定不等于否定"""
    TRUE = "true"
    FALSE = "false"
    INCONCLUSIVE = "inconclusive"


class OutputFormat(str, Enum):
    TABLE = "table"
    JSON = "json"
    CSV = "csv"


# 基础Schema
class BaseSchema(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class Seed(BaseSchema):
    """种子恒等式 a0·arctan u0 + a1·arctan u1 = π/4"""
    a0: int
    a1: int
    u0: Fraction
    u1: Fraction

    @field_validator("u0", "u1", mode="before")
    @classmethod
    def _coerce_rational(cls, value):
        return parse_rational(value)

    @model_validator(mode="after")
    def _check_order(self) -> "Seed":
        if not self.u0 > self.u1 > 0:
            raise ValueError(f"种子要求 u0 > u1 > 0，实际 u0={self.u0}, u1={self.u1}")
        return self

    def terms(self) -> Tuple[Tuple[int, Fraction], ...]:
        return ((self.a0, self.u0), (self.a1, self.u1))

    def label(self) -> str:
        return f"({self.a0}, {self.a1}, {self.u0}, {self.u1})"


class StepResult(BaseSchema):
    """单步结果：arctan u = q·arctan v + arctan w"""
    q: int = Field(..., ge=1, description="部分商")
    w: Fraction = Field(..., description="余项参数，0 ≤ w < v")


class RefinementRecord(BaseSchema):
    """
    细化账本的一行

    自身就是一条完整的两项恒等式 a_n·arctan u_n + a_prev·arctan u_next = π/4，
    并携带推进到下一行所需的全部状态。
    """
    n: int = Field(..., ge=0)
    q: int = Field(..., ge=1, description="部分商 q_n")
    u_n: Fraction
    u_next: Fraction = Field(..., description="u_{n+1}")
    u_after: Fraction = Field(..., description="u_{n+2}，本步的余项")
    a_n: int = Field(..., description="a_{-n}")
    a_prev: int = Field(..., description="a_{-n+1}")
    N: int = Field(..., ge=1, description="收敛子分子 N_n")
    D: int = Field(..., ge=1, description="收敛子分母 D_n")
    N_prev: int = Field(..., ge=0, description="N_{n-1}")
    D_prev: int = Field(..., ge=0, description="D_{n-1}")
    fib: int = Field(..., ge=1, description="F_{n+1}，D_n 的斐波那契下界")

    @property
    def a_next(self) -> int:
        """a_{-n-1} = q_n·a_{-n} + a_{-n+1}"""
        return self.q * self.a_n + self.a_prev

    @property
    def convergent(self) -> Fraction:
        return Fraction(self.N, self.D)

    def identity_terms(self) -> Tuple[Tuple[int, Fraction], ...]:
        return ((self.a_n, self.u_n), (self.a_prev, self.u_next))


class ApproxRecord(BaseSchema):
    """π 的有理逼近 r_n 及其误差包围"""
    n: int = Field(..., ge=0)
    r: Fraction = Field(..., description="r_n = 4(a_{-n}u_n + a_{-n+1}u_{n+1})")
    err: Interval = Field(..., description="r_n − π 的包围")
    err_scaled: Interval = Field(..., description="|r_n − π|·D_{n-1}² 的包围")
    coeff_ratio: Interval = Field(..., description="a_{-n-1}/D_n 的包围")


class DigitsReport(BaseSchema):
    """π 位数计算报告"""
    n: int
    digits: int
    text: str
    identity: str
    term_counts: List[int]
    guard_digits: int
    workers: int
    elapsed_ms: float


class OutputRecord(BaseModel):
    """命令行输出的扁平记录，字段顺序即 JSON/CSV 的列顺序"""
    n: int
    q: int
    u_n: str
    u_next: str
    a_n: int
    a_prev: int
    a_next: int
    N: int
    D: int
    fib: int
    r: str
    r_decimal: str
    err_lo: str
    err_hi: str


class RunConfig(BaseModel):
    """一次运行的完整配置（命令行 > 配置文件 > 环境变量 > 默认值）"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    a0: int
    a1: int
    u0: Fraction
    u1: Fraction
    depth: int = Field(..., ge=1)
    eps: Fraction
    strategy: StepStrategy = StepStrategy.DOUBLING
    output_format: OutputFormat = OutputFormat.TABLE
    output_path: Optional[str] = None

    @field_validator("u0", "u1", mode="before")
    @classmethod
    def _coerce_rational(cls, value):
        return parse_rational(value)

    @field_validator("eps", mode="before")
    @classmethod
    def _coerce_eps(cls, value):
        if isinstance(value, str) and "/" not in value:
            value = Fraction(value)
        eps = parse_rational(value) if not isinstance(value, Fraction) else value
        if eps <= 0:
            raise ValueError(f"eps 必须为正: {value}")
        return eps
