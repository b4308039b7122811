"""
异常定义
所有精确算术、细化流程与验证过程抛出的领域异常
"""
from typing import Optional


class MachinRefineError(Exception):
    """领域异常基类"""


class DivisionByZeroError(MachinRefineError):
    """除数为零（有理数除法、零的负幂）"""


class DomainError(MachinRefineError):
    """参数超出定义域，例如 arctan 区间求值要求 0 ≤ x < 1"""


class TangentPoleError(MachinRefineError):
    """组合角 ≡ π/2 (mod π)，正切没有定义"""


class ArgumentOrderError(MachinRefineError):
    """参数顺序违反前置条件（例如 arctan_sub 要求 x ≥ y ≥ 0）"""


class AngleRangeError(MachinRefineError):
    """两角之和达到或超过 π/2"""


class DegenerateRatioError(MachinRefineError):
    """连分数步骤余项为零：arctan u / arctan v 为有理数，种子无效"""


class SeedInvalidError(MachinRefineError):
    """种子恒等式未通过验证"""


class PrecisionExhaustedError(MachinRefineError):
    """精度预算耗尽，区间仍无法给出结论"""


class RefinementIntegrityError(MachinRefineError):
    """内部一致性检查失败，说明实现存在缺陷，必须立即中止"""


class LedgerError(MachinRefineError):
    """细化账本读取或续算失败"""


class IdentityParseError(MachinRefineError):
    """恒等式文本解析失败"""

    def __init__(self, message: str, position: int, text: Optional[str] = None):
        self.position = position
        self.text = text
        super().__init__(f"{message} (位置 {position})")

    def pointer(self) -> str:
        """返回带 ^ 指示符的两行诊断信息"""
        if self.text is None:
            return str(self)
        return f"{self.text}\n{' ' * self.position}^"
