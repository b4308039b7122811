"""
恒等式服务
Machin 型恒等式的精确验证、细化恒等式的构造与证书、文本格式的解析与输出
"""
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from pydantic import ValidationError

from config import settings
from models.exact import Interval
from models.identity import MachinIdentity, VerificationCertificate, VerificationResult
from models.schemas import RefinementRecord, Seed, Verdict
from services.exact_core import (
    arctan_enclosure,
    gaussian_integer_product,
    pi_interval,
)
from services.exceptions import (
    DomainError,
    IdentityParseError,
    PrecisionExhaustedError,
    RefinementIntegrityError,
    SeedInvalidError,
)
from services.logger import get_logger, log_performance, performance_logger
from utils.precision import escalating_tolerances

logger = get_logger("identity")

Term = Tuple[int, Fraction]

# 验证语料：各式均等于 π/4
CORPUS: Dict[str, MachinIdentity] = {
    name: MachinIdentity.from_pairs(((coef, Fraction(arg)) for coef, arg in pairs), name=name)
    for name, pairs in {
        "machin": ((4, "1/5"), (-1, "1/239")),
        "euler": ((1, "1/2"), (1, "1/3")),
        "gauss": ((12, "1/18"), (8, "1/57"), (-5, "1/239")),
        "simson": ((8, "1/10"), (-1, "1/239"), (-4, "1/515")),
        "kanada_1": ((44, "1/57"), (7, "1/239"), (-12, "1/682"), (24, "1/12943")),
        "kanada_2": ((12, "1/49"), (32, "1/57"), (-5, "1/239"), (12, "1/110443")),
        "hermann": ((2, "1/2"), (-1, "1/7")),
        "hutton": ((2, "1/3"), (1, "1/7")),
    }.items()
}

# 角度关系 Σ = 0 的粗区间判定界，2π > 6
_ZERO_ANGLE_BOUND = Fraction(6)


def _angle_enclosure(terms: Sequence[Term], eps: Fraction) -> Interval:
    """Σ coef·arctan(arg) 的包围区间，总宽度 ≤ eps，参数可以 ≥ 1"""
    total_weight = sum(abs(coef) for coef, _ in terms)
    enclosure = Interval.point(0)
    if total_weight == 0:
        return enclosure
    per_term = eps / total_weight
    for coef, arg in terms:
        enclosure = enclosure + arctan_enclosure(arg, per_term).scale(coef)
    return enclosure


def estimate_verification_bits(identity: MachinIdentity) -> int:
    """直接展开高斯乘积的代价估计：Σ |coef|·(分子位数 + 分母位数)"""
    return sum(
        abs(term.coef) * (term.arg.numerator.bit_length() + term.arg.denominator.bit_length())
        for term in identity.terms
    )


def verify(identity: MachinIdentity, max_bits: Optional[int] = None) -> VerificationResult:
    """
    验证 Σ coef·arctan(arg) = π/4 是否精确成立

    第一阶段：整数高斯乘积 Π (den + i·num)^coef 的虚部等于实部，即正切为 1，和 ≡ π/4 (mod π)。
    第二阶段：逐级加密区间包围，确定分支落在 π/4 而不是 π/4 ± kπ。

    Returns:
        VerificationResult: verdict 为 TRUE / FALSE / INCONCLUSIVE，附带证书
    """
    terms = identity.pairs()
    with performance_logger(logger, "verify_identity"):
        re, im = gaussian_integer_product(terms)

        if re == 0:
            logger.debug(f"恒等式 {identity.name or terms} 的组合角位于正切极点")
            return VerificationResult(
                identity=identity,
                verdict=Verdict.FALSE,
                certificate=VerificationCertificate(re=re, im=im),
                diagnostic="组合角 ≡ π/2 (mod π)，正切没有定义",
            )
        if im != re:
            return VerificationResult(
                identity=identity,
                verdict=Verdict.FALSE,
                certificate=VerificationCertificate(re=re, im=im),
                diagnostic=f"正切不等于 1（tan = {Fraction(im, re)}）" if _is_small(re, im) else "正切不等于 1",
            )

        # 第二阶段：和只可能是 π/4 + kπ，区间落在 (−π/4, 3π/4) 内即 k = 0
        last_angle: Optional[Interval] = None
        last_pi: Optional[Interval] = None
        last_bits: Optional[int] = None
        for bits, eps in escalating_tolerances(max_bits=max_bits):
            angle = _angle_enclosure(terms, eps)
            pi = pi_interval(eps)
            last_angle, last_pi, last_bits = angle, pi, bits

            if angle.lo > -pi.lo / 4 and angle.hi < 3 * pi.lo / 4:
                logger.debug(f"恒等式 {identity.name or terms} 在 {bits} 位精度下验证通过")
                return VerificationResult(
                    identity=identity,
                    verdict=Verdict.TRUE,
                    certificate=VerificationCertificate(re, im, angle, pi, bits),
                )
            if angle.lo >= 3 * pi.hi / 4 or angle.hi <= -pi.hi / 4:
                return VerificationResult(
                    identity=identity,
                    verdict=Verdict.FALSE,
                    certificate=VerificationCertificate(re, im, angle, pi, bits),
                    diagnostic=f"正切为 1，但角度区间 {angle} 落在 π/4 之外的分支",
                )

    logger.warning(f"恒等式 {identity.name or terms} 在精度上限内无法确定分支")
    return VerificationResult(
        identity=identity,
        verdict=Verdict.INCONCLUSIVE,
        certificate=VerificationCertificate(re, im, last_angle, last_pi, last_bits),
        diagnostic="精度上限内区间无法确定分支",
    )


def _is_small(re: int, im: int) -> bool:
    return max(abs(re), abs(im)).bit_length() <= 256


def angle_relation_verdict(terms: Iterable[Tuple[int, object]], max_bits: Optional[int] = None) -> Verdict:
    """
    判定角度关系 Σ coef·arctan(arg) = 0 是否精确成立

    高斯乘积虚部为零且实部为正，即和 ≡ 0 (mod 2π)；粗区间落在 (−6, 6) 内即为 0。
    """
    terms = tuple((coef, Fraction(arg)) for coef, arg in terms if coef != 0)
    re, im = gaussian_integer_product(terms)
    if im != 0 or re <= 0:
        return Verdict.FALSE

    for _, eps in escalating_tolerances(max_bits=max_bits):
        angle = _angle_enclosure(terms, eps)
        if -_ZERO_ANGLE_BOUND < angle.lo and angle.hi < _ZERO_ANGLE_BOUND:
            return Verdict.TRUE
        if angle.lo > _ZERO_ANGLE_BOUND or angle.hi < -_ZERO_ANGLE_BOUND:
            return Verdict.FALSE
    return Verdict.INCONCLUSIVE


def verify_seed_identity(seed: Seed) -> VerificationResult:
    """种子恒等式的验证结果，按 (种子, 当前精度上限) 缓存"""
    return _verify_seed_identity(seed, settings.precision.max_precision_bits)


@lru_cache(maxsize=128)
def _verify_seed_identity(seed: Seed, max_bits: int) -> VerificationResult:
    try:
        identity = MachinIdentity.from_pairs(seed.terms(), name=f"seed {seed.label()}")
    except ValidationError as exc:
        raise SeedInvalidError(f"种子 {seed.label()} 不构成恒等式: {exc}") from exc
    return verify(identity, max_bits=max_bits)


def seed_from_identity(identity: MachinIdentity) -> Seed:
    """
    由两项恒等式构造种子，参数较大的一项作为 u0

    Raises:
        SeedInvalidError: 不是两项或两个参数相等
    """
    if len(identity.terms) != 2:
        raise SeedInvalidError(f"种子必须恰好两项，实际 {len(identity.terms)} 项")
    first, second = identity.terms
    if first.arg == second.arg:
        raise SeedInvalidError(f"两项参数相等: {first.arg}")
    if first.arg < second.arg:
        first, second = second, first
    return Seed(a0=first.coef, a1=second.coef, u0=first.arg, u1=second.arg)


def closed_form_certificate(seed: Seed, record: RefinementRecord) -> Verdict:
    """
    由种子出发证明第 n 条细化恒等式

    arctan u_n = (−1)^n (D_{n-2}·arctan u0 − N_{n-2}·arctan u1)，
    arctan u_{n+1} = (−1)^{n+1} (D_{n-1}·arctan u0 − N_{n-1}·arctan u1)。
    两式各自精确成立，且代入后 arctan u0、arctan u1 的整数系数恰为 a0、a1，
    则细化恒等式与种子恒等式等价。
    """
    sign = -1 if record.n % 2 else 1
    N_prev2 = record.N - record.q * record.N_prev
    D_prev2 = record.D - record.q * record.D_prev

    coef_u0 = sign * (record.a_n * D_prev2 - record.a_prev * record.D_prev)
    coef_u1 = sign * (record.a_prev * record.N_prev - record.a_n * N_prev2)
    if (coef_u0, coef_u1) != (seed.a0, seed.a1):
        logger.error(f"第 {record.n} 行系数展开为 ({coef_u0}, {coef_u1})，与种子 ({seed.a0}, {seed.a1}) 不符")
        return Verdict.FALSE

    relations = (
        ((D_prev2, seed.u0), (-N_prev2, seed.u1), (-sign, record.u_n)),
        ((record.D_prev, seed.u0), (-record.N_prev, seed.u1), (sign, record.u_next)),
    )
    verdicts = [angle_relation_verdict(relation) for relation in relations]
    if Verdict.FALSE in verdicts:
        return Verdict.FALSE
    if Verdict.INCONCLUSIVE in verdicts:
        return Verdict.INCONCLUSIVE
    return Verdict.TRUE


def refined_identity(record: RefinementRecord, seed: Optional[Seed] = None) -> MachinIdentity:
    """
    第 n 行的细化恒等式 a_{-n}·arctan u_n + a_{-n+1}·arctan u_{n+1} = π/4

    代价不超过 settings.precision.direct_verify_max_bits 时直接验证；
    否则需要提供种子，改由闭式证书证明（种子本身先经过验证）。

    Raises:
        RefinementIntegrityError: 验证结果为 FALSE，说明细化过程存在缺陷
        PrecisionExhaustedError: 精度上限内无法确定
        DomainError: 直接验证代价超限且没有提供种子
    """
    identity = MachinIdentity.from_pairs(record.identity_terms(), name=f"refined n={record.n}")
    cost = estimate_verification_bits(identity)

    if cost <= settings.precision.direct_verify_max_bits:
        result = verify(identity)
        if result.verdict is Verdict.INCONCLUSIVE:
            raise PrecisionExhaustedError(f"第 {record.n} 行细化恒等式在精度上限内无法确定: {result.diagnostic}")
        if result.verdict is not Verdict.TRUE:
            raise RefinementIntegrityError(
                f"第 {record.n} 行细化恒等式验证结果为 {result.verdict.value}: {result.diagnostic}"
            )
        return identity

    if seed is None:
        raise DomainError(f"第 {record.n} 行直接验证代价约 {cost} 位，超过上限，需要提供种子")

    seed_result = verify_seed_identity(seed)
    if seed_result.verdict is Verdict.INCONCLUSIVE:
        raise PrecisionExhaustedError(f"种子 {seed.label()} 在精度上限内无法确定")
    if seed_result.verdict is not Verdict.TRUE:
        raise SeedInvalidError(f"种子 {seed.label()} 验证结果为 {seed_result.verdict.value}")

    verdict = closed_form_certificate(seed, record)
    if verdict is Verdict.INCONCLUSIVE:
        raise PrecisionExhaustedError(f"第 {record.n} 行闭式证书在精度上限内无法确定")
    if verdict is not Verdict.TRUE:
        raise RefinementIntegrityError(f"第 {record.n} 行闭式证书结果为 {verdict.value}")
    logger.debug(f"第 {record.n} 行直接验证代价约 {cost} 位，已由闭式证书证明")
    return identity


def verify_step_relation(record: RefinementRecord) -> Verdict:
    """精确检查 arctan u_n = q_n·arctan u_{n+1} + arctan u_{n+2}"""
    return angle_relation_verdict(
        ((1, record.u_n), (-record.q, record.u_next), (-1, record.u_after))
    )


@log_performance("certify_chain")
def certify_chain(seed: Seed, records: Sequence[RefinementRecord]) -> Verdict:
    """
    链式证书：种子成立，且每一步关系与系数递推成立，则每一行的细化恒等式成立

    records 必须从第 0 行开始且连续。
    """
    seed_result = verify_seed_identity(seed)
    if seed_result.verdict is not Verdict.TRUE:
        return seed_result.verdict
    if not records:
        return Verdict.TRUE

    first = records[0]
    if (first.n, first.a_n, first.a_prev, first.u_n, first.u_next) != (0, seed.a0, seed.a1, seed.u0, seed.u1):
        logger.error("链首行与种子不一致")
        return Verdict.FALSE

    pending_inconclusive = False
    for index, record in enumerate(records):
        if index + 1 < len(records):
            following = records[index + 1]
            linked = (
                following.n == record.n + 1
                and following.u_n == record.u_next
                and following.u_next == record.u_after
                and following.a_n == record.a_next
                and following.a_prev == record.a_n
            )
            if not linked:
                logger.error(f"第 {record.n} 行与下一行的衔接不一致")
                return Verdict.FALSE

        verdict = verify_step_relation(record)
        if verdict is Verdict.FALSE:
            logger.error(f"第 {record.n} 行的步进关系不成立")
            return Verdict.FALSE
        pending_inconclusive = pending_inconclusive or verdict is Verdict.INCONCLUSIVE

    return Verdict.INCONCLUSIVE if pending_inconclusive else Verdict.TRUE


# ---------------------------------------------------------------------------
# 文本格式: a0*atan(p0/q0) + a1*atan(p1/q1) + ... = pi/4
# ---------------------------------------------------------------------------

class _IdentityParser:
    """递归下降解析器，出错时报告原文中的位置"""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str, position: Optional[int] = None) -> IdentityParseError:
        return IdentityParseError(message, self.pos if position is None else position, self.text)

    def skip_spaces(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_spaces()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, literal: str) -> None:
        self.skip_spaces()
        if not self.text.startswith(literal, self.pos):
            raise self.error(f"期望 {literal!r}")
        self.pos += len(literal)

    def integer(self) -> int:
        self.skip_spaces()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            raise self.error("期望整数")
        return int(self.text[start:self.pos])

    def argument(self) -> Fraction:
        self.skip_spaces()
        start = self.pos
        numerator = self.integer()
        denominator = 1
        if self.peek() == "/":
            self.pos += 1
            denominator = self.integer()
        if denominator == 0:
            raise self.error("分母为零", start)
        if gcd(numerator, denominator) != 1:
            raise self.error(f"参数 {numerator}/{denominator} 不是既约分数", start)
        if numerator == 0:
            raise self.error("arctan 参数必须为正", start)
        return Fraction(numerator, denominator)

    def term(self, sign: int) -> Term:
        start = self.pos
        coef = 1
        if self.peek().isdigit():
            coef = self.integer()
            self.expect("*")
        self.skip_spaces()
        if self.text.startswith("arctan", self.pos):
            self.pos += len("arctan")
        else:
            self.expect("atan")
        self.expect("(")
        arg = self.argument()
        self.expect(")")
        if coef == 0:
            raise self.error("系数不能为零", start)
        return sign * coef, arg

    def parse(self) -> List[Term]:
        terms: List[Term] = []
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.peek() == "-" else 1
            self.pos += 1
        terms.append(self.term(sign))

        while self.peek() in ("+", "-"):
            sign = -1 if self.peek() == "-" else 1
            self.pos += 1
            terms.append(self.term(sign))

        self.expect("=")
        self.expect("pi")
        self.expect("/")
        self.skip_spaces()
        target_pos = self.pos
        if self.integer() != 4:
            raise self.error("目标只支持 pi/4", target_pos)
        if self.peek():
            raise self.error("多余的字符")
        return terms


def parse_identity(text: str, name: Optional[str] = None) -> MachinIdentity:
    """
    解析恒等式文本，例如 "4*atan(1/5) - 1*atan(1/239) = pi/4"

    Raises:
        IdentityParseError: 语法错误，携带出错位置
    """
    terms = _IdentityParser(text).parse()
    return MachinIdentity.from_pairs(terms, name=name)


def format_identity(identity: MachinIdentity) -> str:
    """输出规范文本，parse_identity(format_identity(x)) == x"""
    parts: List[str] = []
    for index, term in enumerate(identity.terms):
        body = f"{abs(term.coef)}*atan({term.arg.numerator}/{term.arg.denominator})"
        if index == 0:
            parts.append(body if term.coef > 0 else f"-{body}")
        else:
            parts.append(f"{'+' if term.coef > 0 else '-'} {body}")
    return " ".join(parts) + " = pi/4"
