"""
性能与验收测试模块
"""
import random
import time
from fractions import Fraction

import pytest

from models.identity import MachinIdentity
from models.schemas import StepStrategy, Verdict
from services.approx_service import (
    GOLDEN_DECAY,
    GOLDEN_DECAY_SLACK,
    approx_from_records,
    error_ratios,
    geometric_mean_bound_holds,
    pi_digits,
    scaled_error_witness,
)
from services.arctan_algebra import step
from services.cf_engine import (
    argument_closed_form_check,
    coefficient_closed_form,
    convergent_bound_check,
    corollary2_check,
    fibonacci,
    refine_stream,
)
from services.exact_core import pi_interval
from services.exceptions import DegenerateRatioError
from services.identity_service import refined_identity, verify
from tests.conftest import PI_100
from utils.formatting import truncate_decimal


@pytest.mark.performance
def test_golden_sequence_time(euler_seed):
    """测试 Euler 种子黄金数据的复现时间"""
    start_time = time.perf_counter()
    records = refine_stream(euler_seed, 7)
    approx_records = approx_from_records(records[:4], Fraction(1, 10 ** 30))
    elapsed = (time.perf_counter() - start_time) * 1000

    assert [record.q for record in records] == [1, 2, 3, 1, 2, 1, 4]
    assert [record.u_n for record in records[2:5]] == [Fraction(1, 7), Fraction(3, 79), Fraction(24478, 873121)]
    assert [record.a_next for record in records[:6]] == [2, 5, 17, 22, 61, 83]
    assert [item.r for item in approx_records] == [
        Fraction(10, 3), Fraction(68, 21), Fraction(1748, 553), Fraction(216791924, 68976559)
    ]
    assert elapsed < 1000, f"黄金数据复现时间过长: {elapsed:.2f}ms"
    print(f"✅ 黄金数据: {elapsed:.2f}ms")


@pytest.mark.performance
def test_corpus_verification_time(corpus):
    """测试语料验证及其扰动的总耗时"""
    start_time = time.perf_counter()
    for name, identity in corpus.items():
        assert verify(identity).verdict is Verdict.TRUE, name
        pairs = identity.pairs()
        for index, (coef, arg) in enumerate(pairs):
            for changed in (-coef, coef + 1):
                if changed == 0:
                    continue
                perturbed = pairs[:index] + ((changed, arg),) + pairs[index + 1:]
                assert verify(MachinIdentity.from_pairs(perturbed)).verdict is Verdict.FALSE, name
    elapsed = (time.perf_counter() - start_time) * 1000

    assert elapsed < 5000, f"语料验证时间过长: {elapsed:.2f}ms"
    print(f"✅ 语料验证: {elapsed:.2f}ms")


@pytest.mark.performance
def test_refined_identities_up_to_12(euler_seed, euler_records_13):
    """测试 n ≤ 12 的细化恒等式全部成立"""
    start_time = time.perf_counter()
    for record in euler_records_13[:13]:
        identity = refined_identity(record, euler_seed)
        assert identity.pairs() == record.identity_terms()
    elapsed = (time.perf_counter() - start_time) * 1000

    assert elapsed < 30000, f"细化恒等式验证时间过长: {elapsed:.2f}ms"
    print(f"✅ 细化恒等式 n ≤ 12: {elapsed:.2f}ms")


@pytest.mark.performance
def test_closed_forms_up_to_12(euler_seed, euler_records_13):
    """测试 n ≤ 12 的系数闭式与参数闭式"""
    for record in euler_records_13[:13]:
        assert coefficient_closed_form(euler_seed, record) == record.a_next
    for record in euler_records_13[2:13]:
        assert argument_closed_form_check(euler_seed, record)


@pytest.mark.performance
def test_bounds(euler_seed, euler_records_13):
    """测试斐波那契下界、arctan u_n 的上界与收敛子误差界"""
    for record in euler_records_13:
        assert record.D >= fibonacci(record.n + 1)
        assert record.fib == fibonacci(record.n + 1)
    for record in euler_records_13[2:11]:
        assert corollary2_check(euler_seed, record) is Verdict.TRUE
    for record, following in zip(euler_records_13[:9], euler_records_13[1:10]):
        assert convergent_bound_check(euler_seed, record, following) is Verdict.TRUE


@pytest.mark.performance
def test_error_decay(euler_records_13):
    """测试误差比值的几何平均低于 0.382 + 0.25，且缩放误差有界"""
    approx_records = approx_from_records(euler_records_13[:12], Fraction(1, 10 ** 60))
    prefixes = [truncate_decimal(item.r, places) for item, places in zip(approx_records, (3, 3, 4, 4))]
    assert prefixes == ["3.333", "3.238", "3.1609", "3.1429"]

    ratios = error_ratios(approx_records)
    assert all(ratio.lo > 0 for ratio in ratios)
    assert geometric_mean_bound_holds(ratios, GOLDEN_DECAY + GOLDEN_DECAY_SLACK)

    witness = scaled_error_witness(approx_records)
    assert witness == scaled_error_witness(approx_from_records(euler_records_13[:12], Fraction(1, 10 ** 60)))
    assert witness < 1
    print(f"✅ |r_n − π|·D_(n-1)² 上界: {float(witness):.6f}")


@pytest.mark.performance
def test_error_decreases_up_to_12(euler_records_13):
    """测试 n ≤ 12 时误差逐行下降：每个比值的上界 < 1，|err| 中点单调递减"""
    approx_records = approx_from_records(euler_records_13[:13], Fraction(1, 10 ** 60))
    ratios = error_ratios(approx_records)
    assert len(ratios) == 12
    assert all(ratio.hi < 1 for ratio in ratios)

    midpoints = [abs(record.err.midpoint) for record in approx_records]
    assert all(later < earlier for earlier, later in zip(midpoints, midpoints[1:]))


@pytest.mark.performance
def test_pi_digits_100(euler_seed):
    """测试第 2、3 行恒等式算出的 100 位一致，且与 Machin 公式的结果相同"""
    start_time = time.perf_counter()
    from_row_2 = pi_digits(euler_seed, 2, 100)
    from_row_3 = pi_digits(euler_seed, 3, 100)
    reference = truncate_decimal(pi_interval(Fraction(1, 10 ** 105), "machin").lo, 100)
    elapsed = (time.perf_counter() - start_time) * 1000

    assert from_row_2 == from_row_3 == reference == PI_100
    assert elapsed < 10000, f"π 位数计算时间过长: {elapsed:.2f}ms"
    print(f"✅ π 前 100 位: {elapsed:.2f}ms")


@pytest.mark.performance
def test_step_strategies_agree_on_euler(euler_records_13):
    """测试两种步进策略在 Euler 种子前 13 步上一致"""
    for record in euler_records_13:
        linear = step(record.u_n, record.u_next, StepStrategy.LINEAR)
        doubling = step(record.u_n, record.u_next, StepStrategy.DOUBLING)
        assert linear == doubling
        assert (linear.q, linear.w) == (record.q, record.u_after)


def _step_outcome(u: Fraction, v: Fraction, strategy: StepStrategy):
    try:
        return step(u, v, strategy)
    except DegenerateRatioError:
        return "degenerate"


@pytest.mark.performance
def test_step_strategies_agree_on_random_states():
    """测试两种步进策略在 25 个随机状态上一致"""
    rng = random.Random(20240613)
    start_time = time.perf_counter()
    for _ in range(25):
        u = Fraction(rng.randint(1, 40), rng.randint(41, 300))
        v = u * Fraction(rng.randint(1, 29), rng.randint(30, 900))
        assert _step_outcome(u, v, StepStrategy.LINEAR) == _step_outcome(u, v, StepStrategy.DOUBLING), (u, v)
    elapsed = (time.perf_counter() - start_time) * 1000
    print(f"✅ 随机状态步进: {elapsed:.2f}ms")


@pytest.mark.performance
def test_memory_usage(euler_records_13):
    """测试细化后的内存使用情况"""
    psutil = pytest.importorskip("psutil")
    import os

    memory_mb = psutil.Process(os.getpid()).memory_info().rss / 1024 / 1024
    print(f"当前内存使用: {memory_mb:.2f} MB")
    assert memory_mb < 500, f"内存使用过高: {memory_mb:.2f} MB"
