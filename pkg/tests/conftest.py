"""
测试公共夹具
"""
import os
import sys
from fractions import Fraction

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import settings  # noqa: E402
from models.schemas import Seed  # noqa: E402
from services.cf_engine import refine_stream  # noqa: E402
from services.identity_service import CORPUS  # noqa: E402
from utils.formatting import allow_long_integers  # noqa: E402

# 第 13 行起 u_n 的分子分母超过默认的 4300 位十进制上限
allow_long_integers()

# π 的前 100 位小数
PI_100 = (
    "3."
    "1415926535" "8979323846" "2643383279" "5028841971" "6939937510"
    "5820974944" "5923078164" "0628620899" "8628034825" "3421170679"
)

# π 的有理上下界 3.14159265358 < π < 3.14159265359
PI_LOWER = Fraction(314159265358, 10 ** 11)
PI_UPPER = Fraction(314159265359, 10 ** 11)


@pytest.fixture
def euler_seed() -> Seed:
    """Euler 种子 arctan(1/2) + arctan(1/3) = π/4"""
    return Seed(a0=1, a1=1, u0="1/2", u1="1/3")


@pytest.fixture
def hutton_seed() -> Seed:
    """Hutton 种子 2·arctan(1/3) + arctan(1/7) = π/4"""
    return Seed(a0=2, a1=1, u0="1/3", u1="1/7")


@pytest.fixture(scope="session")
def euler_records_13():
    """Euler 种子的第 0..13 行"""
    return refine_stream(Seed(a0=1, a1=1, u0="1/2", u1="1/3"), 14)


@pytest.fixture
def corpus():
    return CORPUS


@pytest.fixture
def debug_mode(monkeypatch):
    """临时打开调试模式"""
    monkeypatch.setattr(settings, "debug", True)
    yield
