import os

import pytest
from mpmath import mp

from app.config import settings
from app.services.special_values_service import special_values_service
from app.services.zeros_service import zeros_service

# 会话级 log 2ξ 表: 覆盖 n <= 500, 精度足够 n = 500 的 1.25 倍复算
TABLE_N_MAX = 500
TABLE_DIGITS = 520

ZERO_COUNT = 100


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    """每个测试使用独立的缓存目录"""
    cache_dir = tmp_path / "xilog"
    monkeypatch.setattr(settings, "CACHE_DIR", str(cache_dir))
    monkeypatch.setattr(settings, "CACHE_ENABLED", True)
    return cache_dir


@pytest.fixture(scope="session")
def xi_table():
    return special_values_service.build_table(TABLE_N_MAX, TABLE_DIGITS, cache=None)


@pytest.fixture(scope="session")
def zero_ordinates():
    with mp.workdps(20):
        return [float(mp.zetazero(k).imag) for k in range(1, ZERO_COUNT + 1)]


@pytest.fixture(scope="session")
def zeros_file(tmp_path_factory, zero_ordinates):
    path = tmp_path_factory.mktemp("zeros") / "zeros.txt"
    lines = ["# 前 100 个零点的纵坐标"] + [repr(gamma) for gamma in zero_ordinates]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def zero_table(zeros_file):
    return zeros_service.load_zeros(str(zeros_file))


@pytest.fixture(scope="session")
def odlyzko_table():
    """KEIPER_ZEROS_FILE 指向的外部零点表 (至少 10⁵ 个), 未设置时跳过"""
    path = os.getenv("KEIPER_ZEROS_FILE")
    if not path:
        pytest.skip("未设置 KEIPER_ZEROS_FILE")
    table = zeros_service.load_zeros(path)
    if table.count < 100000:
        pytest.skip(f"零点表只有 {table.count} 个, 需要 10⁵ 个")
    return table
