import logging
import os
import re
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Optional, Tuple

from app.config import settings

logger = logging.getLogger(__name__)

_FILENAME_RE = re.compile(r"^xilog_(\d+)_(\d+)\.txt$")


@contextmanager
def atomic_write(path: Path):
    """
    原子写入上下文管理器, 先写临时文件再替换, 保证缓存文件要么完整要么不存在
    使用方法:
    with atomic_write(path) as f:
        f.write(...)
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=".tmp_", suffix=".txt")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            yield f
        os.replace(tmp_name, path)
    except OSError as e:
        logger.error(f"缓存写入错误: {str(e)}")
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise
    except Exception as e:
        logger.error(f"写入缓存时发生错误: {str(e)}")
        if os.path.exists(tmp_name):
            os.remove(tmp_name)
        raise


class XiLogCache:
    """log 2ξ(2m) 的磁盘缓存, 每个文件一行十进制字符串, 文件名 xilog_<m>_<digits>.txt"""

    def __init__(self, cache_dir: str = settings.CACHE_DIR):
        self.cache_dir = Path(cache_dir)

    def path_for(self, m: int, digits: int) -> Path:
        return self.cache_dir / f"xilog_{m}_{digits}.txt"

    def lookup(self, m: int, digits: int) -> Optional[Tuple[str, int]]:
        """查找精度不低于 digits 的缓存项, 返回 (十进制字符串, 精度标签); 多个候选时取精度最低者"""
        if not self.cache_dir.is_dir():
            return None

        best: Optional[int] = None
        for entry in self.cache_dir.glob(f"xilog_{m}_*.txt"):
            match = _FILENAME_RE.match(entry.name)
            if not match or int(match.group(1)) != m:
                continue
            tag = int(match.group(2))
            if tag >= digits and (best is None or tag < best):
                best = tag

        if best is None:
            return None

        text = self.path_for(m, best).read_text(encoding="utf-8").strip()
        if not text:
            logger.warning(f"缓存文件为空, 忽略: {self.path_for(m, best)}")
            return None
        logger.debug(f"缓存命中 m={m} digits={best}")
        return text, best

    def store(self, m: int, digits: int, value: str) -> Path:
        path = self.path_for(m, digits)
        with atomic_write(path) as f:
            f.write(value + "\n")
        logger.debug(f"缓存已写入 {path.name}")
        return path

    def clear(self) -> int:
        """删除所有缓存文件, 返回删除数量"""
        removed = 0
        if not self.cache_dir.is_dir():
            return removed
        for entry in self.cache_dir.glob("xilog_*.txt"):
            if _FILENAME_RE.match(entry.name):
                entry.unlink()
                removed += 1
        return removed


def get_cache() -> Optional[XiLogCache]:
    """按配置返回缓存实例, 关闭缓存时返回 None"""
    if not settings.CACHE_ENABLED:
        return None
    return XiLogCache(settings.CACHE_DIR)
