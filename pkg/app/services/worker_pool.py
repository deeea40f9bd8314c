import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def parallel_map(
        func: Callable[[T], R],
        items: Iterable[T],
        workers: int = 1,
        initializer: Optional[Callable] = None,
        initargs: tuple = (),
) -> List[R]:
    """
    按输入顺序返回结果的并行 map; workers <= 1 或任务很少时顺序执行.
    func 必须是模块级函数, 参数与返回值要可 pickle (高精度数值以十进制字符串传递).
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        if initializer is not None:
            initializer(*initargs)
        return [func(item) for item in items]

    chunksize = max(1, len(items) // (workers * 4))
    logger.debug(f"并行计算 {len(items)} 项, 进程数 {workers}, 分块 {chunksize}")
    with ProcessPoolExecutor(max_workers=workers, initializer=initializer, initargs=initargs) as executor:
        return list(executor.map(func, items, chunksize=chunksize))
