import logging
import time
from typing import Callable
from uuid import uuid4

from app.schemas.run_config import RunConfig

logger = logging.getLogger(__name__)


class LoggingMiddleware:
    """包装每次命令执行: 分配运行 ID, 记录开始, 结束, 退出码与耗时"""

    def __init__(self, handler: Callable[[RunConfig], int]):
        self.handler = handler

    def dispatch(self, config: RunConfig) -> int:
        run_id = str(uuid4())
        command = config.command.value

        # 记录命令开始
        start_time = time.time()
        logger.info(f"开始运行 [{run_id}] {command}")

        try:
            exit_code = self.handler(config)

            # 记录命令结束
            process_time = time.time() - start_time
            logger.info(f"完成运行 [{run_id}] {command} - 退出码 {exit_code} - 耗时: {process_time:.3f}s")
            return exit_code

        except Exception as e:
            process_time = time.time() - start_time
            logger.error(f"运行异常 [{run_id}] {command} - 耗时: {process_time:.3f}s - 错误: {str(e)}")
            raise
