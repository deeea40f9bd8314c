import os

from dotenv import load_dotenv
from pydantic_settings import BaseSettings

# 加载环境变量
load_dotenv()


class Settings(BaseSettings):
    # 基本配置
    PROJECT_NAME: str = "显式Keiper-Li序列计算工具"
    PROJECT_VERSION: str = "1.0.0"
    DEBUG: bool = os.getenv("DEBUG", "False").lower() in ("true", "1", "t")
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # 缓存配置 (log 2ξ(2m) 表)
    CACHE_DIR: str = os.getenv("KEIPER_CACHE_DIR", ".cache/xilog")
    CACHE_ENABLED: bool = os.getenv("KEIPER_CACHE_ENABLED", "True").lower() in ("true", "1", "t")

    # 并行配置, 1 表示顺序执行
    WORKERS: int = int(os.getenv("WORKERS", "1"))

    # 精度配置
    DEFAULT_TARGET_DIGITS: int = int(os.getenv("DEFAULT_TARGET_DIGITS", "12"))
    PRINT_DIGITS: int = int(os.getenv("PRINT_DIGITS", "15"))
    ZETA_SERIES_MAX_TERMS: int = int(os.getenv("ZETA_SERIES_MAX_TERMS", "2000"))
    BERNOULLI_ROUTE_MAX_M: int = int(os.getenv("BERNOULLI_ROUTE_MAX_M", "200"))

    # 检测阈值配置
    CONFIRMED_HEIGHT_T0: float = float(os.getenv("CONFIRMED_HEIGHT_T0", "2.4e12"))

    # 中心化变体
    CENTERED_W_DEFAULT: float = float(os.getenv("CENTERED_W_DEFAULT", "1.0"))

    # 零点数据
    ZEROS_PATH: str = os.getenv("ZEROS_PATH", "")

    class Config:
        env_file = ".env"
        extra = "ignore"


settings = Settings()
