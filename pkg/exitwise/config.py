import os
from pathlib import Path
from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent.parent

# Load .env from project root
load_dotenv(BASE_DIR / ".env")


def _get_setting(key: str, default: str = "") -> str:
    """获取配置，优先级：环境变量 > .env > 默认值"""
    value = os.getenv(key)
    if value is None or value.strip() == "":
        return default
    return value.strip()


def _get_flag(key: str) -> bool:
    return _get_setting(key, "").lower() in ("1", "true", "yes", "on")


def _default_threads() -> int:
    return max(1, os.cpu_count() or 1)


class Config:
    # Logging
    LOG_LEVEL = _get_setting("EXITWISE_LOG_LEVEL", "INFO").upper()
    LOG_FILE = _get_setting("EXITWISE_LOG_FILE", "")

    # Internal invariant checks (theta truncation, sandwich monotonicity)
    DEBUG_CHECKS = _get_flag("EXITWISE_DEBUG")

    # Worker pool
    THREADS = int(_get_setting("EXITWISE_THREADS", "0")) or _default_threads()
    CHUNK_SIZE = int(_get_setting("EXITWISE_CHUNK", "256"))

    # Sampler defaults
    T_C = float(_get_setting("EXITWISE_T_C", "0.7"))
    T_E = float(_get_setting("EXITWISE_T_E", "0.5"))
    MAX_TERMS = int(_get_setting("EXITWISE_MAX_TERMS", "10000"))

    # Outputs / oracles
    HIST_BINS = int(_get_setting("EXITWISE_HIST_BINS", "100"))
    EULER_DT = float(_get_setting("EXITWISE_EULER_DT", "1e-4"))

    @classmethod
    def reload(cls):
        """重新加载配置（环境变量修改后调用）"""
        cls.LOG_LEVEL = _get_setting("EXITWISE_LOG_LEVEL", "INFO").upper()
        cls.LOG_FILE = _get_setting("EXITWISE_LOG_FILE", "")
        cls.DEBUG_CHECKS = _get_flag("EXITWISE_DEBUG")
        cls.THREADS = int(_get_setting("EXITWISE_THREADS", "0")) or _default_threads()
        cls.CHUNK_SIZE = int(_get_setting("EXITWISE_CHUNK", "256"))
        cls.T_C = float(_get_setting("EXITWISE_T_C", "0.7"))
        cls.T_E = float(_get_setting("EXITWISE_T_E", "0.5"))
        cls.MAX_TERMS = int(_get_setting("EXITWISE_MAX_TERMS", "10000"))
        cls.HIST_BINS = int(_get_setting("EXITWISE_HIST_BINS", "100"))
        cls.EULER_DT = float(_get_setting("EXITWISE_EULER_DT", "1e-4"))

    @classmethod
    def as_dict(cls) -> dict:
        return {
            "log_level": cls.LOG_LEVEL,
            "debug_checks": cls.DEBUG_CHECKS,
            "threads": cls.THREADS,
            "chunk_size": cls.CHUNK_SIZE,
            "t_c": cls.T_C,
            "t_e": cls.T_E,
            "max_terms": cls.MAX_TERMS,
            "hist_bins": cls.HIST_BINS,
            "euler_dt": cls.EULER_DT,
        }
