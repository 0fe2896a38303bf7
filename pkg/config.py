"""
Run Configuration - Environment-driven settings for hyperstab sweeps and services
Seeds, parallelism caps, enumeration limits and logging level
"""

import logging
import os
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

from dotenv import load_dotenv

logger = logging.getLogger(__name__)


@dataclass
class RunConfig:
    """Configuration for one CLI or service run"""
    command: str = ""
    input_paths: List[str] = field(default_factory=list)
    output_path: Optional[str] = None
    seed: int = 0
    grid: Tuple[int, ...] = (0, 1, 2)
    threads: int = 4
    max_liftings: int = 100000
    quiet: bool = False
    log_level: str = "INFO"

    def with_overrides(self, **overrides) -> "RunConfig":
        """Copy with every non-None override applied"""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def _default_threads() -> int:
    return min(os.cpu_count() or 1, 8)


def _load_config() -> RunConfig:
    """Load configuration from environment"""
    load_dotenv()
    try:
        return RunConfig(
            seed=int(os.getenv("HYPERSTAB_SEED", "0")),
            threads=max(1, int(os.getenv("HYPERSTAB_THREADS", str(_default_threads())))),
            max_liftings=int(os.getenv("HYPERSTAB_MAX_LIFTINGS", "100000")),
            quiet=os.getenv("HYPERSTAB_QUIET", "0").lower() in ("1", "true", "yes"),
            log_level=os.getenv("HYPERSTAB_LOG_LEVEL", "INFO").upper(),
        )
    except ValueError as e:
        logger.warning(f"⚠️ Ignoring malformed HYPERSTAB_* environment: {e}")
        return RunConfig(threads=_default_threads())


# Global run configuration
_run_config = None


def get_run_config() -> RunConfig:
    """Get or create global run configuration"""
    global _run_config
    if _run_config is None:
        _run_config = _load_config()
    return _run_config


def set_run_config(config: RunConfig) -> RunConfig:
    """Install the effective configuration after command-line overrides"""
    global _run_config
    _run_config = config
    return config


def reset_run_config():
    global _run_config
    _run_config = None
