import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from roleanalysis.exceptions import ConfigError

load_dotenv()


def _int_env(name: str, default: int, minimum: int = 0) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigError(f"{name} must be an integer, got {raw!r}", context={"variable": name}) from e
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}", context={"variable": name})
    return value


def _bool_env(name: str, default: bool) -> bool:
    return os.getenv(name, str(default)).strip().lower() == "true"


# Closure limits
MAX_ELEMENTS = _int_env("ROLEANALYSIS_MAX_ELEMENTS", 100_000, minimum=1)
DEFAULT_THREADS = _int_env("ROLEANALYSIS_THREADS", 1, minimum=1)

# Rounding
ROUND_DIGITS = _int_env("ROLEANALYSIS_ROUND_DIGITS", 2)
if ROUND_DIGITS > 12:
    raise ConfigError("ROLEANALYSIS_ROUND_DIGITS must be <= 12", context={"variable": "ROLEANALYSIS_ROUND_DIGITS"})

ROUNDING_RULE = os.getenv("ROLEANALYSIS_ROUNDING_RULE", "half_even").strip().lower()
if ROUNDING_RULE not in {"half_even", "half_up"}:
    raise ConfigError(
        f"ROLEANALYSIS_ROUNDING_RULE must be half_even or half_up, got {ROUNDING_RULE!r}",
        context={"variable": "ROLEANALYSIS_ROUNDING_RULE"},
    )

# Associativity checks: exhaustive up to this many elements, sampled above
ASSOCIATIVITY_LIMIT = _int_env("ROLEANALYSIS_ASSOCIATIVITY_LIMIT", 512, minimum=1)
ASSOCIATIVITY_SAMPLES = _int_env("ROLEANALYSIS_ASSOCIATIVITY_SAMPLES", 20_000, minimum=1)

# File Storage
OUTPUT_DIR = Path(os.getenv("ROLEANALYSIS_OUTPUT_DIR", "output"))
EXTERNAL_DATA_DIR: Optional[Path] = (
    Path(os.environ["ROLEANALYSIS_EXTERNAL_DATA"]) if os.getenv("ROLEANALYSIS_EXTERNAL_DATA") else None
)

# Monitoring
LOG_LEVEL = os.getenv("ROLEANALYSIS_LOG_LEVEL", "INFO").upper()
LOG_JSON = _bool_env("ROLEANALYSIS_LOG_JSON", False)

# Development
DEBUG = _bool_env("DEBUG", False)
