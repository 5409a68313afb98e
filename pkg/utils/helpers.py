import math
from datetime import datetime, timezone
from typing import Iterable, List


def get_utc_datetime() -> datetime:
    """Returns current timezone-aware datetime object in UTC."""
    return datetime.now(timezone.utc)

def get_current_datetime_str(fmt: str = "%Y-%m-%d %H:%M:%S UTC") -> str:
    """
    Returns current full datetime in UTC formatted as string.
    Default: YYYY-MM-DD HH:MM:SS UTC
    """
    return get_utc_datetime().strftime(fmt)

def format_float(value: float) -> str:
    """17 significant digits, enough for an exact float round trip."""
    value = float(value)
    if math.isnan(value): return "nan"
    if value == 0.0: return "0"
    return format(value, ".17g")

def format_row(values: Iterable[float]) -> str:
    return ",".join(format_float(v) for v in values)

def complex_parts(values: Iterable[complex]) -> List[float]:
    out: List[float] = []
    for v in values:
        v = complex(v)
        out.extend((v.real, v.imag))
    return out
