"""Epoch-millisecond helpers. All timestamps are UTC."""

from __future__ import annotations

import re
import time
from datetime import datetime, timezone

_RFC3339 = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})[Tt ](\d{2}):(\d{2}):(\d{2})(\.\d+)?"
    r"([Zz]|[+-]\d{2}:\d{2})$"
)


def now_ms() -> int:
    return int(time.time() * 1000)


def parse_rfc3339_ms(text: str) -> int:
    """Parse an RFC 3339 timestamp to epoch-ms UTC. Raises ValueError."""
    m = _RFC3339.match(text)
    if not m:
        raise ValueError(f"not an RFC 3339 timestamp: {text!r}")
    year, month, day, hour, minute, second = (int(g) for g in m.groups()[:6])
    frac, offset = m.group(7), m.group(8)
    dt = datetime(year, month, day, hour, minute, second, tzinfo=timezone.utc)
    epoch_s = int(dt.timestamp())
    if offset not in ("Z", "z"):
        sign = 1 if offset[0] == "+" else -1
        off_s = sign * (int(offset[1:3]) * 3600 + int(offset[4:6]) * 60)
        epoch_s -= off_s
    ms = 0
    if frac:
        digits = (frac[1:] + "000")[:3]  # truncate beyond millisecond precision
        ms = int(digits)
    return epoch_s * 1000 + ms


def format_rfc3339_ms(epoch_ms: int) -> str:
    dt = datetime.fromtimestamp(epoch_ms / 1000, tz=timezone.utc)
    base = dt.strftime("%Y-%m-%dT%H:%M:%S")
    ms = epoch_ms % 1000
    if ms:
        return f"{base}.{ms:03d}Z"
    return f"{base}Z"
