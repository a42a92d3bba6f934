"""Parsing helpers for experiment files and command-line ranges."""

from __future__ import annotations

from pathlib import Path
from typing import Any

from app.core.exceptions import ConfigurationError
from app.utils.logger import app_logger


def parse_key_value_text(text: str) -> dict[str, str]:
    """Parse `key = value` lines; blank lines and `#` comments are skipped.

    Keys are lower-cased with dashes folded to underscores so `N-TX = 4` and
    `n_tx=4` mean the same thing.
    """

    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, _, value = line.partition(":")
        key = key.strip().lower().replace("-", "_")
        if not key or not value.strip():
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw!r}", "bench")
        if key in entries:
            app_logger.warning("Duplicate config key overrides earlier value", extra={"key": key})
        entries[key] = value.strip()
    return entries


def load_key_value_file(path: str | Path) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}", "bench") from exc
    return parse_key_value_text(text)


def parse_int_range(raw: Any) -> list[int]:
    """Accept `5`, `1-8`, `2,4,16` or mixtures like `1-3,8`; order kept, duplicates dropped."""

    if isinstance(raw, int):
        return [raw]
    values: list[int] = []
    try:
        for chunk in str(raw).split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            if "-" in chunk[1:]:
                start, end = (int(v) for v in chunk.split("-", 1))
                if end < start:
                    raise ConfigurationError(f"empty range {chunk!r}", "bench")
                values.extend(range(start, end + 1))
            else:
                values.append(int(chunk))
    except ValueError as exc:
        raise ConfigurationError(f"invalid integer range {raw!r}", "bench") from exc
    if not values:
        raise ConfigurationError(f"invalid integer range {raw!r}", "bench")
    return list(dict.fromkeys(values))

