"""Plain-text key=value run configuration.

One ``key = value`` per line; ``#`` starts a comment.  Values are read as
JSON when they parse (numbers, lists, true/false/null) and as bare strings
otherwise.  Flags given on the command line override file values.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping


class ConfigError(ValueError):
    """Malformed configuration file or value."""


def parse_value(text: str) -> Any:
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(path: str | Path | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out: dict[str, Any] = {}
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key = value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"{path}:{num}: empty key")
        out[key] = parse_value(value)
    return out


def resolve(file_values: Mapping[str, Any], overrides: Mapping[str, Any]) -> dict[str, Any]:
    """File values updated by every override that is not None."""
    merged = dict(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return merged


def get_typed(cfg: Mapping[str, Any], key: str, kind: type, default: Any) -> Any:
    """cfg[key] coerced to ``kind``; raises ConfigError on a bad value."""
    if key not in cfg or cfg[key] is None:
        return default
    value = cfg[key]
    try:
        if kind is bool and isinstance(value, str):
            return value.lower() in ("1", "true", "yes")
        if kind in (list, tuple):
            seq = value if isinstance(value, (list, tuple)) else [value]
            return kind(seq)
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
