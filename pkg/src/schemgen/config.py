"""Layered configuration: command-line flags over environment over a TOML
file over built-in defaults.

File keys use dotted paths (``backend.kind``, ``limits.place_iter``...).
Unknown keys are errors that name the offending path.  API keys never come
from a file.
"""

from __future__ import annotations

import os
import sys
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .agent import API_KEY_ENV, AgentConfig


class ConfigError(ValueError):
    pass


# dotted file key -> (AgentConfig field, type, environment variable)
KEYS: dict[str, tuple[str, type, str]] = {
    "backend.kind": ("backend", str, "EESCHEMATIC_BACKEND"),
    "backend.url": ("url", str, "EESCHEMATIC_URL"),
    "backend.model": ("model", str, "EESCHEMATIC_MODEL"),
    "backend.timeout": ("timeout", float, "EESCHEMATIC_TIMEOUT"),
    "limits.place_iter": ("max_place_iter", int, "EESCHEMATIC_PLACE_ITER"),
    "limits.wire_iter": ("max_wire_iter", int, "EESCHEMATIC_WIRE_ITER"),
    "history.window": ("history_window", int, "EESCHEMATIC_HISTORY_WINDOW"),
    "seed": ("seed", int, "EESCHEMATIC_SEED"),
}
_BY_FIELD = {f: k for k, (f, _, _) in KEYS.items()}


def _flatten(doc: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    out = {}
    for k, v in doc.items():
        path = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, path + "."))
        else:
            out[path] = v
    return out


def _coerce(path: str, value: Any, typ: type) -> Any:
    if typ is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if not isinstance(value, typ) or isinstance(value, bool):
        raise ConfigError(f"{path}: expected {typ.__name__}, got {type(value).__name__}")
    return value


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Parse a TOML config file into ``{field: value}``."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror}") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    out = {}
    for key, value in _flatten(doc).items():
        if "key" in key.rsplit(".", 1)[-1].lower():
            raise ConfigError(f"{key}: API keys are read from {API_KEY_ENV} only")
        if key not in KEYS:
            raise ConfigError(f"{key}: unknown configuration key")
        name, typ, _ = KEYS[key]
        out[name] = _coerce(key, value, typ)
    return out


def read_env(env: Mapping[str, str]) -> dict[str, Any]:
    out = {}
    for key, (name, typ, var) in KEYS.items():
        if var in env:
            raw = env[var]
            try:
                out[name] = typ(raw) if typ is not str else raw
            except ValueError:
                raise ConfigError(f"{var}: cannot read {raw!r} as {typ.__name__}") from None
    return out


def resolve(flags: Mapping[str, Any], config_path: str | Path | None = None,
            env: Mapping[str, str] | None = None) -> AgentConfig:
    """Merge the layers; ``flags`` holds AgentConfig field names, None = unset."""
    merged: dict[str, Any] = {}
    if config_path is not None:
        merged.update(read_config_file(config_path))
    merged.update(read_env(os.environ if env is None else env))
    merged.update({k: v for k, v in flags.items() if v is not None})
    known = {f.name for f in fields(AgentConfig)}
    extra = set(merged) - known
    if extra:
        raise ConfigError(f"{sorted(extra)[0]}: unknown configuration key")
    try:
        return AgentConfig(**merged)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def effective(cfg: AgentConfig) -> dict[str, Any]:
    """Config as dotted keys, for echoing into reports (never holds secrets)."""
    d = asdict(cfg)
    out = {_BY_FIELD.get(k, k): v for k, v in d.items()}
    out["mock_script"] = list(cfg.mock_script) if cfg.mock_script is not None else None
    return out
