"""Plain-text key=value run configuration files.

Flat keys mirror TrainConfig fields; nested planner and board settings
use dotted prefixes (planner.n_rollouts, board.wood). Unknown keys are
rejected and parse(serialize(c)) == c holds exactly.
"""
from __future__ import annotations

import dataclasses

from .engine import BoardDensity
from .planner import PlannerConfig
from .trainer import TrainConfig


class ConfigError(Exception):
    pass


def _scalar_fields(obj) -> list[dataclasses.Field]:
    return [f for f in dataclasses.fields(obj)
            if f.name not in ("planner", "board")]


def config_to_kv(config: TrainConfig) -> str:
    lines = []
    for f in _scalar_fields(config):
        lines.append(f"{f.name}={getattr(config, f.name)!r}"
                     if isinstance(getattr(config, f.name), str)
                     else f"{f.name}={getattr(config, f.name)}")
    for f in dataclasses.fields(config.planner):
        v = getattr(config.planner, f.name)
        lines.append(f"planner.{f.name}={v!r}" if isinstance(v, str)
                     else f"planner.{f.name}={v}")
    for f in dataclasses.fields(config.board):
        lines.append(f"board.{f.name}={getattr(config.board, f.name)}")
    return "\n".join(lines) + "\n"


def _parse_value(raw: str, typ) -> object:
    raw = raw.strip()
    if typ is int:
        return int(raw)
    if typ is float:
        return float(raw)
    if typ is str:
        if raw and raw[0] in "'\"" and raw[-1] == raw[0]:
            raw = raw[1:-1]
        return raw
    if typ is bool:
        return raw.lower() in ("1", "true", "yes")
    raise ConfigError(f"unsupported config value type {typ}")


_FIELD_TYPES = {int: int, float: float, str: str, bool: bool}


def _field_map(cls) -> dict[str, type]:
    out = {}
    for f in dataclasses.fields(cls):
        if f.name in ("planner", "board"):
            continue
        typ = f.type if isinstance(f.type, type) else {"int": int, "float": float,
                                                       "str": str, "bool": bool}.get(f.type)
        if typ is None:
            raise ConfigError(f"cannot parse field {f.name} of type {f.type}")
        out[f.name] = typ
    return out


def apply_setting(config: TrainConfig, key: str, raw: str) -> None:
    key = key.strip()
    if key.startswith("planner."):
        fields = _field_map(PlannerConfig)
        sub = key[len("planner."):]
        if sub not in fields:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(config.planner, sub, _parse_value(raw, fields[sub]))
        config.planner.__post_init__()
    elif key.startswith("board."):
        fields = _field_map(BoardDensity)
        sub = key[len("board."):]
        if sub not in fields:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(config.board, sub, _parse_value(raw, fields[sub]))
    else:
        fields = _field_map(TrainConfig)
        if key not in fields:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(config, key, _parse_value(raw, fields[key]))


def kv_to_config(text: str) -> TrainConfig:
    config = TrainConfig()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = line.split("=", 1)
        apply_setting(config, key, raw)
    return config
