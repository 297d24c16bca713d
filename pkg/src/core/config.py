# src/core/config.py
from __future__ import annotations

import json
import os
import re
from pathlib import Path
from typing import Any, Dict

import yaml
from dotenv import load_dotenv

from src.core.errors import ConfigError

load_dotenv()  # переменные окружения из .env (VHA_LAB_*)

ROOT = Path(__file__).resolve().parents[2]
SETTINGS_PATH = ROOT / "config" / "settings.yaml"

_DEFAULTS: Dict[str, Any] = {
    "density_cap": 8,
    "exact_diagnostic_cap": 12,
    "degeneracy_tol": 1e-9,
    "oracle": {"starts": 20, "iterations": 5000, "eta": 0.03, "seed": 20210501, "spread": 1.0},
}


class _Loader(yaml.SafeLoader):
    """SafeLoader с числами YAML 1.2: 1e-4 и 5e4 читаются как float, а не строки."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"^[-+]?(?:[0-9][0-9_]*(?:\.[0-9_]*)?|\.[0-9_]+)[eE][-+]?[0-9]+$"),
    list("-+0123456789."),
)


def load_yaml(path: str | os.PathLike) -> Dict[str, Any]:
    """YAML или JSON (по суффиксу .json)."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"Config not found: {p}")
    with open(p, "r", encoding="utf-8") as f:
        try:
            data = json.load(f) if p.suffix.lower() == ".json" else yaml.load(f, Loader=_Loader)
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise ConfigError(f"{p}: не разобрать конфиг: {e}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{p}: ожидался словарь верхнего уровня, получено {type(data).__name__}")
    return data


def settings(path: str | os.PathLike | None = None) -> Dict[str, Any]:
    cfg = {k: (dict(v) if isinstance(v, dict) else v) for k, v in _DEFAULTS.items()}
    p = Path(path) if path is not None else SETTINGS_PATH
    if p.exists():
        for k, v in load_yaml(p).items():
            if isinstance(v, dict) and isinstance(cfg.get(k), dict):
                cfg[k].update(v)
            else:
                cfg[k] = v
    return cfg


def density_cap() -> int:
    raw = os.getenv("VHA_LAB_DENSITY_CAP", "").strip()
    if not raw:
        return int(settings()["density_cap"])
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"VHA_LAB_DENSITY_CAP должен быть целым, получено {raw!r}") from None
    if cap < 1:
        raise ConfigError(f"VHA_LAB_DENSITY_CAP должен быть >= 1, получено {cap}")
    return cap


def log_level() -> str:
    return os.getenv("VHA_LAB_LOG_LEVEL", "INFO").strip().upper() or "INFO"
