# src/reports/tables.py
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import pandas as pd

from src.core.errors import InputError
from src.optim.descent import Method, RunRecord

RUN_COLUMNS = [
    "scenario",
    "method",
    "epsilon",
    "shots",
    "gamma",
    "seed",
    "iteration",
    "theta_json",
    "energy",
    "abs_dev",
    "rel_dev",
    "exact_energy_at_theta",
    "cum_circuit_evals",
]


# ---------- строки прогонов ----------
def run_frame(scenario: str, method: Method, gamma: float, record: RunRecord, shots: Optional[int]) -> pd.DataFrame:
    """Строки одного прогона в схеме runs.csv; shots/seed пустые у эталонного прогона."""
    df = record.to_frame().rename(columns={"exact_energy": "exact_energy_at_theta"})
    n = len(df)
    df["scenario"] = scenario
    df["method"] = method.kind
    df["epsilon"] = method.epsilon if method.epsilon is not None else float("nan")
    df["shots"] = pd.array([shots] * n, dtype="Int64")
    df["gamma"] = float(gamma)
    df["seed"] = pd.array([record.seed if shots is not None else None] * n, dtype="Int64")
    df["exact_energy_at_theta"] = pd.to_numeric(df["exact_energy_at_theta"], errors="coerce")
    return df[RUN_COLUMNS]


def cell_frame(
    scenario: str,
    method: Method,
    gamma: float,
    reference: Optional[RunRecord],
    runs: Sequence[RunRecord],
    shots: int,
) -> pd.DataFrame:
    parts = []
    if reference is not None:
        parts.append(run_frame(scenario, method, gamma, reference, None))
    parts += [run_frame(scenario, method, gamma, r, shots) for r in runs]
    if not parts:
        return pd.DataFrame(columns=RUN_COLUMNS)
    return pd.concat(parts, ignore_index=True)


# ---------- запись ----------
def write_csv(df: pd.DataFrame, path: str | os.PathLike) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    # пропуски -> пустые поля; lineterminator фиксирован, чтобы файлы совпадали побайтно
    df.to_csv(p, index=False, na_rep="", lineterminator="\n")
    return p


def write_manifest(doc: Dict[str, Any], path: str | os.PathLike) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    return p


def read_runs(path: str | os.PathLike) -> pd.DataFrame:
    df = pd.read_csv(path, dtype={"shots": "Int64", "seed": "Int64"})
    missing = [c for c in RUN_COLUMNS if c not in df.columns]
    if missing:
        raise InputError(f"{path}: нет колонок {missing}")
    return df
