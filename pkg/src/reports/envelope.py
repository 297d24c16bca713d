# src/reports/envelope.py
"""Огибающие min/max отклонения по шумным прогонам одной ячейки (метод, gamma)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from src.core.errors import InputError
from src.optim.descent import RunRecord

ENVELOPE_COLUMNS = ["iteration", "abs_dev_min", "abs_dev_max", "rel_dev_min", "rel_dev_max", "runs"]


@dataclass(frozen=True, eq=False)
class EnvelopeReport:
    frame: pd.DataFrame
    n_runs: int

    def width(self, column: str = "abs_dev", start: Optional[int] = None, stop: Optional[int] = None) -> float:
        """Средняя ширина max - min по итерациям start..stop включительно."""
        df = self.frame
        mask = np.ones(len(df), dtype=bool)
        if start is not None:
            mask &= df["iteration"].to_numpy() >= start
        if stop is not None:
            mask &= df["iteration"].to_numpy() <= stop
        sel = df.loc[mask]
        if sel.empty:
            raise InputError(f"Нет итераций в [{start}, {stop}]")
        return float((sel[f"{column}_max"] - sel[f"{column}_min"]).mean())

    def contains(self, record: RunRecord, tol: float = 0.0) -> bool:
        env = self.frame.set_index("iteration")
        for row in record.rows:
            if row.iteration not in env.index:
                return False
            lo, hi = env.at[row.iteration, "abs_dev_min"], env.at[row.iteration, "abs_dev_max"]
            if not lo - tol <= row.abs_dev <= hi + tol:
                return False
        return True


def build_envelope(records: Sequence[RunRecord]) -> EnvelopeReport:
    """Если прогон прервался раньше, у поздних итераций runs меньше числа прогонов."""
    if not records:
        raise InputError("Огибающая требует хотя бы один прогон")
    frames = []
    for k, rec in enumerate(records):
        df = rec.to_frame()[["iteration", "abs_dev", "rel_dev"]]
        df["run"] = k
        frames.append(df)
    all_rows = pd.concat(frames, ignore_index=True)
    env = (
        all_rows.groupby("iteration", sort=True)
        .agg(
            abs_dev_min=("abs_dev", "min"),
            abs_dev_max=("abs_dev", "max"),
            rel_dev_min=("rel_dev", "min"),
            rel_dev_max=("rel_dev", "max"),
            runs=("run", "nunique"),
        )
        .reset_index()
    )
    return EnvelopeReport(env[ENVELOPE_COLUMNS], len(records))
