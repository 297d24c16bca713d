# src/optim/descent.py
"""Наискорейший спуск с фиксированным шагом: theta <- theta - eta * grad E."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.core.errors import InputError, InternalError
from src.core.log import get_logger
from src.gradients.engine import (
    EnergyEvaluator,
    GradientReport,
    finite_difference_gradient,
    parameter_shift_gradient,
)

log = get_logger(__name__)

DIVERGENCE_FACTOR = 1e3


@dataclass(frozen=True)
class Method:
    kind: str  # "fd" | "ps"
    epsilon: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind == "fd":
            if self.epsilon is None or not self.epsilon > 0:
                raise InputError(f"fd требует epsilon > 0, получено {self.epsilon}")
        elif self.kind == "ps":
            if self.epsilon is not None:
                raise InputError("ps не принимает epsilon")
        else:
            raise InputError(f"Метод должен быть fd:<eps> или ps, получено {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "Method":
        """'fd:0.02' или 'ps'."""
        s = str(text).strip().lower()
        if s == "ps":
            return cls("ps")
        if s.startswith("fd:"):
            try:
                return cls("fd", float(s[3:]))
            except ValueError:
                raise InputError(f"Не разобрать шаг в {text!r}") from None
        raise InputError(f"Метод должен быть fd:<eps> или ps, получено {text!r}")

    @property
    def label(self) -> str:
        return "ps" if self.kind == "ps" else f"fd:{self.epsilon:g}"

    @property
    def slug(self) -> str:
        """Имя каталога без двоеточия."""
        return "ps" if self.kind == "ps" else f"fd{self.epsilon:g}"

    def gradient(self, ev: EnergyEvaluator, theta: np.ndarray) -> GradientReport:
        if self.kind == "fd":
            return finite_difference_gradient(ev, theta, self.epsilon)
        return parameter_shift_gradient(ev, theta, with_energy=True)

    def circuits_per_step(self, ev: EnergyEvaluator) -> int:
        c = ev.compiled
        return c.n_params + 1 if self.kind == "fd" else 2 * c.G + 1


@dataclass(frozen=True)
class DescentConfig:
    eta: float
    iterations: int
    method: Method
    theta0: Tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.eta > 0:
            raise InputError(f"eta > 0, получено {self.eta}")
        if int(self.iterations) < 1:
            raise InputError(f"iterations >= 1, получено {self.iterations}")
        object.__setattr__(self, "theta0", tuple(float(x) for x in self.theta0))

    def echo(self) -> Dict[str, Any]:
        return {
            "eta": self.eta,
            "iterations": self.iterations,
            "method": self.method.label,
            "theta0": list(self.theta0),
        }


@dataclass(frozen=True)
class IterationRow:
    iteration: int
    theta: Tuple[float, ...]
    energy: float
    abs_dev: float
    rel_dev: float
    exact_energy: Optional[float]
    cum_circuit_evals: int


@dataclass
class RunRecord:
    rows: List[IterationRow]
    config: DescentConfig
    e_ref: float
    seed: Optional[int] = None
    backend: str = "exact"
    status: str = "ok"  # ok | diverged | non-finite
    message: str = ""
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.rows])

    @property
    def final_theta(self) -> np.ndarray:
        return np.array(self.rows[-1].theta)

    def to_frame(self) -> pd.DataFrame:
        records = []
        for r in self.rows:
            d = asdict(r)
            d["theta_json"] = json.dumps(list(r.theta))
            del d["theta"]
            records.append(d)
        return pd.DataFrame.from_records(
            records,
            columns=["iteration", "theta_json", "energy", "abs_dev", "rel_dev", "exact_energy", "cum_circuit_evals"],
        )


def _row(t: int, theta: np.ndarray, energy: float, e_ref: float, exact: Optional[float], cum: int) -> IterationRow:
    dev = abs(energy - e_ref)
    rel = dev / abs(e_ref) if e_ref != 0 else float("nan")
    return IterationRow(t, tuple(float(x) for x in theta), float(energy), float(dev), float(rel), exact, int(cum))


def run_descent(
    ev: EnergyEvaluator,
    config: DescentConfig,
    e_ref: float,
    exact_ev: Optional[EnergyEvaluator] = None,
) -> RunRecord:
    """
    Строка t: theta^t, энергия в theta^t тем же бэкендом, что и градиенты,
    cum_circuit_evals = t * (N_fd | N_ps). Для fd энергия берётся из прохода
    градиента, для ps она входит в N_ps (+1 схема).
    """
    theta = np.array(config.theta0, dtype=float)
    if theta.shape != (ev.compiled.n_params,):
        raise InputError(f"theta0 длины {theta.shape[0]}, анзац ожидает {ev.compiled.n_params}")
    per_step = config.method.circuits_per_step(ev)
    record = RunRecord([], config, float(e_ref), ev.seed, ev.backend.describe())
    limit = DIVERGENCE_FACTOR * abs(e_ref) if e_ref != 0 else np.inf

    def exact_at(th: np.ndarray) -> Optional[float]:
        return None if exact_ev is None else exact_ev.energy(th)

    def guard(energy: float, grad: Optional[np.ndarray], t: int) -> bool:
        if not np.isfinite(energy) or (grad is not None and not np.all(np.isfinite(grad))):
            record.status, record.message = "non-finite", f"нечисловая энергия/градиент на итерации {t}"
        elif abs(energy) > limit:
            record.status, record.message = "diverged", f"|E|={abs(energy):.3e} > {limit:.3e} на итерации {t}"
        else:
            return True
        log.warning("Спуск прерван: %s", record.message)
        return False

    for t in range(config.iterations):
        report = config.method.gradient(ev, theta)
        if report.circuit_evaluations != per_step:
            raise InternalError(f"Учёт схем разошёлся: {report.circuit_evaluations} != {per_step}")
        energy = float(report.energy_at_theta)
        ok = guard(energy, report.gradient, t)
        record.rows.append(_row(t, theta, energy, e_ref, exact_at(theta), t * per_step))
        if not ok:
            return record
        log.debug("t=%d E=%.10f |grad|=%.3e", t, energy, float(np.linalg.norm(report.gradient)))
        theta = theta - config.eta * report.gradient
    t = config.iterations
    energy = ev.energy(theta)
    guard(energy, None, t)
    record.rows.append(_row(t, theta, energy, e_ref, exact_at(theta), t * per_step))
    return record
