# src/experiments/suite.py
"""
Сетка (метод x gamma): в каждой ячейке один эталонный прогон без выстрелов
(exact при gamma = 0, noisy-exact при gamma > 0) и `runs` шумных прогонов
с N выстрелами. Результат: runs.csv и envelope.csv на ячейку, manifest.json
на сценарий.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from src.ansatz.vha import count_report
from src.core.config import density_cap, settings
from src.core.log import get_logger
from src.gradients.engine import Backend, EnergyEvaluator
from src.experiments.scenarios import Problem, Scenario
from src.optim.descent import DescentConfig, Method, RunRecord, run_descent
from src.reports.envelope import EnvelopeReport, build_envelope
from src.reports.tables import cell_frame, write_csv, write_manifest

log = get_logger(__name__)


def run_seed(base: int, method: Method, gamma: float, run: int) -> int:
    """Стабильный хеш: не зависит от PYTHONHASHSEED и порядка ячеек."""
    key = f"{method.label}|{float(gamma)!r}|{int(run)}".encode("utf-8")
    return int(base) + zlib.crc32(key) % 2**31


def cell_dirname(method: Method, gamma: float) -> str:
    return f"{method.slug}__gamma{float(gamma):g}"


@dataclass
class CellResult:
    method: Method
    gamma: float
    directory: Path
    reference: Optional[RunRecord] = None
    runs: List[RunRecord] = field(default_factory=list)
    envelope: Optional[EnvelopeReport] = None
    error: str = ""

    @property
    def ok(self) -> bool:
        if self.error:
            return False
        records = ([self.reference] if self.reference is not None else []) + self.runs
        return all(r.ok for r in records)

    def summary(self) -> Dict[str, Any]:
        return {
            "method": self.method.label,
            "gamma": self.gamma,
            "dir": self.directory.name,
            "status": "ok" if self.ok else "failed",
            "error": self.error,
            "reference": None if self.reference is None else {
                "backend": self.reference.backend,
                "status": self.reference.status,
                "message": self.reference.message,
            },
            "runs": [{"seed": r.seed, "backend": r.backend, "status": r.status, "message": r.message} for r in self.runs],
        }


@dataclass
class SuiteResult:
    scenario: Scenario
    problem: Problem
    cells: List[CellResult]
    root: Path

    @property
    def failed(self) -> List[CellResult]:
        return [c for c in self.cells if not c.ok]

    @property
    def manifest_path(self) -> Path:
        return self.root / "manifest.json"


def _run_cell(
    scenario: Scenario,
    problem: Problem,
    method: Method,
    gamma: float,
    exact_ev: Optional[EnergyEvaluator],
    root: Path,
) -> CellResult:
    cell = CellResult(method, float(gamma), root / cell_dirname(method, gamma))
    try:
        config = DescentConfig(
            eta=scenario.eta,
            iterations=scenario.iterations,
            method=method,
            theta0=tuple(scenario.initial_theta(problem.compiled.n_params)),
        )
        ref_ev = problem.evaluator(Backend.for_run(None, gamma))
        cell.reference = run_descent(ref_ev, config, problem.e_ref, exact_ev)
        for k in range(scenario.runs):
            ev = problem.evaluator(Backend.for_run(scenario.shots, gamma), seed=run_seed(scenario.seed, method, gamma, k))
            cell.runs.append(run_descent(ev, config, problem.e_ref, exact_ev))
        cell.envelope = build_envelope(cell.runs)
    except Exception as exc:  # ячейка падает целиком, сетка идёт дальше
        cell.error = f"{type(exc).__name__}: {exc}"
        log.warning("%s / gamma=%g: %s", method.label, gamma, cell.error)

    frame = cell_frame(scenario.name, method, gamma, cell.reference, cell.runs, scenario.shots)
    write_csv(frame, cell.directory / "runs.csv")
    if cell.envelope is not None:
        write_csv(cell.envelope.frame, cell.directory / "envelope.csv")
    if cell.ok:
        final = cell.reference.rows[-1]
        log.info(
            "%s / %s / gamma=%g: |E - E_ref| эталона %.3e, ширина огибающей %.3e",
            scenario.name, method.label, gamma, final.abs_dev, cell.envelope.width(),
        )
    elif not cell.error:
        log.warning("%s / %s / gamma=%g: часть прогонов прервана", scenario.name, method.label, gamma)
    return cell


def manifest(result: SuiteResult) -> Dict[str, Any]:
    problem, scenario = result.problem, result.scenario
    return {
        "scenario": scenario.echo(),
        "e_ref": {"value": problem.e_ref, "source": problem.e_ref_source},
        "counts": count_report(problem.compiled).as_dict(),
        "n_qubits": problem.n_qubits,
        "density_cap": density_cap(),
        "cells": [c.summary() for c in result.cells],
    }


def run_suite(scenario: Scenario, problem: Optional[Problem] = None) -> SuiteResult:
    """
    Ошибки конфигурации (лимит density-бэкенда, сценарий) поднимаются до
    старта; ошибки внутри ячейки записываются в манифест, сетка продолжается.
    """
    scenario.validate()
    problem = problem or scenario.problem()
    root = Path(scenario.out) / scenario.name
    root.mkdir(parents=True, exist_ok=True)
    exact_ev = None
    if problem.n_qubits <= int(settings()["exact_diagnostic_cap"]):
        exact_ev = problem.evaluator(Backend.exact())

    result = SuiteResult(scenario, problem, [], root)
    for method in scenario.methods:
        for gamma in scenario.gammas:
            result.cells.append(_run_cell(scenario, problem, method, gamma, exact_ev, root))
    write_manifest(manifest(result), result.manifest_path)
    return result
