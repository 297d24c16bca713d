# src/experiments/run_suite.py
"""
python -m src.experiments.run_suite --scenario simple --out output
python -m src.experiments.run_suite --config config/scenarios/hubbard2.yaml --gamma 0 --gamma 1e-4
python -m src.experiments.run_suite --counts
"""
from __future__ import annotations

import argparse
import sys
from typing import Any, Dict, Optional, Sequence

from src.ansatz.vha import count_table
from src.core.config import load_yaml
from src.core.errors import LabError
from src.core.log import get_logger, setup_logging
from src.experiments.scenarios import KINDS, resolve_scenario
from src.experiments.suite import run_suite

log = get_logger("src.experiments")

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description="Градиенты fd/ps в VHA-VQE под шумом выстрелов и деполяризацией.")
    p.add_argument("--config", help="YAML/JSON документ сценария; флаги сильнее ключей документа")
    p.add_argument("--scenario", choices=KINDS)
    p.add_argument("--name", help="Имя каталога сценария внутри --out")
    p.add_argument("--sites", type=int, help="M для hubbard: 2, 4 или 6")
    p.add_argument("--reps", type=int, help="Число повторений R")
    p.add_argument("--method", action="append", help="fd:<eps> или ps; можно несколько раз")
    p.add_argument("--shots", type=int, help="Выстрелов на Pauli-строку на одно вычисление энергии")
    p.add_argument("--gamma", action="append", type=float, help="Скорость деполяризации; можно несколько раз")
    p.add_argument("--eta", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--runs", type=int, help="Шумных прогонов на ячейку")
    p.add_argument("--seed", type=int, help="Базовый seed")
    p.add_argument("--theta0", help="Список через запятую (одно число растягивается на все параметры)")
    p.add_argument("--orbitals", help="Занятые одночастичные уровни через запятую (вырожденный уровень Ферми)")
    p.add_argument("--out", help="Корневой каталог вывода")
    p.add_argument("--counts", action="store_true", help="Только таблица P, R, G, N_fd, N_ps для M in {2,4,6}, R in {1,2}")
    p.add_argument("--log-level", help="DEBUG, INFO, WARNING")
    return p


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    keys = ("scenario", "name", "sites", "reps", "method", "shots", "gamma", "eta",
            "iterations", "runs", "seed", "theta0", "orbitals", "out")
    return {k: getattr(args, k) for k in keys}


def print_counts() -> None:
    table = count_table([2, 4, 6], [1, 2])
    print(table.to_string(index=False))


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    if args.counts:
        print_counts()
        return EXIT_OK
    try:
        config = load_yaml(args.config) if args.config else {}
        scenario = resolve_scenario(config, overrides_from_args(args))
        scenario.validate()
        problem = scenario.problem()
        scenario.initial_theta(problem.compiled.n_params)
    except LabError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG

    log.info(
        "Сценарий %s: %d метод(ов) x %d gamma, %d прогонов, E_ref=%.10f (%s)",
        scenario.name, len(scenario.methods), len(scenario.gammas), scenario.runs,
        problem.e_ref, problem.e_ref_source,
    )
    result = run_suite(scenario, problem)
    ok = len(result.cells) - len(result.failed)
    print(f"Итог: OK={ok}, WARN={len(result.failed)}")
    print(f"[OK] Манифест: {result.manifest_path}")
    return EXIT_PARTIAL if result.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
