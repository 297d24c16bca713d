# src/experiments/scenarios.py
"""
Сценарии: однокубитная схема H -> RZ(theta) с наблюдаемой X и кольца Хаббарда.

Конфигурация собирается в три слоя: встроенный профиль < документ --config
(YAML или JSON) < флаги командной строки.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.ansatz.vha import CompiledAnsatz, ParamBinding, compile_hubbard
from src.core.config import density_cap
from src.core.errors import ConfigError, InputError
from src.core.log import get_logger
from src.gradients.engine import Backend, EnergyEvaluator, require_density_cap
from src.hamiltonian.hubbard import HubbardSpec, exact_ground_energy, half_filling_sector
from src.hamiltonian.pauli import PauliString, PauliSum
from src.hamiltonian.reference import ansatz_optimal_energy
from src.optim.descent import Method
from src.sim.gates import h, rz
from src.sim.states import basis_state

log = get_logger(__name__)

KINDS = ("simple", "hubbard")
HUBBARD_SITES = (2, 4, 6)
SIMPLE_E_REF = -1.0

# встроенные профили; ключи совпадают с флагами CLI
PROFILES: Dict[str, Dict[str, Any]] = {
    "simple": {
        "scenario": "simple", "reps": 1, "shots": 50000, "eta": 0.5, "iterations": 50,
        "method": ["fd:0.2", "fd:0.05", "fd:0.02", "ps"], "gamma": [0.0], "theta0": [2.0],
    },
    "hubbard2": {
        "scenario": "hubbard", "sites": 2, "reps": 1, "shots": 50000, "eta": 0.1, "iterations": 50,
        "method": ["fd:0.5", "fd:0.2", "fd:0.05", "ps"], "gamma": [0.0],
    },
    # на 4 узлах прогонов в исходных сценариях нет; берём параметры 6 узлов
    "hubbard4": {
        "scenario": "hubbard", "sites": 4, "reps": 1, "shots": 50000, "eta": 0.03, "iterations": 50,
        "method": ["fd:0.1", "fd:0.05", "fd:0.01", "ps"], "gamma": [0.0],
    },
    "hubbard6": {
        "scenario": "hubbard", "sites": 6, "reps": 2, "shots": 50000, "eta": 0.03, "iterations": 50,
        "method": ["fd:0.1", "fd:0.05", "fd:0.01", "ps"], "gamma": [0.0],
    },
}
COMMON_DEFAULTS: Dict[str, Any] = {"runs": 5, "seed": 2021, "out": "output", "theta0": None, "orbitals": None}
KEYS = ("name", "scenario", "sites", "reps", "method", "shots", "gamma", "eta", "iterations",
        "runs", "seed", "theta0", "orbitals", "out")


@dataclass(frozen=True, eq=False)
class Problem:
    """Скомпилированная схема, гамильтониан и E_ref; вычислители строятся на каждый прогон."""
    name: str
    compiled: CompiledAnsatz
    hamiltonian: PauliSum
    e_ref: float
    e_ref_source: str

    @property
    def n_qubits(self) -> int:
        return self.compiled.n_qubits

    def evaluator(self, backend: Backend = Backend(), seed: Optional[int] = None) -> EnergyEvaluator:
        return EnergyEvaluator(self.compiled, self.hamiltonian, backend, seed)


def simple_ansatz() -> CompiledAnsatz:
    """|0> -> H -> RZ(theta): <X> = cos(theta)."""
    return CompiledAnsatz(
        n_qubits=1,
        gates=(h(0), rz(0)),
        bindings=(ParamBinding(1, 0, 1.0),),
        P=1,
        R=1,
        initial_state=basis_state(1, "0"),
        theta_labels=("theta",),
    )


def simple_problem() -> Problem:
    return Problem("simple", simple_ansatz(), PauliSum((PauliString.build(1.0, {0: "X"}),)), SIMPLE_E_REF, "analytic")


def build_simple_scenario(backend: Backend = Backend(), seed: Optional[int] = None) -> EnergyEvaluator:
    return simple_problem().evaluator(backend, seed)


def hubbard_problem(
    sites: int,
    reps: int,
    orbitals: Optional[Sequence[int]] = None,
    boundary: str = "periodic",
    **oracle: Any,
) -> Problem:
    """
    U = t = 1, половинное заполнение. E_ref: точная диагонализация при M=2,
    иначе оптимум анзаца (оракул в секторе).
    """
    if int(sites) not in HUBBARD_SITES:
        raise InputError(f"Сценарий hubbard поддерживает M из {HUBBARD_SITES}, получено {sites}")
    spec = HubbardSpec(
        sites=int(sites),
        boundary=boundary,
        orbitals=None if orbitals is None else tuple(orbitals),
    )
    compiled, decomp = compile_hubbard(spec, int(reps))
    if spec.sites == 2:
        e_ref, source = exact_ground_energy(decomp, half_filling_sector(spec)), "exact-diagonalization"
    else:
        log.info("Оракул E_ref для M=%d, R=%d: мультистарт в секторе", spec.sites, reps)
        e_ref, source = ansatz_optimal_energy(compiled, decomp, **oracle), "ansatz-optimal"
    return Problem(f"hubbard{spec.sites}", compiled, decomp.full(), float(e_ref), source)


def build_hubbard_scenario(
    sites: int,
    reps: int,
    backend: Backend = Backend(),
    seed: Optional[int] = None,
    orbitals: Optional[Sequence[int]] = None,
) -> Tuple[EnergyEvaluator, float]:
    # лимит проверяется до дорогого оракула
    require_density_cap(2 * int(sites), backend)
    problem = hubbard_problem(sites, reps, orbitals)
    return problem.evaluator(backend, seed), problem.e_ref


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    sites: Optional[int]
    reps: int
    methods: Tuple[Method, ...]
    shots: int
    gammas: Tuple[float, ...]
    eta: float
    iterations: int
    runs: int = 5
    seed: int = 2021
    theta0: Optional[Tuple[float, ...]] = None
    orbitals: Optional[Tuple[int, ...]] = None
    out: str = "output"

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"scenario должен быть одним из {KINDS}, получено {self.kind!r}")
        if self.kind == "simple":
            if self.sites is not None or self.reps != 1:
                raise ConfigError("Сценарий simple: 1 кубит, 1 параметр (sites не задаётся, reps = 1)")
        elif self.sites not in HUBBARD_SITES:
            raise ConfigError(f"Сценарий hubbard требует чётное M из {HUBBARD_SITES}, получено {self.sites}")
        if self.reps < 1:
            raise ConfigError(f"reps >= 1, получено {self.reps}")
        if not self.methods:
            raise ConfigError("Пустая сетка методов")
        if len({m.label for m in self.methods}) != len(self.methods):
            raise ConfigError(f"Методы повторяются: {[m.label for m in self.methods]}")
        if self.shots < 1 or self.runs < 1:
            raise ConfigError(f"shots и runs >= 1, получено shots={self.shots}, runs={self.runs}")
        if not self.gammas or any(not np.isfinite(g) or g < 0 for g in self.gammas):
            raise ConfigError(f"gamma: непустой список значений >= 0, получено {self.gammas}")
        if len(set(self.gammas)) != len(self.gammas):
            raise ConfigError(f"gamma повторяются: {self.gammas}")
        if not self.eta > 0 or self.iterations < 1:
            raise ConfigError(f"eta > 0 и iterations >= 1, получено eta={self.eta}, iterations={self.iterations}")

    @property
    def n_qubits(self) -> int:
        return 1 if self.kind == "simple" else 2 * int(self.sites)

    @property
    def noisy(self) -> bool:
        return any(g > 0 for g in self.gammas)

    def validate(self) -> None:
        """Проверки, зависящие от окружения (лимит density-бэкенда)."""
        if self.noisy and self.n_qubits > density_cap():
            raise ConfigError(
                f"{self.name}: gamma > 0 требует density-бэкенда, а {self.n_qubits} кубитов > "
                f"лимита {density_cap()} (VHA_LAB_DENSITY_CAP); прогоны с деполяризацией "
                f"для 6 узлов не выполняются"
            )

    def initial_theta(self, n_params: int) -> np.ndarray:
        if self.theta0 is None:
            return np.full(n_params, 2.0 if self.kind == "simple" else 0.1)
        th = np.asarray(self.theta0, dtype=float)
        if th.shape == (1,) and n_params > 1:
            return np.full(n_params, th[0])
        if th.shape != (n_params,):
            raise InputError(f"theta0 длины {th.shape[0]}, анзац ожидает {n_params}")
        return th

    def problem(self) -> Problem:
        if self.kind == "simple":
            return simple_problem()
        return hubbard_problem(self.sites, self.reps, self.orbitals)

    def echo(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "scenario": self.kind,
            "sites": self.sites,
            "reps": self.reps,
            "method": [m.label for m in self.methods],
            "shots": self.shots,
            "gamma": list(self.gammas),
            "eta": self.eta,
            "iterations": self.iterations,
            "runs": self.runs,
            "seed": self.seed,
            "theta0": None if self.theta0 is None else list(self.theta0),
            "orbitals": None if self.orbitals is None else list(self.orbitals),
            "out": self.out,
        }


def _as_list(value: Any) -> list:
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return list(value)
    if isinstance(value, str):
        return [v for v in (s.strip() for s in value.split(",")) if v]
    return [value]


def profile_key(kind: str, sites: Optional[int]) -> str:
    if kind == "simple":
        return "simple"
    if kind != "hubbard":
        raise ConfigError(f"scenario должен быть одним из {KINDS}, получено {kind!r}")
    key = f"hubbard{2 if sites is None else int(sites)}"
    if key not in PROFILES:
        raise ConfigError(f"Сценарий hubbard требует чётное M из {HUBBARD_SITES}, получено {sites}")
    return key


def resolve_scenario(config: Optional[Mapping[str, Any]] = None, overrides: Optional[Mapping[str, Any]] = None) -> Scenario:
    """Профиль < config < overrides (None во overrides = флаг не задан)."""
    doc = dict(config or {})
    unknown = sorted(set(doc) - set(KEYS))
    if unknown:
        raise ConfigError(f"Неизвестные ключи конфигурации: {unknown}; допустимы {list(KEYS)}")
    doc.update({k: v for k, v in (overrides or {}).items() if v is not None and v != []})
    key = profile_key(str(doc.get("scenario", "simple")), doc.get("sites"))
    merged = {**COMMON_DEFAULTS, **PROFILES[key], **doc}
    try:
        methods = tuple(Method.parse(m) for m in _as_list(merged["method"]))
        theta0 = _as_list(merged["theta0"])
        orbitals = _as_list(merged["orbitals"])
        return Scenario(
            name=str(merged.get("name") or key),
            kind=str(merged["scenario"]),
            sites=None if merged.get("sites") is None else int(merged["sites"]),
            reps=int(merged["reps"]),
            methods=methods,
            shots=int(merged["shots"]),
            gammas=tuple(float(g) for g in _as_list(merged["gamma"])),
            eta=float(merged["eta"]),
            iterations=int(merged["iterations"]),
            runs=int(merged["runs"]),
            seed=int(merged["seed"]),
            theta0=tuple(float(x) for x in theta0) or None,
            orbitals=tuple(int(i) for i in orbitals) or None,
            out=str(merged["out"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Неверное значение в конфигурации: {exc}") from exc
