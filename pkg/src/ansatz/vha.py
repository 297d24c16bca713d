# src/ansatz/vha.py
"""
Компиляция VHA-анзаца в схему вентилей.

Каждый множитель exp(i theta c P) реализуется Pauli-гаджетом: поворот базиса
(X -> H, Y -> RX(pi/2)), лестница CNOT к последнему кубиту строки, один
RZ(mu) с mu = -2 c theta, затем всё в обратном порядке. Угол каждого
параметризованного вентиля линеен по theta: mu_g = m_g * theta_{i(g)}.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.core.errors import InputError, InternalError
from src.hamiltonian.hubbard import HamiltonianDecomposition, HubbardSpec, build_hubbard, noninteracting_ground_state
from src.hamiltonian.pauli import PauliString
from src.sim.circuit import Circuit, assemble, schedule_layout
from src.sim.gates import Gate, cnot, h, rx, rz
from src.sim.states import StateVector

DEFAULT_ORDER = ("W", "T", "T_e", "T_o")


@dataclass(frozen=True, eq=False)
class VhaAnsatz:
    decomposition: HamiltonianDecomposition
    repetitions: int = 1
    initial_state: Optional[StateVector] = None
    order: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise InputError(f"Число повторений R >= 1, получено {self.repetitions}")
        labels = self.decomposition.labels
        order = self.order or tuple(lab for lab in DEFAULT_ORDER if lab in labels)
        if sorted(order) != sorted(labels):
            raise InputError(f"Порядок частей {order} не совпадает с разложением {labels}")
        object.__setattr__(self, "order", tuple(order))
        empty = [lab for lab in order if all(t.is_identity for t in self.decomposition.part(lab).terms)]
        if empty:
            raise InputError(f"Части {empty} без неединичных слагаемых: нечего параметризовать (например, U = 0)")
        if self.initial_state is None:
            object.__setattr__(self, "initial_state", noninteracting_ground_state(self.decomposition.spec))
        elif self.initial_state.n_qubits != self.decomposition.n_qubits:
            raise InputError("Начальное состояние не совпадает по числу кубитов с гамильтонианом")

    @property
    def n_parts(self) -> int:
        return len(self.order)


@dataclass(frozen=True)
class ParamBinding:
    gate_index: int
    theta_index: int
    slope: float


@dataclass(frozen=True)
class CountReport:
    P: int
    R: int
    G: int

    @property
    def N_fd(self) -> int:
        return self.R * self.P + 1

    @property
    def N_ps(self) -> int:
        return 2 * self.G + 1

    def as_dict(self) -> Dict[str, int]:
        return {"P": self.P, "R": self.R, "G": self.G, "N_fd": self.N_fd, "N_ps": self.N_ps}


@dataclass(frozen=True, eq=False)
class CompiledAnsatz:
    n_qubits: int
    gates: Tuple[Gate, ...]
    bindings: Tuple[ParamBinding, ...]
    P: int
    R: int
    initial_state: StateVector
    theta_labels: Tuple[str, ...] = ()
    ansatz: Optional[VhaAnsatz] = None
    layout: Tuple[Tuple[int, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.layout:
            object.__setattr__(self, "layout", tuple(tuple(m) for m in schedule_layout(self.gates)))
        bound = [b.gate_index for b in self.bindings]
        if len(set(bound)) != len(bound):
            raise InternalError("Вентиль привязан к нескольким параметрам")
        for b in self.bindings:
            g = self.gates[b.gate_index]
            if not g.is_rotation or g.angle is not None:
                raise InternalError(f"Привязка {b} указывает не на свободный поворот: {g}")
            if not np.isfinite(b.slope) or b.slope == 0.0:
                raise InternalError(f"Недопустимый наклон привязки {b}")
        free = {i for i, g in enumerate(self.gates) if g.is_rotation and g.angle is None}
        if free != set(bound):
            raise InternalError(f"Вентили без привязки: {sorted(free - set(bound))}")
        if sorted({b.theta_index for b in self.bindings}) != list(range(self.n_params)):
            raise InternalError("Привязки не покрывают все индексы theta 0..R*P-1")
        if self.initial_state.n_qubits != self.n_qubits:
            raise InputError("Начальное состояние не совпадает по числу кубитов со схемой")

    @property
    def n_params(self) -> int:
        return self.R * self.P

    @property
    def G(self) -> int:
        return len(self.bindings)

    @property
    def slopes(self) -> np.ndarray:
        return np.array([b.slope for b in self.bindings])

    @property
    def theta_indices(self) -> np.ndarray:
        return np.array([b.theta_index for b in self.bindings], dtype=int)

    def moment_of(self) -> Dict[int, int]:
        return {i: k for k, m in enumerate(self.layout) for i in m}


def exp_pauli_rotation(term: PauliString, theta_index: int, gate_offset: int = 0) -> Tuple[List[Gate], List[ParamBinding]]:
    """
    exp(i theta c P) точно. Единичная строка даёт только глобальную фазу:
    вентилей и привязок нет.
    """
    if term.is_identity:
        return [], []
    basis: List[Gate] = []
    unbasis: List[Gate] = []
    for q, p in term.factors:
        if p == "X":
            basis.append(h(q))
            unbasis.append(h(q))
        elif p == "Y":
            # Y = RX(-pi/2) Z RX(pi/2)
            basis.append(rx(q, np.pi / 2))
            unbasis.append(rx(q, -np.pi / 2))
    qs = term.qubits
    ladder = [cnot(qs[k], qs[k + 1]) for k in range(len(qs) - 1)]
    gates = basis + ladder + [rz(qs[-1])] + ladder[::-1] + unbasis
    pos = gate_offset + len(basis) + len(ladder)
    return gates, [ParamBinding(pos, theta_index, -2.0 * term.coefficient)]


def compile_ansatz(ansatz: VhaAnsatz) -> CompiledAnsatz:
    """Множитель справа применяется первым: повторение k, части в порядке order (W, T_e, T_o)."""
    decomp = ansatz.decomposition
    decomp.check_commuting()
    gates: List[Gate] = []
    bindings: List[ParamBinding] = []
    labels: List[str] = []
    P = ansatz.n_parts
    for rep in range(ansatz.repetitions):
        for alpha, label in enumerate(ansatz.order):
            theta_index = rep * P + alpha
            labels.append(f"{label}#{rep + 1}")
            for term in decomp.part(label).terms:
                gs, bs = exp_pauli_rotation(term, theta_index, len(gates))
                gates += gs
                bindings += bs
    return CompiledAnsatz(
        n_qubits=decomp.n_qubits,
        gates=tuple(gates),
        bindings=tuple(bindings),
        P=P,
        R=ansatz.repetitions,
        initial_state=ansatz.initial_state,
        theta_labels=tuple(labels),
        ansatz=ansatz,
    )


def bind_angles(compiled: CompiledAnsatz, theta: Sequence[float]) -> np.ndarray:
    th = np.asarray(theta, dtype=float).reshape(-1)
    if th.shape[0] != compiled.n_params:
        raise InputError(f"Длина theta {th.shape[0]} != R*P = {compiled.n_params}")
    return compiled.slopes * th[compiled.theta_indices]


def circuit_from_angles(compiled: CompiledAnsatz, mu: Sequence[float]) -> Circuit:
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (compiled.G,):
        raise InputError(f"Ожидалось {compiled.G} углов, получено {mu.shape}")
    gates = list(compiled.gates)
    for b, angle in zip(compiled.bindings, mu):
        gates[b.gate_index] = gates[b.gate_index].with_angle(angle)
    return assemble(gates, compiled.layout, compiled.n_qubits)


def bind(compiled: CompiledAnsatz, theta: Sequence[float]) -> Circuit:
    return circuit_from_angles(compiled, bind_angles(compiled, theta))


def count_report(compiled: CompiledAnsatz) -> CountReport:
    return CountReport(P=compiled.P, R=compiled.R, G=compiled.G)


def compile_hubbard(spec: HubbardSpec, repetitions: int) -> Tuple[CompiledAnsatz, HamiltonianDecomposition]:
    decomp = build_hubbard(spec)
    return compile_ansatz(VhaAnsatz(decomp, repetitions)), decomp


def count_table(sites: Sequence[int], reps: Sequence[int], boundary: str = "periodic") -> pd.DataFrame:
    """Таблица P, R, G, N_fd, N_ps по сетке (M, R). Начальное состояние не строится."""
    rows = []
    for m in sites:
        spec = HubbardSpec(sites=int(m), boundary=boundary)
        decomp = build_hubbard(spec)
        dummy = StateVector(spec.n_qubits, np.eye(1, 1 << spec.n_qubits, 0).ravel())
        for r in reps:
            compiled = compile_ansatz(VhaAnsatz(decomp, int(r), initial_state=dummy))
            rows.append({"M": int(m), **count_report(compiled).as_dict()})
    return pd.DataFrame(rows, columns=["M", "P", "R", "G", "N_fd", "N_ps"])


def export_template(compiled: CompiledAnsatz) -> str:
    """
    JSON-шаблон схемы для отладки:
      {"n_qubits": int, "n_params": int,
       "gates": [{"index", "kind", "qubits", "angle", "theta_index", "slope", "moment"}]}
    angle = null у параметризованных RZ; theta_index/slope = null у фиксированных вентилей.
    """
    by_gate = {b.gate_index: b for b in compiled.bindings}
    moment = compiled.moment_of()
    gates = []
    for i, g in enumerate(compiled.gates):
        b = by_gate.get(i)
        gates.append({
            "index": i,
            "kind": g.kind,
            "qubits": list(g.qubits),
            "angle": g.angle,
            "theta_index": None if b is None else b.theta_index,
            "slope": None if b is None else b.slope,
            "moment": moment[i],
        })
    doc = {"n_qubits": compiled.n_qubits, "n_params": compiled.n_params, "gates": gates}
    return json.dumps(doc, indent=2)
