# src/sim/states.py
"""
Чистые состояния и матрицы плотности, применение вентилей и прогон схем.

Вектор длины 2^n хранится как тензор формы (2,)*n в C-порядке, поэтому
кубит q (бит q индекса) живёт на оси n-1-q. У матрицы плотности строки лежат на
осях 0..n-1, столбцы на осях n..2n-1.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.core.errors import InputError
from src.sim.circuit import Circuit
from src.sim.gates import Gate

NORM_TOL = 1e-10


def apply_matrix(tensor: np.ndarray, u: np.ndarray, qubits: Sequence[int], n_qubits: int, offset: int = 0) -> np.ndarray:
    k = len(qubits)
    axes = [offset + n_qubits - 1 - q for q in qubits]
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


@dataclass(frozen=True, eq=False)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape[0] != 1 << self.n_qubits:
            raise InputError(f"Длина вектора {amps.shape[0]} != 2^{self.n_qubits}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise InputError(f"Состояние не нормировано: |psi|^2 = {norm:.12f}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    n_qubits: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        rho = np.asarray(self.entries, dtype=np.complex128)
        d = 1 << self.n_qubits
        rho = rho.reshape(d, d)
        tr = complex(np.trace(rho))
        if abs(tr - 1.0) > NORM_TOL:
            raise InputError(f"След матрицы плотности {tr.real:.12f} != 1")
        if np.max(np.abs(rho - rho.conj().T), initial=0.0) > NORM_TOL:
            raise InputError("Матрица плотности не эрмитова")
        object.__setattr__(self, "entries", rho)

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        a = state.amplitudes
        return cls(state.n_qubits, np.outer(a, a.conj()))

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def probabilities(self) -> np.ndarray:
        return np.clip(np.real(np.diag(self.entries)), 0.0, None)


def basis_state(n_qubits: int, bits: str) -> StateVector:
    """bits записан от старшего кубита к младшему: '10' -> индекс 2 (кубит 1 = 1)."""
    if len(bits) != n_qubits or any(c not in "01" for c in bits):
        raise InputError(f"Битовая строка {bits!r} не подходит для {n_qubits} кубит(ов)")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[int(bits, 2) if bits else 0] = 1.0
    return StateVector(n_qubits, amps)


def _check_gate(gate: Gate, n_qubits: int) -> None:
    if max(gate.qubits) >= n_qubits:
        raise InputError(f"{gate.kind} на {gate.qubits}: в состоянии только {n_qubits} кубит(ов)")


def _evolve_vector(amps: np.ndarray, gates, n: int) -> np.ndarray:
    psi = amps.reshape((2,) * n) if n else amps
    for g in gates:
        _check_gate(g, n)
        psi = apply_matrix(psi, g.matrix(), g.qubits, n)
    return np.ascontiguousarray(psi).reshape(-1)


def conjugate_tensor(rho_t: np.ndarray, u: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """rho -> U rho U^dagger на тензоре формы (2,)*2n."""
    rho_t = apply_matrix(rho_t, u, qubits, n)
    return apply_matrix(rho_t, u.conj(), qubits, n, offset=n)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    return StateVector(state.n_qubits, _evolve_vector(state.amplitudes, [gate], state.n_qubits))


def evolve_gates(state: StateVector, gates) -> StateVector:
    return StateVector(state.n_qubits, _evolve_vector(state.amplitudes, gates, state.n_qubits))


def run_pure(circuit: Circuit, init: StateVector) -> StateVector:
    if circuit.n_qubits != init.n_qubits:
        raise InputError(f"Схема на {circuit.n_qubits} кубитах, состояние на {init.n_qubits}")
    return evolve_gates(init, circuit.gates())
