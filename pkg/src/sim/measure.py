# src/sim/measure.py
from __future__ import annotations

from typing import List, Optional, Union

import numpy as np

from src.core.errors import InputError
from src.hamiltonian.pauli import PauliString, PauliSum
from src.sim.gates import Gate, h, rx
from src.sim.noise import NoiseModel, depolarize_tensor
from src.sim.states import DensityMatrix, StateVector, conjugate_tensor, evolve_gates

State = Union[StateVector, DensityMatrix]


def _check_width(state: State, n_needed: int) -> None:
    if n_needed > state.n_qubits:
        raise InputError(f"Наблюдаемая на {n_needed} кубитах, состояние на {state.n_qubits}")


def pauli_expectation(state: State, term: PauliString) -> float:
    """<P> без коэффициента строки."""
    _check_width(state, term.min_qubits())
    if term.is_identity:
        return 1.0
    idx = np.arange(state.dim, dtype=np.int64)
    targets, phases = term.action(idx)
    if isinstance(state, StateVector):
        a = state.amplitudes
        val = np.sum(np.conj(a[targets]) * phases * a)
    else:
        # tr(P rho) = sum_c phase(c) rho[c, c^f]
        val = np.sum(phases * state.entries[idx, targets])
    return float(np.real(val))


def expectation(state: State, observable: Union[PauliSum, PauliString]) -> float:
    if isinstance(observable, PauliString):
        return observable.coefficient * pauli_expectation(state, observable)
    _check_width(state, observable.min_qubits())
    return float(sum(t.coefficient * pauli_expectation(state, t) for t in observable.terms))


def basis_change_gates(term: PauliString) -> List[Gate]:
    """
    Повороты в собственный базис строки, все в одном моменте.
    X: H (H X H = Z). Y: RX(pi/2), т.к. RX(pi/2) Y RX(pi/2)^dagger = Z.
    """
    gates: List[Gate] = []
    for q, p in term.factors:
        if p == "X":
            gates.append(h(q))
        elif p == "Y":
            gates.append(rx(q, np.pi / 2))
    return gates


def _parity_signs(indices: np.ndarray, mask: int) -> np.ndarray:
    parity = np.zeros(indices.shape, dtype=np.int64)
    q = 0
    while mask >> q:
        if (mask >> q) & 1:
            parity ^= (indices >> q) & 1
        q += 1
    return 1 - 2 * parity


def rotated_probabilities(state: State, term: PauliString, noise: Optional[NoiseModel] = None) -> np.ndarray:
    """
    Диагональ состояния после поворота в базис строки. Для матрицы
    плотности момент поворота тоже получает канал шума (если он задан).
    """
    gates = basis_change_gates(term)
    if isinstance(state, StateVector):
        rotated = evolve_gates(state, gates) if gates else state
        p = rotated.probabilities()
    else:
        n = state.n_qubits
        rho_t = state.entries.reshape((2,) * (2 * n))
        if gates:
            for g in gates:
                rho_t = conjugate_tensor(rho_t, g.matrix(), g.qubits, n)
            if noise is not None:
                rho_t = depolarize_tensor(rho_t, n, noise.Gamma)
        d = state.dim
        p = np.clip(np.real(np.diagonal(np.ascontiguousarray(rho_t).reshape(d, d))), 0.0, None)
    return p


def sample_bitstrings(probabilities: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Обратная функция распределения по вектору вероятностей длины 2^n."""
    cdf = np.cumsum(probabilities)
    u = rng.random(shots) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(probabilities) - 1)


def sample_expectation(
    state: State,
    term: PauliString,
    shots: int,
    rng: np.random.Generator,
    noise: Optional[NoiseModel] = None,
) -> float:
    """Среднее собственных значений ±1 по shots выборкам; коэффициент строки не учитывается."""
    if int(shots) < 1:
        raise InputError(f"shots должно быть >= 1, получено {shots}")
    if term.is_identity:
        raise InputError("Единичная строка не измеряется: её вклад точный")
    _check_width(state, term.min_qubits())
    p = rotated_probabilities(state, term, noise)
    outcomes = sample_bitstrings(p, int(shots), rng)
    mask = 0
    for q in term.qubits:
        mask |= 1 << q
    return float(np.mean(_parity_signs(outcomes, mask)))
