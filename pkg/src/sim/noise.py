# src/sim/noise.py
"""
Деполяризующий канал: K0 = sqrt(1 - 3G/4) I, Ki = sqrt(G)/2 sigma_i,
G = 1 - exp(-gamma). Канал применяется к каждому кубиту после каждого момента.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from src.core.errors import InputError
from src.sim.circuit import Circuit
from src.sim.gates import PAULI_MATRICES
from src.sim.states import DensityMatrix, conjugate_tensor


@dataclass(frozen=True)
class NoiseModel:
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.gamma) or self.gamma < 0:
            raise InputError(f"gamma должна быть >= 0, получено {self.gamma}")

    @property
    def Gamma(self) -> float:
        # -expm1 точнее 1 - exp при малых gamma; gamma=0 даёт ровно 0
        return float(-np.expm1(-self.gamma))

    @property
    def is_noiseless(self) -> bool:
        return self.gamma == 0.0

    def kraus(self) -> List[np.ndarray]:
        return kraus_operators(self.Gamma)


def kraus_operators(Gamma: float) -> List[np.ndarray]:
    """Допускает Gamma = 1 (предельный случай) для проверок алгебры канала."""
    if not 0.0 <= Gamma <= 1.0:
        raise InputError(f"Gamma вне [0, 1]: {Gamma}")
    ops = [np.sqrt(1.0 - 0.75 * Gamma) * PAULI_MATRICES["I"]]
    ops += [0.5 * np.sqrt(Gamma) * PAULI_MATRICES[p] for p in ("X", "Y", "Z")]
    return ops


def depolarize_tensor(rho_t: np.ndarray, n_qubits: int, Gamma: float) -> np.ndarray:
    if Gamma == 0.0:
        return rho_t
    k0, *rest = kraus_operators(Gamma)
    w0 = float(np.real(k0[0, 0])) ** 2
    for q in range(n_qubits):
        acc = w0 * rho_t
        for k in rest:
            acc = acc + conjugate_tensor(rho_t, k, (q,), n_qubits)
        rho_t = acc
    return rho_t


def depolarize_all(rho: DensityMatrix, noise: NoiseModel) -> DensityMatrix:
    Gamma = noise.Gamma
    if not 0.0 <= Gamma < 1.0:
        raise InputError(f"Gamma вне [0, 1): {Gamma}")
    return apply_channel(rho, Gamma)


def apply_channel(rho: DensityMatrix, Gamma: float) -> DensityMatrix:
    n = rho.n_qubits
    rho_t = depolarize_tensor(rho.entries.reshape((2,) * (2 * n)), n, Gamma)
    return DensityMatrix(n, np.ascontiguousarray(rho_t).reshape(rho.dim, rho.dim))


def run_noisy(circuit: Circuit, init: DensityMatrix, noise: NoiseModel) -> DensityMatrix:
    """После каждого момента: все вентили сопряжением, затем depolarize_all."""
    n = circuit.n_qubits
    if n != init.n_qubits:
        raise InputError(f"Схема на {n} кубитах, матрица плотности на {init.n_qubits}")
    rho_t = evolve_moments_tensor(init.entries.reshape((2,) * (2 * n)), circuit.moments, n, noise.Gamma)
    return DensityMatrix(n, np.ascontiguousarray(rho_t).reshape(init.dim, init.dim))


def evolve_moments_tensor(rho_t: np.ndarray, moments, n: int, Gamma: float) -> np.ndarray:
    for moment in moments:
        for g in moment.gates:
            if max(g.qubits) >= n:
                raise InputError(f"{g.kind} на {g.qubits}: в состоянии только {n} кубит(ов)")
            rho_t = conjugate_tensor(rho_t, g.matrix(), g.qubits, n)
        rho_t = depolarize_tensor(rho_t, n, Gamma)
    return rho_t
