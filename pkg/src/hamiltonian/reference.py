# src/hamiltonian/reference.py
"""
Эталонные энергии анзаца без схемы: произведение exp(i theta_k H_k) считается
в секторе с фиксированным числом частиц через спектральные разложения частей,
батчем по многим векторам theta. Градиент считается сопряжённым (adjoint) проходом.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.core.config import settings
from src.core.errors import InputError
from src.core.log import get_logger
from src.hamiltonian.hubbard import HamiltonianDecomposition, half_filling_sector, sector_basis
from src.sim.states import StateVector

log = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class SectorAnsatz:
    """
    factors[k] = (eigvals, eigvecs) части, генерирующей theta_k; k задаёт
    порядок применения к |psi_0> (k = 0 первым).
    """
    hamiltonian: np.ndarray
    factors: Tuple[Tuple[np.ndarray, np.ndarray], ...]
    psi0: np.ndarray
    generators: Tuple[np.ndarray, ...]

    @classmethod
    def build(
        cls,
        decomp: HamiltonianDecomposition,
        order: Sequence[str],
        repetitions: int,
        initial_state: StateVector,
    ) -> "SectorAnsatz":
        spec = decomp.spec
        basis = sector_basis(spec.sites, *half_filling_sector(spec))
        n = decomp.n_qubits
        psi0 = initial_state.amplitudes[basis]
        outside = 1.0 - float(np.vdot(psi0, psi0).real)
        if outside > 1e-10:
            raise InputError(f"Начальное состояние выходит из сектора половинного заполнения (вес {outside:.3e})")
        per_label = {}
        for label in order:
            h = decomp.part(label).to_dense(n, basis)
            per_label[label] = (h, np.linalg.eigh(h))
        gens, facs = [], []
        for _ in range(repetitions):
            for label in order:
                h, (w, v) = per_label[label]
                gens.append(h)
                facs.append((w, v))
        return cls(decomp.full().to_dense(n, basis), tuple(facs), psi0, tuple(gens))

    @property
    def n_params(self) -> int:
        return len(self.factors)

    def _as_batch(self, thetas: np.ndarray) -> np.ndarray:
        th = np.atleast_2d(np.asarray(thetas, dtype=float))
        if th.shape[1] != self.n_params:
            raise InputError(f"Ожидалось {self.n_params} параметров, получено {th.shape[1]}")
        return th

    @staticmethod
    def _propagate(factor, psi: np.ndarray, theta: np.ndarray, sign: float = 1.0) -> np.ndarray:
        w, v = factor
        phases = np.exp(sign * 1j * np.outer(w, theta))
        return v @ (phases * (v.conj().T @ psi))

    def states(self, thetas: np.ndarray) -> np.ndarray:
        th = self._as_batch(thetas)
        psi = np.repeat(self.psi0[:, None], th.shape[0], axis=1)
        for k, factor in enumerate(self.factors):
            psi = self._propagate(factor, psi, th[:, k])
        return psi

    def energies(self, thetas: np.ndarray) -> np.ndarray:
        psi = self.states(thetas)
        return np.real(np.sum(psi.conj() * (self.hamiltonian @ psi), axis=0))

    def energies_and_gradients(self, thetas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        th = self._as_batch(thetas)
        psi = np.repeat(self.psi0[:, None], th.shape[0], axis=1)
        forward: List[np.ndarray] = []
        for k, factor in enumerate(self.factors):
            psi = self._propagate(factor, psi, th[:, k])
            forward.append(psi)
        h_psi = self.hamiltonian @ psi
        energies = np.real(np.sum(psi.conj() * h_psi, axis=0))
        grads = np.zeros_like(th)
        lam = h_psi
        for k in range(self.n_params - 1, -1, -1):
            # dE/dtheta_k = 2 Re( i <lam_k| H_k |phi_{k+1}> )
            inner = np.sum(lam.conj() * (self.generators[k] @ forward[k]), axis=0)
            grads[:, k] = -2.0 * np.imag(inner)
            lam = self._propagate(self.factors[k], lam, th[:, k], sign=-1.0)
        return energies, grads


def steepest_descent_batch(
    sector: SectorAnsatz, theta0: np.ndarray, eta: float, iterations: int
) -> Tuple[np.ndarray, np.ndarray]:
    th = np.array(np.atleast_2d(theta0), dtype=float)
    for _ in range(iterations):
        _, g = sector.energies_and_gradients(th)
        th -= eta * g
    return sector.energies(th), th


def optimize_ansatz(
    sector: SectorAnsatz,
    starts: Optional[int] = None,
    iterations: Optional[int] = None,
    eta: Optional[float] = None,
    seed: Optional[int] = None,
    spread: Optional[float] = None,
    theta_hint: Optional[Sequence[float]] = None,
) -> Tuple[float, np.ndarray]:
    """Мультистарт: старт 0.1 (или theta_hint) плюс starts случайных U(-spread, spread)."""
    cfg = settings()["oracle"]
    starts = int(cfg["starts"] if starts is None else starts)
    iterations = int(cfg["iterations"] if iterations is None else iterations)
    eta = float(cfg["eta"] if eta is None else eta)
    seed = int(cfg["seed"] if seed is None else seed)
    spread = float(cfg["spread"] if spread is None else spread)
    rng = np.random.default_rng(seed)
    k = sector.n_params
    first = np.full(k, 0.1) if theta_hint is None else np.asarray(theta_hint, dtype=float)
    th0 = np.vstack([first[None, :], rng.uniform(-spread, spread, size=(max(starts, 0), k))])
    energies, th = steepest_descent_batch(sector, th0, eta, iterations)
    best = int(np.argmin(energies))
    log.debug("Оракул: %d стартов x %d итераций, лучшая энергия %.12f", len(th0), iterations, energies[best])
    return float(energies[best]), th[best]


def ansatz_optimal_energy(compiled, decomp: HamiltonianDecomposition, **oracle) -> float:
    """Минимум E(theta) анзаца; оракул для сравнения на 6 узлах."""
    if compiled.ansatz is None:
        raise InputError("Скомпилированная схема не является VHA-анзацем")
    a = compiled.ansatz
    sector = SectorAnsatz.build(decomp, a.order, a.repetitions, a.initial_state)
    energy, _ = optimize_ansatz(sector, **oracle)
    return energy
