# src/hamiltonian/hubbard.py
"""
1D модель Хаббарда после преобразования Жордана–Вигнера.

Раскладка кубитов блочная: спин вверх на кубитах 0..M-1, спин вниз на M..2M-1.
n = (1 - Z)/2, поэтому U(n_up - 1/2)(n_dn - 1/2) = (U/4) Z_i Z_{i+M}, а
прыжок по связи (i, j) даёт -(t/2)(X_i Z.. X_j + Y_i Z.. Y_j), где Z-цепочка
стоит на кубитах строго между i и j (только у связи, замыкающей кольцо).
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import comb

from src.core.config import settings
from src.core.errors import DegenerateFermiLevelError, InputError, InternalError, UnsupportedError
from src.hamiltonian.pauli import PauliString, PauliSum
from src.sim.states import StateVector

BOUNDARIES = ("periodic", "open")
MAX_EXACT_QUBITS = 14


@dataclass(frozen=True)
class HubbardSpec:
    sites: int
    t: float = 1.0
    U: float = 1.0
    boundary: str = "periodic"
    filling: Optional[int] = None  # электронов на спин; None -> половинное заполнение M/2
    orbitals: Optional[Tuple[int, ...]] = None  # ручной выбор занятых орбиталей при вырождении

    def __post_init__(self) -> None:
        if self.sites < 2:
            raise InputError(f"Нужно M >= 2, получено {self.sites}")
        if self.sites % 2:
            raise UnsupportedError(f"Нечётное число узлов M={self.sites} не поддерживается")
        if self.boundary not in BOUNDARIES:
            raise InputError(f"boundary должен быть одним из {BOUNDARIES}, получено {self.boundary!r}")
        n = self.n_per_spin
        if not 0 <= n <= self.sites:
            raise InputError(f"Заполнение {n} на спин вне [0, {self.sites}]")
        if self.orbitals is not None:
            orb = tuple(int(i) for i in self.orbitals)
            if len(orb) != n or len(set(orb)) != n or any(not 0 <= i < self.sites for i in orb):
                raise InputError(f"orbitals={self.orbitals}: нужно {n} различных индексов в [0, {self.sites})")
            object.__setattr__(self, "orbitals", orb)

    @property
    def n_per_spin(self) -> int:
        return self.sites // 2 if self.filling is None else int(self.filling)

    @property
    def n_qubits(self) -> int:
        return 2 * self.sites

    def bonds(self) -> List[Tuple[int, int]]:
        """Связи (i, i+1); при M=2 кольцо даёт одну связь, а не двойную."""
        m = self.sites
        out = [(i, i + 1) for i in range(m - 1)]
        if self.boundary == "periodic" and m > 2:
            out.append((m - 1, 0))
        return out


@dataclass(frozen=True)
class HamiltonianDecomposition:
    spec: HubbardSpec
    parts: Tuple[Tuple[str, PauliSum], ...]

    @property
    def n_qubits(self) -> int:
        return self.spec.n_qubits

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _ in self.parts)

    def part(self, label: str) -> PauliSum:
        for lab, ps in self.parts:
            if lab == label:
                return ps
        raise KeyError(label)

    def full(self) -> PauliSum:
        out = PauliSum()
        for _, ps in self.parts:
            out = out + ps
        return out

    def check_commuting(self) -> None:
        for label, ps in self.parts:
            terms = ps.terms
            for a in range(len(terms)):
                for b in range(a + 1, len(terms)):
                    if not terms[a].commutes_with(terms[b]):
                        raise InternalError(
                            f"Часть {label}: {terms[a].label()} и {terms[b].label()} не коммутируют"
                        )


def interaction_terms(spec: HubbardSpec) -> List[PauliString]:
    m = spec.sites
    return [PauliString.build(spec.U / 4.0, {i: "Z", i + m: "Z"}) for i in range(m)]


def bond_terms(spec: HubbardSpec, bond: Tuple[int, int]) -> List[PauliString]:
    """Оба спина, XX и YY; порядок: вверх XX, YY, затем вниз XX, YY."""
    lo, hi = sorted(bond)
    out = []
    for offset in (0, spec.sites):
        a, b = lo + offset, hi + offset
        chain = {q: "Z" for q in range(a + 1, b)}
        for p in ("X", "Y"):
            out.append(PauliString.build(-spec.t / 2.0, {a: p, b: p, **chain}))
    return out


def hubbard_hamiltonian(spec: HubbardSpec) -> PauliSum:
    """Полный гамильтониан без разбиения на части."""
    terms = interaction_terms(spec)
    for bond in spec.bonds():
        terms += bond_terms(spec, bond)
    return PauliSum.from_terms(terms)


def build_hubbard(spec: HubbardSpec) -> HamiltonianDecomposition:
    """M=2: {W, T}; M>=4: {W, T_e, T_o}, чётные связи (0,1),(2,3).. и нечётные (1,2),..,(M-1,0)."""
    w = PauliSum.from_terms(interaction_terms(spec))
    bonds = spec.bonds()
    if spec.sites == 2:
        t_all = [term for bond in bonds for term in bond_terms(spec, bond)]
        parts = (("W", w), ("T", PauliSum.from_terms(t_all)))
    else:
        even = [term for bond in bonds if bond[0] % 2 == 0 for term in bond_terms(spec, bond)]
        odd = [term for bond in bonds if bond[0] % 2 == 1 for term in bond_terms(spec, bond)]
        parts = (("W", w), ("T_e", PauliSum.from_terms(even)), ("T_o", PauliSum.from_terms(odd)))
    decomp = HamiltonianDecomposition(spec, parts)
    decomp.check_commuting()
    return decomp


def hopping_matrix(spec: HubbardSpec) -> np.ndarray:
    m = spec.sites
    hop = np.zeros((m, m))
    for i, j in spec.bonds():
        hop[i, j] -= spec.t
        hop[j, i] -= spec.t
    return hop


def occupied_orbitals(spec: HubbardSpec) -> Tuple[np.ndarray, np.ndarray]:
    """(энергии, столбцы орбиталей) занятых одночастичных уровней одного спина."""
    eps, phi = np.linalg.eigh(hopping_matrix(spec))
    n = spec.n_per_spin
    if spec.orbitals is not None:
        sel = list(spec.orbitals)
        return eps[sel], phi[:, sel]
    tol = float(settings()["degeneracy_tol"])
    if 0 < n < spec.sites and eps[n] - eps[n - 1] < tol:
        raise DegenerateFermiLevelError(
            f"M={spec.sites}, {spec.boundary}: уровень Ферми вырожден "
            f"(eps[{n - 1}]={eps[n - 1]:+.6f}, eps[{n}]={eps[n]:+.6f}). "
            f"Задайте занятые орбитали явно: флаг --orbitals (ключ 'orbitals'), "
            f"индексы уровней по возрастанию энергии: {np.round(eps, 6).tolist()}"
        )
    return eps[:n], phi[:, :n]


def noninteracting_ground_state(spec: HubbardSpec) -> StateVector:
    """
    Детерминант Слейтера: амплитуда на конфигурации = det_up * det_dn, где
    det берётся по строкам занятых узлов в порядке возрастания (кубиты JW).
    """
    _, phi = occupied_orbitals(spec)
    m, n = spec.sites, spec.n_per_spin
    amps = np.zeros(1 << spec.n_qubits, dtype=np.complex128)
    dets: Dict[Tuple[int, ...], float] = {
        occ: float(np.linalg.det(phi[list(occ), :])) if n else 1.0 for occ in combinations(range(m), n)
    }
    for up, d_up in dets.items():
        if d_up == 0.0:
            continue
        i_up = sum(1 << i for i in up)
        for dn, d_dn in dets.items():
            i_dn = sum(1 << (j + m) for j in dn)
            amps[i_up | i_dn] = d_up * d_dn
    amps /= np.linalg.norm(amps)
    return StateVector(spec.n_qubits, amps)


def sector_basis(sites: int, n_up: int, n_down: int) -> np.ndarray:
    """Базисные индексы с фиксированным числом частиц на каждый спин (по возрастанию)."""
    if not (0 <= n_up <= sites and 0 <= n_down <= sites):
        raise InputError(f"Пустой сектор (n_up={n_up}, n_down={n_down}) для M={sites}")
    ups = [sum(1 << i for i in c) for c in combinations(range(sites), n_up)]
    dns = [sum(1 << (j + sites) for j in c) for c in combinations(range(sites), n_down)]
    idx = np.array(sorted(u | d for u in ups for d in dns), dtype=np.int64)
    if len(idx) != comb(sites, n_up, exact=True) * comb(sites, n_down, exact=True):
        raise InternalError("Размер сектора не совпал с C(M, n_up) * C(M, n_dn)")
    return idx


def exact_ground_energy(decomp: HamiltonianDecomposition, sector: Sequence[int]) -> float:
    """Плотная диагонализация полного гамильтониана в секторе (n_up, n_down)."""
    n = decomp.n_qubits
    if n > MAX_EXACT_QUBITS:
        raise UnsupportedError(f"Точная диагонализация ограничена {MAX_EXACT_QUBITS} кубитами, задано {n}")
    n_up, n_down = (int(s) for s in sector)
    basis = sector_basis(decomp.spec.sites, n_up, n_down)
    h_sec = decomp.full().to_dense(n, basis)
    return float(np.linalg.eigvalsh(h_sec)[0])


def half_filling_sector(spec: HubbardSpec) -> Tuple[int, int]:
    return spec.n_per_spin, spec.n_per_spin
