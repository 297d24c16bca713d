# src/hamiltonian/pauli.py
"""
Pauli-строки и суммы Pauli-строк.

Конвенция: кубит q это бит q индекса базисного состояния (кубит 0 младший).
Действие строки на базисное состояние: P|b> = phase(b) |b ^ flip>, где
flip: маска X/Y-множителей, phase(b) = i^{nY} * (-1)^{popcount(b & (Z|Y))}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np
from scipy import sparse

from src.core.errors import InputError

PAULI_LABELS = ("X", "Y", "Z")

# произведение одиночных Паули: (a, b) -> (фаза, результат); "I" для единицы
_PRODUCT: Dict[Tuple[str, str], Tuple[complex, str]] = {
    ("X", "X"): (1, "I"), ("Y", "Y"): (1, "I"), ("Z", "Z"): (1, "I"),
    ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
}

Factors = Tuple[Tuple[int, str], ...]


def _normalize_factors(factors: Mapping[int, str] | Iterable[Tuple[int, str]]) -> Factors:
    items = factors.items() if isinstance(factors, Mapping) else factors
    out: Dict[int, str] = {}
    for q, p in items:
        q = int(q)
        p = str(p).upper()
        if q < 0:
            raise InputError(f"Отрицательный индекс кубита: {q}")
        if p == "I":
            continue
        if p not in PAULI_LABELS:
            raise InputError(f"Неизвестный множитель Паули {p!r} на кубите {q}")
        if q in out:
            raise InputError(f"Кубит {q} встречается в строке дважды")
        out[q] = p
    return tuple(sorted(out.items()))


@dataclass(frozen=True)
class PauliString:
    coefficient: float
    factors: Factors = ()

    @classmethod
    def build(cls, coefficient: float, factors: Mapping[int, str] | Iterable[Tuple[int, str]] = ()) -> "PauliString":
        return cls(float(coefficient), _normalize_factors(factors))

    @property
    def is_identity(self) -> bool:
        return not self.factors

    @property
    def qubits(self) -> Tuple[int, ...]:
        return tuple(q for q, _ in self.factors)

    @property
    def flip_mask(self) -> int:
        m = 0
        for q, p in self.factors:
            if p in ("X", "Y"):
                m |= 1 << q
        return m

    @property
    def phase_mask(self) -> int:
        m = 0
        for q, p in self.factors:
            if p in ("Y", "Z"):
                m |= 1 << q
        return m

    @property
    def n_y(self) -> int:
        return sum(1 for _, p in self.factors if p == "Y")

    def min_qubits(self) -> int:
        return self.factors[-1][0] + 1 if self.factors else 0

    def scaled(self, c: float) -> "PauliString":
        return PauliString(self.coefficient * c, self.factors)

    def commutes_with(self, other: "PauliString") -> bool:
        """Симплектическая проверка: число позиций с разными неединичными множителями чётно."""
        mine = dict(self.factors)
        clashes = sum(1 for q, p in other.factors if q in mine and mine[q] != p)
        return clashes % 2 == 0

    def action(self, indices: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Для массива базисных индексов b вернуть (b ^ flip, phase(b))."""
        idx = np.asarray(indices, dtype=np.int64)
        parity = np.zeros(idx.shape, dtype=np.int64)
        zm = self.phase_mask
        q = 0
        while zm >> q:
            if (zm >> q) & 1:
                parity ^= (idx >> q) & 1
            q += 1
        phase = (1j ** self.n_y) * (1 - 2 * parity)
        return idx ^ self.flip_mask, phase.astype(np.complex128)

    def label(self) -> str:
        body = " ".join(f"{p}{q}" for q, p in self.factors) or "I"
        return f"{self.coefficient:+g}*{body}"


def multiply(a: PauliString, b: PauliString) -> Tuple[complex, Factors]:
    """a*b = phase * (строка). Коэффициенты a и b включены в фазу."""
    phase: complex = a.coefficient * b.coefficient
    out = dict(a.factors)
    for q, p in b.factors:
        if q not in out:
            out[q] = p
            continue
        ph, res = _PRODUCT[(out[q], p)]
        phase *= ph
        if res == "I":
            del out[q]
        else:
            out[q] = res
    return phase, tuple(sorted(out.items()))


@dataclass(frozen=True)
class PauliSum:
    terms: Tuple[PauliString, ...] = field(default=())

    @classmethod
    def from_terms(cls, terms: Iterable[PauliString], drop_tol: float = 0.0) -> "PauliSum":
        """Строки с одинаковыми множителями сливаются; порядок по первому появлению."""
        acc: Dict[Factors, float] = {}
        for t in terms:
            acc[t.factors] = acc.get(t.factors, 0.0) + t.coefficient
        kept = tuple(PauliString(c, f) for f, c in acc.items() if abs(c) > drop_tol)
        return cls(kept)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        return PauliSum.from_terms(self.terms + other.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def min_qubits(self) -> int:
        return max((t.min_qubits() for t in self.terms), default=0)

    def as_dict(self) -> Dict[Factors, float]:
        return {t.factors: t.coefficient for t in self.terms}

    def identity_part(self) -> float:
        return sum(t.coefficient for t in self.terms if t.is_identity)

    def to_sparse(self, n_qubits: int, basis: Sequence[int] | np.ndarray | None = None) -> sparse.csr_matrix:
        """
        Матрица суммы в подпространстве, натянутом на basis (по умолчанию всё 2^n).
        Выход за подпространство отбрасывается; это корректно для операторов,
        сохраняющих это подпространство целиком.
        """
        if self.min_qubits() > n_qubits:
            raise InputError(f"Сумма действует на {self.min_qubits()} кубитах, задано n_qubits={n_qubits}")
        dim_full = 1 << n_qubits
        cols = np.arange(dim_full, dtype=np.int64) if basis is None else np.asarray(basis, dtype=np.int64)
        pos = np.full(dim_full, -1, dtype=np.int64)
        pos[cols] = np.arange(len(cols))
        rows_all, cols_all, vals_all = [], [], []
        for t in self.terms:
            targets, phases = t.action(cols)
            r = pos[targets]
            keep = r >= 0
            rows_all.append(r[keep])
            cols_all.append(np.arange(len(cols))[keep])
            vals_all.append(t.coefficient * phases[keep])
        dim = len(cols)
        if not rows_all:
            return sparse.csr_matrix((dim, dim), dtype=np.complex128)
        m = sparse.coo_matrix(
            (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
            shape=(dim, dim),
        )
        return m.tocsr()

    def to_dense(self, n_qubits: int, basis: Sequence[int] | np.ndarray | None = None) -> np.ndarray:
        return self.to_sparse(n_qubits, basis).toarray()


def commutator(a: PauliSum, b: PauliSum, tol: float = 1e-12) -> Dict[Factors, complex]:
    """[a, b] как словарь множители -> коэффициент (нулевые отброшены)."""
    acc: Dict[Factors, complex] = {}
    for p in a.terms:
        for q in b.terms:
            if p.commutes_with(q):
                continue
            ph, f = multiply(p, q)
            # антикоммутирующие: pq - qp = 2pq
            acc[f] = acc.get(f, 0j) + 2 * ph
    return {f: c for f, c in acc.items() if abs(c) > tol}


def number_operator(qubits: Iterable[int]) -> PauliSum:
    """Σ (1 - Z_q)/2."""
    terms = []
    for q in qubits:
        terms.append(PauliString.build(0.5))
        terms.append(PauliString.build(-0.5, {q: "Z"}))
    return PauliSum.from_terms(terms)
