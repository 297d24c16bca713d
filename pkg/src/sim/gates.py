# src/sim/gates.py
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from src.core.errors import InputError

ROTATIONS = ("RX", "RY", "RZ")
FIXED_1Q = ("H", "X")
FIXED_2Q = ("CNOT", "CZ")
KINDS = ROTATIONS + FIXED_1Q + FIXED_2Q

_SQ2 = 1.0 / np.sqrt(2.0)
_FIXED = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    # порядок индексов (первый кубит, второй кубит); первый контрольный
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128),
    "CZ": np.diag([1, 1, 1, -1]).astype(np.complex128),
}

PAULI_MATRICES = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@dataclass(frozen=True)
class Gate:
    """
    Вентиль схемы. Повороты: R_a(mu) = exp(-i mu sigma_a / 2).
    angle есть только у RX/RY/RZ; в шаблоне анзаца у параметризованного RZ
    angle = None до вызова bind.
    """
    kind: str
    qubits: Tuple[int, ...]
    angle: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise InputError(f"Неизвестный вентиль {self.kind!r}")
        arity = 2 if self.kind in FIXED_2Q else 1
        if len(self.qubits) != arity:
            raise InputError(f"{self.kind} ожидает {arity} кубит(а), получено {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise InputError(f"{self.kind}: кубиты должны различаться, получено {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise InputError(f"{self.kind}: отрицательный индекс кубита {self.qubits}")
        if self.kind not in ROTATIONS and self.angle is not None:
            raise InputError(f"{self.kind} не принимает угол")

    @property
    def is_rotation(self) -> bool:
        return self.kind in ROTATIONS

    def with_angle(self, angle: float) -> "Gate":
        return replace(self, angle=float(angle))

    def matrix(self) -> np.ndarray:
        if self.kind in ROTATIONS:
            if self.angle is None:
                raise InputError(f"{self.kind} на {self.qubits}: угол не задан (шаблон без bind?)")
            half = 0.5 * self.angle
            sigma = PAULI_MATRICES[self.kind[1]]
            return np.cos(half) * PAULI_MATRICES["I"] - 1j * np.sin(half) * sigma
        return _FIXED[self.kind]


def rx(q: int, angle: Optional[float] = None) -> Gate:
    return Gate("RX", (q,), angle)


def ry(q: int, angle: Optional[float] = None) -> Gate:
    return Gate("RY", (q,), angle)


def rz(q: int, angle: Optional[float] = None) -> Gate:
    return Gate("RZ", (q,), angle)


def h(q: int) -> Gate:
    return Gate("H", (q,))


def x(q: int) -> Gate:
    return Gate("X", (q,))


def cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def cz(a: int, b: int) -> Gate:
    return Gate("CZ", (a, b))
