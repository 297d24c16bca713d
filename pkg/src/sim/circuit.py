# src/sim/circuit.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

from src.core.errors import InputError
from src.sim.gates import Gate


@dataclass(frozen=True)
class Moment:
    """Вентили, выполняемые параллельно: наборы кубитов попарно не пересекаются."""
    gates: Tuple[Gate, ...]

    def __post_init__(self) -> None:
        seen = set()
        for g in self.gates:
            for q in g.qubits:
                if q in seen:
                    raise InputError(f"Кубит {q} занят дважды в одном моменте")
                seen.add(q)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    moments: Tuple[Moment, ...] = ()

    def __post_init__(self) -> None:
        for m in self.moments:
            for g in m.gates:
                if max(g.qubits) >= self.n_qubits:
                    raise InputError(f"{g.kind} на {g.qubits}: в схеме только {self.n_qubits} кубит(ов)")

    def gates(self) -> Iterator[Gate]:
        for m in self.moments:
            yield from m.gates

    @property
    def depth(self) -> int:
        return len(self.moments)

    def __len__(self) -> int:
        return sum(len(m.gates) for m in self.moments)


def schedule_layout(gates: Sequence[Gate]) -> List[List[int]]:
    """
    Жадное выравнивание влево: вентиль идёт в самый ранний момент после
    последнего момента, занятого любым из его кубитов. Возвращает индексы
    вентилей по моментам (внутри момента порядок исходный).
    """
    last: dict[int, int] = {}
    layout: List[List[int]] = []
    for i, g in enumerate(gates):
        slot = max((last.get(q, -1) for q in g.qubits), default=-1) + 1
        if slot == len(layout):
            layout.append([])
        layout[slot].append(i)
        for q in g.qubits:
            last[q] = slot
    return layout


def assemble(gates: Sequence[Gate], layout: Sequence[Sequence[int]], n_qubits: int) -> Circuit:
    return Circuit(n_qubits, tuple(Moment(tuple(gates[i] for i in m)) for m in layout))


def schedule(gates: Sequence[Gate], n_qubits: Optional[int] = None) -> Circuit:
    if n_qubits is None:
        n_qubits = max((max(g.qubits) for g in gates), default=-1) + 1
    return assemble(gates, schedule_layout(gates), n_qubits)
