# src/gradients/engine.py
"""
Энергия анзаца и градиенты: прямая конечная разность и правило сдвига
параметров (через привязки theta -> mu и цепное правило).

"Вычисление схемы" здесь означает одно вычисление энергии; выстрелы считаются
отдельно (shots на каждую неединичную Pauli-строку).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from src.ansatz.vha import CompiledAnsatz, bind_angles, circuit_from_angles
from src.core.config import density_cap
from src.core.errors import ConfigError, InputError, InternalError, UnsupportedError
from src.hamiltonian.pauli import PauliSum
from src.sim.measure import expectation, rotated_probabilities, sample_expectation
from src.sim.noise import NoiseModel, evolve_moments_tensor
from src.sim.states import DensityMatrix, run_pure

BACKENDS = ("exact", "sampled", "noisy-exact", "noisy-sampled")

# r = 1/2 для поворотов exp(-i mu sigma / 2): сдвиг pi/(4r) = pi/2
SHIFT_R = 0.5
SHIFT = np.pi / (4 * SHIFT_R)


@dataclass(frozen=True)
class Backend:
    kind: str = "exact"
    shots: Optional[int] = None
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in BACKENDS:
            raise ConfigError(f"Неизвестный бэкенд {self.kind!r}, допустимы {BACKENDS}")
        if self.is_sampled and (self.shots is None or int(self.shots) < 1):
            raise ConfigError(f"Бэкенд {self.kind} требует shots >= 1, получено {self.shots}")
        if self.gamma < 0:
            raise ConfigError(f"gamma >= 0, получено {self.gamma}")

    @property
    def is_sampled(self) -> bool:
        return self.kind in ("sampled", "noisy-sampled")

    @property
    def is_noisy(self) -> bool:
        return self.kind.startswith("noisy")

    @classmethod
    def exact(cls) -> "Backend":
        return cls("exact")

    @classmethod
    def for_run(cls, shots: Optional[int], gamma: float) -> "Backend":
        """shots=None -> предел N -> бесконечность; gamma > 0 -> матрица плотности."""
        if gamma > 0:
            return cls("noisy-exact" if shots is None else "noisy-sampled", shots, gamma)
        return cls("exact") if shots is None else cls("sampled", shots)

    def describe(self) -> str:
        parts = [self.kind]
        if self.is_sampled:
            parts.append(f"N={self.shots}")
        if self.is_noisy:
            parts.append(f"gamma={self.gamma:g}")
        return ", ".join(parts)


def require_density_cap(n_qubits: int, backend: Backend) -> None:
    cap = density_cap()
    if backend.is_noisy and n_qubits > cap:
        raise ConfigError(
            f"Бэкенд матрицы плотности ограничен {cap} кубитами (VHA_LAB_DENSITY_CAP), "
            f"а схема на {n_qubits}: прогоны с деполяризацией для 6 узлов (12 кубитов) не выполняются"
        )


class EnergyEvaluator:
    """
    E(theta) = <psi(theta)|H|psi(theta)> на выбранном бэкенде. Каждое
    вычисление энергии получает свой дочерний SeedSequence, а внутри него по
    подпотоку на каждую измеряемую строку.
    """

    def __init__(
        self,
        compiled: CompiledAnsatz,
        hamiltonian: PauliSum,
        backend: Backend = Backend(),
        seed: Optional[int] = None,
    ) -> None:
        if hamiltonian.min_qubits() > compiled.n_qubits:
            raise InputError("Гамильтониан шире схемы")
        require_density_cap(compiled.n_qubits, backend)
        self.compiled = compiled
        self.hamiltonian = hamiltonian
        self.backend = backend
        self.seed = seed
        self.noise = NoiseModel(backend.gamma)
        self._measured = tuple(t for t in hamiltonian.terms if not t.is_identity)
        self._offset = hamiltonian.identity_part()
        self._seq = np.random.SeedSequence(seed) if backend.is_sampled else None

    @property
    def shots_per_evaluation(self) -> Optional[int]:
        if not self.backend.is_sampled:
            return None
        return int(self.backend.shots) * len(self._measured)

    def spawn_streams(self, count: int) -> List[Optional[np.random.SeedSequence]]:
        """Заранее выданные подпотоки: порядок вычислений не влияет на результат."""
        if self._seq is None:
            return [None] * count
        return list(self._seq.spawn(count))

    def _final_state(self, mu: np.ndarray):
        circuit = circuit_from_angles(self.compiled, mu)
        if not self.backend.is_noisy:
            return run_pure(circuit, self.compiled.initial_state)
        n = self.compiled.n_qubits
        rho0 = DensityMatrix.from_state(self.compiled.initial_state)
        rho_t = evolve_moments_tensor(rho0.entries.reshape((2,) * (2 * n)), circuit.moments, n, self.noise.Gamma)
        return DensityMatrix(n, np.ascontiguousarray(rho_t).reshape(rho0.dim, rho0.dim))

    def energy_from_angles(self, mu: Sequence[float], stream: Optional[np.random.SeedSequence] = None) -> float:
        state = self._final_state(np.asarray(mu, dtype=float))
        kind = self.backend.kind
        if kind == "exact":
            return expectation(state, self.hamiltonian)
        total = self._offset
        if kind == "noisy-exact":
            for t in self._measured:
                p = rotated_probabilities(state, t, self.noise)
                total += t.coefficient * float(np.dot(p, _signs(state.dim, t)))
            return float(total)
        if stream is None:
            stream = self.spawn_streams(1)[0]
        noise = self.noise if self.backend.is_noisy else None
        for t, sub in zip(self._measured, stream.spawn(len(self._measured))):
            rng = np.random.default_rng(sub)
            total += t.coefficient * sample_expectation(state, t, int(self.backend.shots), rng, noise)
        return float(total)

    def energy(self, theta: Sequence[float], stream: Optional[np.random.SeedSequence] = None) -> float:
        return self.energy_from_angles(bind_angles(self.compiled, theta), stream)

    def exact_twin(self) -> "EnergyEvaluator":
        return EnergyEvaluator(self.compiled, self.hamiltonian, Backend.exact())


def _signs(dim: int, term) -> np.ndarray:
    idx = np.arange(dim, dtype=np.int64)
    parity = np.zeros(dim, dtype=np.int64)
    for q in term.qubits:
        parity ^= (idx >> q) & 1
    return 1.0 - 2.0 * parity


def evaluate_energy(ev: EnergyEvaluator, theta: Sequence[float]) -> float:
    return ev.energy(theta)


@dataclass(frozen=True, eq=False)
class GradientReport:
    gradient: np.ndarray
    energy_at_theta: Optional[float]
    circuit_evaluations: int
    method: str
    epsilon: Optional[float] = None
    shots_per_evaluation: Optional[int] = None

    @property
    def label(self) -> str:
        return f"fd({self.epsilon:g})" if self.method == "fd" else "ps"


def finite_difference_gradient(ev: EnergyEvaluator, theta: Sequence[float], epsilon: float) -> GradientReport:
    """[E(theta + eps e_i) - E(theta)] / eps; E(theta) считается один раз."""
    if not epsilon > 0:
        raise InputError(f"epsilon должен быть > 0, получено {epsilon}")
    th = np.asarray(theta, dtype=float)
    k = ev.compiled.n_params
    streams = ev.spawn_streams(k + 1)
    e0 = ev.energy(th, streams[0])
    grad = np.empty(k)
    for i in range(k):
        shifted = th.copy()
        shifted[i] += epsilon
        grad[i] = (ev.energy(shifted, streams[i + 1]) - e0) / epsilon
    return GradientReport(grad, e0, k + 1, "fd", float(epsilon), ev.shots_per_evaluation)


def parameter_shift_gradient(ev: EnergyEvaluator, theta: Sequence[float], with_energy: bool = False) -> GradientReport:
    """
    D_g = r [E(mu_g + pi/2) - E(mu_g - pi/2)] по каждому параметризованному
    вентилю g, затем dE/dtheta_i = sum_g m_g D_g по вентилям с i(g) = i.
    """
    compiled = ev.compiled
    if compiled.G == 0:
        raise InternalError("В схеме нет параметризованных вентилей")
    mu = bind_angles(compiled, theta)
    streams = ev.spawn_streams(2 * compiled.G + (1 if with_energy else 0))
    energy = ev.energy_from_angles(mu, streams[-1]) if with_energy else None
    grad = np.zeros(compiled.n_params)
    for g, b in enumerate(compiled.bindings):
        plus, minus = mu.copy(), mu.copy()
        plus[g] += SHIFT
        minus[g] -= SHIFT
        d_g = SHIFT_R * (ev.energy_from_angles(plus, streams[2 * g]) - ev.energy_from_angles(minus, streams[2 * g + 1]))
        grad[b.theta_index] += b.slope * d_g
    evals = 2 * compiled.G + (1 if with_energy else 0)
    return GradientReport(grad, energy, evals, "ps", None, ev.shots_per_evaluation)


@dataclass(frozen=True)
class TrigFit:
    A: float
    phi: float
    C: float
    residual: float


def trig_form_probe(ev: EnergyEvaluator, theta: Sequence[float], gate_index: int, n_points: int = 8) -> TrigFit:
    """
    Свип угла одного параметризованного вентиля (номер g среди привязок) по
    n_points точкам в [0, 2pi) и МНК-подгонка A cos(mu + phi) + C. Для
    R(mu) = exp(-i mu sigma/2) это форма cos(2 * s * mu + phi) с s = 1/2.
    """
    if ev.backend.is_sampled:
        raise UnsupportedError("trig_form_probe требует точного бэкенда")
    if n_points < 4:
        raise InputError(f"n_points >= 4, получено {n_points}")
    if not 0 <= gate_index < ev.compiled.G:
        raise InputError(f"gate_index {gate_index} вне [0, {ev.compiled.G})")
    mu = bind_angles(ev.compiled, theta)
    grid = np.linspace(0.0, 2 * np.pi, n_points, endpoint=False)
    values = np.empty(n_points)
    for k, angle in enumerate(grid):
        swept = mu.copy()
        swept[gate_index] = angle
        values[k] = ev.energy_from_angles(swept)
    design = np.column_stack([np.cos(grid), np.sin(grid), np.ones_like(grid)])
    (a, b, c), *_ = np.linalg.lstsq(design, values, rcond=None)
    residual = float(np.max(np.abs(design @ np.array([a, b, c]) - values)))
    # a cos + b sin = A cos(mu + phi): a = A cos(phi), b = -A sin(phi)
    return TrigFit(float(np.hypot(a, b)), float(np.arctan2(-b, a)), float(c), residual)
