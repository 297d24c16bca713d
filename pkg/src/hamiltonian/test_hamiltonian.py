import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.optimize import minimize

from src.core.errors import DegenerateFermiLevelError, InputError, InternalError, UnsupportedError
from src.hamiltonian.hubbard import (
    HamiltonianDecomposition,
    HubbardSpec,
    build_hubbard,
    exact_ground_energy,
    half_filling_sector,
    hubbard_hamiltonian,
    noninteracting_ground_state,
    sector_basis,
)
from src.hamiltonian.pauli import PauliString, PauliSum, commutator, multiply, number_operator
from src.hamiltonian.reference import SectorAnsatz, ansatz_optimal_energy, optimize_ansatz
from src.sim.measure import expectation


def energy_of(part, state):
    return expectation(state, part)


# ---------- Pauli ----------
def test_pauli_string_invariants():
    s = PauliString.build(0.5, {2: "Z", 0: "X", 1: "I"})
    assert s.factors == ((0, "X"), (2, "Z"))
    assert PauliString.build(2.0).is_identity
    with pytest.raises(InputError):
        PauliString.build(1.0, {0: "Q"})
    with pytest.raises(InputError):
        PauliString.build(1.0, [(0, "X"), (0, "Z")])


def test_pauli_sum_merges_duplicates():
    s = PauliSum.from_terms([
        PauliString.build(0.5, {0: "Z"}),
        PauliString.build(0.25, {0: "Z"}),
        PauliString.build(1.0, {1: "X"}),
    ])
    assert len(s) == 2
    assert s.as_dict()[((0, "Z"),)] == pytest.approx(0.75)


def test_commutes_with_and_multiply():
    xx = PauliString.build(1.0, {0: "X", 1: "X"})
    yy = PauliString.build(1.0, {0: "Y", 1: "Y"})
    z0 = PauliString.build(1.0, {0: "Z"})
    assert xx.commutes_with(yy)
    assert not xx.commutes_with(z0)
    phase, f = multiply(PauliString.build(1.0, {0: "X"}), PauliString.build(1.0, {0: "Y"}))
    assert phase == 1j and f == ((0, "Z"),)


def test_dense_matrix_matches_kron():
    x = np.array([[0, 1], [1, 0]])
    z = np.diag([1, -1])
    s = PauliSum((PauliString.build(0.3, {0: "X", 1: "Z"}),))
    # кубит 0 младший, это правый множитель кронекера
    assert_allclose(s.to_dense(2), 0.3 * np.kron(z, x))


# ---------- Хаббард ----------
def test_interaction_terms_two_sites():
    decomp = build_hubbard(HubbardSpec(2))
    w = decomp.part("W").as_dict()
    assert w == {((0, "Z"), (2, "Z")): 0.25, ((1, "Z"), (3, "Z")): 0.25}
    assert decomp.labels == ("W", "T")


def test_hopping_two_sites_single_bond():
    t = build_hubbard(HubbardSpec(2)).part("T").as_dict()
    assert t == {
        ((0, "X"), (1, "X")): -0.5,
        ((0, "Y"), (1, "Y")): -0.5,
        ((2, "X"), (3, "X")): -0.5,
        ((2, "Y"), (3, "Y")): -0.5,
    }


def test_six_site_decomposition():
    spec = HubbardSpec(6)
    decomp = build_hubbard(spec)
    assert decomp.labels == ("W", "T_e", "T_o")
    # 3 связи на спин, по 2 строки (XX, YY) на связь
    assert len(decomp.part("T_e")) == 3 * 2 * 2
    assert len(decomp.part("T_o")) == 3 * 2 * 2
    # связь (5, 0) замыкает кольцо: Z-цепочка на кубитах 1..4
    wrap = [t for t in decomp.part("T_o").terms if t.qubits[0] == 0 and t.qubits[-1] == 5]
    assert len(wrap) == 2
    for t in wrap:
        assert [p for q, p in t.factors if 0 < q < 5] == ["Z"] * 4
    decomp.check_commuting()


def test_reassembly_matches_direct_build():
    for m in (2, 4, 6):
        spec = HubbardSpec(m)
        assert build_hubbard(spec).full().as_dict() == pytest.approx(hubbard_hamiltonian(spec).as_dict())


def test_check_commuting_rejects_bad_part():
    spec = HubbardSpec(2)
    bad = HamiltonianDecomposition(spec, (("W", PauliSum((
        PauliString.build(1.0, {0: "X"}),
        PauliString.build(1.0, {0: "Z"}),
    ))),))
    with pytest.raises(InternalError):
        bad.check_commuting()


def test_spec_validation():
    with pytest.raises(UnsupportedError):
        HubbardSpec(3)
    with pytest.raises(InputError):
        HubbardSpec(2, boundary="twisted")
    with pytest.raises(InputError):
        HubbardSpec(4, orbitals=(0, 0))
    assert HubbardSpec(4, boundary="open").bonds() == [(0, 1), (1, 2), (2, 3)]


def test_particle_number_symmetry():
    for m in (2, 4, 6):
        h = hubbard_hamiltonian(HubbardSpec(m))
        for block in (range(m), range(m, 2 * m)):
            assert commutator(h, number_operator(block)) == {}


def test_hermitian_real_coefficients():
    h = hubbard_hamiltonian(HubbardSpec(6))
    dense = h.to_dense(12, sector_basis(6, 3, 3))
    assert_allclose(dense, dense.conj().T, atol=1e-14)
    assert np.max(np.abs(dense.imag)) == 0.0


# ---------- детерминант Слейтера ----------
def test_noninteracting_two_sites():
    spec = HubbardSpec(2)
    psi = noninteracting_ground_state(spec)
    t = build_hubbard(spec).part("T")
    assert energy_of(t, psi) == pytest.approx(-2.0, abs=1e-12)


def test_noninteracting_six_sites():
    spec = HubbardSpec(6)
    psi = noninteracting_ground_state(spec)
    decomp = build_hubbard(spec)
    kinetic = decomp.part("T_e") + decomp.part("T_o")
    assert energy_of(kinetic, psi) == pytest.approx(-8.0, abs=1e-10)
    # собственное состояние числа частиц каждого спина
    for block in (range(6), range(6, 12)):
        n_op = number_operator(block)
        assert energy_of(n_op, psi) == pytest.approx(3.0, abs=1e-12)
        support = np.flatnonzero(np.abs(psi.amplitudes) > 1e-14)
        counts = {bin(int(i) & sum(1 << q for q in block)).count("1") for i in support}
        assert counts == {3}
    assert np.linalg.norm(psi.amplitudes) == pytest.approx(1.0, abs=1e-12)


def test_degenerate_fermi_level_requires_orbitals():
    with pytest.raises(DegenerateFermiLevelError, match="--orbitals"):
        noninteracting_ground_state(HubbardSpec(4))
    psi = noninteracting_ground_state(HubbardSpec(4, orbitals=(0, 1)))
    assert np.linalg.norm(psi.amplitudes) == pytest.approx(1.0)


# ---------- точные энергии ----------
def test_exact_ground_energy_values():
    decomp = build_hubbard(HubbardSpec(2, U=0.0))
    assert exact_ground_energy(decomp, (1, 1)) == pytest.approx(-2.0, abs=1e-12)
    # U = t = 1, сдвиги -1/2 в члене взаимодействия: E0 = -sqrt(U^2/4 + 4 t^2)
    decomp = build_hubbard(HubbardSpec(2))
    assert exact_ground_energy(decomp, half_filling_sector(decomp.spec)) == pytest.approx(-np.sqrt(4.25), abs=1e-10)


def test_sector_dimension_and_errors():
    assert len(sector_basis(6, 3, 3)) == 400
    with pytest.raises(InputError):
        sector_basis(2, 3, 1)


def test_grid_minimum_matches_diagonalization():
    spec = HubbardSpec(2)
    decomp = build_hubbard(spec)
    exact = exact_ground_energy(decomp, (1, 1))
    sector = SectorAnsatz.build(decomp, ("W", "T"), 1, noninteracting_ground_state(spec))
    t1, t2 = np.meshgrid(np.linspace(0, 2 * np.pi, 400, endpoint=False), np.linspace(0, np.pi, 400, endpoint=False))
    grid = np.column_stack([t1.ravel(), t2.ravel()])
    energies = sector.energies(grid)
    best = int(np.argmin(energies))
    assert energies.min() >= exact - 1e-9
    assert energies.min() - exact < 1e-3

    def fun(th):
        e, g = sector.energies_and_gradients(th)
        return float(e[0]), g[0]

    polished = minimize(fun, grid[best], jac=True, method="BFGS", options={"gtol": 1e-10})
    assert polished.fun == pytest.approx(exact, abs=1e-6)


def test_sector_gradient_matches_central_difference():
    spec = HubbardSpec(6)
    decomp = build_hubbard(spec)
    sector = SectorAnsatz.build(decomp, ("W", "T_e", "T_o"), 2, noninteracting_ground_state(spec))
    rng = np.random.default_rng(3)
    th = rng.uniform(-1, 1, size=(3, 6))
    _, grads = sector.energies_and_gradients(th)
    h = 1e-6
    for i in range(6):
        step = np.zeros(6)
        step[i] = h
        fd = (sector.energies(th + step) - sector.energies(th - step)) / (2 * h)
        assert_allclose(grads[:, i], fd, atol=1e-6)


def test_ansatz_optimal_two_sites_matches_exact():
    from src.ansatz.vha import compile_hubbard

    spec = HubbardSpec(2)
    compiled, decomp = compile_hubbard(spec, 1)
    exact = exact_ground_energy(decomp, (1, 1))
    assert ansatz_optimal_energy(compiled, decomp) == pytest.approx(exact, abs=1e-6)


def test_oracle_random_starts_on_top_of_hint(monkeypatch):
    from src.hamiltonian import reference

    spec = HubbardSpec(2)
    decomp = build_hubbard(spec)
    sector = SectorAnsatz.build(decomp, ("W", "T"), 1, noninteracting_ground_state(spec))
    seen = {}

    def fake_batch(sector, theta0, eta, iterations):
        seen["theta0"] = theta0
        return sector.energies(theta0), theta0

    monkeypatch.setattr(reference, "steepest_descent_batch", fake_batch)
    optimize_ansatz(sector, starts=20, iterations=1)
    assert seen["theta0"].shape == (21, 2)
    assert_allclose(seen["theta0"][0], [0.1, 0.1])


def test_variational_bound_random_theta():
    spec = HubbardSpec(2)
    decomp = build_hubbard(spec)
    exact = exact_ground_energy(decomp, (1, 1))
    sector = SectorAnsatz.build(decomp, ("W", "T"), 1, noninteracting_ground_state(spec))
    th = np.random.default_rng(4).uniform(-np.pi, np.pi, size=(1000, 2))
    assert sector.energies(th).min() >= exact - 1e-9


@pytest.mark.slow
def test_ansatz_optimal_six_sites():
    from src.ansatz.vha import compile_hubbard

    compiled, decomp = compile_hubbard(HubbardSpec(6), 2)
    exact = exact_ground_energy(decomp, (3, 3))
    e_opt = ansatz_optimal_energy(compiled, decomp)
    assert e_opt >= exact - 1e-9
    a = compiled.ansatz
    sector = SectorAnsatz.build(decomp, a.order, a.repetitions, a.initial_state)
    e_long, _ = optimize_ansatz(sector, iterations=10000)
    assert e_long == pytest.approx(e_opt, abs=1e-6)
