import json

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import expm
from scipy.sparse.linalg import expm_multiply

from src.ansatz.vha import (
    CompiledAnsatz,
    ParamBinding,
    VhaAnsatz,
    bind,
    compile_hubbard,
    count_report,
    count_table,
    exp_pauli_rotation,
    export_template,
)
from src.core.errors import InputError, InternalError
from src.hamiltonian.hubbard import HubbardSpec, build_hubbard
from src.hamiltonian.pauli import PauliString, PauliSum
from src.hamiltonian.reference import SectorAnsatz
from src.sim.circuit import schedule
from src.sim.gates import h, rz
from src.sim.measure import expectation
from src.sim.states import StateVector, basis_state, run_pure


def gadget_unitary(term, theta):
    """Плотная унитарная гаджета: столбцы это образы базисных векторов."""
    gates, bindings = exp_pauli_rotation(term, 0)
    (b,) = bindings
    gates[b.gate_index] = gates[b.gate_index].with_angle(b.slope * theta)
    n = term.min_qubits()
    circuit = schedule(gates, n)
    cols = [run_pure(circuit, StateVector(n, np.eye(1 << n)[k])).amplitudes for k in range(1 << n)]
    return np.column_stack(cols)


def dense_product(compiled, decomp, theta):
    """prod_k exp(i theta_k H_part(k)) |psi_0>, правый множитель первым."""
    n = decomp.n_qubits
    psi = compiled.initial_state.amplitudes
    for k, label in enumerate(compiled.theta_labels):
        part = decomp.part(label.split("#")[0])
        psi = expm_multiply(1j * theta[k] * part.to_sparse(n).tocsc(), psi)
    return psi


# ---------- Pauli-гаджет ----------
def test_zz_gadget_structure_and_unitary():
    term = PauliString.build(0.25, {0: "Z", 2: "Z"})
    gates, bindings = exp_pauli_rotation(term, 0)
    assert [(g.kind, g.qubits) for g in gates] == [("CNOT", (0, 2)), ("RZ", (2,)), ("CNOT", (0, 2))]
    assert bindings == [ParamBinding(1, 0, -0.5)]
    theta = 0.73
    expected = expm(1j * theta * PauliSum((term,)).to_dense(3))
    assert_allclose(gadget_unitary(term, theta), expected, atol=1e-12)


def test_xx_and_yy_gadgets():
    for label in ("X", "Y"):
        term = PauliString.build(-0.5, {0: label, 1: label})
        theta = -1.1
        expected = expm(1j * theta * PauliSum((term,)).to_dense(2))
        assert_allclose(gadget_unitary(term, theta), expected, atol=1e-12)


def test_wrap_bond_gadget_with_z_chain():
    term = PauliString.build(-0.5, {0: "Y", 1: "Z", 2: "Z", 3: "Y"})
    theta = 0.41
    expected = expm(1j * theta * PauliSum((term,)).to_dense(4))
    assert_allclose(gadget_unitary(term, theta), expected, atol=1e-12)


def test_single_z_and_identity():
    gates, bindings = exp_pauli_rotation(PauliString.build(0.3, {0: "Z"}), 4, gate_offset=7)
    assert [g.kind for g in gates] == ["RZ"]
    assert bindings == [ParamBinding(7, 4, -0.6)]
    assert exp_pauli_rotation(PauliString.build(2.0), 0) == ([], [])


# ---------- компиляция ----------
def test_two_site_compile_exact():
    compiled, decomp = compile_hubbard(HubbardSpec(2), 1)
    assert compiled.n_params == 2
    assert compiled.theta_labels == ("W#1", "T#1")
    rng = np.random.default_rng(1)
    for _ in range(20):
        theta = rng.uniform(-np.pi, np.pi, size=2)
        state = run_pure(bind(compiled, theta), compiled.initial_state)
        overlap = abs(np.vdot(dense_product(compiled, decomp, theta), state.amplitudes))
        assert overlap > 1 - 1e-10


@pytest.mark.slow
def test_six_site_compile_exact():
    compiled, decomp = compile_hubbard(HubbardSpec(6), 2)
    assert compiled.n_params == 6
    assert compiled.theta_labels == ("W#1", "T_e#1", "T_o#1", "W#2", "T_e#2", "T_o#2")
    rng = np.random.default_rng(2)
    for _ in range(20):
        theta = rng.uniform(-1, 1, size=6)
        state = run_pure(bind(compiled, theta), compiled.initial_state)
        overlap = abs(np.vdot(dense_product(compiled, decomp, theta), state.amplitudes))
        assert overlap > 1 - 1e-10


def test_compiled_matches_sector_oracle():
    spec = HubbardSpec(6)
    compiled, decomp = compile_hubbard(spec, 1)
    h_full = decomp.full()
    a = compiled.ansatz
    sector = SectorAnsatz.build(decomp, a.order, a.repetitions, a.initial_state)
    theta = np.array([0.3, -0.2, 0.5])
    circuit_energy = expectation(run_pure(bind(compiled, theta), compiled.initial_state), h_full)
    assert sector.energies(theta)[0] == pytest.approx(circuit_energy, abs=1e-10)


def test_binding_completeness():
    compiled, _ = compile_hubbard(HubbardSpec(6), 2)
    rz_gates = [i for i, g in enumerate(compiled.gates) if g.kind == "RZ"]
    assert sorted(b.gate_index for b in compiled.bindings) == rz_gates
    assert all(compiled.gates[i].angle is None for i in rz_gates)
    assert sorted({b.theta_index for b in compiled.bindings}) == list(range(6))


def test_bind_theta_zero_and_locality():
    compiled, decomp = compile_hubbard(HubbardSpec(2), 1)
    psi0 = compiled.initial_state
    state = run_pure(bind(compiled, [0.0, 0.0]), psi0)
    assert_allclose(state.amplitudes, psi0.amplitudes, atol=1e-12)
    assert len({b.theta_index for b in compiled.bindings}) == 2

    a = bind(compiled, [0.2, 0.5])
    b = bind(compiled, [0.9, 0.5])
    changed = {i for i, (ga, gb) in enumerate(zip(a.gates(), b.gates())) if ga != gb}
    # моменты собираются по общей раскладке -> позиции совпадают
    flat_to_gate = [i for m in compiled.layout for i in m]
    bound_to_first = {b.gate_index for b in compiled.bindings if b.theta_index == 0}
    assert {flat_to_gate[i] for i in changed} == bound_to_first

    with pytest.raises(InputError):
        bind(compiled, [0.1])


def test_ansatz_validation():
    decomp = build_hubbard(HubbardSpec(2))
    with pytest.raises(InputError):
        VhaAnsatz(decomp, 0)
    with pytest.raises(InputError):
        VhaAnsatz(decomp, 1, order=("W",))
    with pytest.raises(InputError):
        VhaAnsatz(decomp, 1, initial_state=basis_state(2, "00"))


def test_ansatz_rejects_empty_part():
    # U = 0: все слагаемые взаимодействия нулевые и отброшены
    decomp = build_hubbard(HubbardSpec(2, U=0.0))
    assert len(decomp.part("W")) == 0
    with pytest.raises(InputError, match="W"):
        VhaAnsatz(decomp, 1)
    with pytest.raises(InputError):
        compile_hubbard(HubbardSpec(2, U=0.0), 1)


def test_compiled_rejects_unbound_rotation():
    with pytest.raises(InternalError):
        CompiledAnsatz(1, (h(0), rz(0)), (), P=1, R=1, initial_state=basis_state(1, "0"))
    with pytest.raises(InternalError):
        CompiledAnsatz(1, (h(0), rz(0)), (ParamBinding(1, 0, 0.0),), P=1, R=1, initial_state=basis_state(1, "0"))


# ---------- учёт схем ----------
@pytest.mark.parametrize("m", [2, 4, 6])
@pytest.mark.parametrize("r", [1, 2])
def test_count_identities(m, r):
    table = count_table([m], [r])
    row = table.iloc[0]
    assert row["N_fd"] == r * row["P"] + 1
    assert row["N_ps"] == 2 * row["G"] + 1


def test_count_anchors():
    table = count_table([2, 4, 6], [1, 2]).set_index(["M", "R"])
    assert table.loc[(2, 1), "N_fd"] == 3
    assert table.loc[(2, 2), "N_fd"] == 5
    assert table.loc[(2, 1), "P"] == 2
    assert table.loc[(4, 1), "P"] == 3
    assert table.loc[(6, 1), "P"] == 3


def test_gate_count_linear_in_sites():
    table = count_table([4, 6, 8], [1])
    g = table["G"].to_numpy()
    # M взаимодействий + 4 строки на связь (XX, YY на каждый спин), M связей в кольце
    assert list(g) == [5 * m for m in (4, 6, 8)]
    assert g[2] - g[1] == g[1] - g[0]


def test_open_chain_has_no_wrap_bond():
    table = count_table([4], [1], boundary="open")
    assert table.loc[0, "G"] == 4 + 4 * 3


def test_count_report_two_site():
    compiled, _ = compile_hubbard(HubbardSpec(2), 1)
    report = count_report(compiled)
    assert report.as_dict() == {"P": 2, "R": 1, "G": 6, "N_fd": 3, "N_ps": 13}


def test_export_template_schema():
    compiled, _ = compile_hubbard(HubbardSpec(2), 1)
    doc = json.loads(export_template(compiled))
    assert doc["n_qubits"] == 4 and doc["n_params"] == 2
    assert len(doc["gates"]) == len(compiled.gates)
    bound = [g for g in doc["gates"] if g["theta_index"] is not None]
    assert len(bound) == compiled.G
    assert all(g["kind"] == "RZ" and g["angle"] is None for g in bound)
    moments = [g["moment"] for g in doc["gates"]]
    assert min(moments) == 0 and max(moments) == len(compiled.layout) - 1
