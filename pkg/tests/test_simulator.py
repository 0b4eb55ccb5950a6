import numpy as np
import pytest
from scipy.linalg import expm

from novqe.encoding import PauliString
from novqe.encoding import PauliSum
from novqe.exceptions import AllocationError
from novqe.exceptions import DimensionError
from novqe.exceptions import DomainError
from novqe.exceptions import StateError
from novqe.oracle import assemble_fermionic
from novqe.oracle import exact_ground_state
from novqe.simulator import CompiledObservable
from novqe.simulator import GateKind
from novqe.simulator import GateOp
from novqe.simulator import NoiseModel
from novqe.simulator import QuantumState
from novqe.simulator import StateKind
from novqe.simulator import apply_gate
from novqe.simulator import depolarize
from novqe.simulator import expectation
from novqe.simulator import fsim_matrix
from novqe.simulator import gate_matrix
from novqe.simulator import pauli_expectation
from novqe.simulator import pauli_rotation_matrix
from novqe.simulator import rb_to_depolarizing
from novqe.simulator import sampled_expectation
from novqe.simulator import simulate
from novqe.simulator import sycamore_noise
from novqe.vqe import allocate_shots


def test_state_validation():
    with pytest.raises(StateError, match="norm"):
        QuantumState(1, np.array([1.0, 1.0]))
    with pytest.raises(DimensionError):
        QuantumState(2, np.array([1.0, 0.0]))
    with pytest.raises(StateError, match="trace"):
        QuantumState(1, np.eye(2))
    assert QuantumState.maximally_mixed(2).kind is StateKind.MIXED


def test_fock_state_puts_qubit_zero_first():
    state = QuantumState.fock(4, [0])
    assert np.argmax(np.abs(state.data)) == 0b1000
    mixed = QuantumState.fock(4, [0, 3], StateKind.MIXED)
    assert mixed.data[0b1001, 0b1001] == 1.0


def test_x_gate_flips():
    state = apply_gate(QuantumState.zero(2), GateOp(GateKind.X, (1,)))
    np.testing.assert_allclose(state.data, QuantumState.basis(2, 1).data)


def test_ry_rotation():
    gate = GateOp(GateKind.RY, (0,), params=(np.pi / 2,))
    state = apply_gate(QuantumState.zero(1), gate)
    np.testing.assert_allclose(state.data, [1 / np.sqrt(2), 1 / np.sqrt(2)])


def test_apply_gate_errors():
    with pytest.raises(DimensionError, match="out of range"):
        apply_gate(QuantumState.zero(2), GateOp(GateKind.X, (2,)))
    with pytest.raises(DimensionError, match="angles"):
        apply_gate(QuantumState.zero(2), GateOp(GateKind.RY, (0,)))
    with pytest.raises(StateError):
        apply_gate(QuantumState.zero(2), GateOp(GateKind.X, (0,)), sycamore_noise())
    with pytest.raises(DimensionError):
        GateOp(GateKind.FSIM, (1, 1))


def test_rb_to_depolarizing(golden):
    noise = golden["noise"]
    model = rb_to_depolarizing(noise["eps1"], noise["eps2"])
    assert model.enabled
    assert model.p1 == pytest.approx(noise["p1"], abs=1e-12)
    assert model.p2 == pytest.approx(noise["p2"], abs=1e-7)
    assert sycamore_noise(1.0) == model
    assert sycamore_noise(0.5).p1 == pytest.approx(noise["p1"] / 2)


def test_noise_domain():
    with pytest.raises(DomainError):
        rb_to_depolarizing(0.001, 0.9)
    with pytest.raises(DomainError):
        NoiseModel(p1=1.5)
    assert not NoiseModel.noiseless().enabled


def test_full_depolarization():
    rho = QuantumState.zero(2, StateKind.MIXED).data
    out = depolarize(rho, 2, 0, 0.75)
    np.testing.assert_allclose(np.diag(out).real, [0.5, 0, 0.5, 0])
    assert np.trace(out).real == pytest.approx(1.0)


def test_gate_matrices_are_unitary():
    gates = [
        GateOp(GateKind.FSIM, (0, 1), params=(0.3, 1.1)),
        GateOp(GateKind.LDCA_BLOCK, (0, 1), params=(0.1, 0.2, 0.3, 0.4, 0.5)),
        GateOp(GateKind.RY, (0,), params=(0.7,)),
    ]
    for gate in gates:
        u = gate_matrix(gate)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(len(u)), atol=1e-12)


def test_fsim_swaps_excitations():
    np.testing.assert_allclose(
        np.abs(fsim_matrix(np.pi / 2, 0.0)[1:3, 1:3]), [[0, 1], [1, 0]], atol=1e-12
    )


def test_pauli_rotation_matrix():
    generator = ((1.0, "XX"), (1.0, "YY"))
    g = PauliSum(2, [(1.0, "XX"), (1.0, "YY")]).matrix()
    np.testing.assert_allclose(
        pauli_rotation_matrix(generator, 0.4), expm(0.4j * g), atol=1e-12
    )


def test_noiseless_channel_matches_pure_simulation(dimer_pauli):
    gates = [
        GateOp(GateKind.X, (0,)),
        GateOp(GateKind.FSIM, (0, 1), params=(0.4, 0.2)),
        GateOp(GateKind.LDCA_BLOCK, (1, 2), params=(0.1, -0.2, 0.3, 0.5, 0.8)),
    ]
    pure = simulate(gates, 4)
    mixed = simulate(gates, 4, NoiseModel(enabled=True))
    assert pure.is_pure and not mixed.is_pure
    np.testing.assert_allclose(mixed.data, pure.density_matrix(), atol=1e-12)
    assert expectation(mixed, dimer_pauli) == pytest.approx(
        expectation(pure, dimer_pauli), abs=1e-12
    )


def test_noisy_simulation_stays_physical():
    gates = [GateOp(GateKind.RY, (q,), params=(0.3 * q + 0.1,)) for q in range(3)]
    gates.append(GateOp(GateKind.FSIM, (0, 1), params=(0.5, 0.7)))
    state = simulate(gates, 3, sycamore_noise(10.0))
    state.validate()
    assert np.linalg.matrix_rank(state.data, tol=1e-10) > 1


def test_compiled_observable(dimer_pauli, make_state):
    compiled = CompiledObservable(dimer_pauli)
    np.testing.assert_allclose(compiled.matrix, dimer_pauli.matrix(), atol=1e-12)
    pure = make_state(4, seed=1)
    mixed = pure.to_mixed()
    np.testing.assert_allclose(
        compiled.term_expectations(pure), compiled.term_expectations(mixed), atol=1e-12
    )
    direct = np.vdot(pure.data, dimer_pauli.matrix() @ pure.data).real
    assert compiled.expectation(pure) == pytest.approx(direct, abs=1e-12)
    assert compiled.expectation(mixed) == pytest.approx(direct, abs=1e-12)
    with pytest.raises(DimensionError):
        compiled.expectation(make_state(2, seed=1))


def test_pauli_expectation():
    state = QuantumState.fock(2, [0])
    assert pauli_expectation(state, PauliString("ZI")) == pytest.approx(-1.0)
    assert pauli_expectation(state, PauliString("IZ")) == pytest.approx(1.0)


def test_sampled_expectation_errors(dimer_pauli):
    state = QuantumState.zero(4)
    with pytest.raises(AllocationError):
        sampled_expectation(state, dimer_pauli, [1] * 5)
    with pytest.raises(AllocationError):
        sampled_expectation(state, dimer_pauli, [0] + [1] * 5)


def test_sampled_expectation_is_reproducible(dimer_pauli, make_state):
    state = make_state(4, seed=3)
    alloc = allocate_shots(dimer_pauli, 1000)
    a = sampled_expectation(state, dimer_pauli, alloc, seed=5)
    b = sampled_expectation(state, dimer_pauli, alloc, seed=5)
    assert a == b


def test_shot_noise_bound(dimer, dimer_pauli):
    _, vector = exact_ground_state(assemble_fermionic(dimer), 2)
    state = QuantumState(4, vector)
    alloc = allocate_shots(dimer_pauli, 10 ** 4)
    samples = [
        sampled_expectation(state, dimer_pauli, alloc, seed=s) for s in range(100)
    ]
    assert np.std(samples) <= 1.2 * 2.5 / np.sqrt(10 ** 4)
    assert np.mean(samples) == pytest.approx(expectation(state, dimer_pauli), abs=0.01)
