import numpy as np
import pytest

from novqe.ansatz import CircuitTemplate
from novqe.ansatz import build_ansatz
from novqe.ansatz import build_fsim
from novqe.ansatz import build_ldca
from novqe.ansatz import build_product
from novqe.ansatz import initial_excitations
from novqe.ansatz import pauli_rotation
from novqe.encoding import PauliSum
from novqe.encoding import number_operator
from novqe.exceptions import ConfigurationError
from novqe.exceptions import DimensionError
from novqe.exceptions import DomainError
from novqe.simulator import GateKind
from novqe.simulator import GateOp
from novqe.simulator import QuantumState
from novqe.simulator import expectation
from novqe.simulator import simulate
from novqe.utils import make_rng


@pytest.mark.parametrize(
    "name, m, n_params",
    [
        ("product", 4, 4),
        ("product", 8, 8),
        ("fsim", 4, 6),
        ("fsim", 8, 14),
        ("ldca", 4, 30),
        ("ldca", 8, 140),
    ],
)
def test_parameter_counts(name, m, n_params):
    template = build_ansatz(name, m)
    assert template.n_params == n_params
    assert template.n_free == n_params
    assert template.name == name


def test_layers_repeat():
    assert build_fsim(4, layers=2).n_params == 12
    assert build_ldca(4, cycles=2).n_params == 60


def test_neel_excitations():
    assert initial_excitations(4) == [0, 3]
    assert initial_excitations(8) == [0, 3, 4, 7]


def test_unknown_ansatz():
    with pytest.raises(ConfigurationError, match="ansatz"):
        build_ansatz("uccsd", 4)
    with pytest.raises(ConfigurationError):
        build_fsim(3)


def test_fsim_at_zero_is_the_reference_state():
    template = build_fsim(4)
    state = simulate(template.bind(np.zeros(template.n_params)), 4)
    np.testing.assert_allclose(state.data, QuantumState.fock(4, [0, 3]).data)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_fsim_conserves_particle_number(seed):
    template = build_fsim(4, layers=2)
    theta = make_rng(seed).uniform(-np.pi, np.pi, template.n_params)
    state = simulate(template.bind(theta), 4)
    assert expectation(state, number_operator(4)) == pytest.approx(2.0, abs=1e-10)


def test_bind_checks_length():
    with pytest.raises(DimensionError):
        build_product(4).bind(np.zeros(3))


def test_template_slot_coverage():
    gate = GateOp(GateKind.RY, (0,), slots=(1,))
    with pytest.raises(ConfigurationError):
        CircuitTemplate(1, (gate,), 1)
    with pytest.raises(DimensionError):
        CircuitTemplate(1, (GateOp(GateKind.RY, (1,), slots=(0,)),), 1)


def test_freeze_and_append():
    reference = build_product(4).freeze([0.1, 0.2, 0.3, 0.4])
    assert reference.n_free == 0
    generator = PauliSum(4, [(1.0, "XYII")])
    grown = reference.append(pauli_rotation(generator))
    assert grown.n_params == 5
    assert grown.n_free == 1
    np.testing.assert_allclose(
        grown.full_parameters([0.5]), [0.1, 0.2, 0.3, 0.4, 0.5]
    )
    gate = grown.bind(grown.full_parameters([0.5]))[-1]
    assert gate.kind is GateKind.PAULI_ROTATION
    assert gate.qubits == (0, 1)
    assert gate.params == (0.5,)
    with pytest.raises(DimensionError):
        grown.full_parameters([0.5, 0.6])


def test_pauli_rotation_of_identity():
    with pytest.raises(DomainError):
        pauli_rotation(PauliSum(2, [], offset=1.0))


def test_pauli_rotation_acts_like_the_generator():
    generator = PauliSum(2, [(1.0, "XX"), (1.0, "YY")])
    template = CircuitTemplate(2, [GateOp(GateKind.X, (0,))], 0).append(
        pauli_rotation(generator)
    )
    state = simulate(template.bind([np.pi / 4]), 2)
    # exp(i pi/4 (XX + YY)) moves |10> fully to |01>
    np.testing.assert_allclose(np.abs(state.data), [0, 1, 0, 0], atol=1e-12)
