"""Parameterized circuit templates: product, fSim and LDCA ansätze, Pauli rotations."""
import logging
from dataclasses import dataclass
from dataclasses import replace
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

from novqe.encoding import PauliSum
from novqe.exceptions import ConfigurationError
from novqe.exceptions import DimensionError
from novqe.exceptions import DomainError
from novqe.simulator import GATE_ARITY
from novqe.simulator import GateKind
from novqe.simulator import GateOp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CircuitTemplate:
    """Ordered gates with parameter slots.

    The first ``frozen_prefix`` parameters are held at ``frozen_values`` and
    excluded from optimization.

    :param int m: number of qubits
    :param tuple gates: gates whose ``slots`` index the parameter vector
    :param int n_params: number of parameter slots
    :param int frozen_prefix: count of leading frozen parameters
    :param tuple frozen_values: values of the frozen parameters
    :param str name: template family
    """

    m: int
    gates: Tuple[GateOp, ...]
    n_params: int
    frozen_prefix: int = 0
    frozen_values: Tuple[float, ...] = ()
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        slots = sorted(s for g in self.gates for s in g.slots)
        if slots != list(range(self.n_params)):
            raise ConfigurationError(
                f"Template slots {slots} do not cover 0..{self.n_params - 1} once"
            )
        if not 0 <= self.frozen_prefix <= self.n_params:
            raise ConfigurationError(
                f"frozen_prefix {self.frozen_prefix} outside [0, {self.n_params}]"
            )
        if len(self.frozen_values) not in (0, self.frozen_prefix):
            raise ConfigurationError(
                f"{len(self.frozen_values)} frozen values for a prefix of "
                f"{self.frozen_prefix}"
            )
        for gate in self.gates:
            if any(not 0 <= q < self.m for q in gate.qubits):
                raise DimensionError(
                    f"Gate on {gate.qubits} outside a {self.m}-qubit register"
                )

    @property
    def n_free(self) -> int:
        return self.n_params - self.frozen_prefix

    def full_parameters(self, free: Sequence[float]) -> np.ndarray:
        """Concatenate the frozen prefix with the free parameters."""
        free = np.asarray(free, dtype=float)
        if free.shape != (self.n_free,):
            raise DimensionError(
                f"Expected {self.n_free} free parameters, got {free.shape}"
            )
        frozen = self.frozen_values or (0.0,) * self.frozen_prefix
        return np.concatenate([np.asarray(frozen, dtype=float), free])

    def bind(self, theta: Sequence[float]) -> List[GateOp]:
        """Gates with the full parameter vector ``theta`` bound."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise DimensionError(
                f"Expected {self.n_params} parameters, got {theta.shape}"
            )
        return [gate.bind(theta) for gate in self.gates]

    def freeze(self, theta: Sequence[float]) -> "CircuitTemplate":
        """Freeze every current parameter at the given values."""
        theta = tuple(float(x) for x in theta)
        if len(theta) != self.n_params:
            raise DimensionError(
                f"Expected {self.n_params} parameters, got {len(theta)}"
            )
        return replace(self, frozen_prefix=self.n_params, frozen_values=theta)

    def append(self, gate: GateOp) -> "CircuitTemplate":
        """Add a gate whose parameters take the next free slots."""
        arity = GATE_ARITY[gate.kind]
        slots = tuple(range(self.n_params, self.n_params + arity))
        gate = replace(gate, slots=slots, params=())
        return replace(
            self, gates=self.gates + (gate,), n_params=self.n_params + arity
        )


def _require_even(m: int):
    if m < 2 or m % 2:
        raise ConfigurationError(f"The ansatz needs an even number of qubits, got {m}")


def initial_excitations(m: int) -> List[int]:
    """Qubits flipped to build the half-filled Néel Fock state.

    Site ``i`` holds one fermion of spin ``i mod 2``.
    """
    return [2 * i + i % 2 for i in range(m // 2)]


def _brickwork(m: int, sublayer: int) -> List[Tuple[int, int]]:
    start = sublayer % 2
    return [(q, q + 1) for q in range(start, m - 1, 2)]


def _excitation_gates(m: int) -> List[GateOp]:
    return [GateOp(GateKind.X, (q,)) for q in initial_excitations(m)]


def build_product(m: int) -> CircuitTemplate:
    """One RY rotation per qubit."""
    if m < 1:
        raise ConfigurationError(f"m must be positive, got {m}")
    gates = [GateOp(GateKind.RY, (q,), slots=(q,)) for q in range(m)]
    return CircuitTemplate(m, gates, m, name="product")


def build_fsim(m: int, layers: int = 1) -> CircuitTemplate:
    """Néel state followed by brickwork layers of fSim(theta, phi) gates."""
    _require_even(m)
    gates = _excitation_gates(m)
    n_params = 0
    for _ in range(layers):
        for sublayer in (0, 1):
            for pair in _brickwork(m, sublayer):
                gates.append(
                    GateOp(GateKind.FSIM, pair, slots=(n_params, n_params + 1))
                )
                n_params += 2
    return CircuitTemplate(m, gates, n_params, name="fsim")


def build_ldca(m: int, cycles: int = 1) -> CircuitTemplate:
    """Néel state followed by LDCA cycles.

    A cycle has ``m`` alternating brickwork sublayers of five-parameter blocks
    ``ZZ, XX, YY, XY, YX``.
    """
    _require_even(m)
    gates = _excitation_gates(m)
    n_params = 0
    for _ in range(cycles):
        for sublayer in range(m):
            for pair in _brickwork(m, sublayer):
                slots = tuple(range(n_params, n_params + 5))
                gates.append(GateOp(GateKind.LDCA_BLOCK, pair, slots=slots))
                n_params += 5
    return CircuitTemplate(m, gates, n_params, name="ldca")


#: ansatz builders by name
ANSATZE = {
    "product": lambda m, layers: build_product(m),
    "fsim": build_fsim,
    "ldca": build_ldca,
}


def build_ansatz(name: str, m: int, layers: int = 1) -> CircuitTemplate:
    try:
        builder = ANSATZE[name]
    except KeyError:
        raise ConfigurationError(
            f"ansatz: unknown ansatz {name!r}, expected one of {sorted(ANSATZE)}"
        )
    return builder(m, layers)


def pauli_rotation(generator: PauliSum, slot: Optional[int] = None) -> GateOp:
    """Gate implementing ``exp(i theta G)`` for a Hermitian Pauli generator.

    :param PauliSum generator: one or more Pauli strings with real weights
    :param int slot: parameter slot of ``theta``; assigned on append when None
    :raises DomainError: if the generator is proportional to the identity
    """
    support = sorted({q for s in generator.strings for q in s.support})
    if not support:
        raise DomainError("Cannot build a rotation about the identity")
    local = tuple(
        (coeff, "".join(string.letters[q] for q in support))
        for coeff, string in generator.terms
    )
    slots = () if slot is None else (slot,)
    return GateOp(GateKind.PAULI_ROTATION, tuple(support), slots=slots, generator=local)
