"""Statevector and density-matrix simulation with depolarizing noise.

States are stored as dense arrays indexed by basis integers whose most
significant bit is qubit 0.  Gates act locally on the ``(2,) * m`` tensor view.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from functools import lru_cache
from typing import Iterable
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import numpy as np

from novqe.config import EIGENVALUE_FLOOR
from novqe.config import STATE_TOLERANCE
from novqe.config import SYCAMORE_EPS1
from novqe.config import SYCAMORE_EPS2
from novqe.encoding import PauliString
from novqe.encoding import PauliSum
from novqe.exceptions import AllocationError
from novqe.exceptions import DimensionError
from novqe.exceptions import DomainError
from novqe.exceptions import StateError
from novqe.types import Seed
from novqe.utils import make_rng

logger = logging.getLogger(__name__)


class StateKind(str, Enum):
    PURE = "pure"
    MIXED = "mixed"


class QuantumState:
    """Register of ``m`` qubits, as amplitudes (pure) or a density matrix (mixed).

    :param int m: number of qubits
    :param np.ndarray data: ``2^m`` amplitudes or a ``2^m x 2^m`` density matrix
    :param bool validate: check normalisation, Hermiticity and positivity
    """

    def __init__(self, m: int, data: np.ndarray, validate: bool = True):
        data = np.asarray(data, dtype=complex)
        dim = 2 ** m
        if data.shape == (dim,):
            self.kind = StateKind.PURE
        elif data.shape == (dim, dim):
            self.kind = StateKind.MIXED
        else:
            raise DimensionError(
                f"State data of shape {data.shape} does not describe {m} qubits"
            )
        self.m = m
        self.data = data
        if validate:
            self.validate()

    def __repr__(self) -> str:
        return f"QuantumState(m={self.m}, kind={self.kind.value})"

    @property
    def dim(self) -> int:
        return 2 ** self.m

    @property
    def is_pure(self) -> bool:
        return self.kind is StateKind.PURE

    def validate(self):
        if self.is_pure:
            norm = np.linalg.norm(self.data)
            if abs(norm - 1) > STATE_TOLERANCE:
                raise StateError(f"Statevector norm is {norm}, expected 1")
            return
        rho = self.data
        if np.max(np.abs(rho - rho.conj().T)) > STATE_TOLERANCE:
            raise StateError("Density matrix is not Hermitian")
        trace = np.trace(rho).real
        if abs(trace - 1) > STATE_TOLERANCE:
            raise StateError(f"Density matrix trace is {trace}, expected 1")
        lowest = np.linalg.eigvalsh(rho)[0]
        if lowest < EIGENVALUE_FLOOR:
            raise StateError(f"Density matrix has eigenvalue {lowest} < 0")

    @classmethod
    def zero(cls, m: int, kind: StateKind = StateKind.PURE) -> "QuantumState":
        return cls.basis(m, 0, kind)

    @classmethod
    def basis(
        cls, m: int, index: int, kind: StateKind = StateKind.PURE
    ) -> "QuantumState":
        """Computational basis state ``|index>``."""
        amplitudes = np.zeros(2 ** m, dtype=complex)
        amplitudes[index] = 1.0
        state = cls(m, amplitudes, validate=False)
        return state if StateKind(kind) is StateKind.PURE else state.to_mixed()

    @classmethod
    def fock(
        cls, m: int, occupied: Iterable[int], kind: StateKind = StateKind.PURE
    ) -> "QuantumState":
        """Fock state with the given spin-orbitals (qubits) occupied."""
        index = 0
        for k in occupied:
            index |= 1 << (m - 1 - k)
        return cls.basis(m, index, kind)

    @classmethod
    def maximally_mixed(cls, m: int) -> "QuantumState":
        return cls(m, np.eye(2 ** m) / 2 ** m, validate=False)

    def to_mixed(self) -> "QuantumState":
        if not self.is_pure:
            return self
        return QuantumState(self.m, np.outer(self.data, self.data.conj()), False)

    def density_matrix(self) -> np.ndarray:
        return self.to_mixed().data


class GateKind(str, Enum):
    RY = "ry"
    X = "x"
    FSIM = "fsim"
    LDCA_BLOCK = "ldca-block"
    PAULI_ROTATION = "pauli-rotation"


#: number of angles consumed by each gate kind
GATE_ARITY = {
    GateKind.RY: 1,
    GateKind.X: 0,
    GateKind.FSIM: 2,
    GateKind.LDCA_BLOCK: 5,
    GateKind.PAULI_ROTATION: 1,
}


@dataclass(frozen=True)
class GateOp:
    """A gate on specific qubits.

    ``slots`` index the parameter vector of a circuit template; ``params`` are
    the bound angles.  Pauli rotations carry their Hermitian ``generator`` as
    ``(coefficient, letters)`` pairs over ``qubits``.
    """

    kind: GateKind
    qubits: Tuple[int, ...]
    params: Tuple[float, ...] = ()
    slots: Tuple[int, ...] = ()
    generator: Tuple[Tuple[float, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(set(self.qubits)) != len(self.qubits):
            raise DimensionError(f"Gate qubits must be distinct, got {self.qubits}")

    def bind(self, theta: Sequence[float]) -> "GateOp":
        return GateOp(
            self.kind,
            self.qubits,
            tuple(float(theta[s]) for s in self.slots),
            self.slots,
            self.generator,
        )


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing noise applied after every elementary gate.

    :param float p1: single-qubit depolarizing probability
    :param float p2: per-qubit probability inside the two-qubit channel
    :param bool enabled: simulate with density matrices and apply channels
    """

    p1: float = 0.0
    p2: float = 0.0
    enabled: bool = False

    def __post_init__(self):
        for name in ("p1", "p2"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise DomainError(f"{name} must lie in [0, 1], got {value}")

    @classmethod
    def noiseless(cls) -> "NoiseModel":
        return cls()


def rb_to_depolarizing(eps1: float, eps2: float) -> NoiseModel:
    """Convert randomized-benchmarking error rates to depolarizing probabilities.

    :param float eps1: single-qubit RB error rate
    :param float eps2: two-qubit RB error rate
    :raises DomainError: if ``eps2 > 0.8`` (negative radicand)
    """
    radicand = 1 - 1.25 * eps2
    if radicand < 0:
        raise DomainError(f"eps2 = {eps2} exceeds 0.8; no depolarizing equivalent")
    return NoiseModel(p1=1.5 * eps1, p2=1 - np.sqrt(radicand), enabled=True)


def sycamore_noise(r: float = 1.0) -> NoiseModel:
    """Noise at ratio ``r`` of the 2019 Sycamore error rates."""
    return rb_to_depolarizing(r * SYCAMORE_EPS1, r * SYCAMORE_EPS2)


# region gate matrices
_I2 = np.eye(2, dtype=complex)
_SINGLE = {
    "I": _I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
#: rotation order inside an LDCA block
LDCA_GENERATORS = ("ZZ", "XX", "YY", "XY", "YX")


def _pauli_matrix(letters: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for letter in letters:
        out = np.kron(out, _SINGLE[letter])
    return out


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def fsim_matrix(theta: float, phi: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array(
        [
            [1, 0, 0, 0],
            [0, c, -1j * s, 0],
            [0, -1j * s, c, 0],
            [0, 0, 0, np.exp(-1j * phi)],
        ],
        dtype=complex,
    )


def two_qubit_rotation(letters: str, theta: float) -> np.ndarray:
    """``exp(-i theta P / 2)`` for a Pauli product ``P``."""
    return np.cos(theta / 2) * np.eye(4) - 1j * np.sin(theta / 2) * _pauli_matrix(
        letters
    )


@lru_cache(maxsize=1024)
def _generator_spectrum(generator: Tuple[Tuple[float, str], ...]):
    matrix = sum(c * _pauli_matrix(letters) for c, letters in generator)
    return np.linalg.eigh(matrix)


def pauli_rotation_matrix(
    generator: Tuple[Tuple[float, str], ...], theta: float
) -> np.ndarray:
    """``exp(i theta G)`` by spectral decomposition of the Hermitian generator."""
    values, vectors = _generator_spectrum(generator)
    return (vectors * np.exp(1j * theta * values)) @ vectors.conj().T


# endregion


def _elementary(gate: GateOp):
    """Yield ``(matrix, qubits)`` for each elementary gate of ``gate``."""
    kind = gate.kind
    if kind is GateKind.X:
        yield _SINGLE["X"], gate.qubits
    elif kind is GateKind.RY:
        yield ry_matrix(*gate.params), gate.qubits
    elif kind is GateKind.FSIM:
        yield fsim_matrix(*gate.params), gate.qubits
    elif kind is GateKind.LDCA_BLOCK:
        for letters, theta in zip(LDCA_GENERATORS, gate.params):
            yield two_qubit_rotation(letters, theta), gate.qubits
    elif kind is GateKind.PAULI_ROTATION:
        yield pauli_rotation_matrix(gate.generator, *gate.params), gate.qubits
    else:  # pragma: no cover
        raise ValueError(f"Unsupported gate {kind}")


def gate_matrix(gate: GateOp) -> np.ndarray:
    """Full local unitary of a (possibly composite) gate."""
    k = len(gate.qubits)
    out = np.eye(2 ** k, dtype=complex)
    for matrix, _ in _elementary(gate):
        out = matrix @ out
    return out


def _apply_local(tensor: np.ndarray, matrix: np.ndarray, axes: Sequence[int]):
    k = len(axes)
    op = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(op, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _apply_unitary(state: QuantumState, matrix: np.ndarray, qubits: Sequence[int]):
    m = state.m
    if state.is_pure:
        tensor = state.data.reshape((2,) * m)
        return _apply_local(tensor, matrix, qubits).reshape(state.dim)
    tensor = state.data.reshape((2,) * (2 * m))
    tensor = _apply_local(tensor, matrix, qubits)
    tensor = _apply_local(tensor, matrix.conj(), [m + q for q in qubits])
    return tensor.reshape(state.dim, state.dim)


def depolarize(rho: np.ndarray, m: int, qubit: int, p: float) -> np.ndarray:
    """Single-qubit depolarizing channel on ``qubit`` of a density matrix."""
    if p == 0:
        return rho
    tensor = np.moveaxis(rho.reshape((2,) * (2 * m)), (qubit, m + qubit), (0, 1))
    out = np.empty_like(tensor)
    keep, swap, coherence = 1 - 2 * p / 3, 2 * p / 3, 1 - 4 * p / 3
    out[0, 0] = keep * tensor[0, 0] + swap * tensor[1, 1]
    out[1, 1] = keep * tensor[1, 1] + swap * tensor[0, 0]
    out[0, 1] = coherence * tensor[0, 1]
    out[1, 0] = coherence * tensor[1, 0]
    out = np.moveaxis(out, (0, 1), (qubit, m + qubit))
    return out.reshape(2 ** m, 2 ** m)


def apply_gate(
    s: QuantumState, g: GateOp, n: Optional[NoiseModel] = None
) -> QuantumState:
    """Apply a bound gate, followed by depolarizing channels when noise is on.

    :param QuantumState s: input state; must be mixed if noise is enabled
    :param GateOp g: gate with bound parameters
    :param NoiseModel n: noise model, noiseless by default
    """
    n = n or NoiseModel.noiseless()
    if any(not 0 <= q < s.m for q in g.qubits):
        raise DimensionError(f"Gate qubits {g.qubits} out of range for {s.m} qubits")
    if len(g.params) != GATE_ARITY[g.kind]:
        raise DimensionError(
            f"{g.kind.value} gate expects {GATE_ARITY[g.kind]} angles, "
            f"got {len(g.params)}"
        )
    if n.enabled and s.is_pure:
        raise StateError("Noisy simulation requires a mixed state")
    data = s.data
    state = s
    for matrix, qubits in _elementary(g):
        data = _apply_unitary(state, matrix, qubits)
        if n.enabled:
            p = n.p1 if len(qubits) == 1 else n.p2
            for q in qubits:
                data = depolarize(data, s.m, q, p)
        state = QuantumState(s.m, data, validate=False)
    return state


def simulate(
    gates: Iterable[GateOp],
    m: int,
    noise: Optional[NoiseModel] = None,
    initial: Optional[QuantumState] = None,
) -> QuantumState:
    """Run bound gates from ``|0...0>`` (or ``initial``).

    The state is a density matrix when noise is enabled, else a statevector.
    """
    noise = noise or NoiseModel.noiseless()
    kind = StateKind.MIXED if noise.enabled else StateKind.PURE
    state = initial if initial is not None else QuantumState.zero(m, kind)
    if noise.enabled:
        state = state.to_mixed()
    for gate in gates:
        state = apply_gate(state, gate, noise)
    return state


class CompiledObservable:
    """A :class:`PauliSum` prepared for repeated evaluation on ``2^m`` states.

    Each term ``P_i`` acts as ``P_i|x> = phases[i, x] |x ^ flips[i]>``.
    """

    def __init__(self, observable: PauliSum):
        self.observable = observable
        self.m = observable.m
        self.coefficients = observable.coefficients
        self.offset = observable.offset
        self.flips = np.array([s.flip_mask for s in observable.strings], dtype=np.int64)
        xs = np.arange(2 ** self.m)
        self.targets = xs[None, :] ^ self.flips[:, None]
        if len(observable):
            self.phases = np.stack([s.phases() for s in observable.strings])
        else:
            self.phases = np.zeros((0, 2 ** self.m), dtype=complex)

    def __len__(self) -> int:
        return len(self.coefficients)

    @cached_property
    def matrix(self) -> np.ndarray:
        dim = 2 ** self.m
        out = self.offset * np.eye(dim, dtype=complex)
        xs = np.broadcast_to(np.arange(dim), self.targets.shape)
        np.add.at(out, (self.targets, xs), self.coefficients[:, None] * self.phases)
        return out

    def term_expectations(self, state: QuantumState) -> np.ndarray:
        """Exact ``<P_i>`` for every term."""
        if state.m != self.m:
            raise DimensionError(
                f"Observable on {self.m} qubits applied to a {state.m}-qubit state"
            )
        if state.is_pure:
            psi = state.data
            values = np.sum(self.phases * psi[self.targets].conj() * psi, axis=1)
        else:
            rows = np.arange(state.dim)
            values = np.sum(self.phases * state.data[rows, self.targets], axis=1)
        return values.real

    def expectation(self, state: QuantumState) -> float:
        if state.m != self.m:
            raise DimensionError(
                f"Observable on {self.m} qubits applied to a {state.m}-qubit state"
            )
        if state.is_pure:
            return float(np.vdot(state.data, self.matrix @ state.data).real)
        return float(np.sum(state.data * self.matrix.T).real)


def _compiled(o: Union[PauliSum, CompiledObservable]) -> CompiledObservable:
    return o if isinstance(o, CompiledObservable) else CompiledObservable(o)


def expectation(s: QuantumState, o: Union[PauliSum, CompiledObservable]) -> float:
    """Exact expectation value, offset included."""
    return _compiled(o).expectation(s)


def sampled_expectation(
    s: QuantumState,
    o: Union[PauliSum, CompiledObservable],
    alloc: Sequence[int],
    seed: Union[Seed, np.random.Generator] = None,
) -> float:
    """Finite-shot estimate with independent binomial sampling of each term.

    :param QuantumState s: the measured state
    :param o: observable
    :param alloc: shots per term, each at least 1
    :param seed: integer seed or an existing generator
    """
    compiled = _compiled(o)
    alloc = np.asarray(alloc, dtype=np.int64)
    if alloc.shape != (len(compiled),):
        raise AllocationError(
            f"Allocation has {alloc.size} entries for {len(compiled)} terms"
        )
    if np.any(alloc < 1):
        raise AllocationError("Every term needs at least one shot")
    if not len(compiled):
        return compiled.offset
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    values = compiled.term_expectations(s)
    probabilities = np.clip((1 + values) / 2, 0.0, 1.0)
    counts = rng.binomial(alloc, probabilities)
    estimates = 2 * counts / alloc - 1
    return float(compiled.offset + np.dot(compiled.coefficients, estimates))


def pauli_expectation(s: QuantumState, string: PauliString) -> float:
    """Exact ``<P>`` of a single Pauli string."""
    return expectation(s, PauliSum(string.m, [(1.0, string.letters)]))
