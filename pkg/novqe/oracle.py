"""Exact diagonalization reference for small fermionic systems."""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List
from typing import Optional
from typing import Tuple
from typing import Union

import numpy as np
from scipy import sparse

from novqe.config import MAX_ORACLE_QUBITS
from novqe.config import OPERATOR_TOLERANCE
from novqe.encoding import PauliSum
from novqe.exceptions import DimensionError
from novqe.exceptions import EmptySectorError
from novqe.exceptions import HermiticityError
from novqe.hamiltonian import FermionTensors
from novqe.hamiltonian import OrbitalRotation
from novqe.noization import OneRdm
from novqe.noization import natural_orbital_transform
from novqe.simulator import QuantumState

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Dense many-body operator on ``2^m`` basis states."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        residue = np.max(np.abs(matrix - matrix.conj().T), initial=0.0)
        if residue > OPERATOR_TOLERANCE:
            raise HermiticityError(
                f"Operator is not Hermitian (residue {residue:.3e})"
            )
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def m(self) -> int:
        return int(np.log2(self.dim))

    def spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def _check_size(m: int):
    if m > MAX_ORACLE_QUBITS:
        raise DimensionError(
            f"Exact diagonalization is limited to {MAX_ORACLE_QUBITS} modes, got {m}"
        )


@lru_cache(maxsize=None)
def annihilators(m: int) -> List[sparse.csr_matrix]:
    """Sparse ``c_p`` with Jordan-Wigner sign strings, occupied = ``|1>``."""
    _check_size(m)
    lower = sparse.csr_matrix(np.array([[0, 1], [0, 0]], dtype=complex))
    z = sparse.csr_matrix(np.diag([1.0, -1.0]).astype(complex))
    identity = sparse.identity(2, dtype=complex)
    out = []
    for p in range(m):
        op = sparse.identity(1, dtype=complex, format="csr")
        for k in range(m):
            factor = z if k < p else lower if k == p else identity
            op = sparse.kron(op, factor, format="csr")
        out.append(op)
    return out


def assemble_fermionic(h: FermionTensors) -> DenseOperator:
    """Dense matrix of ``h`` built from fermionic ladder matrices.

    :raises DimensionError: above ``MAX_ORACLE_QUBITS`` modes
    """
    m = h.m
    _check_size(m)
    c = annihilators(m)
    cd = [op.conj().T.tocsr() for op in c]
    dim = 2 ** m
    total = sparse.csr_matrix((dim, dim), dtype=complex)
    for p, q in np.argwhere(np.abs(h.h1) > 0):
        total = total + h.h1[p, q] * (cd[p] @ c[q])
    pairs = {}
    for p, q, r, s in np.argwhere(np.abs(h.h2) > 0):
        if p == q or r == s:
            continue
        if (r, s) not in pairs:
            pairs[(r, s)] = c[r] @ c[s]
        total = total + 0.5 * h.h2[p, q, r, s] * (cd[p] @ cd[q] @ pairs[(r, s)])
    matrix = total.toarray() + h.offset * np.eye(dim)
    return DenseOperator(matrix)


def assemble_pauli(p: PauliSum) -> DenseOperator:
    """Dense matrix of a Pauli sum."""
    _check_size(p.m)
    return DenseOperator(p.matrix())


def sector_indices(m: int, particles: int) -> np.ndarray:
    """Basis indices with exactly ``particles`` occupied modes."""
    xs = np.arange(2 ** m)
    counts = np.array([bin(x).count("1") for x in xs])
    return xs[counts == particles]


def _fix_phase(vector: np.ndarray) -> np.ndarray:
    pivot = np.argmax(np.abs(vector) - 1e-12 * np.arange(len(vector)))
    return vector * (abs(vector[pivot]) / vector[pivot])


def exact_ground_state(
    op: DenseOperator, particle_sector: Optional[int] = None
) -> Tuple[float, np.ndarray]:
    """Lowest eigenpair, optionally within a fixed particle number.

    The eigenvector's largest-magnitude amplitude is made real and positive.

    :param DenseOperator op: Hermitian operator
    :param int particle_sector: number of occupied modes, or None for all
    :raises EmptySectorError: if no basis state has that particle number
    """
    if op.dim > 2 ** MAX_ORACLE_QUBITS:
        raise DimensionError(
            f"Dimension {op.dim} too large for dense diagonalization"
        )
    if particle_sector is None:
        indices = np.arange(op.dim)
    else:
        indices = sector_indices(op.m, particle_sector)
        if len(indices) == 0:
            raise EmptySectorError(
                f"No basis state of {op.m} modes holds {particle_sector} particles"
            )
    values, vectors = np.linalg.eigh(op.matrix[np.ix_(indices, indices)])
    vector = np.zeros(op.dim, dtype=complex)
    vector[indices] = vectors[:, 0]
    return float(values[0]), _fix_phase(vector)


def ground_energy(h: FermionTensors, particle_sector: Optional[int] = None) -> float:
    """Exact ground energy of fermionic tensors."""
    energy, _ = exact_ground_state(assemble_fermionic(h), particle_sector)
    return energy


def exact_1rdm(
    state: Union[QuantumState, np.ndarray], m: Optional[int] = None
) -> OneRdm:
    """``<c†_p c_q>`` by dense brute force.

    :param state: a :class:`QuantumState`, amplitudes or a density matrix
    :param int m: number of modes, inferred from the state when omitted
    """
    data = state.data if isinstance(state, QuantumState) else np.asarray(state)
    m = m or int(np.log2(data.shape[0]))
    c = annihilators(m)
    rho = np.outer(data, data.conj()) if data.ndim == 1 else data
    d = np.zeros((m, m), dtype=complex)
    for p in range(m):
        for q in range(m):
            bilinear = (c[p].conj().T @ c[q]).toarray()
            d[p, q] = np.trace(rho @ bilinear)
    return OneRdm(d)


def exact_natural_orbitals(
    h: FermionTensors, particle_sector: Optional[int] = None
) -> Tuple[OrbitalRotation, np.ndarray]:
    """Natural orbitals and occupations of the exact ground state of ``h``."""
    _, vector = exact_ground_state(assemble_fermionic(h), particle_sector)
    return natural_orbital_transform(exact_1rdm(vector, h.m))


def spectra_agree(a: DenseOperator, b: DenseOperator, atol: float = 1e-8) -> bool:
    return a.dim == b.dim and np.allclose(a.spectrum(), b.spectrum(), atol=atol)
