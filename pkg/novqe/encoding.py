"""Jordan-Wigner encoding of fermionic tensors into Pauli sums.

Qubit ``k`` holds spin-orbital ``k``; an occupied orbital is ``|1>``.  Qubit 0 is
the leftmost letter of a Pauli string and the most significant bit of a basis
index.
"""
import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict
from typing import Iterable
from typing import List
from typing import Mapping
from typing import Tuple
from typing import Union

import numpy as np

from novqe.config import IMAG_TOLERANCE
from novqe.config import PRUNE_TOLERANCE
from novqe.exceptions import DimensionError
from novqe.exceptions import HermiticityError
from novqe.hamiltonian import FermionTensors
from novqe.hamiltonian import HubbardSpec
from novqe.hamiltonian import build_hubbard

logger = logging.getLogger(__name__)

LETTERS = "IXYZ"

# single-qubit products: _PRODUCT[a, b] is the letter of a*b, _PHASE[a, b] its phase
_PRODUCT = np.array(
    [
        [0, 1, 2, 3],
        [1, 0, 3, 2],
        [2, 3, 0, 1],
        [3, 2, 1, 0],
    ],
    dtype=np.int8,
)
_PHASE = np.array(
    [
        [1, 1, 1, 1],
        [1, 1, 1j, -1j],
        [1, -1j, 1, 1j],
        [1, 1j, -1j, 1],
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-qubit Pauli letters, e.g. ``"XZXI"``."""

    letters: str

    def __post_init__(self):
        letters = self.letters.upper()
        if not letters or set(letters) - set(LETTERS):
            raise ValueError(f"Invalid Pauli string {self.letters!r}")
        object.__setattr__(self, "letters", letters)

    def __str__(self) -> str:
        return self.letters

    @property
    def m(self) -> int:
        return len(self.letters)

    @classmethod
    def identity(cls, m: int) -> "PauliString":
        return cls("I" * m)

    @classmethod
    def from_sparse(cls, m: int, letters: Mapping[int, str]) -> "PauliString":
        """Build a string from ``{qubit: letter}``, identity elsewhere."""
        chars = ["I"] * m
        for qubit, letter in letters.items():
            if not 0 <= qubit < m:
                raise DimensionError(f"Qubit {qubit} out of range for {m} qubits")
            chars[qubit] = letter
        return cls("".join(chars))

    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(k for k, letter in enumerate(self.letters) if letter != "I")

    @property
    def flip_mask(self) -> int:
        """Basis-index bits flipped by the string (X and Y letters)."""
        return _mask(self.letters, "XY")

    def phases(self) -> np.ndarray:
        """Phase of ``P|x>`` for every basis index ``x``, with ``P|x> = phase|x^f>``."""
        return _phases(self.letters)

    def matrix(self) -> np.ndarray:
        """Dense ``2^m x 2^m`` matrix."""
        dim = 2 ** self.m
        xs = np.arange(dim)
        out = np.zeros((dim, dim), dtype=complex)
        out[xs ^ self.flip_mask, xs] = self.phases()
        return out


def _mask(letters: str, chosen: str) -> int:
    m = len(letters)
    mask = 0
    for k, letter in enumerate(letters):
        if letter in chosen:
            mask |= 1 << (m - 1 - k)
    return mask


@lru_cache(maxsize=4096)
def _phases(letters: str) -> np.ndarray:
    m = len(letters)
    xs = np.arange(2 ** m)
    parity = np.zeros(2 ** m, dtype=np.int64)
    z_mask = _mask(letters, "YZ")
    for k in range(m):
        bit = 1 << (m - 1 - k)
        if z_mask & bit:
            parity += (xs & bit) > 0
    phases = (1j ** letters.count("Y")) * (-1.0) ** parity
    phases.setflags(write=False)
    return phases


class PauliSum:
    """Real-weighted sum of Pauli strings plus an identity offset.

    Terms are stored sorted by string (``I < X < Y < Z`` letterwise) with no
    duplicates, no identity string and no coefficient below the pruning
    threshold.

    :param int m: number of qubits
    :param terms: mapping or iterable of ``(coefficient, string)`` pairs
    :param float offset: identity coefficient
    """

    def __init__(
        self,
        m: int,
        terms: Union[Mapping[str, complex], Iterable[Tuple[complex, str]]] = (),
        offset: complex = 0.0,
    ):
        if isinstance(terms, Mapping):
            items = [(coeff, letters) for letters, coeff in terms.items()]
        else:
            items = list(terms)
        merged: Dict[str, complex] = {}
        identity = "I" * m
        for coeff, string in items:
            letters = str(PauliString(str(string)))
            if len(letters) != m:
                raise DimensionError(
                    f"Pauli string {letters} does not act on {m} qubits"
                )
            if letters == identity:
                offset += coeff
                continue
            merged[letters] = merged.get(letters, 0.0) + coeff
        residue = max(
            [abs(np.imag(c)) for c in merged.values()] + [abs(np.imag(offset))]
        )
        if residue > IMAG_TOLERANCE:
            raise HermiticityError(
                f"Pauli coefficients have an imaginary residue of {residue:.3e}"
            )
        self.m = m
        self.offset = float(np.real(offset))
        self.terms: List[Tuple[float, PauliString]] = [
            (float(np.real(merged[letters])), PauliString(letters))
            for letters in sorted(merged, key=_sort_key)
            if abs(np.real(merged[letters])) >= PRUNE_TOLERANCE
        ]

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"PauliSum(m={self.m}, n_terms={len(self)}, offset={self.offset})"

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.m != self.m:
            raise DimensionError(f"Cannot add sums on {self.m} and {other.m} qubits")
        return PauliSum(
            self.m,
            [(c, s.letters) for c, s in self.terms + other.terms],
            self.offset + other.offset,
        )

    def __mul__(self, scalar: float) -> "PauliSum":
        return PauliSum(
            self.m,
            [(scalar * c, s.letters) for c, s in self.terms],
            scalar * self.offset,
        )

    __rmul__ = __mul__

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms], dtype=float)

    @property
    def strings(self) -> List[PauliString]:
        return [s for _, s in self.terms]

    def as_dict(self) -> Dict[str, float]:
        return {s.letters: c for c, s in self.terms}

    def matrix(self) -> np.ndarray:
        """Dense ``2^m x 2^m`` Hermitian matrix."""
        dim = 2 ** self.m
        xs = np.arange(dim)
        out = self.offset * np.eye(dim, dtype=complex)
        for coeff, string in self.terms:
            out[xs ^ string.flip_mask, xs] += coeff * string.phases()
        return out

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "offset": self.offset,
            "terms": [[c, s.letters] for c, s in self.terms],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "PauliSum":
        return cls(data["m"], [tuple(t) for t in data["terms"]], data["offset"])

    @classmethod
    def from_json(cls, text: str) -> "PauliSum":
        return cls.from_dict(json.loads(text))

    def copy(self) -> "PauliSum":
        return PauliSum(self.m, [(c, s.letters) for c, s in self.terms], self.offset)


def _sort_key(letters: str) -> Tuple[int, ...]:
    return tuple(LETTERS.index(c) for c in letters)


# region symbolic ladder algebra
@lru_cache(maxsize=None)
def _ladder(m: int) -> Tuple[np.ndarray, np.ndarray]:
    """Pauli codes ``(2, m, 2, m)`` and coefficients ``(2, m, 2)`` of ladder ops.

    Index ``[0, p]`` is the annihilator ``c_p`` and ``[1, p]`` the creator.
    """
    codes = np.zeros((2, m, 2, m), dtype=np.int8)
    coeffs = np.zeros((2, m, 2), dtype=complex)
    for dagger in (0, 1):
        for p in range(m):
            codes[dagger, p, :, :p] = 3
            codes[dagger, p, 0, p] = 1
            codes[dagger, p, 1, p] = 2
            coeffs[dagger, p] = (0.5, -0.5j if dagger else 0.5j)
    return codes, coeffs


def _multiply(
    left: Tuple[np.ndarray, np.ndarray], right: Tuple[np.ndarray, np.ndarray]
) -> Tuple[np.ndarray, np.ndarray]:
    """Batched product of Pauli polynomials.

    Operands hold codes ``(n, a, m)`` and coefficients ``(n, a)``; the result
    has ``a * b`` strings per batch entry.
    """
    lcodes, lcoeffs = left
    rcodes, rcoeffs = right
    n, a, m = lcodes.shape
    b = rcodes.shape[1]
    lc = lcodes[:, :, None, :]
    rc = rcodes[:, None, :, :]
    codes = _PRODUCT[lc, rc].reshape(n, a * b, m)
    phases = np.prod(_PHASE[lc, rc], axis=-1)
    coeffs = (lcoeffs[:, :, None] * rcoeffs[:, None, :] * phases).reshape(n, a * b)
    return codes, coeffs


def _ladder_product(m: int, indices: np.ndarray, daggers: Tuple[int, ...]):
    codes, coeffs = _ladder(m)
    out = None
    for position, dagger in enumerate(daggers):
        factor = (
            codes[dagger, indices[:, position]],
            coeffs[dagger, indices[:, position]],
        )
        out = factor if out is None else _multiply(out, factor)
    return out


def _collect(
    m: int, codes: np.ndarray, coeffs: np.ndarray, offset: complex = 0.0
) -> PauliSum:
    codes = codes.reshape(-1, m)
    coeffs = coeffs.reshape(-1)
    if len(coeffs) == 0:
        return PauliSum(m, (), offset)
    unique, inverse = np.unique(codes, axis=0, return_inverse=True)
    summed = np.zeros(len(unique), dtype=complex)
    np.add.at(summed, inverse.reshape(-1), coeffs)
    terms = [
        (coeff, "".join(LETTERS[c] for c in row))
        for row, coeff in zip(unique, summed)
        if abs(coeff) >= PRUNE_TOLERANCE
    ]
    return PauliSum(m, terms, offset)


# endregion


def jordan_wigner(h: FermionTensors) -> PauliSum:
    """Encode fermionic tensors as a qubit observable.

    :param FermionTensors h: the Hamiltonian tensors
    :return: the equivalent :class:`PauliSum`
    :raises HermiticityError: if imaginary coefficients survive the Hermitian
        combination of terms
    """
    m = h.m
    all_codes = []
    all_coeffs = []

    one_body = np.argwhere(np.abs(h.h1) >= PRUNE_TOLERANCE)
    if len(one_body):
        codes, coeffs = _ladder_product(m, one_body, (1, 0))
        all_codes.append(codes)
        all_coeffs.append(coeffs * h.h1[tuple(one_body.T)][:, None])

    two_body = np.argwhere(np.abs(h.h2) >= PRUNE_TOLERANCE)
    two_body = two_body[
        (two_body[:, 0] != two_body[:, 1]) & (two_body[:, 2] != two_body[:, 3])
    ]
    if len(two_body):
        codes, coeffs = _ladder_product(m, two_body, (1, 1, 0, 0))
        all_codes.append(codes)
        all_coeffs.append(0.5 * coeffs * h.h2[tuple(two_body.T)][:, None])

    if not all_codes:
        return PauliSum(m, (), h.offset)
    observable = _collect(
        m,
        np.concatenate([c.reshape(-1, m) for c in all_codes]),
        np.concatenate([c.reshape(-1) for c in all_coeffs]),
        h.offset,
    )
    logger.debug(
        f"Jordan-Wigner: {len(one_body)} one-body and {len(two_body)} two-body "
        f"entries -> {len(observable)} Pauli terms"
    )
    return observable


def one_norm(p: PauliSum) -> float:
    """Sum of absolute coefficients of the non-identity terms."""
    return float(np.sum(np.abs(p.coefficients)))


def weight_distribution(p: PauliSum) -> List[float]:
    """Absolute coefficients sorted in descending order."""
    return sorted((abs(c) for c, _ in p.terms), reverse=True)


@lru_cache(maxsize=None)
def _bilinear_observables(p: int, q: int, m: int) -> Tuple[PauliSum, PauliSum]:
    forward = _ladder_product(m, np.array([[p, q]]), (1, 0))
    backward = _ladder_product(m, np.array([[q, p]]), (1, 0))
    codes = np.concatenate([forward[0], backward[0]], axis=1)
    real = _collect(m, codes, np.concatenate([forward[1], backward[1]], axis=1) / 2)
    imag = _collect(
        m, codes, np.concatenate([forward[1], -backward[1]], axis=1) / 2j
    )
    return real, imag


def expectation_pauli_of_bilinear(p: int, q: int, m: int) -> Tuple[PauliSum, PauliSum]:
    """Observables for the real and imaginary parts of :math:`c^\\dagger_p c_q`.

    Every call returns fresh copies of the cached observables.

    :return: ``(real_obs, imag_obs)`` with
        ``<c†_p c_q> = <real_obs> + 1j * <imag_obs>``
    """
    if not (0 <= p < m and 0 <= q < m):
        raise DimensionError(f"Orbital indices ({p}, {q}) out of range for {m} modes")
    real, imag = _bilinear_observables(p, q, m)
    return real.copy(), imag.copy()


def number_operator(m: int) -> PauliSum:
    """Total particle number :math:`\\sum_p c^\\dagger_p c_p`."""
    return PauliSum(
        m,
        [(-0.5, PauliString.from_sparse(m, {k: "Z"}).letters) for k in range(m)],
        m / 2,
    )


def hubbard_pauli(spec: HubbardSpec) -> PauliSum:
    """Qubit Hamiltonian of a Hubbard model in the site-spin basis."""
    return jordan_wigner(build_hubbard(spec))
