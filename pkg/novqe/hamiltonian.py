"""Second-quantized lattice Hamiltonians and single-particle basis rotations.

Spin-orbitals are ordered site-major, ``p = 2 * site + spin`` with spin up = 0.
The operator represented by :class:`FermionTensors` is

.. math::

    H = \\sum_{pq} h_{pq} c^\\dagger_p c_q
        + \\frac{1}{2} \\sum_{pqrs} h_{pqrs} c^\\dagger_p c^\\dagger_q c_r c_s
        + \\text{offset}
"""
import logging
from dataclasses import dataclass
from dataclasses import field
from enum import Enum
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np
from scipy.stats import unitary_group

from novqe.config import HERMITIAN_TOLERANCE
from novqe.config import UNITARY_TOLERANCE
from novqe.exceptions import ConfigurationError
from novqe.exceptions import DimensionError
from novqe.exceptions import HermiticityError
from novqe.types import Seed
from novqe.utils import make_rng

logger = logging.getLogger(__name__)


class Geometry(str, Enum):
    """Lattice geometry of a Hubbard model."""

    CHAIN = "chain"
    SQUARE_PLAQUETTE = "square-plaquette"


@dataclass(frozen=True)
class HubbardSpec:
    """Parameters of a Hubbard model.

    ``mu`` defaults to ``u / 2`` (half filling).

    :param int n_sites: number of lattice sites, 2 or 4
    :param float t: hopping amplitude
    :param float u: on-site interaction
    :param float mu: chemical potential
    :param Geometry geometry: ``chain`` (open) or ``square-plaquette``
    """

    n_sites: int = 2
    t: float = 1.0
    u: float = 1.0
    mu: Optional[float] = None
    geometry: Geometry = Geometry.CHAIN

    def __post_init__(self):
        try:
            object.__setattr__(self, "geometry", Geometry(self.geometry))
        except ValueError:
            raise ConfigurationError(
                f"geometry: unknown geometry {self.geometry!r}, expected one of "
                f"{[g.value for g in Geometry]}"
            )
        if self.n_sites not in (2, 4):
            raise ConfigurationError(
                f"n_sites: only 2 or 4 sites are supported, got {self.n_sites}"
            )
        if self.geometry is Geometry.SQUARE_PLAQUETTE and self.n_sites != 4:
            raise ConfigurationError(
                f"n_sites: the square plaquette needs 4 sites, got {self.n_sites}"
            )
        if self.mu is None:
            object.__setattr__(self, "mu", self.u / 2)

    @property
    def m(self) -> int:
        """Number of spin-orbitals."""
        return 2 * self.n_sites

    @property
    def bonds(self) -> List[Tuple[int, int]]:
        """Nearest-neighbour site pairs."""
        bonds = [(i, i + 1) for i in range(self.n_sites - 1)]
        if self.geometry is Geometry.SQUARE_PLAQUETTE:
            bonds.append((self.n_sites - 1, 0))
        return bonds

    @classmethod
    def from_dict(cls, data: dict) -> "HubbardSpec":
        unknown = set(data) - {"n_sites", "t", "u", "mu", "geometry"}
        if unknown:
            raise ConfigurationError(f"model: unknown keys {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "t": self.t,
            "u": self.u,
            "mu": self.mu,
            "geometry": self.geometry.value,
        }


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class FermionTensors:
    """One- and two-body tensors of a fermionic Hamiltonian.

    Arrays are copied to read-only complex arrays on construction.
    """

    h1: np.ndarray
    h2: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        h1 = _readonly(self.h1)
        h2 = _readonly(self.h2)
        m = h1.shape[0]
        if h1.shape != (m, m):
            raise DimensionError(f"h1 must be square, got shape {h1.shape}")
        if h2.shape != (m,) * 4:
            raise DimensionError(
                f"h2 must have shape {(m,) * 4} to match h1, got {h2.shape}"
            )
        if m % 2:
            raise DimensionError(f"The number of spin-orbitals must be even, got {m}")
        residue = np.max(np.abs(h1 - h1.conj().T), initial=0.0)
        if residue > HERMITIAN_TOLERANCE:
            raise HermiticityError(f"h1 is not Hermitian (residue {residue:.3e})")
        residue = np.max(
            np.abs(h2 - h2.transpose(3, 2, 1, 0).conj()), initial=0.0
        )
        if residue > HERMITIAN_TOLERANCE:
            raise HermiticityError(f"h2 is not Hermitian (residue {residue:.3e})")
        object.__setattr__(self, "h1", h1)
        object.__setattr__(self, "h2", h2)
        object.__setattr__(self, "offset", float(np.real(self.offset)))

    @property
    def m(self) -> int:
        return self.h1.shape[0]

    @classmethod
    def zeros(cls, m: int) -> "FermionTensors":
        return cls(np.zeros((m, m)), np.zeros((m,) * 4))

    def allclose(self, other: "FermionTensors", atol: float = 1e-10) -> bool:
        return (
            self.m == other.m
            and np.allclose(self.h1, other.h1, atol=atol, rtol=0)
            and np.allclose(self.h2, other.h2, atol=atol, rtol=0)
            and abs(self.offset - other.offset) <= atol
        )


@dataclass(frozen=True, eq=False)
class OrbitalRotation:
    """Unitary change of single-particle basis.

    Column ``i`` of ``v`` holds the coefficients of new mode ``i`` in the old
    basis: :math:`\\tilde c^\\dagger_i = \\sum_p v_{pi} c^\\dagger_p`.
    """

    v: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = _readonly(self.v)
        m = v.shape[0]
        if v.shape != (m, m):
            raise DimensionError(f"Rotations must be square, got shape {v.shape}")
        residue = np.max(np.abs(v.conj().T @ v - np.eye(m)), initial=0.0)
        if residue > UNITARY_TOLERANCE:
            raise DimensionError(f"Rotation is not unitary (residue {residue:.3e})")
        object.__setattr__(self, "v", v)

    @property
    def m(self) -> int:
        return self.v.shape[0]

    @classmethod
    def identity(cls, m: int) -> "OrbitalRotation":
        return cls(np.eye(m))

    @classmethod
    def from_spatial(cls, w: np.ndarray) -> "OrbitalRotation":
        """Lift a site-space unitary to both spin blocks."""
        return cls(np.kron(np.asarray(w), np.eye(2)))

    @classmethod
    def random(cls, m: int, seed: Seed = None) -> "OrbitalRotation":
        """Haar-random rotation."""
        return cls(unitary_group.rvs(m, random_state=make_rng(seed)))

    def compose(self, other: "OrbitalRotation") -> "OrbitalRotation":
        """Rotation equivalent to applying ``self`` then ``other``."""
        if other.m != self.m:
            raise DimensionError(
                f"Cannot compose rotations on {self.m} and {other.m} modes"
            )
        return OrbitalRotation(self.v @ other.v)


def build_hubbard(spec: HubbardSpec) -> FermionTensors:
    """Build the tensors of a Hubbard model.

    :param HubbardSpec spec: model parameters
    :return: tensors whose assembled operator is
        :math:`-t \\sum_{\\langle ij \\rangle \\sigma} (c^\\dagger_{i\\sigma}
        c_{j\\sigma} + h.c.) + U \\sum_i n_{i\\uparrow} n_{i\\downarrow}
        - \\mu \\sum_{i\\sigma} n_{i\\sigma}`
    """
    m = spec.m
    h1 = np.zeros((m, m), dtype=complex)
    h2 = np.zeros((m,) * 4, dtype=complex)
    for i, j in spec.bonds:
        for spin in (0, 1):
            p, q = 2 * i + spin, 2 * j + spin
            h1[p, q] -= spec.t
            h1[q, p] -= spec.t
    h1[np.diag_indices(m)] -= spec.mu
    for i in range(spec.n_sites):
        up, down = 2 * i, 2 * i + 1
        h2[up, down, down, up] = spec.u
        h2[down, up, up, down] = spec.u
    logger.debug(f"Built Hubbard model {spec}")
    return FermionTensors(h1, h2)


def rotate_tensors(h: FermionTensors, r: OrbitalRotation) -> FermionTensors:
    """Express ``h`` in the basis defined by the columns of ``r``."""
    if r.m != h.m:
        raise DimensionError(
            f"Rotation acts on {r.m} modes but the Hamiltonian has {h.m}"
        )
    v = r.v
    h1 = v.conj().T @ h.h1 @ v
    h2 = np.einsum("pi,qj,pqrs,rk,sl->ijkl", v.conj(), v.conj(), h.h2, v, v)
    # symmetrize away rounding asymmetry
    h1 = (h1 + h1.conj().T) / 2
    h2 = (h2 + h2.transpose(3, 2, 1, 0).conj()) / 2
    return FermionTensors(h1, h2, h.offset)
