"""Natural-orbital updates interleaved with VQE runs.

Each step solves the current qubit Hamiltonian, measures the one-particle
reduced density matrix (1-RDM) of the converged state, diagonalizes it and
rotates the fermionic tensors into the natural-orbital basis before the next
step.
"""
import logging
from dataclasses import dataclass
from dataclasses import field
from functools import lru_cache
from typing import List
from typing import Optional
from typing import Tuple
from typing import Union

import numpy as np
from scipy.special import entr
from sklearn.base import BaseEstimator

from novqe.config import CONVERGENCE_TOLERANCE
from novqe.config import DEGENERACY_TOLERANCE
from novqe.config import EIGENVALUE_FLOOR
from novqe.config import REJECTION_TOLERANCE
from novqe.encoding import expectation_pauli_of_bilinear
from novqe.encoding import jordan_wigner
from novqe.encoding import one_norm
from novqe.encoding import weight_distribution
from novqe.exceptions import ConfigurationError
from novqe.exceptions import DimensionError
from novqe.hamiltonian import FermionTensors
from novqe.hamiltonian import OrbitalRotation
from novqe.hamiltonian import rotate_tensors
from novqe.simulator import CompiledObservable
from novqe.simulator import NoiseModel
from novqe.simulator import QuantumState
from novqe.simulator import sampled_expectation
from novqe.types import Seed
from novqe.utils import make_rng
from novqe.utils import spawn_seeds
from novqe.vqe import VQE
from novqe.vqe import ShotBudget
from novqe.vqe import VqeResult
from novqe.vqe import allocate_shots

logger = logging.getLogger(__name__)

RDM_MODES = ("exact", "sampled")


@dataclass(frozen=True, eq=False)
class OneRdm:
    """One-particle reduced density matrix ``D[p, q] = <c†_p c_q>``."""

    d: np.ndarray

    def __post_init__(self):
        d = np.array(self.d, dtype=complex)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise DimensionError(f"A 1-RDM must be square, got shape {d.shape}")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @property
    def m(self) -> int:
        return self.d.shape[0]

    @property
    def particle_number(self) -> float:
        return float(np.trace(self.d).real)

    @property
    def noons(self) -> np.ndarray:
        """Eigenvalues in descending order."""
        return np.linalg.eigvalsh(self.d)[::-1]

    def project(self) -> "OneRdm":
        """Hermitize and clip the eigenvalues to ``[0, 1]``."""
        d = (self.d + self.d.conj().T) / 2
        values, vectors = np.linalg.eigh(d)
        if values[0] < EIGENVALUE_FLOOR or values[-1] > 1 - EIGENVALUE_FLOOR:
            logger.warning(
                f"Clipping 1-RDM eigenvalues outside [0, 1]: "
                f"min {values[0]:.3e}, max {values[-1]:.6f}"
            )
        clipped = np.clip(values, 0.0, 1.0)
        return OneRdm((vectors * clipped) @ vectors.conj().T)


@lru_cache(maxsize=None)
def _bilinears(
    m: int,
) -> Tuple[Tuple[int, int, CompiledObservable, CompiledObservable], ...]:
    out = []
    for p in range(m):
        for q in range(p, m):
            real, imag = expectation_pauli_of_bilinear(p, q, m)
            out.append((p, q, CompiledObservable(real), CompiledObservable(imag)))
    return tuple(out)


def measure_1rdm(
    state: Union[QuantumState, VqeResult],
    mode: str = "exact",
    shots: Optional[int] = None,
    seed: Seed = None,
) -> OneRdm:
    """Measure the 1-RDM of a simulated state.

    In ``sampled`` mode each real and imaginary observable is estimated with
    ``shots`` shots split over its Pauli terms.  The result is projected with
    :meth:`OneRdm.project`.

    :param state: the state, or a VQE result carrying its final state
    :param str mode: ``"exact"`` or ``"sampled"``
    :param int shots: shots per observable in sampled mode
    :param seed: integer seed for sampled mode
    """
    if isinstance(state, VqeResult):
        state = state.state
    if mode not in RDM_MODES:
        raise ConfigurationError(
            f"rdm_mode: expected one of {RDM_MODES}, got {mode!r}"
        )
    if mode == "sampled" and not shots:
        raise ConfigurationError("rdm_shots: sampled 1-RDM mode needs a shot count")
    rng = make_rng(seed)
    d = np.zeros((state.m, state.m), dtype=complex)
    for p, q, real, imag in _bilinears(state.m):
        if mode == "exact":
            value = real.expectation(state) + 1j * imag.expectation(state)
        else:
            value = sampled_expectation(
                state, real, allocate_shots(real.observable, shots), rng
            ) + 1j * sampled_expectation(
                state, imag, allocate_shots(imag.observable, shots), rng
            )
        d[p, q] = value
        d[q, p] = np.conj(value)
    return OneRdm(d).project()


def _canonical_subspace(vectors: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the span of ``vectors``.

    Unit vectors are projected onto the subspace in index order and kept
    after Gram-Schmidt when their residual norm exceeds ``1e-6``.
    """
    m, size = vectors.shape
    chosen: List[np.ndarray] = []
    for j in range(m):
        candidate = vectors @ vectors[j].conj()
        for basis in chosen:
            candidate = candidate - basis * np.vdot(basis, candidate)
        norm = np.linalg.norm(candidate)
        if norm > 1e-6:
            chosen.append(candidate / norm)
        if len(chosen) == size:
            break
    return np.stack(chosen, axis=1)


def natural_orbital_transform(
    d: Union[OneRdm, np.ndarray]
) -> Tuple[OrbitalRotation, np.ndarray]:
    """Diagonalize a 1-RDM into natural orbitals.

    Writing ``D = V diag(n) V†`` with ``n`` descending, the returned rotation
    is ``conj(V)``, the basis in which the 1-RDM of the same state becomes
    ``diag(n)``.  Degenerate occupations (gap below ``1e-8``) are resolved by
    :func:`_canonical_subspace`; each column is then phased so its
    largest-magnitude entry is real and positive.

    :return: ``(rotation, noons)``
    """
    d = d.d if isinstance(d, OneRdm) else np.asarray(d, dtype=complex)
    d = (d + d.conj().T) / 2
    values, vectors = np.linalg.eigh(d)
    values, vectors = values[::-1], vectors[:, ::-1]

    start = 0
    for stop in range(1, len(values) + 1):
        last = stop == len(values)
        if last or values[stop - 1] - values[stop] > DEGENERACY_TOLERANCE:
            if stop - start > 1:
                vectors[:, start:stop] = _canonical_subspace(vectors[:, start:stop])
            start = stop

    for i in range(vectors.shape[1]):
        column = vectors[:, i]
        pivot = np.argmax(np.abs(column) - 1e-12 * np.arange(len(column)))
        vectors[:, i] = column * (abs(column[pivot]) / column[pivot])
    return OrbitalRotation(vectors.conj()), values


def correlation_entropy(d: Union[OneRdm, np.ndarray]) -> float:
    """``-sum_p D_pp log D_pp`` with ``0 log 0 = 0``."""
    d = d.d if isinstance(d, OneRdm) else np.asarray(d)
    occupations = np.atleast_1d(np.diag(d) if np.ndim(d) == 2 else d).real
    return float(np.sum(entr(np.clip(occupations, 0.0, 1.0))))


def _complex_to_dict(array: np.ndarray) -> dict:
    return {"real": array.real.tolist(), "imag": array.imag.tolist()}


@dataclass
class NoizationStep:
    """Audit record of one natural-orbital step.

    ``basis`` is the cumulative rotation in which this step's Hamiltonian was
    expressed; ``natural_orbitals`` composes it with the step's update.
    A rejected step left the basis and tensors of the loop unchanged.
    """

    step: int
    basis: OrbitalRotation
    update: OrbitalRotation
    result: VqeResult
    rdm: OneRdm
    noons: np.ndarray
    one_norm: float
    n_terms: int
    weights: List[float]
    entropy: float
    no_entropy: float
    reference_energy: Optional[float] = None
    operators: Optional[List[dict]] = None
    accepted: bool = True

    @property
    def energy(self) -> float:
        return self.result.best_energy

    @property
    def natural_orbitals(self) -> OrbitalRotation:
        return self.basis.compose(self.update)

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "energy": self.energy,
            "reference_energy": self.reference_energy,
            "accepted": self.accepted,
            "noons": [float(n) for n in self.noons],
            "one_norm": self.one_norm,
            "n_terms": self.n_terms,
            "entropy": self.entropy,
            "no_entropy": self.no_entropy,
            "rdm": _complex_to_dict(self.rdm.d),
            "basis": _complex_to_dict(self.basis.v),
            "operators": self.operators,
            "result": self.result.to_dict(),
        }


@dataclass
class NoizationTrace:
    steps: List[NoizationStep] = field(default_factory=list)
    stopped_early: bool = False

    @property
    def energies(self) -> List[float]:
        return [s.energy for s in self.steps]

    @property
    def accepted_energies(self) -> List[float]:
        return [s.energy for s in self.steps if s.accepted]

    @property
    def final_energy(self) -> float:
        """Energy of the last accepted step."""
        return self.accepted_energies[-1]

    def to_dict(self) -> dict:
        return {
            "stopped_early": self.stopped_early,
            "energies": self.energies,
            "accepted_energies": self.accepted_energies,
            "steps": [s.to_dict() for s in self.steps],
        }


class NOization(BaseEstimator):
    """Iterate a VQE-type solver with natural-orbital basis updates.

    Noiseless exact runs keep the best basis found: a step whose energy rises
    above the last accepted one by more than ``REJECTION_TOLERANCE`` is
    recorded as rejected, and the next step starts again from the accepted
    tensors with a fresh seed.  Shot-noise estimates are always accepted.

    :param solver: a fitted-on-demand solver exposing
        ``fit(hamiltonian, seed=...)`` and a ``result_`` attribute, e.g.
        :class:`~novqe.vqe.VQE` or :class:`~novqe.adapt.AdaptVQE`
    :param int n_steps: number of steps ``K``
    :param str rdm_mode: ``"exact"`` or ``"sampled"``
    :param int rdm_shots: shots per 1-RDM observable in sampled mode, defaults
        to the solver's per-evaluation shots
    :param float tolerance: early-stop threshold on the energy change between
        accepted steps, applied only to noiseless exact runs
    :param int random_state: seed
    """

    def __init__(
        self,
        solver: Optional[BaseEstimator] = None,
        n_steps: int = 3,
        rdm_mode: str = "exact",
        rdm_shots: Optional[int] = None,
        tolerance: float = CONVERGENCE_TOLERANCE,
        random_state: Optional[int] = None,
    ):
        self.solver = solver
        self.n_steps = n_steps
        self.rdm_mode = rdm_mode
        self.rdm_shots = rdm_shots
        self.tolerance = tolerance
        self.random_state = random_state

    def _solver(self) -> BaseEstimator:
        return self.solver if self.solver is not None else VQE()

    def _rdm_shots(self) -> Optional[int]:
        if self.rdm_shots is not None or self.rdm_mode == "exact":
            return self.rdm_shots
        budget = getattr(self._solver(), "budget", None) or ShotBudget()
        return budget.shots_per_evaluation()

    def _noiseless_exact(self) -> bool:
        solver = self._solver()
        noise = getattr(solver, "noise", None) or NoiseModel.noiseless()
        budget = getattr(solver, "budget", None) or ShotBudget()
        return not noise.enabled and budget.exact

    def step(
        self,
        tensors: FermionTensors,
        seed: Seed = None,
        basis: Optional[OrbitalRotation] = None,
        index: int = 0,
    ) -> Tuple[FermionTensors, NoizationStep]:
        """Solve ``tensors`` and rotate them into the natural orbitals found.

        :param FermionTensors tensors: Hamiltonian in the current basis
        :param seed: integer seed, defaults to ``random_state``
        :param OrbitalRotation basis: cumulative rotation behind ``tensors``
        :param int index: step number for the record
        :return: the rotated tensors and the step record
        """
        seed = self.random_state if seed is None else seed
        solver_seed, rdm_seed = spawn_seeds(seed, 2)
        basis = basis or OrbitalRotation.identity(tensors.m)
        hamiltonian = jordan_wigner(tensors)
        solver = self._solver()
        solver.fit(hamiltonian, seed=solver_seed)
        result: VqeResult = solver.result_

        rdm = measure_1rdm(result.state, self.rdm_mode, self._rdm_shots(), rdm_seed)
        update, noons = natural_orbital_transform(rdm)
        reference = getattr(solver, "reference_result_", None)
        record = NoizationStep(
            step=index,
            basis=basis,
            update=update,
            result=result,
            rdm=rdm,
            noons=noons,
            one_norm=one_norm(hamiltonian),
            n_terms=len(hamiltonian),
            weights=weight_distribution(hamiltonian),
            entropy=correlation_entropy(rdm),
            no_entropy=correlation_entropy(np.clip(noons, 0.0, 1.0)),
            reference_energy=None if reference is None else reference.best_energy,
            operators=getattr(solver, "history_", None),
        )
        logger.info(
            f"NOization step {index}: energy {record.energy:.8f}, "
            f"{record.n_terms} Pauli terms, one-norm {record.one_norm:.4f}, "
            f"NOONs {np.round(noons, 6).tolist()}"
        )
        return rotate_tensors(tensors, update), record

    def fit(self, tensors: FermionTensors) -> "NOization":
        if self.n_steps < 1:
            raise ConfigurationError(
                f"k_steps: must be at least 1, got {self.n_steps}"
            )
        seeds = spawn_seeds(self.random_state, self.n_steps)
        noiseless = self._noiseless_exact()
        basis = OrbitalRotation.identity(tensors.m)
        trace = NoizationTrace()
        current = tensors
        accepted: Optional[NoizationStep] = None
        for k in range(self.n_steps):
            rotated, record = self.step(current, seed=seeds[k], basis=basis, index=k)
            trace.steps.append(record)
            if (
                noiseless
                and accepted is not None
                and record.energy > accepted.energy + REJECTION_TOLERANCE
            ):
                record.accepted = False
                logger.warning(
                    f"NOization step {k} rejected: energy {record.energy:.8f} "
                    f"above accepted step {accepted.step} at {accepted.energy:.8f}"
                )
                continue
            previous, accepted = accepted, record
            current, basis = rotated, record.natural_orbitals
            if noiseless and previous is not None:
                change = abs(accepted.energy - previous.energy)
                if change < self.tolerance:
                    logger.warning(
                        f"NOization converged after {k + 1} of {self.n_steps} steps "
                        f"(energy change {change:.2e})"
                    )
                    trace.stopped_early = k + 1 < self.n_steps
                    break
        self.trace_ = trace
        self.tensors_ = current
        self.rotation_ = basis
        self.energy_ = trace.final_energy
        return self


def noize_step(
    h: FermionTensors,
    ansatz: str = "ldca",
    budget: Optional[ShotBudget] = None,
    noise: Optional[NoiseModel] = None,
    seed: Seed = None,
    layers: int = 1,
    rdm_mode: str = "exact",
    rdm_shots: Optional[int] = None,
    n_jobs: Optional[int] = None,
) -> Tuple[FermionTensors, NoizationStep]:
    """One VQE run followed by a rotation into its natural orbitals."""
    solver = VQE(ansatz, layers, budget, noise, n_jobs)
    noizer = NOization(solver, 1, rdm_mode, rdm_shots)
    return noizer.step(h, seed=seed)


def noization_loop(
    h0: FermionTensors,
    ansatz: str = "ldca",
    k: int = 3,
    budget: Optional[ShotBudget] = None,
    noise: Optional[NoiseModel] = None,
    seed: Seed = None,
    layers: int = 1,
    rdm_mode: str = "exact",
    rdm_shots: Optional[int] = None,
    n_jobs: Optional[int] = None,
) -> NoizationTrace:
    """``k`` NOization steps starting from ``h0``."""
    solver = VQE(ansatz, layers, budget, noise, n_jobs)
    noizer = NOization(solver, k, rdm_mode, rdm_shots, random_state=seed)
    return noizer.fit(h0).trace_
