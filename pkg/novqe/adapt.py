"""Qubit-ADAPT circuit growth and its combination with natural-orbital updates."""
import logging
from dataclasses import dataclass
from dataclasses import field
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np
from sklearn.base import BaseEstimator

from novqe.ansatz import CircuitTemplate
from novqe.ansatz import build_product
from novqe.ansatz import pauli_rotation
from novqe.config import DEFAULT_MAX_OPS
from novqe.config import GRADIENT_TOLERANCE
from novqe.encoding import PauliString
from novqe.encoding import PauliSum
from novqe.exceptions import DimensionError
from novqe.hamiltonian import FermionTensors
from novqe.noization import NOization
from novqe.noization import NoizationTrace
from novqe.simulator import CompiledObservable
from novqe.simulator import NoiseModel
from novqe.simulator import QuantumState
from novqe.types import Seed
from novqe.utils import spawn_seeds
from novqe.vqe import ShotBudget
from novqe.vqe import VqeResult
from novqe.vqe import run_vqe

logger = logging.getLogger(__name__)


@dataclass
class OperatorPool:
    """Hermitian generators for circuit growth.

    Enumeration order: ``X_i X_j + Y_i Y_j`` for ``i < j``, ``X_i Y_j`` for
    ordered pairs ``i != j``, ``Z_i Z_j`` for ``i < j``, then ``X_i``, ``Y_i``,
    ``Z_i`` for each qubit, giving ``2 m (m - 1) + 3 m`` generators.
    """

    m: int
    generators: List[PauliSum]
    labels: List[str]
    _compiled: List[CompiledObservable] = field(default=None, init=False, repr=False)

    def __len__(self) -> int:
        return len(self.generators)

    @property
    def compiled(self) -> List[CompiledObservable]:
        if self._compiled is None:
            self._compiled = [CompiledObservable(g) for g in self.generators]
        return self._compiled


def build_pool(m: int) -> OperatorPool:
    generators = []
    labels = []

    def add(label: str, letters: List[dict]):
        strings = [PauliString.from_sparse(m, sparse).letters for sparse in letters]
        generators.append(PauliSum(m, [(1.0, s) for s in strings]))
        labels.append(label)

    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    for i, j in pairs:
        add(f"X{i}X{j}+Y{i}Y{j}", [{i: "X", j: "X"}, {i: "Y", j: "Y"}])
    for i in range(m):
        for j in range(m):
            if i != j:
                add(f"X{i}Y{j}", [{i: "X", j: "Y"}])
    for i, j in pairs:
        add(f"Z{i}Z{j}", [{i: "Z", j: "Z"}])
    for i in range(m):
        for letter in "XYZ":
            add(f"{letter}{i}", [{i: letter}])
    return OperatorPool(m, generators, labels)


def _commutator_expectation(
    state: QuantumState, h_vector: np.ndarray, generator: CompiledObservable
) -> float:
    # <[H, P]> as sum_x phase[x] A[x, x ^ f] over the terms of P, where
    # A = |psi><psi| H - H |psi><psi| (pure) or rho H - H rho (mixed)
    targets = generator.targets
    if state.is_pure:
        psi, phi = state.data, h_vector
        values = psi * phi[targets].conj() - phi * psi[targets].conj()
    else:
        rows = np.arange(state.dim)
        values = h_vector[rows, targets]
    total = np.sum(generator.coefficients[:, None] * generator.phases * values)
    return float(abs(total))


def pool_gradients(
    state: QuantumState, h: PauliSum, pool: OperatorPool
) -> np.ndarray:
    """``|<[H, P_k]>|`` for every generator of the pool.

    :param QuantumState state: pure or mixed state
    :param PauliSum h: Hamiltonian
    :param OperatorPool pool: generators
    """
    if not (state.m == h.m == pool.m):
        raise DimensionError(
            f"State ({state.m}), Hamiltonian ({h.m}) and pool ({pool.m}) qubit "
            f"counts differ"
        )
    matrix = CompiledObservable(h).matrix
    if state.is_pure:
        h_vector = matrix @ state.data
    else:
        h_vector = state.data @ matrix - matrix @ state.data
    return np.array(
        [_commutator_expectation(state, h_vector, g) for g in pool.compiled]
    )


def build_reference(
    m: int,
    h: PauliSum,
    budget: Optional[ShotBudget] = None,
    noise: Optional[NoiseModel] = None,
    seed: Seed = None,
    n_jobs: Optional[int] = None,
) -> Tuple[CircuitTemplate, VqeResult]:
    """Optimize a product of RY rotations and freeze it as a reference state.

    :return: the template with every reference angle frozen, and the VQE result
    """
    template = build_product(m)
    result = run_vqe(h, template, budget, noise, seed, n_jobs=n_jobs)
    logger.info(f"Reference state energy {result.best_energy:.8f}")
    return template.freeze(result.best_params), result


class AdaptVQE(BaseEstimator):
    """Qubit-ADAPT VQE on top of an optimized product reference state.

    :param OperatorPool pool: generators, the full qubit pool by default
    :param int max_ops: maximum number of appended rotations
    :param ShotBudget budget: shot budget, exact by default
    :param NoiseModel noise: noise model, noiseless by default
    :param float gradient_tolerance: stop when the largest gradient is below
    :param int n_jobs: joblib workers for reference restarts
    :param int random_state: seed used when ``fit`` gets none
    """

    def __init__(
        self,
        pool: Optional[OperatorPool] = None,
        max_ops: int = DEFAULT_MAX_OPS,
        budget: Optional[ShotBudget] = None,
        noise: Optional[NoiseModel] = None,
        gradient_tolerance: float = GRADIENT_TOLERANCE,
        n_jobs: Optional[int] = None,
        random_state: Optional[int] = None,
    ):
        self.pool = pool
        self.max_ops = max_ops
        self.budget = budget
        self.noise = noise
        self.gradient_tolerance = gradient_tolerance
        self.n_jobs = n_jobs
        self.random_state = random_state

    def _pool(self, m: int) -> OperatorPool:
        pool = self.pool if self.pool is not None else build_pool(m)
        if pool.m != m:
            raise DimensionError(f"Pool acts on {pool.m} qubits, expected {m}")
        return pool

    def grow(self, state: QuantumState, hamiltonian: PauliSum) -> Tuple[int, float]:
        """Select the generator with the largest gradient, lowest index on ties.

        :return: ``(index, gradient)``
        """
        pool = getattr(self, "pool_", None)
        if pool is None or pool.m != hamiltonian.m:
            pool = self._pool(hamiltonian.m)
        gradients = pool_gradients(state, hamiltonian, pool)
        index = int(np.argmax(gradients))
        return index, float(gradients[index])

    def fit(self, hamiltonian: PauliSum, seed: Seed = None) -> "AdaptVQE":
        m = hamiltonian.m
        pool = self.pool_ = self._pool(m)
        seeds = spawn_seeds(self.random_state if seed is None else seed, 2)
        template, reference = build_reference(
            m, hamiltonian, self.budget, self.noise, seeds[0], self.n_jobs
        )
        growth_seeds = spawn_seeds(seeds[1], max(self.max_ops, 1))
        result = reference
        history: List[dict] = []
        for step in range(self.max_ops):
            index, gradient = self.grow(result.state, hamiltonian)
            if gradient < self.gradient_tolerance:
                logger.info(
                    f"ADAPT stops after {step} operators: largest gradient "
                    f"{gradient:.2e}"
                )
                break
            template = template.append(pauli_rotation(pool.generators[index]))
            warm_start = np.append(result.best_params[template.frozen_prefix :], 0.0)
            result = run_vqe(
                hamiltonian,
                template,
                self.budget,
                self.noise,
                growth_seeds[step],
                initial_point=warm_start,
                n_repeats=1,
            )
            history.append(
                {
                    "step": step,
                    "index": index,
                    "operator": pool.labels[index],
                    "gradient": gradient,
                    "energy": result.best_energy,
                }
            )
            logger.info(
                f"ADAPT step {step}: added {pool.labels[index]} (gradient "
                f"{gradient:.4e}), energy {result.best_energy:.8f}"
            )
        self.reference_result_ = reference
        self.template_ = template
        self.result_ = result
        self.history_ = history
        self.energy_ = result.best_energy
        return self


def adapt_vqe(
    h: PauliSum,
    pool: Optional[OperatorPool] = None,
    max_ops: int = DEFAULT_MAX_OPS,
    budget: Optional[ShotBudget] = None,
    noise: Optional[NoiseModel] = None,
    seed: Seed = None,
    gradient_tolerance: float = GRADIENT_TOLERANCE,
) -> Tuple[CircuitTemplate, VqeResult]:
    """Reference state plus up to ``max_ops`` greedily chosen rotations."""
    solver = AdaptVQE(pool, max_ops, budget, noise, gradient_tolerance)
    solver.fit(h, seed=seed)
    return solver.template_, solver.result_


def noa_vqe(
    h0: FermionTensors,
    k: int = 5,
    max_ops: int = DEFAULT_MAX_OPS,
    budget: Optional[ShotBudget] = None,
    noise: Optional[NoiseModel] = None,
    seed: Seed = None,
    rdm_mode: str = "exact",
    rdm_shots: Optional[int] = None,
    gradient_tolerance: float = GRADIENT_TOLERANCE,
) -> NoizationTrace:
    """``k`` natural-orbital steps, each rebuilding an ADAPT circuit from scratch."""
    solver = AdaptVQE(None, max_ops, budget, noise, gradient_tolerance)
    noizer = NOization(solver, k, rdm_mode, rdm_shots, random_state=seed)
    return noizer.fit(h0).trace_
