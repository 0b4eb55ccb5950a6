import logging
from dataclasses import dataclass
from dataclasses import field
from typing import Callable
from typing import List
from typing import Optional
from typing import Sequence

import numpy as np
from joblib import Parallel
from joblib import delayed
from scipy.optimize import minimize as scipy_minimize
from sklearn.base import BaseEstimator

from novqe.ansatz import CircuitTemplate
from novqe.ansatz import build_ansatz
from novqe.config import COBYLA_RHOBEG
from novqe.config import COBYLA_TOL
from novqe.config import DEFAULT_N_ITER
from novqe.config import DEFAULT_N_REPEATS
from novqe.config import OPTIMIZER_NAME
from novqe.encoding import PauliSum
from novqe.exceptions import AllocationError
from novqe.exceptions import BudgetError
from novqe.exceptions import DimensionError
from novqe.exceptions import OptimizationError
from novqe.simulator import CompiledObservable
from novqe.simulator import NoiseModel
from novqe.simulator import QuantumState
from novqe.simulator import sampled_expectation
from novqe.simulator import simulate
from novqe.types import Seed
from novqe.utils import make_rng
from novqe.utils import spawn_seeds

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ShotBudget:
    """Total measurement budget of a run.

    ``total=None`` or ``exact=True`` means infinite shots (exact expectations).

    :param int total: total number of shots
    :param int n_iter: optimizer evaluation cap per restart
    :param int n_repeats: random restarts per VQE run
    :param int k_steps: NOization steps sharing the budget
    :param bool exact: evaluate energies exactly
    """

    total: Optional[int] = None
    n_iter: int = DEFAULT_N_ITER
    n_repeats: int = DEFAULT_N_REPEATS
    k_steps: int = 1
    exact: bool = False

    def __post_init__(self):
        for name in ("n_iter", "n_repeats", "k_steps"):
            if getattr(self, name) < 1:
                raise BudgetError(f"{name} must be at least 1")
        if self.total is None:
            object.__setattr__(self, "exact", True)

    @property
    def exact_mode(self) -> bool:
        return self.exact

    @classmethod
    def exact_budget(
        cls, n_iter: int = DEFAULT_N_ITER, n_repeats: int = DEFAULT_N_REPEATS
    ) -> "ShotBudget":
        return cls(None, n_iter, n_repeats, 1, True)

    def shots_per_evaluation(self) -> Optional[int]:
        """Shots available to one energy evaluation, None in exact mode."""
        if self.exact:
            return None
        return self.total // (self.n_iter * self.n_repeats * self.k_steps)

    def check(self, n_terms: int) -> Optional[int]:
        """Validate the budget against an observable's term count.

        :raises BudgetError: if an evaluation cannot measure every term once
        """
        shots = self.shots_per_evaluation()
        if shots is not None and shots < n_terms:
            raise BudgetError(
                f"Budget of {self.total} shots gives {shots} shots per evaluation, "
                f"fewer than the {n_terms} Pauli terms to measure"
            )
        return shots

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "n_iter": self.n_iter,
            "n_repeats": self.n_repeats,
            "k_steps": self.k_steps,
            "exact": self.exact,
        }


@dataclass
class VqeResult:
    """Outcome of a (multi-start) VQE minimization.

    ``best_params`` is the full parameter vector, frozen prefix included.
    ``trace`` holds every energy evaluated by the selected restart and
    ``restart_traces`` those of all restarts.  ``sampled`` flags a
    finite-shot estimate of ``best_energy``.
    """

    best_params: np.ndarray
    best_energy: float
    trace: List[float] = field(default_factory=list)
    evaluations_used: int = 0
    restart_traces: List[List[float]] = field(default_factory=list)
    restart_energies: List[float] = field(default_factory=list)
    best_restart: int = 0
    sampled: bool = False
    optimizer: str = OPTIMIZER_NAME
    state: Optional[QuantumState] = field(default=None, repr=False)

    @property
    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(self.trace) if self.trace else np.array([])

    def to_dict(self) -> dict:
        return {
            "best_params": [float(x) for x in self.best_params],
            "best_energy": self.best_energy,
            "trace": [float(e) for e in self.trace],
            "evaluations_used": self.evaluations_used,
            "restart_traces": [[float(e) for e in t] for t in self.restart_traces],
            "restart_energies": [float(e) for e in self.restart_energies],
            "best_restart": self.best_restart,
            "sampled": self.sampled,
            "optimizer": self.optimizer,
        }


def allocate_shots(o: PauliSum, n: int) -> np.ndarray:
    """Split ``n`` shots over the terms proportionally to ``|coefficient|``.

    Every term gets at least one shot; largest remainders absorb rounding so
    the counts sum to ``n`` exactly.

    :raises AllocationError: if ``n`` is smaller than the number of terms
    """
    weights = np.abs(o.coefficients)
    n_terms = len(weights)
    if n_terms == 0:
        return np.zeros(0, dtype=np.int64)
    if n < n_terms:
        raise AllocationError(f"{n} shots cannot cover {n_terms} terms")
    raw = n * weights / weights.sum()
    counts = np.maximum(1, np.floor(raw)).astype(np.int64)
    remainders = raw - np.floor(raw)
    # stable sorts keep the lowest index first among equal remainders
    by_largest = np.argsort(-remainders, kind="stable")
    by_smallest = np.argsort(remainders, kind="stable")
    i = 0
    while counts.sum() < n:
        counts[by_largest[i % n_terms]] += 1
        i += 1
    while counts.sum() > n:
        for idx in by_smallest:
            if counts.sum() == n:
                break
            if counts[idx] > 1:
                counts[idx] -= 1
    return counts


def minimize(
    f: Callable[[np.ndarray], float],
    x0: Sequence[float],
    max_iter: int = DEFAULT_N_ITER,
    rhobeg: float = COBYLA_RHOBEG,
    tol: float = COBYLA_TOL,
) -> VqeResult:
    """Minimize ``f`` with COBYLA from ``x0``.

    :raises OptimizationError: on a non-finite function value
    """
    x0 = np.asarray(x0, dtype=float)
    trace: List[float] = []
    best = {"x": x0.copy(), "f": np.inf}

    def objective(x: np.ndarray) -> float:
        value = float(f(x))
        if not np.isfinite(value):
            raise OptimizationError(
                f"Energy evaluation {len(trace)} returned {value} at x = {x.tolist()}"
            )
        trace.append(value)
        if value < best["f"]:
            best["x"], best["f"] = np.array(x, dtype=float), value
        return value

    if x0.size == 0:
        objective(x0)
    else:
        scipy_minimize(
            objective,
            x0,
            method="COBYLA",
            tol=tol,
            options={"maxiter": max_iter, "rhobeg": rhobeg},
        )
    return VqeResult(
        best_params=best["x"],
        best_energy=best["f"],
        trace=trace,
        evaluations_used=len(trace),
    )


class _EnergyFunction:
    def __init__(
        self,
        observable: CompiledObservable,
        template: CircuitTemplate,
        noise: NoiseModel,
        alloc: Optional[np.ndarray],
        rng: Optional[np.random.Generator],
    ):
        self.observable = observable
        self.template = template
        self.noise = noise
        self.alloc = alloc
        self.rng = rng

    def state(self, free: np.ndarray) -> QuantumState:
        theta = self.template.full_parameters(free)
        return simulate(self.template.bind(theta), self.template.m, self.noise)

    def __call__(self, free: np.ndarray) -> float:
        state = self.state(free)
        if self.alloc is None:
            return self.observable.expectation(state)
        return sampled_expectation(state, self.observable, self.alloc, self.rng)


def _run_restart(
    index: int,
    observable: CompiledObservable,
    template: CircuitTemplate,
    noise: NoiseModel,
    alloc: Optional[np.ndarray],
    seed: np.random.SeedSequence,
    max_iter: int,
    initial_point: Optional[np.ndarray],
) -> VqeResult:
    rng = make_rng(seed)
    if initial_point is not None:
        x0 = np.asarray(initial_point, dtype=float)
    else:
        x0 = rng.uniform(-np.pi, np.pi, template.n_free)
    energy = _EnergyFunction(observable, template, noise, alloc, rng)
    result = minimize(energy, x0, max_iter=max_iter)
    logger.debug(
        f"Restart {index}: energy {result.best_energy:.8f} after "
        f"{result.evaluations_used} evaluations"
    )
    return result


def run_vqe(
    h: PauliSum,
    c: CircuitTemplate,
    budget: Optional[ShotBudget] = None,
    noise: Optional[NoiseModel] = None,
    seed: Seed = None,
    initial_point: Optional[Sequence[float]] = None,
    n_repeats: Optional[int] = None,
    n_jobs: Optional[int] = None,
) -> VqeResult:
    """Multi-start VQE of ``h`` over the free parameters of ``c``.

    Restart ``i`` starts from a uniform draw in ``[-pi, pi]`` (restart 0 from
    ``initial_point`` when given).  The lowest-energy restart wins, ties going
    to the lower index.  In sampled mode its energy is re-estimated with a
    fresh seed.

    :param PauliSum h: qubit Hamiltonian
    :param CircuitTemplate c: circuit template
    :param ShotBudget budget: shot budget, exact by default
    :param NoiseModel noise: noise model, noiseless by default
    :param seed: integer seed
    :param initial_point: warm start for the free parameters of restart 0
    :param int n_repeats: restart count overriding ``budget.n_repeats``; the
        per-evaluation shot count still follows ``budget``
    :param int n_jobs: joblib workers for the restarts
    :raises BudgetError: if the budget cannot cover every Pauli term
    """
    budget = budget or ShotBudget()
    noise = noise or NoiseModel.noiseless()
    if h.m != c.m:
        raise DimensionError(
            f"Hamiltonian on {h.m} qubits cannot be measured on a {c.m}-qubit circuit"
        )
    shots = budget.check(len(h))
    alloc = None if shots is None else allocate_shots(h, shots)
    observable = CompiledObservable(h)
    if alloc is None:
        # dense matrix is built once, before the restart threads share it
        observable.matrix
    n_repeats = n_repeats or budget.n_repeats
    seeds = spawn_seeds(seed, n_repeats + 1)
    if initial_point is not None:
        initial_point = np.asarray(initial_point, dtype=float)
        if initial_point.shape != (c.n_free,):
            raise DimensionError(
                f"initial_point has shape {initial_point.shape}, expected "
                f"({c.n_free},)"
            )

    results = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_run_restart)(
            i,
            observable,
            c,
            noise,
            alloc,
            seeds[i],
            budget.n_iter,
            initial_point if i == 0 else None,
        )
        for i in range(n_repeats)
    )
    energies = [r.best_energy for r in results]
    best_index = min(range(n_repeats), key=lambda i: (energies[i], i))
    best = results[best_index]

    evaluator = _EnergyFunction(observable, c, noise, alloc, make_rng(seeds[-1]))
    free = best.best_params
    state = evaluator.state(free)
    energy = evaluator(free) if alloc is not None else best.best_energy
    result = VqeResult(
        best_params=c.full_parameters(free),
        best_energy=float(energy),
        trace=best.trace,
        evaluations_used=sum(r.evaluations_used for r in results),
        restart_traces=[r.trace for r in results],
        restart_energies=energies,
        best_restart=best_index,
        sampled=alloc is not None,
        state=state,
    )
    logger.info(
        f"VQE ({c.name}, {c.n_free} free parameters, {n_repeats} restarts): "
        f"best energy {result.best_energy:.8f} from restart {best_index}"
    )
    return result


class VQE(BaseEstimator):
    """Variational quantum eigensolver with a fixed ansatz.

    :param str ansatz: ``"product"``, ``"fsim"`` or ``"ldca"``
    :param int layers: fSim layers or LDCA cycles
    :param ShotBudget budget: shot budget, exact by default
    :param NoiseModel noise: noise model, noiseless by default
    :param int n_jobs: joblib workers for the restarts
    :param int random_state: seed used when ``fit`` gets none
    """

    def __init__(
        self,
        ansatz: str = "ldca",
        layers: int = 1,
        budget: Optional[ShotBudget] = None,
        noise: Optional[NoiseModel] = None,
        n_jobs: Optional[int] = None,
        random_state: Optional[int] = None,
    ):
        self.ansatz = ansatz
        self.layers = layers
        self.budget = budget
        self.noise = noise
        self.n_jobs = n_jobs
        self.random_state = random_state

    def fit(
        self,
        hamiltonian: PauliSum,
        initial_point: Optional[Sequence[float]] = None,
        seed: Seed = None,
    ) -> "VQE":
        self.template_ = build_ansatz(self.ansatz, hamiltonian.m, self.layers)
        self.result_ = run_vqe(
            hamiltonian,
            self.template_,
            budget=self.budget,
            noise=self.noise,
            seed=self.random_state if seed is None else seed,
            initial_point=initial_point,
            n_jobs=self.n_jobs,
        )
        self.energy_ = self.result_.best_energy
        return self
