import numpy as np
import pytest
from sklearn.base import clone

from novqe.ansatz import build_ansatz
from novqe.ansatz import build_product
from novqe.encoding import PauliSum
from novqe.encoding import hubbard_pauli
from novqe.encoding import one_norm
from novqe.exceptions import AllocationError
from novqe.exceptions import BudgetError
from novqe.exceptions import DimensionError
from novqe.exceptions import OptimizationError
from novqe.hamiltonian import HubbardSpec
from novqe.oracle import ground_energy
from novqe.simulator import expectation
from novqe.simulator import simulate
from novqe.vqe import VQE
from novqe.vqe import ShotBudget
from novqe.vqe import allocate_shots
from novqe.vqe import minimize
from novqe.vqe import run_vqe


def test_shots_per_evaluation():
    budget = ShotBudget(total=50_000_000, n_iter=1000, n_repeats=5)
    assert budget.shots_per_evaluation() == 10_000
    assert not budget.exact_mode
    budget = ShotBudget(total=50_000_000, n_iter=1000, n_repeats=5, k_steps=3)
    assert budget.shots_per_evaluation() == 3333


def test_exact_budget():
    assert ShotBudget().exact_mode
    assert ShotBudget().shots_per_evaluation() is None
    assert ShotBudget(total=10, exact=True).shots_per_evaluation() is None
    assert ShotBudget.exact_budget(n_iter=5).to_dict()["n_iter"] == 5


def test_budget_errors():
    with pytest.raises(BudgetError):
        ShotBudget(n_iter=0)
    budget = ShotBudget(total=500, n_iter=100, n_repeats=1)
    with pytest.raises(BudgetError, match="fewer than the 6"):
        budget.check(6)
    assert issubclass(BudgetError, AllocationError)


def test_allocate_shots(dimer_pauli):
    alloc = allocate_shots(dimer_pauli, 10_000)
    assert alloc.tolist() == [1000, 2000, 2000, 2000, 2000, 1000]
    assert allocate_shots(dimer_pauli, 6).tolist() == [1] * 6
    odd = allocate_shots(dimer_pauli, 10_001)
    assert odd.sum() == 10_001
    assert np.all(odd >= 1)


def test_allocate_shots_errors(dimer_pauli):
    with pytest.raises(AllocationError):
        allocate_shots(dimer_pauli, 5)
    assert allocate_shots(PauliSum(2), 10).size == 0


def test_minimize_quadratic():
    result = minimize(lambda x: float(np.sum((x - 1.0) ** 2)), [0.0, 0.0], 200)
    np.testing.assert_allclose(result.best_params, [1.0, 1.0], atol=1e-3)
    assert result.best_energy == min(result.trace)
    assert result.evaluations_used == len(result.trace) <= 200
    assert np.all(np.diff(result.best_so_far) <= 0)


def test_minimize_rejects_nan():
    with pytest.raises(OptimizationError, match="nan"):
        minimize(lambda x: float("nan"), [0.0])


def test_minimize_without_parameters():
    result = minimize(lambda x: 3.0, [])
    assert result.best_energy == 3.0
    assert result.evaluations_used == 1


def test_run_vqe_is_variational(dimer, dimer_pauli, small_budget):
    result = run_vqe(dimer_pauli, build_product(4), small_budget, seed=3)
    assert result.best_energy >= ground_energy(dimer) - 1e-9
    assert not result.sampled
    assert len(result.restart_traces) == 2
    assert result.best_energy == min(result.restart_energies)
    assert result.best_params.shape == (4,)
    assert result.state is not None


def test_run_vqe_is_reproducible(dimer_pauli, small_budget):
    a = run_vqe(dimer_pauli, build_product(4), small_budget, seed=11)
    b = run_vqe(dimer_pauli, build_product(4), small_budget, seed=11, n_jobs=2)
    assert a.best_energy == b.best_energy
    assert a.restart_traces == b.restart_traces


def test_run_vqe_initial_point(dimer_pauli, small_budget):
    template = build_product(4)
    vacuum = expectation(simulate(template.bind(np.zeros(4)), 4), dimer_pauli)
    result = run_vqe(
        dimer_pauli, template, small_budget, seed=0, initial_point=np.zeros(4)
    )
    assert result.restart_traces[0][0] == pytest.approx(vacuum)
    with pytest.raises(DimensionError):
        run_vqe(dimer_pauli, template, small_budget, initial_point=np.zeros(3))


def test_more_restarts_never_raise_the_energy(dimer_pauli):
    template = build_product(4)
    budget = ShotBudget(n_iter=100, n_repeats=1)
    single = run_vqe(dimer_pauli, template, budget, seed=8)
    for k in (2, 5):
        several = run_vqe(dimer_pauli, template, budget, seed=8, n_repeats=k)
        assert several.restart_traces[0] == single.restart_traces[0]
        assert several.best_energy <= single.best_energy


def test_product_ansatz_misses_the_entangled_ground_state(small_budget):
    h = hubbard_pauli(HubbardSpec(n_sites=2, u=0.0))
    result = run_vqe(h, build_product(4), small_budget, seed=0)
    assert result.best_energy > -2.0 + 1e-3


def test_zero_hamiltonian_has_zero_energy(small_budget):
    result = run_vqe(PauliSum(4), build_ansatz("fsim", 4), small_budget, seed=0)
    assert result.best_energy == 0.0


def test_run_vqe_dimension_mismatch(dimer_pauli):
    with pytest.raises(DimensionError):
        run_vqe(dimer_pauli, build_product(8))


def test_run_vqe_sampled(dimer_pauli):
    budget = ShotBudget(total=60 * 2 * 600, n_iter=60, n_repeats=2)
    result = run_vqe(dimer_pauli, build_product(4), budget, seed=1)
    assert result.sampled
    assert result.evaluations_used <= 120
    with pytest.raises(BudgetError):
        run_vqe(dimer_pauli, build_product(4), ShotBudget(total=100, n_iter=60))


def test_vqe_estimator(dimer_pauli, small_budget):
    solver = VQE("product", budget=small_budget, random_state=5)
    assert solver.get_params()["ansatz"] == "product"
    cloned = clone(solver)
    assert cloned.get_params() == solver.get_params()
    solver.fit(dimer_pauli)
    assert solver.template_.n_params == 4
    assert solver.energy_ == solver.result_.best_energy
    assert cloned.fit(dimer_pauli).energy_ == solver.energy_


@pytest.mark.slow
def test_ldca_reaches_ground_energy(dimer, dimer_pauli):
    budget = ShotBudget(n_iter=1000, n_repeats=5)
    result = run_vqe(dimer_pauli, build_ansatz("ldca", 4), budget, seed=0)
    assert result.best_energy == pytest.approx(ground_energy(dimer), abs=1e-3)


@pytest.mark.slow
def test_sampled_fsim_energy_agrees_with_exact(dimer_pauli):
    template = build_ansatz("fsim", 4)
    exact = run_vqe(dimer_pauli, template, ShotBudget(n_iter=1000, n_repeats=5), seed=0)
    shots = 10_000
    budget = ShotBudget(total=shots * 1000 * 5, n_iter=1000, n_repeats=5)
    assert budget.shots_per_evaluation() == shots
    sampled = [
        run_vqe(dimer_pauli, template, budget, seed=seed).best_energy
        for seed in range(3)
    ]
    tolerance = 3 * one_norm(dimer_pauli) / np.sqrt(shots)
    assert abs(np.mean(sampled) - exact.best_energy) <= tolerance
