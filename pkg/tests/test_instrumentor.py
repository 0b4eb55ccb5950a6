import logging

from sklearn.base import BaseEstimator

from novqe.experiment import ExperimentConfig
from novqe.experiment import run_experiment
from novqe.instrumentor import SolverInstrumentor
from novqe.instruments import Identity
from novqe.testing import SolverInstrumentationAsserter
from novqe.vqe import VQE


def test_instrumentation(noization_model, simple_decorator, full):
    instrumentor = SolverInstrumentor(instrument=simple_decorator)
    instrumentor.instrument_instance(noization_model)
    asserter = SolverInstrumentationAsserter(instrumentor=instrumentor)
    asserter.assert_instrumented_solver(noization_model)
    instrumentor.uninstrument_instance(noization_model, full=full)
    asserter.assert_uninstrumented_solver(noization_model, full=full)


def test_package_instrumentation(simple_decorator, full):
    instrumentor = SolverInstrumentor(instrument=simple_decorator)
    instrumentor.instrument_package("novqe")
    asserter = SolverInstrumentationAsserter(instrumentor=instrumentor)
    asserter.assert_instrumented_package("novqe")
    instrumentor.uninstrument_package("novqe", full=full)
    asserter.assert_uninstrumented_package("novqe", full=full)


def test_class_instrumentation(noization_model, simple_decorator, full):
    instrumentor = SolverInstrumentor(instrument=simple_decorator)
    instrumentor.instrument_instance_classes(noization_model)
    asserter = SolverInstrumentationAsserter(instrumentor=instrumentor)
    classes = instrumentor._get_instance_classes(noization_model)
    assert {c.__name__ for c in classes} == {"NOization", "VQE"}
    asserter.assert_instrumented_classes(classes)
    instrumentor.uninstrument_instance_classes(noization_model, full=full)
    asserter.assert_uninstrumented_classes(classes, full=full)


def test_instrumented_fit(noization_model, dimer, simple_decorator, caplog):
    caplog.set_level(level=logging.INFO)
    expected = noization_model.fit(dimer).trace_.energies
    assert "hello world" not in caplog.text

    instrumentor = SolverInstrumentor(instrument=simple_decorator)
    instrumentor.instrument_instance(noization_model)
    assert noization_model.fit(dimer).trace_.energies == expected
    # one fit, then per step one step and one inner fit
    assert caplog.text.count("hello world") == 1 + 2 * 2

    caplog.clear()
    instrumentor.uninstrument_instance(noization_model)
    noization_model.fit(dimer)
    assert "hello world" not in caplog.text


def test_instruments_stack_once(noization_model):
    instrumentor = SolverInstrumentor(instrument=Identity())
    instrumentor.instrument_instance(noization_model)
    instrumentor.instrument_instance(noization_model)
    assert len(noization_model._novqe_fit.instruments) == 1
    other = SolverInstrumentor(instrument=Identity(), instrument_kwargs={"a": 1})
    other.instrument_instance(noization_model)
    assert len(noization_model._novqe_fit.instruments) == 2
    other.uninstrument_instance(noization_model)
    assert len(noization_model._novqe_fit.instruments) == 1


def test_exclude(noization_model, simple_decorator):
    instrumentor = SolverInstrumentor(instrument=simple_decorator, exclude=[VQE])
    instrumentor.instrument_instance(noization_model)
    assert "_novqe_fit" in noization_model.__dict__
    assert "_novqe_fit" not in noization_model.solver.__dict__


def test_subclass_instrumentation(dimer_pauli, small_budget, simple_decorator, caplog):
    caplog.set_level(level=logging.INFO)

    class WarmVQE(VQE):
        pass

    instrumentor = SolverInstrumentor(instrument=simple_decorator)
    instrumentor.instrument_class(VQE)
    instrumentor.instrument_class(WarmVQE)
    WarmVQE("product", budget=small_budget).fit(dimer_pauli)
    assert caplog.text.count("hello world") == 1

    instrumentor.uninstrument_class(WarmVQE)
    assert "fit" not in WarmVQE.__dict__
    instrumentor.uninstrument_class(VQE)
    caplog.clear()
    WarmVQE("product", budget=small_budget).fit(dimer_pauli)
    assert "hello world" not in caplog.text


def test_no_duplicate_instrumentation(
    caplog, dimer_pauli, small_budget, simple_decorator
):
    caplog.set_level(level=logging.INFO)

    class DoubleAttributeSolver(BaseEstimator):
        def __init__(self, solver):
            self.first_solver = solver
            self.second_solver = solver

        def fit(self, hamiltonian):
            self.first_solver.fit(hamiltonian)
            return self

    solver = VQE("product", budget=small_budget)
    meta_solver = DoubleAttributeSolver(solver=solver)

    instrumentor = SolverInstrumentor(instrument=simple_decorator)
    instrumentor.instrument_instance(meta_solver)

    meta_solver.fit(dimer_pauli)
    # once for meta_solver + once for solver
    # even though solver is referenced in two attributes of meta_solver
    assert caplog.text.count("hello world") == 2


def test_instrumentor_as_experiment_hook(tiny_config, simple_decorator, caplog):
    caplog.set_level(level=logging.INFO)
    cfg = ExperimentConfig.from_file(tiny_config)
    instrumentor = SolverInstrumentor(instrument=simple_decorator, methods=["fit"])
    run_experiment(cfg, instrument=instrumentor, write=False)
    # outer and inner fit for each of the two seeds, two steps each
    assert caplog.text.count("hello world") == 2 * (1 + 2)
