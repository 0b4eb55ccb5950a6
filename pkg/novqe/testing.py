from typing import Iterable
from typing import Type

from sklearn.base import BaseEstimator

from novqe.instrumentor import SolverInstrumentor
from novqe.instrumentor import SolverMethodInstrumentation
from novqe.utils import get_solvers_in_package
from novqe.utils import method_is_inherited


class SolverInstrumentationAsserter:
    """Assertions on the state a :class:`SolverInstrumentor` leaves behind."""

    def __init__(self, instrumentor: SolverInstrumentor):
        self.instrumentor = instrumentor

    def _instrumentation(self, obj, method_name: str) -> SolverMethodInstrumentation:
        name = SolverInstrumentor._get_instrumentation_attribute_name(method_name)
        return obj.__dict__.get(name)

    def _solvers(self, solver: BaseEstimator, recursive: bool):
        if recursive:
            return list(self.instrumentor._walk_solvers(solver))
        return [solver]

    def assert_instrumented_solver(
        self, solver: BaseEstimator, recursive: bool = True
    ):
        for obj in self._solvers(solver, recursive):
            for method_name in self.instrumentor.methods:
                instr = self._instrumentation(obj, method_name)
                if hasattr(obj, method_name):
                    assert instr is not None
                    assert self.instrumentor.instrument in instr.callables
                    assert obj.__dict__[method_name] == instr.instrumented_func
                else:
                    assert instr is None

    def assert_uninstrumented_solver(
        self, solver: BaseEstimator, recursive: bool = True, full: bool = False
    ):
        for obj in self._solvers(solver, recursive):
            for method_name in self.instrumentor.methods:
                instr = self._instrumentation(obj, method_name)
                if full:
                    assert instr is None
                    assert method_name not in obj.__dict__
                if instr is not None:
                    assert self.instrumentor.instrument not in instr.callables

    def assert_instrumented_package(self, package_name: str = "novqe"):
        self.assert_instrumented_classes(get_solvers_in_package(package_name))

    def assert_instrumented_classes(self, solvers: Iterable[Type[BaseEstimator]]):
        for solver in solvers:
            self.assert_instrumented_class(solver)

    def assert_instrumented_class(self, solver: Type[BaseEstimator]):
        if issubclass(solver, self.instrumentor.exclude):
            return
        for method_name in self.instrumentor.methods:
            if getattr(solver, method_name, None) is None:
                continue
            instr = self._instrumentation(solver, method_name)
            assert instr is not None
            assert instr.solver == solver
            assert self.instrumentor.instrument in instr.callables
            assert self.instrumentor.instrument_kwargs in [
                i.kwargs for i in instr.instruments
            ]
            assert instr.inherited == method_is_inherited(solver, instr.func)

    def assert_uninstrumented_package(self, package_name: str, full: bool = False):
        self.assert_uninstrumented_classes(
            get_solvers_in_package(package_name), full=full
        )

    def assert_uninstrumented_classes(
        self, solvers: Iterable[Type[BaseEstimator]], full: bool = False
    ):
        for solver in solvers:
            self.assert_uninstrumented_class(solver, full=full)

    def assert_uninstrumented_class(
        self, solver: Type[BaseEstimator], full: bool = False
    ):
        if issubclass(solver, self.instrumentor.exclude):
            return
        for method_name in self.instrumentor.methods:
            class_method = getattr(solver, method_name, None)
            if class_method is None:
                continue
            instr = self._instrumentation(solver, method_name)
            if full:
                assert instr is None
            if instr is None:
                continue
            assert self.instrumentor.instrument not in instr.callables
            assert solver.__dict__[method_name] == instr.instrumented_func
