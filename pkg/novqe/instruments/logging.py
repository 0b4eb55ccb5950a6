import logging
import time
from collections.abc import Callable
from functools import wraps

import numpy as np

from novqe.encoding import PauliSum
from novqe.encoding import one_norm
from novqe.hamiltonian import FermionTensors
from novqe.instruments.base import BaseInstrument
from novqe.types import Solver
from novqe.utils import get_arg_by_key
from novqe.utils import get_name

logger = logging.getLogger(__name__)


class TimeElapsedLogger(BaseInstrument):
    """Instrument which logs execution time elapsed."""

    def __call__(self, solver: Solver, func: Callable, **dkwargs) -> Callable:
        name = get_name(solver, func)

        @wraps(func)
        def wrapper(*args, **kwargs):
            logger.info(f"{name} starting.")
            start = time.perf_counter()
            retval = func(*args, **kwargs)
            elapsed = time.perf_counter() - start
            logger.info(f"{name} elapsed time: {elapsed} seconds")
            return retval

        return wrapper


def _describe(operator) -> str:
    if isinstance(operator, PauliSum):
        return (
            f"{operator.m} qubits, {len(operator)} Pauli terms, "
            f"one-norm {one_norm(operator):.6f}"
        )
    if isinstance(operator, FermionTensors):
        return (
            f"{operator.m} spin orbitals, "
            f"{np.count_nonzero(np.abs(operator.h1) > 0)} one-body and "
            f"{np.count_nonzero(np.abs(operator.h2) > 0)} two-body entries"
        )
    return type(operator).__name__


class HamiltonianLogger(BaseInstrument):
    """Instrument which logs the size of the Hamiltonian a method receives.

    Looks for a ``hamiltonian`` or ``tensors`` argument.
    """

    def __call__(self, solver: Solver, func: Callable, **dkwargs) -> Callable:
        name = get_name(solver, func)

        @wraps(func)
        def wrapper(*args, **kwargs):
            for key in ("hamiltonian", "tensors"):
                try:
                    operator = get_arg_by_key(func, args, key, kwargs)
                except ValueError:
                    continue
                if operator is not None:
                    logger.info(f"{name} input {key}: {_describe(operator)}")
            return func(*args, **kwargs)

        return wrapper


class EnergyLogger(BaseInstrument):
    """Instrument which logs the energy a method produces.

    Reads ``energy_`` from a fitted solver, or the ``energy`` of a returned
    step record.
    """

    def __call__(self, solver: Solver, func: Callable, **dkwargs) -> Callable:
        name = get_name(solver, func)

        @wraps(func)
        def wrapper(*args, **kwargs):
            retval = func(*args, **kwargs)
            candidates = retval if isinstance(retval, tuple) else (retval,)
            for candidate in candidates:
                energy = getattr(candidate, "energy_", None)
                energy = getattr(candidate, "energy", energy)
                if isinstance(energy, float):
                    logger.info(f"{name} energy: {energy:.10f}")
                    break
            return retval

        return wrapper
