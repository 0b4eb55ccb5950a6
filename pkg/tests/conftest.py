import json
import logging
from functools import wraps
from pathlib import Path

import numpy as np
import pytest

from novqe.encoding import jordan_wigner
from novqe.hamiltonian import Geometry
from novqe.hamiltonian import HubbardSpec
from novqe.hamiltonian import build_hubbard
from novqe.noization import NOization
from novqe.simulator import QuantumState
from novqe.utils import make_rng
from novqe.vqe import VQE
from novqe.vqe import ShotBudget

FIXTURES = Path(__file__).parent / "fixtures"


def random_state(m: int, seed: int, mixed: bool = False) -> QuantumState:
    rng = make_rng(seed)
    dim = 2 ** m
    if mixed:
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = a @ a.conj().T
        return QuantumState(m, rho / np.trace(rho).real)
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return QuantumState(m, psi / np.linalg.norm(psi))


@pytest.fixture
def make_state():
    return random_state


@pytest.fixture(scope="session")
def golden():
    return json.loads((FIXTURES / "golden.json").read_text())


@pytest.fixture
def dimer_spec():
    return HubbardSpec(n_sites=2, t=1.0, u=1.0)


@pytest.fixture
def dimer(dimer_spec):
    return build_hubbard(dimer_spec)


@pytest.fixture
def dimer_pauli(dimer):
    return jordan_wigner(dimer)


@pytest.fixture
def plaquette_spec():
    return HubbardSpec(n_sites=4, u=1.0, geometry=Geometry.SQUARE_PLAQUETTE)


@pytest.fixture
def plaquette(plaquette_spec):
    return build_hubbard(plaquette_spec)


@pytest.fixture
def small_budget():
    return ShotBudget(n_iter=100, n_repeats=2)


@pytest.fixture(scope="function")
def noization_model(small_budget):
    return NOization(VQE("product", budget=small_budget), n_steps=2, random_state=7)


@pytest.fixture
def model_file(tmp_path, golden):
    path = tmp_path / "dimer.json"
    path.write_text(json.dumps({"model": golden["dimer_u1"]["model"]}))
    return path


@pytest.fixture
def tiny_config(tmp_path):
    config = {
        "name": "tiny",
        "model": {"n_sites": 2, "t": 1.0, "u": 1.0},
        "method": "noization",
        "ansatz": "product",
        "k_steps": 2,
        "shots": {"total": None, "n_iter": 60, "n_repeats": 2},
        "seeds": [0, 1],
    }
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(config))
    return path


@pytest.fixture(scope="function")
def simple_decorator(request):
    def decorator(solver, func, **dkwargs):
        @wraps(func)
        def wrapper(*args, **kwargs):
            logging.info("hello world")
            return func(*args, **kwargs)

        return wrapper

    return decorator


@pytest.fixture(params=[False, True])
def full(request):
    return request.param
