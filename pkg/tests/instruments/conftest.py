import pytest

from novqe.vqe import VQE


@pytest.fixture
def vqe_model(small_budget):
    return VQE("product", budget=small_budget, random_state=2)
