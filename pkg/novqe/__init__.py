from novqe._version import __version__
from novqe.adapt import AdaptVQE
from novqe.encoding import PauliSum
from novqe.encoding import jordan_wigner
from novqe.experiment import ExperimentConfig
from novqe.experiment import run_experiment
from novqe.hamiltonian import FermionTensors
from novqe.hamiltonian import HubbardSpec
from novqe.hamiltonian import build_hubbard
from novqe.instrumentor import SolverInstrumentor
from novqe.noization import NOization
from novqe.vqe import VQE
from novqe.vqe import ShotBudget
