from novqe.instruments.base import BaseInstrument
from novqe.instruments.base import Identity
from novqe.instruments.cprofile import CProfiler
from novqe.instruments.logging import EnergyLogger
from novqe.instruments.logging import HamiltonianLogger
from novqe.instruments.logging import TimeElapsedLogger
