from enum import Enum

import numpy as np

#: By default, exclude these types from instrumentation.
#: The default setting is to exclude
#: ``bytes``,
#: ``str``,
#: ``ndarray``
#: and ``Enum``.
DEFAULT_EXCLUDE = [bytes, str, np.ndarray, Enum]

#: By default, instrument these methods on all solvers.
#: The default is to instrument
#: ``fit``,
#: ``step``
#: and ``grow``.
DEFAULT_METHODS = [
    "fit",
    "step",
    "grow",
]

#: Pauli coefficients with a magnitude below this value are dropped.
PRUNE_TOLERANCE = 1e-12

#: Largest imaginary residue tolerated on a symmetrized Pauli coefficient.
IMAG_TOLERANCE = 1e-10

#: Tolerance of the Hermiticity checks on one- and two-body tensors.
HERMITIAN_TOLERANCE = 1e-12

#: Tolerance of the unitarity check on orbital rotations.
UNITARY_TOLERANCE = 1e-10

#: Tolerance of the Hermiticity check on assembled many-body operators.
OPERATOR_TOLERANCE = 1e-10

#: Tolerance on state norms and density-matrix traces.
STATE_TOLERANCE = 1e-10

#: Smallest density-matrix eigenvalue accepted as physical.
EIGENVALUE_FLOOR = -1e-9

#: Natural-orbital occupations closer than this are treated as degenerate.
DEGENERACY_TOLERANCE = 1e-8

#: NOization stops early once consecutive noiseless energies differ by less.
CONVERGENCE_TOLERANCE = 1e-6

#: A noiseless NOization step is rejected when its energy exceeds the last
#: accepted energy by more than this value.
REJECTION_TOLERANCE = 1e-6

#: ADAPT growth stops once the largest pool gradient falls below this value.
GRADIENT_TOLERANCE = 1e-4

#: Initial trust-region radius handed to COBYLA.
COBYLA_RHOBEG = 0.5

#: Final trust-region radius handed to COBYLA.
COBYLA_TOL = 1e-6

#: Name of the optimizer reported in results.
OPTIMIZER_NAME = "COBYLA (scipy.optimize)"

#: Optimizer evaluation cap per VQE run.
DEFAULT_N_ITER = 1000

#: Random restarts per VQE run.
DEFAULT_N_REPEATS = 10

#: Operator additions per ADAPT run.
DEFAULT_MAX_OPS = 10

#: Randomized-benchmarking single-qubit error rate of the reference device.
SYCAMORE_EPS1 = 0.0016

#: Randomized-benchmarking two-qubit error rate of the reference device.
SYCAMORE_EPS2 = 0.006

#: Noise ratios swept by ``compare_tradeoff`` unless given explicitly.
DEFAULT_NOISE_RATIOS = (0.01, 0.03, 0.1, 0.3, 1.0)

#: Largest register the dense oracle will assemble.
MAX_ORACLE_QUBITS = 10

#: Environment variable naming the artifact output directory.
OUTPUT_DIR_ENV = "NOVQE_OUTPUT_DIR"

#: Artifact output directory used when neither flag nor environment is set.
DEFAULT_OUTPUT_DIR = "novqe-output"

#: Version written in the header line of every CSV artifact.
CSV_SCHEMA_VERSION = 2
