from typing import Type
from typing import Union

import numpy as np
from sklearn.base import BaseEstimator

Solver = Union[Type[BaseEstimator], BaseEstimator]

Seed = Union[None, int, np.random.SeedSequence]
