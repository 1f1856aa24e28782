"""Order-independent reductions.

Every neighbor sum in the package goes through these functions. ``math.fsum``
returns the correctly rounded sum of its inputs, so the result does not depend
on the order in which agents or BLAS visit the terms. The simulator and the
vector iterations therefore agree bit for bit.
"""

import math
from typing import Iterable

import numpy as np


__all__ = [
    "exact_sum",
    "exact_dot",
    "exact_matvec",
    "exact_row_sums",
    "exact_col_sums",
]


def exact_sum(values: Iterable[float]) -> float:
    return math.fsum(values)


def exact_dot(weights: np.ndarray, values: np.ndarray) -> float:
    return math.fsum(np.multiply(weights, values).tolist())


def exact_matvec(matrix: np.ndarray, vector: np.ndarray) -> np.ndarray:
    """Row-wise correctly rounded ``matrix @ vector``."""

    products = np.multiply(matrix, np.asarray(vector, dtype=float)[np.newaxis, :])
    return np.array([math.fsum(row) for row in products.tolist()], dtype=float)


def exact_row_sums(matrix: np.ndarray) -> np.ndarray:
    return np.array([math.fsum(row) for row in np.asarray(matrix, dtype=float).tolist()], dtype=float)


def exact_col_sums(matrix: np.ndarray) -> np.ndarray:
    return exact_row_sums(np.asarray(matrix, dtype=float).T)
