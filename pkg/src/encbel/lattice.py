"""Fast zeta / Moebius transforms over the subset lattice of an n-element set.

Arrays have length ``2**n`` and are indexed by subset bitmask.  Each transform
is O(n * 2**n).
"""

import numpy as np

from .errors import ResourceCapError

DENSE_MAX_BITS = 16


def _bits(a: np.ndarray) -> int:
    n = a.shape[0].bit_length() - 1
    if a.shape[0] != 1 << n:
        raise ValueError("length must be a power of two")
    return n


def check_dense(n: int, limit: int = DENSE_MAX_BITS):
    if n > limit:
        raise ResourceCapError(f"dense transform over 2^{n} subsets exceeds 2^{limit}")


def subset_sum(f) -> np.ndarray:
    """g(A) = sum of f(B) over B subset of A."""
    a = np.array(f, dtype=np.float64)
    n = _bits(a)
    for i in range(n):
        v = a.reshape(-1, 2, 1 << i)
        v[:, 1, :] += v[:, 0, :]
    return a


def subset_mobius(g) -> np.ndarray:
    a = np.array(g, dtype=np.float64)
    n = _bits(a)
    for i in range(n):
        v = a.reshape(-1, 2, 1 << i)
        v[:, 1, :] -= v[:, 0, :]
    return a


def superset_sum(f) -> np.ndarray:
    """g(A) = sum of f(B) over B superset of A."""
    a = np.array(f, dtype=np.float64)
    n = _bits(a)
    for i in range(n):
        v = a.reshape(-1, 2, 1 << i)
        v[:, 0, :] += v[:, 1, :]
    return a


def superset_mobius(g) -> np.ndarray:
    a = np.array(g, dtype=np.float64)
    n = _bits(a)
    for i in range(n):
        v = a.reshape(-1, 2, 1 << i)
        v[:, 0, :] -= v[:, 1, :]
    return a


def complement_index(n: int) -> np.ndarray:
    """Index array mapping A to its complement."""
    full = (1 << n) - 1
    return full ^ np.arange(1 << n)
