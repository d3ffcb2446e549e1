"""Small number-theory helpers over the integers and F_p."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % f for f in range(2, math.isqrt(n) + 1))


def require_prime(n: int, name: str = "p") -> int:
    if not isinstance(n, (int, np.integer)) or not is_prime(int(n)):
        raise DomainError(f"{name} must be prime, got {n!r}")
    return int(n)


def ceil_log(n: int, base: int) -> int:
    """Smallest ``L >= 0`` with ``base**L >= n``."""
    if n < 1:
        raise DomainError("ceil_log needs n >= 1")
    L, acc = 0, 1
    while acc < n:
        acc *= base
        L += 1
    return L


def inverse_mod_matrix(a, p: int) -> np.ndarray:
    """Inverse of a square integer matrix over F_p (Gauss-Jordan)."""
    a = np.array(a, dtype=np.int64) % p
    k = a.shape[0]
    aug = np.concatenate([a, np.eye(k, dtype=np.int64)], axis=1)
    for col in range(k):
        pivot = next((r for r in range(col, k) if aug[r, col]), None)
        if pivot is None:
            raise DomainError("matrix is singular over F_p")
        aug[[col, pivot]] = aug[[pivot, col]]
        aug[col] = aug[col] * pow(int(aug[col, col]), -1, p) % p
        for r in range(k):
            if r != col and aug[r, col]:
                aug[r] = (aug[r] - aug[r, col] * aug[col]) % p
    return aug[:, k:]
