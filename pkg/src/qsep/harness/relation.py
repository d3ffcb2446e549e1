"""Relation checking and answer sources for the modular relation problem."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..circuit import sample_records
from ..constructions.relation import (
    RelationParams, check_bits, expand_c_q2, relation_circuit, relation_outputs, weight_class_representative,
)
from ..errors import DomainError


def check_relation(params: RelationParams, x: Sequence[int], y: Sequence[int]) -> bool:
    """True iff ``|y| = 0 (mod q)`` exactly when ``|x| = 0 (mod p)``."""
    x = check_bits(x, params.n)
    y = check_bits(y)
    if len(y) != params.m:
        raise DomainError(f"answer has {len(y)} bits, expected {params.m}")
    return (sum(y) % params.q == 0) == (sum(x) % params.p == 0)


class QuantumSolver:
    """Answers drawn from the GHZ-advice circuit.

    The output law depends on x only through ``|x|``, so exact
    distributions are cached per weight. With ``exact=False`` every answer
    comes from a fresh simulated trajectory instead.
    """

    def __init__(self, params: RelationParams, exact: bool = True):
        self.params = params
        self.exact = exact
        self._dists: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._circuit = relation_circuit(params)

    def distribution(self, weight: int) -> dict[tuple[int, ...], float]:
        return relation_outputs(self.params, weight_class_representative(self.params.n, weight))

    def _table(self, weight):
        if weight not in self._dists:
            dist = self.distribution(weight)
            keys = np.array(list(dist), dtype=np.int64).reshape(len(dist), self.params.n)
            probs = np.array(list(dist.values()))
            self._dists[weight] = (keys, np.cumsum(probs / probs.sum()))
        return self._dists[weight]

    def digits(self, x: Sequence[int], rng: np.random.Generator) -> tuple[int, ...]:
        x = check_bits(x, self.params.n)
        if self.exact:
            keys, cdf = self._table(sum(x))
            i = min(int(np.searchsorted(cdf, rng.random(), side="right")), len(keys) - 1)
            return tuple(int(v) for v in keys[i])
        run = sample_records(self._circuit, list(x), 1, rng)[0]
        return tuple(run.record[s] for s in range(self.params.n))

    def __call__(self, x: Sequence[int], rng: np.random.Generator) -> tuple[int, ...]:
        return expand_c_q2(self.digits(x, rng), self.params.q)

    def success(self, x: Sequence[int]) -> float:
        """Exact probability that one answer satisfies the relation."""
        x = check_bits(x, self.params.n)
        yes = sum(x) % self.params.p == 0
        return sum(pr for y, pr in self.distribution(sum(x)).items()
                   if (sum(y) % self.params.q == 0) == yes)


def random_solver(params: RelationParams):
    def solve(x, rng: np.random.Generator):
        return tuple(int(b) for b in rng.integers(0, 2, params.m))
    return solve


def perfect_solver(params: RelationParams):
    """Always returns a valid witness: weight 0 on yes-instances, weight 1 otherwise."""
    def solve(x, rng=None):
        y = [0] * params.m
        if sum(x) % params.p:
            y[0] = 1
        return tuple(y)
    return solve


def zero_solver(params: RelationParams):
    def solve(x, rng=None):
        return (0,) * params.m
    return solve


def uniform_success(params: RelationParams, per_weight) -> float:
    """Average of ``per_weight(w)`` over uniformly random x in {0,1}^n."""
    n = params.n
    return sum(math.comb(n, w) * per_weight(w) for w in range(n + 1)) / 2**n
