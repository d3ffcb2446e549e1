"""GHZ-advice circuit for the modular relation problem R_{q,p}.

Given x in {0,1}^n and an advice register holding GHZ(0) over n qudits of
dimension q, the circuit outputs y with |y| = 0 (mod q) whenever
|x| = 0 (mod p), and otherwise with probability at least
(1 - cos(2 pi / p)) / q it outputs |y| != 0 (mod q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import gates as g
from ..circuit import Circuit, Measure, PrepareAncilla, Unitary, output_distribution, run_exact
from ..errors import DomainError
from ..modarith import require_prime


@dataclass(frozen=True)
class RelationParams:
    p: int
    q: int
    n: int

    def __post_init__(self):
        require_prime(self.p, "p")
        require_prime(self.q, "q")
        if self.p == self.q:
            raise DomainError("p and q must be distinct primes")
        if self.n < 1:
            raise DomainError("n must be at least 1")

    @property
    def m(self) -> int:
        """Length of the bit string answer."""
        return self.q * self.n

    @property
    def bound(self) -> float:
        """Lower bound on no-instance success."""
        return (1 - math.cos(2 * math.pi / self.p)) / self.q

    @property
    def parallel_threshold(self) -> float:
        return 0.5 + self.bound / 2


def check_bits(x: Sequence[int], n: int | None = None) -> tuple[int, ...]:
    x = tuple(int(b) for b in x)
    if any(b not in (0, 1) for b in x):
        raise DomainError(f"input must be binary, got {x}")
    if n is not None and len(x) != n:
        raise DomainError(f"input has length {len(x)}, expected {n}")
    return x


def relation_circuit(params: RelationParams) -> Circuit:
    """Wires ``0..n-1`` carry x, wires ``n..2n-1`` the advice; record slot i holds y_i."""
    n, q = params.n, params.q
    xs = list(range(n))
    adv = list(range(n, 2 * n))
    c = Circuit(d=q, width=2 * n, inputs=tuple(xs), outputs=tuple(adv),
                metadata={"construction": "relation", "p": params.p, "q": q, "n": n,
                          "advice_wires": adv})
    c.append(PrepareAncilla(tuple(adv), kind="ghz", value=0, advice=True))
    rot = g.CTopLevelPhase(g.Phase.of(1, params.p))
    c.extend_layers([
        [Unitary(rot, (x, a)) for x, a in zip(xs, adv)],
        [Unitary(g.Fourier(), (a,)) for a in adv],
        [Measure(tuple(adv), tuple(range(n)))],
    ])
    return c.validate()


def expand_c_q2(y: Sequence[int], q: int) -> tuple[int, ...]:
    """Map each base-q digit y_i to the bits ``1^{y_i} 0^{q - y_i}``."""
    out = []
    for v in y:
        v = int(v)
        if not 0 <= v < q:
            raise DomainError(f"digit {v} outside [0, {q})")
        out.extend([1] * v + [0] * (q - v))
    return tuple(out)


def relation_input(params: RelationParams, x: Sequence[int]) -> list[int]:
    return list(check_bits(x, params.n))


def relation_outputs(params: RelationParams, x: Sequence[int]) -> dict[tuple[int, ...], float]:
    """Exact distribution of the measured digits y for input x."""
    c = relation_circuit(params)
    return output_distribution(run_exact(c, relation_input(params, x)), range(params.n))


def relation_success(params: RelationParams, x: Sequence[int]) -> float:
    """Exact probability that the expanded answer satisfies the relation for x."""
    x = check_bits(x, params.n)
    yes = sum(x) % params.p == 0
    total = 0.0
    for y, prob in relation_outputs(params, x).items():
        bits = expand_c_q2(y, params.q)
        if (sum(bits) % params.q == 0) == yes:
            total += prob
    return total


def weight_class_representative(n: int, weight: int) -> tuple[int, ...]:
    """A bit string of length n and the given Hamming weight."""
    if not 0 <= weight <= n:
        raise DomainError("weight outside [0, n]")
    return tuple([1] * weight + [0] * (n - weight))


def sample_answers(params: RelationParams, x: Sequence[int], shots: int, rng: np.random.Generator,
                   dist: dict | None = None) -> np.ndarray:
    """``shots`` answers y (base-q digits) drawn from the exact output distribution."""
    dist = dist if dist is not None else relation_outputs(params, x)
    keys = list(dist)
    probs = np.array([dist[k] for k in keys])
    idx = rng.choice(len(keys), size=shots, p=probs / probs.sum())
    return np.array(keys, dtype=np.int64).reshape(len(keys), params.n)[idx]
