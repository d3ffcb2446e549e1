"""GHZ preparation from a balanced-tree poor-man's cat state.

Vertices ``1..n`` form the heap-ordered binary tree ``parent(i) = i // 2``.
Edge ``i`` (for ``i >= 2``) joins vertex i to its parent. The cat state is
uniform over the edge digits and v_1, with ``v_i = e_i - v_parent(i)``.
Measuring the edges and undoing the alternating sums leaves GHZ(0) on the
vertices.

Wire layout (``2n - 1`` qudits): edge ``e_i`` on wire ``i - 2``, vertex
``v_i`` on wire ``n - 2 + i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .. import gates as g
from ..circuit import AffineRule, Circuit, Correction, Measure, Unitary
from ..errors import DomainError
from ..modarith import require_prime


@dataclass(frozen=True)
class BalancedTree:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("tree needs at least one vertex")

    @staticmethod
    def parent(i: int) -> int:
        return i // 2

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(i, i // 2) for i in range(2, self.n + 1)]

    @staticmethod
    def depth(i: int) -> int:
        return i.bit_length() - 1

    def root_path(self, i: int) -> list[int]:
        """Vertices from i up to (and including) the root."""
        out = [i]
        while i > 1:
            i //= 2
            out.append(i)
        return out

    @cached_property
    def edge_layers(self) -> list[list[tuple[int, int]]]:
        """Three wire-disjoint rounds of (control vertex, edge) SUMs.

        Round A links each vertex to its own edge; rounds B and C link the
        parent to even and odd children respectively.
        """
        a = [(i, i) for i in range(2, self.n + 1)]
        b = [(i // 2, i) for i in range(2, self.n + 1, 2)]
        c = [(i // 2, i) for i in range(3, self.n + 1, 2)]
        return [r for r in (a, b, c) if r]


def edge_wire(i: int) -> int:
    return i - 2


def vertex_wire(n: int, i: int) -> int:
    return n - 2 + i


def bpm_circuit(q: int, n: int) -> Circuit:
    require_prime(q, "q")
    if n < 2:
        raise DomainError("the cat state needs n >= 2")
    tree = BalancedTree(n)
    verts = [vertex_wire(n, i) for i in range(1, n + 1)]
    c = Circuit(d=q, width=2 * n - 1, inputs=(), outputs=tuple(range(2 * n - 1)),
                metadata={"construction": "bpm", "q": q, "n": n})
    layers = [[Unitary(g.Fourier(), (w,)) for w in verts]]
    for rnd in tree.edge_layers:
        layers.append([Unitary(g.Sum(), (vertex_wire(n, v), edge_wire(e))) for v, e in rnd])
    c.extend_layers(layers)
    return c.validate()


def correction_rules(n: int, q: int) -> dict[int, AffineRule]:
    """Shift rule per vertex, as an affine function of the edge record.

    With ``c_1 = 0`` and ``c_i = e_i - c_parent(i)``, the post-measurement
    vertices read ``v_i = c_i + (-1)^depth(i) v_1``; the shift is ``-c_i``.
    Record slot ``i - 2`` holds ``e_i``.
    """
    coeffs: dict[int, dict[int, int]] = {1: {}}
    for i in range(2, n + 1):
        parent = coeffs[i // 2]
        mine = {s: -a for s, a in parent.items()}
        mine[edge_wire(i)] = mine.get(edge_wire(i), 0) + 1
        coeffs[i] = mine
    return {i: AffineRule.of({s: (-a) % q for s, a in cs.items()}) for i, cs in coeffs.items()}


def tree_correction(n: int, record, q: int) -> tuple[list[int], list[bool]]:
    """Shifts ``s_1..s_n`` and negate flags for a concrete edge record ``e_2..e_n``."""
    record = list(record)
    if len(record) != n - 1:
        raise DomainError(f"expected {n - 1} edge outcomes, got {len(record)}")
    rules = correction_rules(n, q)
    shifts = [rules[i](record, q) for i in range(1, n + 1)]
    flags = [BalancedTree.depth(i) % 2 == 1 for i in range(1, n + 1)]
    return shifts, flags


def bpm_to_ghz_circuit(q: int, n: int) -> Circuit:
    """Cat state, edge measurement, then record-driven shifts and fixed negations.

    Outputs are the vertex wires, which end in GHZ(0) on every branch.
    """
    c = bpm_circuit(q, n)
    edges = [edge_wire(i) for i in range(2, n + 1)]
    c.extend_layers([[Measure(tuple(edges), tuple(range(n - 1)))]])
    rules = correction_rules(n, q)
    c.extend_layers([
        [Correction(vertex_wire(n, i), g.XShift(1), rules[i]) for i in range(2, n + 1)],
        [Unitary(g.Negate(), (vertex_wire(n, i),)) for i in range(2, n + 1) if BalancedTree.depth(i) % 2],
    ])
    c.outputs = tuple(vertex_wire(n, i) for i in range(1, n + 1))
    c.metadata.update({
        "construction": "bpm_to_ghz",
        "correction_slots": {i: list(rules[i].slots) for i in range(2, n + 1)},
    })
    return c.validate()
