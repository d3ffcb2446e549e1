"""Fanout by measurement: a GHZ resource, two measurement rounds, Pauli-type fixes."""

from __future__ import annotations

from .. import gates as g
from ..circuit import AffineRule, Circuit, Correction, Measure, PrepareAncilla, Unitary
from ..errors import DomainError
from ..modarith import require_prime


def mbqc_fanout_circuit(p: int, n: int) -> Circuit:
    """Inputs on wires ``0..n-1``, GHZ resource on ``n..2n-1``.

    Copies wire 0 into wires ``1..n-1`` (adding it mod p) on every branch.
    Slot 0 holds the first GHZ outcome, slots ``1..n-1`` the X-basis ones.
    """
    require_prime(p)
    if n < 2:
        raise DomainError("fanout needs n >= 2")
    xs = list(range(n))
    gs = list(range(n, 2 * n))
    rest = gs[1:]
    c = Circuit(d=p, width=2 * n, inputs=tuple(xs), outputs=tuple(xs),
                metadata={"construction": "mbqc_fanout", "p": p, "n": n, "resource_wires": gs})
    c.append(PrepareAncilla(tuple(gs), kind="ghz", value=0))
    c.extend_layers([
        # g_1 <- j - x_0, so the outcome fixes j = m_1 + x_0
        [Unitary(g.SumInv(), (xs[0], gs[0]))],
        [Measure((gs[0],), (0,))],
        [Correction(w, g.XShift(1), AffineRule.of({0: -1})) for w in rest],
        [Unitary(g.Sum(), (w, x)) for w, x in zip(rest, xs[1:])],
        [Unitary(g.Fourier(), (w,)) for w in rest],
        [Measure(tuple(rest), tuple(range(1, n)))],
        [Correction(xs[0], g.GradedPhase(g.Phase.of(1, p)), AffineRule.of({s: -1 for s in range(1, n)}))],
    ])
    return c.validate()
