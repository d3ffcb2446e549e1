"""qOR, qExact and threshold circuits over prime-dimensional qudits.

The pipeline has two stages:

* :func:`or_reduction_circuit` compresses x in F_p^n into L = ceil(log_p n) + 1
  flag qudits that are all zero exactly when x = 0;
* :func:`qor_exponential_circuit` computes OR of a few qudits directly from
  the F_p polynomial of OR-bar, at a cost exponential in the arity.

Every block here is unitary, so uncomputation is the exact inverse block.
Block builders take the wires they act on plus a :class:`WireAllocator` for
scratch space and return a list of layers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .. import gates as g
from ..circuit import Circuit, Unitary, WireAllocator, invert, parallel, seq
from ..errors import DomainError, ResourceError
from ..modarith import ceil_log, inverse_mod_matrix, require_prime

DEFAULT_TABLE_CAP = 1 << 20


@dataclass(frozen=True)
class IntegerDecomposition:
    """``w = p^a (p b + m)`` with ``m`` in ``[1, p-1]``."""

    w: int
    p: int
    a: int = field(init=False)
    m: int = field(init=False)
    b: int = field(init=False)

    def __post_init__(self):
        if self.w < 1:
            raise DomainError("decomposition needs w >= 1")
        a, rest = 0, self.w
        while rest % self.p == 0:
            rest //= self.p
            a += 1
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "m", rest % self.p)
        object.__setattr__(self, "b", rest // self.p)


# ---------------------------------------------------------------------------
# polynomial expansion over F_p


@dataclass(frozen=True)
class FourierTable:
    """Coefficients of ``f(x) = sum_k c_k prod_i x_i^{k_i}`` over F_p, ``k_i < p``."""

    p: int
    n: int
    coeffs: dict[tuple[int, ...], int]

    def evaluate(self, x: Sequence[int]) -> int:
        total = 0
        for k, c in self.coeffs.items():
            term = c
            for xi, ki in zip(x, k):
                term = term * pow(int(xi), ki, self.p)
            total += term
        return total % self.p

    def support(self) -> list[tuple[tuple[int, ...], int]]:
        return sorted((k, c) for k, c in self.coeffs.items() if c % self.p)


def _vandermonde(p: int) -> np.ndarray:
    # V[x, k] = x^k with 0^0 = 1
    return np.array([[pow(x, k, p) for k in range(p)] for x in range(p)], dtype=np.int64)


def fourier_table(p: int, n: int, f: Callable[[tuple[int, ...]], int], *,
                  cap: int = DEFAULT_TABLE_CAP) -> FourierTable:
    """Polynomial of an arbitrary ``f: F_p^n -> F_p`` by per-axis inverse Vandermonde."""
    require_prime(p)
    if p ** n > cap:
        raise ResourceError(f"p^n = {p ** n} exceeds the table cap", required=p ** n, limit=cap)
    vals = np.zeros((p,) * n, dtype=np.int64)
    for x in itertools.product(range(p), repeat=n):
        vals[x] = f(x) % p
    vinv = inverse_mod_matrix(_vandermonde(p), p)
    coef = vals
    for axis in range(n):
        coef = np.moveaxis(np.tensordot(vinv, coef, axes=([1], [axis])) % p, 0, axis)
    table = {k: int(coef[k]) for k in itertools.product(range(p), repeat=n) if coef[k]}
    return FourierTable(p, n, table)


def orbar(x: Sequence[int], p: int) -> int:
    return p - 1 if any(x) else 0


def orbar_coefficients(p: int, n: int, *, cap: int = DEFAULT_TABLE_CAP) -> FourierTable:
    return fourier_table(p, n, lambda x: orbar(x, p), cap=cap)


# ---------------------------------------------------------------------------
# blocks


def _ghz_prep(wires: Sequence[int]) -> list[list]:
    out = [[Unitary(g.Fourier(), (wires[0],))]]
    if len(wires) > 1:
        out.append([Unitary(g.Fanout(), tuple(wires))])
    return out


@dataclass
class Block:
    layers: list
    scratch: list[int]


def or_reduction_block(p: int, xs: Sequence[int], alloc: WireAllocator, shift: int = 0) -> tuple[Block, list[int]]:
    """Flags that are all zero iff ``|x| == shift`` (as integers).

    Returns the block and the flag wires. Block k (1-based) rotates a GHZ
    copy by ``exp(2 pi i x_j / p^k)`` per wire, so it sees GHZ(m) exactly
    when ``p^(k-1)`` divides the weight and ``m`` is the next base-p digit.
    """
    n = len(xs)
    L = ceil_log(n, p) + 1
    flags = alloc.take(L)
    copies = [list(xs)] + [alloc.take(n) for _ in range(L - 1)]
    ghz = [alloc.take(n) for _ in range(L)]
    prep = parallel(
        [[Unitary(g.Fanout(), (xs[j], *(copies[k][j] for k in range(1, L)))) for j in range(n)] if L > 1 else []],
        *(_ghz_prep(gw) for gw in ghz),
    )
    rotate = [[
        Unitary(g.CGradedPhase(g.Phase.of(1, p ** (k + 1))), (copies[k][j], ghz[k][j]))
        for k in range(L) for j in range(n)
    ]]
    if shift:
        rotate.append([Unitary(g.GradedPhase(g.Phase.of(-shift, p ** (k + 1))), (ghz[k][0],)) for k in range(L)])
    all_ghz = [w for gw in ghz for w in gw]
    extract = [
        [Unitary(g.Fourier(), (w,)) for w in all_ghz],
        [Unitary(g.QMod(), (flags[k], *ghz[k])) for k in range(L)],
        [Unitary(g.FourierInv(), (w,)) for w in all_ghz],
        # flag k holds -m for the GHZ(m) component; undo its phase
        [Unitary(g.CGradedPhase(g.Phase.of(1, p)), (flags[k], ghz[k][0])) for k in range(L)],
    ]
    layers = seq(prep, rotate, extract, invert(prep))
    scratch = [w for c in copies[1:] for w in c] + all_ghz
    return Block(layers, scratch), flags


def qor_exponential_block(p: int, xs: Sequence[int], target: int, alloc: WireAllocator, sign: int = 1) -> Block:
    """Adds ``sign * OR(x)`` to ``target`` using one GHZ wire per OR-bar monomial."""
    table = orbar_coefficients(p, len(xs))
    monomials = table.support()
    M = len(monomials)
    ghz = alloc.take(M)
    chars = alloc.take(M)
    copies: list[list[int]] = []
    per_var: dict[int, list[int]] = {i: [] for i in range(len(xs))}
    for k, _ in monomials:
        used = [i for i, e in enumerate(k) if e]
        ws = alloc.take(len(used))
        copies.append(ws)
        for i, w in zip(used, ws):
            per_var[i].append(w)
    prep = parallel(
        [[Unitary(g.Fanout(), (xs[i], *ws)) for i, ws in per_var.items() if ws]],
        _ghz_prep(ghz),
    )
    evaluate = [
        [Unitary(g.MonomialAdd(tuple(e for e in k if e)), (chars[s], *copies[s]))
         for s, (k, _) in enumerate(monomials)],
        [Unitary(g.CGradedPhase(g.Phase.of(c, p)), (chars[s], ghz[s])) for s, (_, c) in enumerate(monomials)],
        [Unitary(g.Fourier(), (w,)) for w in ghz],
    ]
    compute = seq(prep, evaluate)
    # GHZ now reads GHZ(OR-bar); its Fourier support sums to -OR-bar = OR (mod p)
    layers = seq(compute, [[Unitary(g.QMod(sign), (target, *ghz))]], invert(compute))
    return Block(layers, ghz + chars + [w for c in copies for w in c])


def qor_full_block(p: int, xs: Sequence[int], target: int, alloc: WireAllocator, *,
                   shift: int = 0, sign: int = 1) -> Block:
    red, flags = or_reduction_block(p, xs, alloc, shift)
    exp = qor_exponential_block(p, flags, target, alloc, sign)
    return Block(seq(red.layers, exp.layers, invert(red.layers)), red.scratch + flags + exp.scratch)


def qexact_block(p: int, xs: Sequence[int], target: int, alloc: WireAllocator, k: int) -> Block:
    """Adds ``[|x| == k]`` to ``target`` as ``1 - OR`` of the shifted reduction."""
    red, flags = or_reduction_block(p, xs, alloc, shift=k)
    exp = qor_exponential_block(p, flags, target, alloc, sign=-1)
    tail = parallel(invert(red.layers), [[Unitary(g.XShift(1), (target,))]])
    return Block(seq(red.layers, exp.layers, tail), red.scratch + flags + exp.scratch)


# ---------------------------------------------------------------------------
# public builders


def _finish(c: Circuit, block: Block, **meta) -> Circuit:
    c.extend_layers(block.layers)
    c.metadata.update(meta)
    c.metadata["ancilla_wires"] = sorted(block.scratch)
    return c.validate()


def _check_n(n: int):
    if n < 1:
        raise DomainError("n must be at least 1")


def or_reduction_circuit(p: int, n: int) -> Circuit:
    """Inputs x on wires ``0..n-1``; the L flag qudits follow directly."""
    require_prime(p)
    _check_n(n)
    alloc = WireAllocator(n)
    block, flags = or_reduction_block(p, list(range(n)), alloc)
    c = Circuit(d=p, width=alloc.next, inputs=tuple(range(n)), outputs=tuple(range(n)) + tuple(flags))
    return _finish(c, block, construction="or_reduction", p=p, n=n, flag_wires=flags, blocks=len(flags))


def qor_exponential_circuit(p: int, n: int) -> Circuit:
    """Target on wire 0, x on wires ``1..n``: ``|x0>|x> -> |x0 + OR(x)>|x>``."""
    require_prime(p)
    _check_n(n)
    alloc = WireAllocator(n + 1)
    block = qor_exponential_block(p, list(range(1, n + 1)), 0, alloc)
    c = Circuit(d=p, width=alloc.next, inputs=tuple(range(n + 1)), outputs=tuple(range(n + 1)))
    return _finish(c, block, construction="qor_exponential", p=p, n=n)


def qor_full(p: int, n: int) -> Circuit:
    """Same interface as :func:`qor_exponential_circuit`, via the OR reduction."""
    require_prime(p)
    _check_n(n)
    alloc = WireAllocator(n + 1)
    block = qor_full_block(p, list(range(1, n + 1)), 0, alloc)
    c = Circuit(d=p, width=alloc.next, inputs=tuple(range(n + 1)), outputs=tuple(range(n + 1)))
    return _finish(c, block, construction="qor_full", p=p, n=n)


def qexact_circuit(p: int, n: int, k: int) -> Circuit:
    """``|x0>|x> -> |x0 + [|x| == k]>|x>`` with ``|x|`` the integer digit sum."""
    require_prime(p)
    _check_n(n)
    if not 0 <= k <= n * (p - 1):
        raise DomainError(f"k must lie in [0, {n * (p - 1)}]")
    alloc = WireAllocator(n + 1)
    block = qexact_block(p, list(range(1, n + 1)), 0, alloc, k)
    c = Circuit(d=p, width=alloc.next, inputs=tuple(range(n + 1)), outputs=tuple(range(n + 1)))
    return _finish(c, block, construction="qexact", p=p, n=n, k=k)


def qthreshold_circuit(p: int, n: int, t: int) -> Circuit:
    """``|x0>|x> -> |x0 + [|x| >= t]>|x>``.

    Runs one qExact per reachable weight ``t..n(p-1)`` on its own copy of x,
    ORs the indicator wires into the target, then uncomputes.
    """
    require_prime(p)
    _check_n(n)
    if t < 0:
        raise DomainError("t must be non-negative")
    xs = list(range(1, n + 1))
    alloc = WireAllocator(n + 1)
    weights = list(range(t, n * (p - 1) + 1))
    scratch: list[int] = []
    layers: list = []
    if weights:
        copies = [xs] + [alloc.take(n) for _ in weights[1:]]
        hits = alloc.take(len(weights))
        fan = [[Unitary(g.Fanout(), (xs[j], *(c[j] for c in copies[1:]))) for j in range(n)]] \
            if len(weights) > 1 else []
        exacts = [qexact_block(p, cp, h, alloc, k) for cp, h, k in zip(copies, hits, weights)]
        compute = seq(fan, parallel(*(e.layers for e in exacts)))
        combine = qor_full_block(p, hits, 0, alloc)
        layers = seq(compute, combine.layers, invert(compute))
        scratch = [w for c in copies[1:] for w in c] + hits + combine.scratch + [w for e in exacts for w in e.scratch]
    c = Circuit(d=p, width=alloc.next, inputs=tuple(range(n + 1)), outputs=tuple(range(n + 1)))
    return _finish(c, Block(layers, scratch), construction="qthreshold", p=p, n=n, t=t, exact_weights=weights)
