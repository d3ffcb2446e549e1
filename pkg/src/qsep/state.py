"""Mixed-radix qudit states and exact gate application.

Basis index convention (fixed for the whole package): the basis state
``|x_0 x_1 ... x_{n-1}>`` of ``n`` qudits of dimension ``d`` has index
``sum_i x_i * d**i`` -- qudit 0 is the least significant digit.

A :class:`StateVector` is stored as a tensor product of *factors*. Each
factor covers a subset of wires and keeps only its non-zero amplitudes as
a pair of arrays (encoded local index, complex amplitude). Gates merge the
factors they touch; wires that end up in a definite basis value are split
off again. The circuits in this package keep most wires in basis states
(inputs, copies, restored ancillas), so this stays small where a dense
``d**n`` vector would not fit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import gates as g
from .errors import ContractError, DomainError, ResourceError, UsageError

NORM_TOL = 1e-6
PRUNE = 1e-12
DEFAULT_MAX_AMPLITUDES = 1 << 24
_INDEX_BITS = 62


# ---------------------------------------------------------------------------
# digit strings


def _check_digits(digits, d):
    if d < 2:
        raise DomainError(f"dimension must be >= 2, got {d}")
    for i, x in enumerate(digits):
        if not 0 <= int(x) < d:
            raise DomainError(f"digit {x} at position {i} is outside [0, {d})")


def index_of(digits: Sequence[int], d: int) -> int:
    """Little-endian mixed-radix index of ``digits``."""
    _check_digits(digits, d)
    idx = 0
    for x in reversed(digits):
        idx = idx * d + int(x)
    return idx


def digits_of(index: int, d: int, n: int) -> tuple[int, ...]:
    if d < 2:
        raise DomainError(f"dimension must be >= 2, got {d}")
    if not 0 <= index < d**n:
        raise DomainError(f"index {index} out of range for {n} qudits of dimension {d}")
    out = []
    for _ in range(n):
        index, r = divmod(index, d)
        out.append(r)
    return tuple(out)


def hamming_weight(digits: Iterable[int]) -> int:
    """Integer digit sum (no modular reduction)."""
    return sum(int(x) for x in digits)


def weight_mod(digits: Iterable[int], m: int) -> int:
    if m < 2:
        raise DomainError("modulus must be >= 2")
    return hamming_weight(digits) % m


# ---------------------------------------------------------------------------
# factors


@dataclass(frozen=True, eq=False)
class _Factor:
    wires: tuple[int, ...]
    idx: np.ndarray
    amp: np.ndarray

    @property
    def width(self):
        return len(self.wires)

    def norm2(self) -> float:
        return float(np.vdot(self.amp, self.amp).real)


def _powers(d, w):
    return d ** np.arange(w, dtype=np.int64)


def _digit(idx, d, pos):
    return (idx // (d**pos)) % d


def _compress(idx, amp):
    """Sum duplicate indices and drop numerically vanishing amplitudes."""
    uniq, inv = np.unique(idx, return_inverse=True)
    if len(uniq) != len(idx):
        re = np.bincount(inv, weights=amp.real, minlength=len(uniq))
        im = np.bincount(inv, weights=amp.imag, minlength=len(uniq))
        amp = re + 1j * im
        idx = uniq
    keep = np.abs(amp) > PRUNE
    if not keep.all():
        idx, amp = idx[keep], amp[keep]
    return idx, amp


def _max_width(d):
    return int(_INDEX_BITS // math.log2(d))


def _merge(factors: Sequence[_Factor], d, cap) -> _Factor:
    it = iter(factors)
    acc = next(it)
    for f in it:
        width = acc.width + f.width
        if width > _max_width(d):
            raise ResourceError(
                f"entangled block of {width} qudits exceeds the index width for d={d}",
                required=width, limit=_max_width(d),
            )
        terms = len(acc.idx) * len(f.idx)
        if terms > cap:
            raise ResourceError(
                f"merging factors needs {terms} amplitudes (cap {cap})", required=terms, limit=cap
            )
        shift = d**acc.width
        idx = (acc.idx[:, None] + f.idx[None, :] * shift).ravel()
        amp = (acc.amp[:, None] * f.amp[None, :]).ravel()
        acc = _Factor(acc.wires + f.wires, idx, amp)
    return acc


def _reencode(f: _Factor, order: Sequence[int], d) -> np.ndarray:
    """Indices of ``f``'s terms re-expressed over the wire ``order`` (a permutation of f.wires)."""
    pos = {w: i for i, w in enumerate(f.wires)}
    out = np.zeros_like(f.idx)
    for j, w in enumerate(order):
        out += _digit(f.idx, d, pos[w]) * d**j
    return out


def _split_basis(f: _Factor, positions: Iterable[int], d) -> list[_Factor]:
    """Peel wires (given by local position) whose digit is constant over all terms."""
    if f.width == 1:
        return [f]
    peeled = []
    drop = []
    if len(f.idx) == 1:
        # a single term: every digit is constant, read them off directly
        v = int(f.idx[0])
        for pos in sorted(set(positions)):
            drop.append(pos)
            peeled.append((f.wires[pos], (v // d**pos) % d))
    for pos in () if len(f.idx) == 1 else sorted(set(positions)):
        dig = _digit(f.idx, d, pos)
        if len(dig) and np.all(dig == dig[0]):
            drop.append(pos)
            peeled.append((f.wires[pos], int(dig[0])))
    if not drop:
        return [f]
    if len(drop) == f.width:
        # keep the phase on the first wire
        first_w, first_v = peeled[0]
        out = [_Factor((first_w,), np.array([first_v], dtype=np.int64), f.amp.copy())]
        for w, v in peeled[1:]:
            out.append(_Factor((w,), np.array([v], dtype=np.int64), np.array([1.0 + 0j])))
        return out
    keep = [p for p in range(f.width) if p not in set(drop)]
    idx = np.zeros_like(f.idx)
    for j, p in enumerate(keep):
        idx += _digit(f.idx, d, p) * d**j
    rest = _Factor(tuple(f.wires[p] for p in keep), idx, f.amp)
    out = [rest]
    for w, v in peeled:
        out.append(_Factor((w,), np.array([v], dtype=np.int64), np.array([1.0 + 0j])))
    return out


SPLIT_TERMS = 1 << 16
SPLIT_TOL = 1e-10


def _split_wire(f: _Factor, pos: int, d) -> list[_Factor] | None:
    """Factor out the wire at ``pos`` if ``f`` is a product across it (rank-1 test)."""
    dig = _digit(f.idx, d, pos)
    counts = np.bincount(dig, minlength=d)
    used = counts[counts > 0]
    if len(used) == 1 or np.any(used != used[0]):
        # a product needs every occurring digit paired with the same rest set
        return None
    rest = f.idx - dig * d**pos
    uniq, inv = np.unique(rest, return_inverse=True)
    mat = np.zeros((len(uniq), d), dtype=complex)
    mat[inv, dig] = f.amp
    row = mat[np.argmax(np.einsum("ij,ij->i", mat, mat.conj()).real)]
    v = row / np.linalg.norm(row)
    coef = mat @ v.conj()
    if np.max(np.abs(mat - coef[:, None] * v[None, :])) > SPLIT_TOL:
        return None
    nz = np.nonzero(np.abs(v) > PRUNE)[0]
    single = _Factor((f.wires[pos],), nz.astype(np.int64), v[nz])
    low = d**pos
    ridx = uniq % low + (uniq // (low * d)) * low
    keep = np.abs(coef) > PRUNE
    other = _Factor(f.wires[:pos] + f.wires[pos + 1:], ridx[keep], coef[keep])
    return [other, single]


def _split_products(parts: list[_Factor], wires: Iterable[int], d) -> list[_Factor]:
    """Try to factor each touched wire out of its (small) factor."""
    todo = list(parts)
    done = []
    targets = set(wires)
    while todo:
        f = todo.pop()
        if f.width == 1 or len(f.idx) > SPLIT_TERMS:
            done.append(f)
            continue
        for pos, w in enumerate(f.wires):
            if w in targets:
                pieces = _split_wire(f, pos, d)
                if pieces:
                    todo.append(pieces[0])
                    done.append(pieces[1])
                    break
        else:
            done.append(f)
    return done


# ---------------------------------------------------------------------------
# state vector


class StateVector:
    """Pure state of ``n`` qudits of dimension ``d``.

    Instances are immutable; every operation returns a new state that shares
    untouched factors with its parent. ``frozen`` lists measured wires.
    """

    __slots__ = ("d", "n", "factors", "frozen", "max_amplitudes", "_owner", "_norm_checked")

    def __init__(self, d, n, factors, frozen=frozenset(), max_amplitudes=DEFAULT_MAX_AMPLITUDES):
        self.d = int(d)
        self.n = int(n)
        self.factors = tuple(factors)
        self.frozen = frozenset(frozen)
        self.max_amplitudes = max_amplitudes
        self._norm_checked = False
        owner = [-1] * self.n
        for k, f in enumerate(self.factors):
            for w in f.wires:
                if owner[w] != -1:
                    raise ContractError(f"wire {w} appears in two factors")
                owner[w] = k
        if -1 in owner:
            raise ContractError(f"wire {owner.index(-1)} has no factor")
        self._owner = owner

    # -- constructors -------------------------------------------------------

    @classmethod
    def basis(cls, d, digits, **kw) -> "StateVector":
        _check_digits(digits, d)
        fs = [
            _Factor((w,), np.array([int(x)], dtype=np.int64), np.array([1.0 + 0j]))
            for w, x in enumerate(digits)
        ]
        return cls(d, len(digits), fs, **kw)

    @classmethod
    def zeros(cls, d, n, **kw) -> "StateVector":
        return cls.basis(d, [0] * n, **kw)

    @classmethod
    def from_amplitudes(cls, d, amplitudes, *, normalize=False, **kw) -> "StateVector":
        amp = np.asarray(amplitudes, dtype=complex).ravel()
        n = round(math.log(len(amp), d)) if len(amp) > 1 else 0
        if d**n != len(amp):
            raise DomainError(f"length {len(amp)} is not a power of {d}")
        nrm = np.linalg.norm(amp)
        if normalize:
            amp = amp / nrm
        elif abs(nrm - 1) > NORM_TOL:
            raise ContractError(f"amplitudes have norm {nrm}, expected 1")
        idx = np.nonzero(np.abs(amp) > PRUNE)[0].astype(np.int64)
        f = _Factor(tuple(range(n)), idx, amp[idx])
        parts = _split_basis(f, range(n), d)
        return cls(d, n, parts, **kw)

    # -- views --------------------------------------------------------------

    def _factor_of(self, w) -> int:
        return self._owner[w]

    def norm(self) -> float:
        return math.sqrt(math.prod(f.norm2() for f in self.factors))

    def terms(self) -> int:
        """Stored amplitudes summed over factors."""
        return sum(len(f.idx) for f in self.factors)

    def to_dense(self) -> np.ndarray:
        if self.d**self.n > self.max_amplitudes:
            raise ResourceError(
                f"dense vector needs {self.d}**{self.n} amplitudes (cap {self.max_amplitudes})",
                required=self.d**self.n, limit=self.max_amplitudes,
            )
        f = _merge(self.factors, self.d, self.max_amplitudes)
        idx = _reencode(f, range(self.n), self.d)
        out = np.zeros(self.d**self.n, dtype=complex)
        np.add.at(out, idx, f.amp)
        return out

    @property
    def amplitudes(self) -> np.ndarray:
        return self.to_dense()

    def amplitude(self, digits) -> complex:
        _check_digits(digits, self.d)
        if len(digits) != self.n:
            raise DomainError("digit string length does not match the state")
        out = 1.0 + 0j
        for f in self.factors:
            key = sum(int(digits[w]) * self.d**j for j, w in enumerate(f.wires))
            hit = np.nonzero(f.idx == key)[0]
            if not len(hit):
                return 0j
            out *= f.amp[hit[0]]
        return out

    def basis_value(self, w) -> int | None:
        """The digit of wire ``w`` if it is in a definite basis state, else ``None``."""
        f = self.factors[self._owner[w]]
        dig = _digit(f.idx, self.d, f.wires.index(w))
        return int(dig[0]) if np.all(dig == dig[0]) else None

    def _replace(self, remove: Iterable[int], add: Iterable[_Factor], frozen=None) -> "StateVector":
        fs = list(self.factors)
        owner = self._owner.copy()
        slots = sorted(set(remove))
        add = list(add)
        for slot, f in zip(slots, add):
            fs[slot] = f
            for w in f.wires:
                owner[w] = slot
        for f in add[len(slots):]:
            for w in f.wires:
                owner[w] = len(fs)
            fs.append(f)
        # drop unused slots by moving the last factor into each hole
        for slot in reversed(slots[len(add):]):
            last = fs.pop()
            if slot < len(fs):
                fs[slot] = last
                for w in last.wires:
                    owner[w] = slot
        out = StateVector.__new__(StateVector)
        out.d, out.n, out.factors = self.d, self.n, tuple(fs)
        out.frozen = self.frozen if frozen is None else frozenset(frozen)
        out.max_amplitudes = self.max_amplitudes
        out._norm_checked = False
        out._owner = owner
        return out

    def merged(self, wires) -> tuple[list[int], _Factor]:
        """Factor ids covering ``wires`` and their tensor product."""
        ks = sorted({self._owner[w] for w in wires})
        return ks, _merge([self.factors[k] for k in ks], self.d, self.max_amplitudes)

    def restrict(self, wires: Sequence[int]) -> "StateVector":
        """The state of ``wires`` (renumbered 0..k-1 in the given order).

        Only defined when ``wires`` are unentangled with the rest; wires
        outside the selection that share a factor must be in basis states.
        """
        wires = list(wires)
        if len(set(wires)) != len(wires):
            raise DomainError("duplicate wires in restriction")
        ks, f = self.merged(wires)
        extra = [p for p, w in enumerate(f.wires) if w not in set(wires)]
        if extra:
            parts = _split_basis(f, extra, self.d)
            keep = [q for q in parts if set(q.wires) & set(wires)]
            if len(keep) != 1 or set(keep[0].wires) != set(wires):
                stuck = sorted(set(f.wires) - set(wires))
                raise ContractError(f"wires {wires} are entangled with wires {stuck}")
            f = keep[0]
            phase = 1.0 + 0j
            for q in parts:
                if q is not f:
                    phase *= q.amp[0]
            f = _Factor(f.wires, f.idx, f.amp * phase)
        remap = {w: i for i, w in enumerate(wires)}
        local = _reencode(f, [w for w in wires], self.d)
        new = _Factor(tuple(range(len(wires))), local, f.amp)
        parts = _split_basis(new, range(len(wires)), self.d)
        return StateVector(self.d, len(wires), parts, max_amplitudes=self.max_amplitudes,
                           frozen={remap[w] for w in self.frozen if w in remap})

    def __repr__(self):
        return f"StateVector(d={self.d}, n={self.n}, factors={len(self.factors)}, terms={self.terms()})"


def tensor(*states: StateVector) -> StateVector:
    """Tensor product; wires of later states are appended after earlier ones."""
    d = states[0].d
    fs, frozen, off = [], set(), 0
    for s in states:
        if s.d != d:
            raise DomainError("cannot tensor states of different dimension")
        for f in s.factors:
            fs.append(_Factor(tuple(w + off for w in f.wires), f.idx, f.amp))
        frozen |= {w + off for w in s.frozen}
        off += s.n
    return StateVector(d, off, fs, frozen=frozen, max_amplitudes=states[0].max_amplitudes)


def embed(state: StateVector, width: int, wires: Sequence[int]) -> StateVector:
    """Place ``state`` on ``wires`` of a ``width``-qudit register; other wires start in |0>."""
    if len(wires) != state.n:
        raise DomainError(f"state has {state.n} qudits but {len(wires)} wires were given")
    if len(set(wires)) != len(wires) or any(not 0 <= w < width for w in wires):
        raise DomainError("embedding wires must be distinct and in range")
    fs = [_Factor(tuple(wires[w] for w in f.wires), f.idx, f.amp) for f in state.factors]
    used = set(wires)
    for w in range(width):
        if w not in used:
            fs.append(_Factor((w,), np.array([0], dtype=np.int64), np.array([1.0 + 0j])))
    return StateVector(state.d, width, fs, frozen={wires[w] for w in state.frozen},
                       max_amplitudes=state.max_amplitudes)


# ---------------------------------------------------------------------------
# special states


def x_basis(m, d) -> StateVector:
    """``(1/sqrt d) sum_j w^{jm} |j>``."""
    return ghz(m, d, 1)


def ghz(m, d, n) -> StateVector:
    """``(1/sqrt d) sum_j w^{jm} |j...j>`` on ``n`` qudits."""
    if not 0 <= m < d:
        raise DomainError(f"GHZ label {m} outside [0, {d})")
    if n < 1:
        raise DomainError("GHZ state needs at least one qudit")
    if n > _max_width(d):
        raise ResourceError("GHZ register too wide", required=n, limit=_max_width(d))
    rep = sum(d**i for i in range(n))
    j = np.arange(d, dtype=np.int64)
    amp = np.array([_unit(d, j_ * m) for j_ in range(d)]) / math.sqrt(d)
    return StateVector(d, n, [_Factor(tuple(range(n)), j * rep, amp)])


def special_state(kind: str, d: int, n: int = 1, *, x=None, m: int = 0) -> StateVector:
    """``kind`` is ``"basis"`` (needs ``x``), ``"xbasis"`` (n = 1) or ``"ghz"``."""
    kind = kind.lower()
    if kind == "basis":
        if x is None:
            raise DomainError("basis state needs digits x")
        return StateVector.basis(d, x)
    if kind == "xbasis":
        return x_basis(m, d)
    if kind == "ghz":
        return ghz(m, d, n)
    raise DomainError(f"unknown special state {kind!r}")


def _unit(d, k):
    return g.Phase.of(k, d).unit()


# ---------------------------------------------------------------------------
# gate kernels


@lru_cache(maxsize=None)
def _fourier(d, inverse):
    j = np.arange(d)
    sign = -1 if inverse else 1
    tab = np.array([[_unit(d, sign * a * b) for b in j] for a in j]) / math.sqrt(d)
    return tab  # tab[new, old]


@lru_cache(maxsize=None)
def _diag_table(gate, d):
    """Diagonal gate phases indexed by the digits of its wires."""
    if isinstance(gate, g.TopLevelPhase):
        return np.array([gate.phase.unit(1 if j == d - 1 else 0) for j in range(d)])
    if isinstance(gate, g.GradedPhase):
        return np.array([gate.phase.unit(j) for j in range(d)])
    if isinstance(gate, g.CTopLevelPhase):
        return np.array([[gate.phase.unit(c if t == d - 1 else 0) for t in range(d)] for c in range(d)])
    if isinstance(gate, g.CGradedPhase):
        return np.array([[gate.phase.unit(c * t) for t in range(d)] for c in range(d)])
    raise TypeError(gate)


@lru_cache(maxsize=None)
def _monomial_table(exponents, d):
    """Value of prod c_i^{e_i} mod d for every control tuple, flattened little-endian."""
    k = len(exponents)
    vals = np.ones(d**k, dtype=np.int64)
    for i, e in enumerate(exponents):
        dig = (np.arange(d**k) // d**i) % d
        vals = (vals * np.array([pow(int(c), e, d) if e else 1 for c in range(d)])[dig]) % d
    return vals


def _kernel(f: _Factor, gate: g.Gate, pos: list[int], d: int) -> tuple[np.ndarray, np.ndarray]:
    idx, amp = f.idx, f.amp
    pw = [d**p for p in pos]
    digs = [(idx // q) % d for q in pw]

    if isinstance(gate, (g.Fourier, g.FourierInv)):
        tab = _fourier(d, isinstance(gate, g.FourierInv))
        old = digs[0]
        base = idx - old * pw[0]
        new_idx = (base[:, None] + np.arange(d, dtype=np.int64)[None, :] * pw[0]).ravel()
        new_amp = (amp[:, None] * tab[:, old].T).ravel()
        return _compress(new_idx, new_amp)

    if gate.is_diagonal:
        tab = _diag_table(gate, d)
        ph = tab[digs[0]] if tab.ndim == 1 else tab[digs[0], digs[1]]
        return idx, amp * ph

    # permutations: compute the new digit of each modified wire
    if isinstance(gate, g.XShift):
        return idx + (((digs[0] + gate.k) % d) - digs[0]) * pw[0], amp
    if isinstance(gate, g.Negate):
        return idx + (((-digs[0]) % d) - digs[0]) * pw[0], amp
    if isinstance(gate, (g.Sum, g.SumInv)):
        s = 1 if isinstance(gate, g.Sum) else -1
        c, t = digs
        return idx + (((t + s * c) % d) - t) * pw[1], amp
    if isinstance(gate, g.QMod):
        t = digs[0]
        tot = sum(digs[1:]) if len(digs) > 1 else np.zeros_like(t)
        return idx + (((t + gate.sign * tot) % d) - t) * pw[0], amp
    if isinstance(gate, g.Fanout):
        src = digs[0]
        out = idx.copy()
        for t, q in zip(digs[1:], pw[1:]):
            out += (((t + gate.sign * src) % d) - t) * q
        return out, amp
    if isinstance(gate, g.MonomialAdd):
        t = digs[0]
        if len(digs) > 1:
            key = sum(c * d**i for i, c in enumerate(digs[1:]))
            val = _monomial_table(gate.exponents, d)[key]
        else:
            val = np.ones_like(t)
        return idx + (((t + gate.sign * val) % d) - t) * pw[0], amp
    raise DomainError(f"no kernel for {gate!r}")


def _check_wires(state: StateVector, wires: Sequence[int]):
    for w in wires:
        if not 0 <= w < state.n:
            raise DomainError(f"wire {w} out of range for a {state.n}-qudit state")
    if len(set(wires)) != len(wires):
        raise DomainError(f"wire collision in {list(wires)}")


def apply(state: StateVector, gate: g.Gate, wires: Sequence[int]) -> StateVector:
    """Apply ``gate`` to ``wires`` (see :mod:`qsep.gates` for wire order)."""
    wires = [int(w) for w in wires]
    gate.check_wires(wires)
    _check_wires(state, wires)
    hit = [w for w in wires if w in state.frozen]
    if hit:
        raise UsageError(f"wire(s) {hit} were measured and are frozen")
    if not state._norm_checked:
        nrm = state.norm()
        if abs(nrm - 1) > NORM_TOL:
            raise ContractError(f"input state has norm {nrm}, expected 1")
    ks, f = state.merged(wires)
    pos = [f.wires.index(w) for w in wires]
    idx, amp = _kernel(f, gate, pos, state.d)
    if len(idx) > state.max_amplitudes:
        raise ResourceError(
            f"gate output has {len(idx)} amplitudes (cap {state.max_amplitudes})",
            required=len(idx), limit=state.max_amplitudes,
        )
    out = _Factor(f.wires, idx, amp)
    parts = _split_products(_split_basis(out, pos, state.d), wires, state.d)
    new = state._replace(ks, parts)
    # unitaries preserve the norm already checked above
    new._norm_checked = True
    return new


def apply_unitary_sequence(state, ops):
    for gate, wires in ops:
        state = apply(state, gate, wires)
    return state


# ---------------------------------------------------------------------------
# overlaps


def _components(a: StateVector, b: StateVector):
    parent = list(range(a.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for s in (a, b):
        for f in s.factors:
            for w in f.wires[1:]:
                ra, rb = find(f.wires[0]), find(w)
                if ra != rb:
                    parent[ra] = rb
    groups = {}
    for w in range(a.n):
        groups.setdefault(find(w), []).append(w)
    return list(groups.values())


def inner_product(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``, computed block-wise over the common coarsening of both factorisations."""
    if a.d != b.d or a.n != b.n:
        raise DomainError(f"shape mismatch: (d={a.d}, n={a.n}) vs (d={b.d}, n={b.n})")
    total = 1.0 + 0j
    for comp in _components(a, b):
        fa = a.merged(comp)[1]
        fb = b.merged(comp)[1]
        ia = _reencode(fa, comp, a.d)
        ib = _reencode(fb, comp, b.d)
        common, pa, pb = np.intersect1d(ia, ib, assume_unique=True, return_indices=True)
        if not len(common):
            return 0j
        total *= complex(np.vdot(fa.amp[pa], fb.amp[pb]))
    return total


def fidelity(a: StateVector, b: StateVector) -> float:
    return abs(inner_product(a, b)) ** 2


# ---------------------------------------------------------------------------
# measurement


def _outcome_table(state: StateVector, wires: Sequence[int]):
    """Joint marginal of ``wires`` as (keys, probs); key = sum_j digit_j d^j over ``wires`` order."""
    d = state.d
    keys = np.zeros(1, dtype=np.int64)
    probs = np.ones(1)
    by_factor = {}
    for j, w in enumerate(wires):
        by_factor.setdefault(state._owner[w], []).append((j, w))
    for k, members in by_factor.items():
        f = state.factors[k]
        local = np.zeros_like(f.idx)
        for j, w in members:
            local += _digit(f.idx, d, f.wires.index(w)) * d**j
        p = np.abs(f.amp) ** 2
        p = p / p.sum()
        uk, inv = np.unique(local, return_inverse=True)
        pk = np.bincount(inv, weights=p, minlength=len(uk))
        keys = (keys[:, None] + uk[None, :]).ravel()
        probs = (probs[:, None] * pk[None, :]).ravel()
    order = np.argsort(keys, kind="stable")
    return keys[order], probs[order]


def _outcome_table_wide(state: StateVector, wires: Sequence[int]):
    """Same as :func:`_outcome_table` with tuple keys, for registers too wide for one int64 key."""
    d = state.d
    rows: list[tuple[dict[int, int], float]] = [({}, 1.0)]
    by_factor = {}
    for j, w in enumerate(wires):
        by_factor.setdefault(state._owner[w], []).append((j, w))
    for k, members in by_factor.items():
        f = state.factors[k]
        local = np.zeros_like(f.idx)
        for i, (_, w) in enumerate(members):
            local += _digit(f.idx, d, f.wires.index(w)) * d**i
        p = np.abs(f.amp) ** 2
        p = p / p.sum()
        uk, inv = np.unique(local, return_inverse=True)
        pk = np.bincount(inv, weights=p, minlength=len(uk))
        parts = [({j: int((key // d**i) % d) for i, (j, _) in enumerate(members)}, float(q)) for key, q in zip(uk, pk)]
        rows = [({**a, **b}, pa * pb) for a, pa in rows for b, pb in parts]
    out = [(tuple(r[j] for j in range(len(wires))), pr) for r, pr in rows]
    # same order as the packed keys: last wire most significant
    out.sort(key=lambda t: t[0][::-1])
    return [o for o, _ in out], np.array([pr for _, pr in out])


def _table(state: StateVector, wires: Sequence[int]):
    """Outcomes (as digit tuples) and their probabilities, in a fixed order."""
    if len(wires) * math.log2(state.d) < _INDEX_BITS:
        keys, probs = _outcome_table(state, wires)
        return [_decode(k, state.d, len(wires)) for k in keys], probs
    return _outcome_table_wide(state, wires)


def _decode(key, d, k):
    return tuple(int((key // d**j) % d) for j in range(k))


def marginal_distribution(state: StateVector, wires: Sequence[int]) -> dict[tuple[int, ...], float]:
    """Exact Born-rule distribution of the digits on ``wires`` (in the given order)."""
    wires = [int(w) for w in wires]
    _check_wires(state, wires)
    outcomes, probs = _table(state, wires)
    return {o: float(p) for o, p in zip(outcomes, probs) if p > 0}


def project(state: StateVector, wires: Sequence[int], outcome: Sequence[int]) -> tuple[float, StateVector]:
    """Project ``wires`` onto ``outcome``; returns (probability, renormalised frozen state)."""
    wires = [int(w) for w in wires]
    _check_wires(state, wires)
    hit = [w for w in wires if w in state.frozen]
    if hit:
        raise UsageError(f"wire(s) {hit} were already measured")
    d = state.d
    by_factor = {}
    for w, v in zip(wires, outcome):
        by_factor.setdefault(state._owner[w], []).append((w, int(v)))
    new, prob = [], 1.0
    for k, members in by_factor.items():
        f = state.factors[k]
        mask = np.ones(len(f.idx), dtype=bool)
        for w, v in members:
            mask &= _digit(f.idx, d, f.wires.index(w)) == v
        total = f.norm2()
        idx, amp = f.idx[mask], f.amp[mask]
        p = float(np.vdot(amp, amp).real) / total
        if p <= 0:
            return 0.0, state
        prob *= p
        amp = amp / math.sqrt(p * total)
        part = _Factor(f.wires, idx, amp)
        new.extend(_split_basis(part, [f.wires.index(w) for w, _ in members], d))
    return prob, state._replace(by_factor.keys(), new, frozen=state.frozen | set(wires))


def branches(state: StateVector, wires: Sequence[int], min_prob: float = 0.0):
    """Every outcome of measuring ``wires`` with its probability and post-state.

    Equivalent to calling :func:`project` once per outcome of
    :func:`marginal_distribution`, but each factor is scanned once. Outcomes
    with probability below ``min_prob`` are skipped.
    """
    wires = [int(w) for w in wires]
    _check_wires(state, wires)
    hit = [w for w in wires if w in state.frozen]
    if hit:
        raise UsageError(f"wire(s) {hit} were already measured")
    d = state.d
    by_factor: dict[int, list[int]] = {}
    for w in wires:
        by_factor.setdefault(state._owner[w], []).append(w)
    if any(len(ws) * math.log2(d) >= _INDEX_BITS for ws in by_factor.values()):
        return [(o, pr, project(state, wires, o)[1])
                for o, pr in marginal_distribution(state, wires).items() if pr >= min_prob]
    # per factor: list of (local outcome, prob, replacement factors)
    options = []
    for k, members in by_factor.items():
        f = state.factors[k]
        local = [f.wires.index(w) for w in members]
        key = np.zeros(len(f.idx), dtype=np.int64)
        for j, pos in enumerate(local):
            key += _digit(f.idx, d, pos) * d**j
        order = np.argsort(key, kind="stable")
        key, idx, amp = key[order], f.idx[order], f.amp[order]
        uniq, start = np.unique(key, return_index=True)
        bounds = list(start) + [len(key)]
        weights = np.abs(amp) ** 2
        total = float(weights.sum())
        opts = []
        for u, a, b in zip(uniq, bounds[:-1], bounds[1:]):
            pr = float(weights[a:b].sum()) / total
            if pr <= 0:
                continue
            outcome = tuple(int(u // d**j) % d for j in range(len(members)))
            part = _Factor(f.wires, idx[a:b], amp[a:b] / math.sqrt(pr * total))
            opts.append((outcome, pr, _split_basis(part, local, d)))
        options.append((members, opts))
    out = []
    frozen = state.frozen | set(wires)
    for combo in itertools.product(*(opts for _, opts in options)):
        pr = math.prod(c[1] for c in combo)
        if pr < min_prob:
            continue
        value = {}
        for (members, _), (o, _, _) in zip(options, combo):
            value.update(zip(members, o))
        outcome = tuple(value[w] for w in wires)
        new = [g for c in combo for g in c[2]]
        out.append((outcome, pr, state._replace(by_factor.keys(), new, frozen=frozen)))
    out.sort(key=lambda t: t[0][::-1])
    return out


def measure(state: StateVector, wires: Sequence[int], rng) -> tuple[tuple[int, ...], StateVector]:
    """Sample ``wires`` by the Born rule.

    ``rng`` is a seed or a ``numpy.random.Generator``; a fixed seed gives a
    fixed outcome. Measured wires are frozen in the returned state.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    wires = [int(w) for w in wires]
    _check_wires(state, wires)
    hit = [w for w in wires if w in state.frozen]
    if hit:
        raise UsageError(f"wire(s) {hit} were already measured")
    outcomes, probs = _table(state, wires)
    cdf = np.cumsum(probs)
    i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    i = min(i, len(outcomes) - 1)
    outcome = outcomes[i]
    _, post = project(state, wires, outcome)
    return outcome, post
