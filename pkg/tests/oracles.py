"""Independent dense reference implementations.

Nothing here imports the sparse kernels under test. Gates are built as
explicit d^n x d^n matrices straight from their textbook definitions, and
states are plain numpy vectors with index = sum_i x_i d^i.
"""

from __future__ import annotations

import cmath
import itertools
import math
from functools import lru_cache

import numpy as np


def omega(d):
    return cmath.exp(2j * math.pi / d)


def digits(index, d, n):
    return [(index // d**i) % d for i in range(n)]


def index(ds, d):
    return sum(x * d**i for i, x in enumerate(ds))


def basis(ds, d):
    v = np.zeros(d ** len(ds), dtype=complex)
    v[index(ds, d)] = 1
    return v


def ghz(m, d, n):
    v = np.zeros(d**n, dtype=complex)
    for j in range(d):
        v[index([j] * n, d)] = omega(d) ** (j * m) / math.sqrt(d)
    return v


def permutation(d, n, fn):
    """Matrix of the basis map ``digits -> fn(digits)``."""
    u = np.zeros((d**n, d**n), dtype=complex)
    for i in range(d**n):
        u[index(fn(digits(i, d, n)), d), i] = 1
    return u


def diagonal(d, n, fn):
    return np.diag([fn(digits(i, d, n)) for i in range(d**n)]).astype(complex)


def single(d, n, wire, mat):
    """Embed a d x d matrix on ``wire`` (little-endian: wire 0 is the fastest index)."""
    out = np.array([[1.0 + 0j]])
    for w in reversed(range(n)):
        out = np.kron(out, mat if w == wire else np.eye(d))
    return out


def fourier_matrix(d):
    w = omega(d)
    return np.array([[w ** (m * k) for m in range(d)] for k in range(d)]) / math.sqrt(d)


def gate_matrix(name, d, n, wires, **kw):
    """Dense matrix for the named gate on ``wires`` of an n-qudit register."""
    wires = list(wires)
    if name == "Fourier":
        return single(d, n, wires[0], fourier_matrix(d))
    if name == "FourierInv":
        return single(d, n, wires[0], fourier_matrix(d).conj().T)
    if name == "XShift":
        k = kw.get("k", 1)

        def f(x):
            x = list(x)
            x[wires[0]] = (x[wires[0]] + k) % d
            return x
        return permutation(d, n, f)
    if name == "Negate":
        def f(x):
            x = list(x)
            x[wires[0]] = (-x[wires[0]]) % d
            return x
        return permutation(d, n, f)
    if name in ("Sum", "SumInv"):
        s = 1 if name == "Sum" else -1
        c, t = wires

        def f(x):
            x = list(x)
            x[t] = (x[t] + s * x[c]) % d
            return x
        return permutation(d, n, f)
    if name == "QMod":
        s = kw.get("sign", 1)
        t, *cs = wires

        def f(x):
            x = list(x)
            x[t] = (x[t] + s * sum(x[c] for c in cs)) % d
            return x
        return permutation(d, n, f)
    if name == "Fanout":
        s = kw.get("sign", 1)
        src, *ts = wires

        def f(x):
            x = list(x)
            for t in ts:
                x[t] = (x[t] + s * x[src]) % d
            return x
        return permutation(d, n, f)
    if name == "MonomialAdd":
        s = kw.get("sign", 1)
        exps = kw["exponents"]
        t, *cs = wires

        def f(x):
            x = list(x)
            val = 1
            for c, e in zip(cs, exps):
                val *= x[c] ** e
            x[t] = (x[t] + s * val) % d
            return x
        return permutation(d, n, f)
    turns = kw.get("turns", 0.0)
    if name == "TopLevelPhase":
        return diagonal(d, n, lambda x: cmath.exp(2j * math.pi * turns) if x[wires[0]] == d - 1 else 1)
    if name == "GradedPhase":
        return diagonal(d, n, lambda x: cmath.exp(2j * math.pi * turns * x[wires[0]]))
    if name == "CTopLevelPhase":
        c, t = wires
        return diagonal(d, n, lambda x: cmath.exp(2j * math.pi * turns * x[c]) if x[t] == d - 1 else 1)
    if name == "CGradedPhase":
        c, t = wires
        return diagonal(d, n, lambda x: cmath.exp(2j * math.pi * turns * x[c] * x[t]))
    raise KeyError(name)


def marginal(vec, d, n, wires):
    out = {}
    for i, a in enumerate(vec):
        pr = abs(a) ** 2
        if pr > 1e-15:
            key = tuple(digits(i, d, n)[w] for w in wires)
            out[key] = out.get(key, 0.0) + pr
    return out


# ---------------------------------------------------------------------------
# closed forms


def relation_no_success(p, q, weight):
    """1 - |(q - 1 + e^{i theta})/q|^2 with theta = 2 pi |x| / p."""
    theta = 2 * math.pi * weight / p
    return 2 * (q - 1) * (1 - math.cos(theta)) / q**2


@lru_cache(maxsize=None)
def _fourier_all(q, n):
    u = np.eye(q**n, dtype=complex)
    for wire in range(n):
        u = single(q, n, wire, fourier_matrix(q)) @ u
    return u


def relation_success_by_amplitudes(p, q, n, x):
    """Dense run of the advice circuit: phase, Fourier on every advice qudit, weight law of y."""
    w = sum(x)
    v = np.zeros(q**n, dtype=complex)
    for j in range(q):
        phase = cmath.exp(2j * math.pi * w / p) if j == q - 1 else 1
        v[index([j] * n, q)] = phase / math.sqrt(q)
    v = _fourier_all(q, n) @ v
    yes = w % p == 0
    return sum(abs(a) ** 2 for i, a in enumerate(v) if (sum(digits(i, q, n)) % q == 0) == yes)


def bpm_dense(q, n):
    """The balanced-tree cat state from its defining recursion, over edges then vertices."""
    v = np.zeros(q ** (2 * n - 1), dtype=complex)
    amp = q ** (-(n / 2))
    for v1 in range(q):
        for es in itertools.product(range(q), repeat=n - 1):
            verts = {1: v1}
            for i in range(2, n + 1):
                verts[i] = (es[i - 2] - verts[i // 2]) % q
            ds = list(es) + [verts[i] for i in range(1, n + 1)]
            v[index(ds, q)] += amp
    return v


def integer_weight_mod(bits, m):
    return sum(bits) % m


def walsh_brute(probs, k):
    return np.array([
        sum(probs[z] * (-1) ** bin(z & s).count("1") for z in range(2**k)) for s in range(2**k)
    ])


def poly_eval(coeffs, x, p):
    total = 0
    for k, c in coeffs.items():
        term = c
        for xi, ki in zip(x, k):
            term *= xi**ki
        total += term
    return total % p
