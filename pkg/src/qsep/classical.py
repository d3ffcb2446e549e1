"""Constant-depth Boolean circuits with unbounded fan-in MOD gates.

Gates live in a flat list in topological order; a gate refers to its
inputs by id. Evaluation is vectorised over a batch of input rows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ResourceError, UsageError
from .modarith import require_prime

FORMAT = "qsep-classical/1"
KINDS = ("INPUT", "CONST", "NOT", "AND", "OR", "NOR", "MOD")
XOR_CAP = 16


@dataclass(frozen=True)
class ClassicalGate:
    id: int
    kind: str
    fanin: tuple[int, ...] = ()
    args: dict = field(default_factory=dict, hash=False, compare=False)

    def to_json(self):
        return {"id": self.id, "kind": self.kind, "args": dict(self.args), "fanin": list(self.fanin)}


class ClassicalCircuit:
    """A Boolean DAG over ``n_inputs`` bits.

    ``MOD`` gates carry ``p`` and ``zero``: with ``zero=True`` the gate
    outputs 1 iff its input weight is 0 mod p, otherwise the complement.
    """

    def __init__(self, n_inputs: int):
        self.n_inputs = n_inputs
        self.gates: list[ClassicalGate] = []
        self.outputs: list[int] = []
        self.inputs = [self._add("INPUT", (), index=i) for i in range(n_inputs)]

    def _add(self, kind, fanin, **args) -> int:
        fanin = tuple(int(f) for f in fanin)
        for f in fanin:
            if not 0 <= f < len(self.gates):
                raise DomainError(f"gate {len(self.gates)} reads unknown or later gate {f}")
        if kind == "NOT" and len(fanin) != 1:
            raise DomainError("NOT takes exactly one input")
        if kind in ("AND", "OR", "NOR", "MOD") and not fanin:
            raise DomainError(f"{kind} needs at least one input")
        gid = len(self.gates)
        self.gates.append(ClassicalGate(gid, kind, fanin, args))
        return gid

    # builders
    def const(self, value: int) -> int:
        return self._add("CONST", (), value=int(bool(value)))

    def NOT(self, a: int) -> int:
        return self._add("NOT", (a,))

    def AND(self, *xs: int) -> int:
        return self._add("AND", xs)

    def OR(self, *xs: int) -> int:
        return self._add("OR", xs)

    def NOR(self, *xs: int) -> int:
        return self._add("NOR", xs)

    def MOD(self, p: int, xs: Sequence[int], zero: bool = True) -> int:
        return self._add("MOD", tuple(xs), p=int(p), zero=bool(zero))

    # evaluation
    def evaluate(self, bits) -> np.ndarray:
        """Outputs for one input row (1-D) or a batch of rows (2-D)."""
        x = np.asarray(bits, dtype=np.int64)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.shape[1] != self.n_inputs:
            raise DomainError(f"expected {self.n_inputs} input bits, got {x.shape[1]}")
        if np.any((x != 0) & (x != 1)):
            raise DomainError("inputs must be bits")
        vals = np.empty((len(self.gates), x.shape[0]), dtype=np.int64)
        for gate in self.gates:
            k, fi = gate.kind, gate.fanin
            if k == "INPUT":
                vals[gate.id] = x[:, gate.args["index"]]
            elif k == "CONST":
                vals[gate.id] = gate.args["value"]
            elif k == "NOT":
                vals[gate.id] = 1 - vals[fi[0]]
            elif k == "AND":
                vals[gate.id] = np.all(vals[list(fi)], axis=0)
            elif k == "OR":
                vals[gate.id] = np.any(vals[list(fi)], axis=0)
            elif k == "NOR":
                vals[gate.id] = ~np.any(vals[list(fi)], axis=0)
            elif k == "MOD":
                hit = vals[list(fi)].sum(axis=0) % gate.args["p"] == 0
                vals[gate.id] = hit if gate.args["zero"] else ~hit
            else:
                raise DomainError(f"unknown gate kind {k!r}")
        out = vals[self.outputs].T
        return out[0] if single else out

    # metrics
    def depths(self) -> list[int]:
        out = []
        for gate in self.gates:
            if gate.kind in ("INPUT", "CONST"):
                out.append(0)
            else:
                out.append(1 + max(out[f] for f in gate.fanin))
        return out

    def metrics(self) -> dict[str, int]:
        logic = [gt for gt in self.gates if gt.kind not in ("INPUT", "CONST")]
        bounded = [len(gt.fanin) for gt in logic if gt.kind != "MOD"]
        d = self.depths()
        return {
            "depth": max((d[o] for o in self.outputs), default=0),
            "size": len(logic),
            "max_bounded_fanin": max(bounded, default=0),
            "mod_gates": sum(1 for gt in logic if gt.kind == "MOD"),
        }

    def is_nc0(self, p: int) -> bool:
        """Bounded fan-in (<= 2) everywhere except MOD_p gates."""
        for gt in self.gates:
            if gt.kind == "MOD":
                if gt.args["p"] != p:
                    return False
            elif gt.kind not in ("INPUT", "CONST") and len(gt.fanin) > 2:
                return False
        return True

    # serialization
    def to_json(self) -> dict:
        return {"format": FORMAT, "inputs": self.n_inputs,
                "gates": [gt.to_json() for gt in self.gates], "outputs": list(self.outputs)}

    def dumps(self, **kw) -> str:
        return json.dumps(self.to_json(), **kw)

    @classmethod
    def from_json(cls, obj) -> "ClassicalCircuit":
        if obj.get("format", FORMAT) != FORMAT:
            raise DomainError(f"unsupported classical format {obj.get('format')!r}")
        gates = sorted(obj["gates"], key=lambda gt: gt["id"])
        if [gt["id"] for gt in gates] != list(range(len(gates))):
            raise DomainError("gate ids must be 0..N-1")
        order = _toposort(gates)
        remap = {old: new for new, old in enumerate(order)}
        c = cls.__new__(cls)
        c.n_inputs = int(obj["inputs"])
        c.gates, c.inputs = [], []
        for old in order:
            gt = gates[old]
            if gt["kind"] not in KINDS:
                raise DomainError(f"unknown gate kind {gt['kind']!r}")
            gid = c._add(gt["kind"], [remap[f] for f in gt["fanin"]], **gt.get("args", {}))
            if gt["kind"] == "INPUT":
                c.inputs.append(gid)
        c.outputs = [remap[o] for o in obj["outputs"]]
        return c

    @classmethod
    def loads(cls, text: str) -> "ClassicalCircuit":
        return cls.from_json(json.loads(text))


def _toposort(gates) -> list[int]:
    state = [0] * len(gates)  # 0 new, 1 on stack, 2 done
    order = []
    for root in range(len(gates)):
        if state[root]:
            continue
        stack = [(root, iter(gates[root]["fanin"]))]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                state[node] = 2
                order.append(node)
            elif not 0 <= nxt < len(gates):
                raise DomainError(f"gate {node} reads unknown gate {nxt}")
            elif state[nxt] == 1:
                raise DomainError(f"cycle through gate {nxt}")
            elif state[nxt] == 0:
                state[nxt] = 1
                stack.append((nxt, iter(gates[nxt]["fanin"])))
    return order


def hex_to_bits(text: str, n: int) -> list[int]:
    """Bit i of the integer ``int(text, 16)`` becomes input i."""
    value = int(text, 16)
    if value >> n:
        raise UsageError(f"hex input {text!r} has more than {n} bits")
    return [(value >> i) & 1 for i in range(n)]


# ---------------------------------------------------------------------------
# MOD_{p^k}


def _mod_pk(c: ClassicalCircuit, p: int, k: int, xs: list[int]) -> int:
    if not xs:
        return c.const(1)
    total = c.MOD(p, xs)
    if k == 1:
        return total
    # y_i: prefix weight is a multiple of p; z_i marks each new multiple reached
    ys = [c.MOD(p, xs[: i + 1]) for i in range(len(xs))]
    zs = [c.AND(c.NOT(ys[i - 1]), ys[i]) for i in range(1, len(xs))]
    # sum(z) = floor(|x| / p)
    return c.AND(_mod_pk(c, p, k - 1, zs), total)


def build_mod_pk(p: int, k: int, n: int) -> ClassicalCircuit:
    """Output 1 iff the input weight is a multiple of ``p**k``."""
    require_prime(p)
    if k < 1 or n < 1:
        raise DomainError("need k >= 1 and n >= 1")
    c = ClassicalCircuit(n)
    c.outputs = [_mod_pk(c, p, k, list(c.inputs))]
    return c


# ---------------------------------------------------------------------------
# relation decider


Solver = Callable[[Sequence[int], np.random.Generator], Sequence[int]]


@dataclass
class RelationDecider:
    """Decides ``|x| = 0 (mod p)`` from ``R`` independent relation answers.

    Each answer y (``q n`` bits) feeds a complement-convention MOD_q gate that
    fires when ``|y| != 0 (mod q)``; a NOR over the R gates is the verdict.
    """

    p: int
    q: int
    n: int
    R: int
    solver: Solver
    circuit: ClassicalCircuit

    def answers(self, x: Sequence[int], rng: np.random.Generator) -> np.ndarray:
        ys = [np.asarray(self.solver(x, rng), dtype=np.int64) for _ in range(self.R)]
        for y in ys:
            if y.shape != (self.q * self.n,):
                raise DomainError(f"solver returned {y.shape[0] if y.ndim else 0} bits, expected {self.q * self.n}")
        return np.concatenate(ys)

    def __call__(self, x: Sequence[int], rng: np.random.Generator) -> int:
        return int(self.circuit.evaluate(self.answers(x, rng))[0])


def build_relation_decider(p: int, q: int, n: int, R: int, solver: Solver) -> RelationDecider:
    require_prime(p)
    require_prime(q, "q")
    if R < 1:
        raise DomainError("R must be at least 1")
    m = q * n
    c = ClassicalCircuit(R * m)
    fires = [c.MOD(q, c.inputs[r * m:(r + 1) * m], zero=False) for r in range(R)]
    c.outputs = [c.NOR(*fires)]
    return RelationDecider(p, q, n, R, solver, c)


# ---------------------------------------------------------------------------
# XOR lemma


@dataclass(frozen=True)
class BitDistribution:
    """Distribution on F_2^k; ``probs[z]`` with bit i of z the i-th coordinate."""

    k: int
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (1 << self.k,):
            raise DomainError(f"need {1 << self.k} probabilities for k={self.k}")
        if np.any(probs < 0) or abs(probs.sum() - 1) > 1e-12:
            raise DomainError("probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def point(cls, k: int, z: int = 0) -> "BitDistribution":
        probs = np.zeros(1 << k)
        probs[z] = 1.0
        return cls(k, probs)

    @classmethod
    def uniform(cls, k: int) -> "BitDistribution":
        return cls(k, np.full(1 << k, 1.0 / (1 << k)))

    @classmethod
    def random(cls, k: int, rng: np.random.Generator) -> "BitDistribution":
        w = rng.dirichlet(np.full(1 << k, float(rng.choice([0.05, 0.5, 5.0]))))
        return cls(k, w / w.sum())


@dataclass(frozen=True)
class XorReport:
    biases: np.ndarray  # biases[S] for S = 0..2^k-1; biases[0] = 1
    epsilon: float
    tv: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.tv <= self.bound + 1e-12


def walsh_hadamard(v: np.ndarray) -> np.ndarray:
    """``out[S] = sum_z v[z] (-1)^{popcount(z & S)}``."""
    out = np.array(v, dtype=float)
    h = 1
    while h < len(out):
        out = out.reshape(-1, 2, h)
        out = np.stack([out[:, 0] + out[:, 1], out[:, 0] - out[:, 1]], axis=1).reshape(-1)
        h *= 2
    return out


def xor_analysis(dist: BitDistribution, *, cap: int = XOR_CAP) -> XorReport:
    if dist.k > cap:
        raise ResourceError(f"k = {dist.k} exceeds the cap {cap}", required=dist.k, limit=cap)
    biases = walsh_hadamard(dist.probs)
    eps = float(np.max(np.abs(biases[1:]))) if dist.k else 0.0
    tv = 0.5 * float(np.abs(dist.probs - 1.0 / (1 << dist.k)).sum())
    return XorReport(biases, eps, tv, eps * 2 ** (dist.k / 2))
