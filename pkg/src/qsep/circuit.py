"""Layered qudit circuits with mid-circuit measurement and classical feed-forward.

A circuit is a list of layers; instructions inside one layer act on
disjoint wires, so the layer count is the circuit depth. Ancilla and
advice registers are set up by :class:`PrepareAncilla` instructions that
sit outside the layers and are not counted in depth or size.

Two execution modes share the same instruction semantics:

* :func:`run_sampled` follows one Monte-Carlo trajectory for a seed;
* :func:`run_exact` enumerates every measurement branch with its
  probability.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence, Union

import numpy as np

from . import gates as g
from . import state as st
from .errors import CircuitValidationError, DomainError, ResourceError, UsageError

FORMAT = "qsep-circuit/1"
DEFAULT_BRANCH_CAP = 1 << 20
BRANCH_PRUNE = 1e-15


# ---------------------------------------------------------------------------
# record functions


@dataclass(frozen=True)
class AffineRule:
    """``value = const + sum_s coeffs[s] * record[s]`` (mod d)."""

    coeffs: tuple[tuple[int, int], ...] = ()
    const: int = 0

    @classmethod
    def of(cls, coeffs: Mapping[int, int] | None = None, const: int = 0) -> "AffineRule":
        items = tuple(sorted((int(s), int(a)) for s, a in (coeffs or {}).items() if a))
        return cls(items, int(const))

    @property
    def slots(self):
        return tuple(s for s, _ in self.coeffs)

    def __call__(self, record: Sequence[int], d: int) -> int:
        return (self.const + sum(a * record[s] for s, a in self.coeffs)) % d

    def to_json(self):
        return {"kind": "affine", "const": self.const, "coeffs": [[s, a] for s, a in self.coeffs]}


@dataclass(frozen=True)
class TableRule:
    """Explicit lookup of ``value`` from the tuple of record values in ``slots``."""

    slots: tuple[int, ...]
    table: tuple[tuple[tuple[int, ...], int], ...]
    default: int = 0

    @classmethod
    def of(cls, slots: Sequence[int], table: Mapping[tuple[int, ...], int], default: int = 0):
        return cls(tuple(slots), tuple(sorted((tuple(k), int(v)) for k, v in table.items())), default)

    def __call__(self, record, d):
        key = tuple(record[s] for s in self.slots)
        return dict(self.table).get(key, self.default) % d

    def to_json(self):
        return {
            "kind": "table", "slots": list(self.slots), "default": self.default,
            "table": [[list(k), v] for k, v in self.table],
        }


def _rule_from_json(obj):
    if obj["kind"] == "affine":
        return AffineRule(tuple((int(s), int(a)) for s, a in obj["coeffs"]), int(obj["const"]))
    if obj["kind"] == "table":
        return TableRule(tuple(obj["slots"]), tuple((tuple(k), int(v)) for k, v in obj["table"]),
                         int(obj.get("default", 0)))
    raise DomainError(f"unknown record rule {obj['kind']!r}")


# ---------------------------------------------------------------------------
# instructions


@dataclass(frozen=True)
class Unitary:
    gate: g.Gate
    wires: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        self.gate.check_wires(self.wires)

    def inverse(self):
        return Unitary(self.gate.inverse(), self.wires)

    def to_json(self):
        return {"op": "unitary", "gate": self.gate.to_json(), "wires": list(self.wires)}


@dataclass(frozen=True)
class Measure:
    """Computational-basis measurement; outcome of ``wires[i]`` goes to record slot ``slots[i]``."""

    wires: tuple[int, ...]
    slots: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        object.__setattr__(self, "slots", tuple(int(s) for s in self.slots))
        if len(self.wires) != len(self.slots):
            raise DomainError("Measure needs one record slot per wire")

    def to_json(self):
        return {"op": "measure", "wires": list(self.wires), "slots": list(self.slots)}


@dataclass(frozen=True)
class Correction:
    """Apply ``gate ** rule(record)`` to ``wire``."""

    wire: int
    gate: g.Gate
    rule: Union[AffineRule, TableRule]

    @property
    def wires(self):
        return (self.wire,)

    def to_json(self):
        return {"op": "correction", "wire": self.wire, "gate": self.gate.to_json(),
                "rule": self.rule.to_json()}


@dataclass(frozen=True)
class PrepareAncilla:
    """Initialise fresh wires: ``kind`` is ``"basis"`` (every wire set to ``value``)
    or ``"ghz"`` (``GHZ(value)`` across the wires). ``advice`` marks a register
    handed to the circuit rather than built by it."""

    wires: tuple[int, ...]
    kind: str = "basis"
    value: int = 0
    advice: bool = False

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        if self.kind not in ("basis", "ghz"):
            raise DomainError(f"unknown preparation kind {self.kind!r}")

    def to_json(self):
        return {"op": "prepare", "wires": list(self.wires), "kind": self.kind,
                "value": self.value, "advice": self.advice}


Instruction = Union[Unitary, Measure, Correction, PrepareAncilla]


def instruction_from_json(obj) -> Instruction:
    op = obj["op"]
    if op == "unitary":
        return Unitary(g.gate_from_json(obj["gate"]), tuple(obj["wires"]))
    if op == "measure":
        return Measure(tuple(obj["wires"]), tuple(obj["slots"]))
    if op == "correction":
        return Correction(int(obj["wire"]), g.gate_from_json(obj["gate"]), _rule_from_json(obj["rule"]))
    if op == "prepare":
        return PrepareAncilla(tuple(obj["wires"]), obj["kind"], int(obj["value"]), bool(obj["advice"]))
    raise DomainError(f"unknown instruction {op!r}")


# ---------------------------------------------------------------------------
# circuits


@dataclass(frozen=True)
class Diagnostic:
    layer: int | None
    wires: tuple[int, ...]
    message: str


@dataclass
class Circuit:
    """A layered circuit over ``width`` qudits of dimension ``d``.

    ``inputs`` are the wires fed by the caller's input state; every other
    wire starts in ``|0>`` unless prepared otherwise. ``outputs`` are the
    wires whose final state is the circuit's result.
    """

    d: int
    width: int
    inputs: tuple[int, ...] = ()
    outputs: tuple[int, ...] = ()
    layers: list[list[Instruction]] = field(default_factory=list)
    preparations: list[PrepareAncilla] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    # -- construction -------------------------------------------------------

    def append(self, instruction: Instruction, layer: int | None = None) -> "Circuit":
        """Add an instruction. ``layer`` is a hint: ``None`` opens a new layer at
        the end, an existing index joins that layer, ``len(layers)`` opens one."""
        if isinstance(instruction, PrepareAncilla):
            self.preparations.append(instruction)
            return self
        if layer is None or layer == len(self.layers):
            self.layers.append([instruction])
        elif 0 <= layer < len(self.layers):
            self.layers[layer].append(instruction)
        else:
            raise DomainError(f"layer hint {layer} out of range (have {len(self.layers)} layers)")
        return self

    def extend_layers(self, layers: Iterable[Iterable[Instruction]]) -> "Circuit":
        for layer in layers:
            layer = list(layer)
            if layer:
                self.layers.append(layer)
        return self

    # -- metrics ------------------------------------------------------------

    @property
    def depth(self) -> int:
        return sum(1 for layer in self.layers if layer)

    @property
    def size(self) -> int:
        return sum(len(layer) for layer in self.layers)

    @property
    def ancillas(self) -> int:
        return self.width - len(self.inputs)

    def metrics(self) -> dict[str, int]:
        return {"depth": self.depth, "size": self.size, "ancillas": self.ancillas}

    def instructions(self):
        for layer in self.layers:
            yield from layer

    def measured_wires(self) -> list[int]:
        return [w for ins in self.instructions() if isinstance(ins, Measure) for w in ins.wires]

    def gate_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for ins in self.instructions():
            key = ins.gate.name if isinstance(ins, (Unitary, Correction)) else type(ins).__name__
            out[key] = out.get(key, 0) + 1
        return out

    # -- validation ---------------------------------------------------------

    def diagnostics(self) -> list[Diagnostic]:
        out: list[Diagnostic] = []

        def bad_wires(ws):
            return [w for w in ws if not 0 <= w < self.width]

        touched_by_prep: set[int] = set()
        for prep in self.preparations:
            oob = bad_wires(prep.wires)
            if oob:
                out.append(Diagnostic(None, tuple(oob), f"preparation on out-of-range wire(s) {oob}"))
            clash = sorted((set(prep.wires) & set(self.inputs)) | (set(prep.wires) & touched_by_prep))
            if clash:
                out.append(Diagnostic(None, tuple(clash), f"wire(s) {clash} prepared twice or are inputs"))
            touched_by_prep |= set(prep.wires)
            if prep.kind == "basis" and not 0 <= prep.value < self.d:
                out.append(Diagnostic(None, prep.wires, f"basis value {prep.value} outside [0, {self.d})"))
        for name, ws in (("input", self.inputs), ("output", self.outputs)):
            oob = bad_wires(ws)
            if oob:
                out.append(Diagnostic(None, tuple(oob), f"{name} wire(s) {oob} out of range"))

        frozen: dict[int, int] = {}
        filled: set[int] = set()
        for li, layer in enumerate(self.layers):
            seen: dict[int, int] = {}
            written: set[int] = set()
            for ins in layer:
                if isinstance(ins, PrepareAncilla):
                    out.append(Diagnostic(li, ins.wires, "PrepareAncilla inside a layer"))
                    continue
                ws = ins.wires
                oob = bad_wires(ws)
                if oob:
                    out.append(Diagnostic(li, tuple(oob), f"layer {li}: wire(s) {oob} out of range"))
                for w in ws:
                    if w in seen:
                        out.append(Diagnostic(li, (w,), f"layer {li}: wire {w} used by two instructions"))
                    seen[w] = li
                    if w in frozen:
                        out.append(Diagnostic(
                            li, (w,), f"layer {li}: wire {w} was measured in layer {frozen[w]} and is frozen"
                        ))
                if isinstance(ins, Measure):
                    dup = written & set(ins.slots) | filled & set(ins.slots)
                    if dup:
                        out.append(Diagnostic(li, ws, f"layer {li}: record slot(s) {sorted(dup)} written twice"))
                    written |= set(ins.slots)
                elif isinstance(ins, Correction):
                    missing = [s for s in ins.rule.slots if s not in filled]
                    if missing:
                        out.append(Diagnostic(
                            li, ws, f"layer {li}: correction on wire {ins.wire} reads unfilled slot(s) {missing}"
                        ))
                    try:
                        ins.gate.power(1)
                    except DomainError:
                        out.append(Diagnostic(li, ws, f"layer {li}: {ins.gate.name} cannot be record-driven"))
            for ins in layer:
                if isinstance(ins, Measure):
                    for w in ins.wires:
                        frozen[w] = li
            filled |= written
        return out

    def validate(self) -> "Circuit":
        diags = self.diagnostics()
        if diags:
            raise CircuitValidationError(diags)
        return self

    # -- transforms ---------------------------------------------------------

    def inverse_layers(self) -> list[list[Instruction]]:
        """Layers of the inverse circuit; only defined for purely unitary circuits."""
        out = []
        for layer in reversed(self.layers):
            row = []
            for ins in layer:
                if not isinstance(ins, Unitary):
                    raise UsageError("only unitary circuits can be inverted")
                row.append(ins.inverse())
            out.append(row)
        return out

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "format": FORMAT,
            "dimension": self.d,
            "width": self.width,
            "inputs": list(self.inputs),
            "outputs": list(self.outputs),
            "preparations": [p.to_json() for p in self.preparations],
            "layers": [{"instructions": [i.to_json() for i in layer]} for layer in self.layers],
            "metadata": _jsonable(self.metadata),
        }

    def dumps(self, **kw) -> str:
        return json.dumps(self.to_json(), **kw)

    @classmethod
    def from_json(cls, obj) -> "Circuit":
        if obj.get("format") != FORMAT:
            raise DomainError(f"unsupported circuit format {obj.get('format')!r}")
        return cls(
            d=int(obj["dimension"]),
            width=int(obj["width"]),
            inputs=tuple(obj["inputs"]),
            outputs=tuple(obj["outputs"]),
            layers=[[instruction_from_json(i) for i in layer["instructions"]] for layer in obj["layers"]],
            preparations=[instruction_from_json(p) for p in obj["preparations"]],
            metadata=dict(obj.get("metadata", {})),
        )

    @classmethod
    def loads(cls, text: str) -> "Circuit":
        return cls.from_json(json.loads(text))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


# ---------------------------------------------------------------------------
# execution


@dataclass
class SampledRun:
    record: dict[int, int]
    state: st.StateVector


@dataclass
class BranchOutcome:
    record: dict[int, int]
    probability: float
    state: st.StateVector

    def outputs(self, circuit: Circuit) -> st.StateVector:
        return self.state.restrict(circuit.outputs)


def initial_state(circuit: Circuit, input_state: st.StateVector | Sequence[int] | None = None,
                  max_amplitudes: int | None = None) -> st.StateVector:
    """Input state on ``circuit.inputs``, ``|0>`` elsewhere, preparations applied."""
    n_in = len(circuit.inputs)
    if input_state is None:
        input_state = st.StateVector.zeros(circuit.d, n_in)
    elif not isinstance(input_state, st.StateVector):
        input_state = st.StateVector.basis(circuit.d, list(input_state))
    if input_state.d != circuit.d or input_state.n != n_in:
        raise DomainError(
            f"input state is (d={input_state.d}, n={input_state.n}); circuit expects (d={circuit.d}, n={n_in})"
        )
    state = st.embed(input_state, circuit.width, circuit.inputs)
    if max_amplitudes is not None:
        state.max_amplitudes = max_amplitudes
    for prep in circuit.preparations:
        ws = list(prep.wires)
        if prep.kind == "basis":
            fresh = st.StateVector.basis(circuit.d, [prep.value] * len(ws))
        else:
            fresh = st.ghz(prep.value, circuit.d, len(ws))
        ks = sorted({state._owner[w] for w in ws})
        moved = [st._Factor(tuple(ws[w] for w in f.wires), f.idx, f.amp) for f in fresh.factors]
        state = state._replace(ks, moved)
    return state


def _step(state, ins, record, d):
    if isinstance(ins, Unitary):
        return st.apply(state, ins.gate, ins.wires)
    if isinstance(ins, Correction):
        gate = ins.gate.power(ins.rule(record, d))
        return state if gate is None else st.apply(state, gate, ins.wires)
    raise TypeError(ins)


def _flat(circuit):
    return [ins for layer in circuit.layers for ins in layer]


def run_sampled(circuit: Circuit, input_state=None, seed=None, *, max_amplitudes=None) -> SampledRun:
    """One trajectory; measurement outcomes drawn from ``numpy.random.default_rng(seed)``."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    state = initial_state(circuit, input_state, max_amplitudes)
    record: dict[int, int] = {}
    for ins in _flat(circuit):
        if isinstance(ins, Measure):
            outcome, state = st.measure(state, ins.wires, rng)
            record.update(zip(ins.slots, outcome))
        else:
            state = _step(state, ins, record, circuit.d)
    return SampledRun(record, state)


def replay(circuit: Circuit, input_state, record: Mapping[int, int], *, max_amplitudes=None) -> st.StateVector:
    """Re-run ``circuit`` with every measurement forced to the outcome stored in ``record``."""
    state = initial_state(circuit, input_state, max_amplitudes)
    for ins in _flat(circuit):
        if isinstance(ins, Measure):
            p, state = st.project(state, ins.wires, [record[s] for s in ins.slots])
            if p <= 0:
                raise DomainError("record has probability zero")
        else:
            state = _step(state, ins, record, circuit.d)
    return state


def sample_records(circuit: Circuit, input_state=None, shots: int = 1, seed=None, *, max_amplitudes=None):
    """``shots`` trajectories sharing one RNG stream.

    The measurement-free prefix of the circuit is simulated once and reused.
    Returns a list of :class:`SampledRun`.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    flat = _flat(circuit)
    state = initial_state(circuit, input_state, max_amplitudes)
    cut = next((i for i, ins in enumerate(flat) if isinstance(ins, Measure)), len(flat))
    for ins in flat[:cut]:
        state = _step(state, ins, {}, circuit.d)
    runs = []
    for _ in range(shots):
        s, record = state, {}
        for ins in flat[cut:]:
            if isinstance(ins, Measure):
                outcome, s = st.measure(s, ins.wires, rng)
                record.update(zip(ins.slots, outcome))
            else:
                s = _step(s, ins, record, circuit.d)
        runs.append(SampledRun(record, s))
    return runs


def run_exact(circuit: Circuit, input_state=None, *, branch_cap: int = DEFAULT_BRANCH_CAP,
              max_amplitudes=None) -> list[BranchOutcome]:
    """Every measurement branch with its exact probability (depth-first).

    Branches below probability ``1e-15`` are pruned. Raises
    :class:`ResourceError` if more than ``branch_cap`` branches survive.
    """
    flat = _flat(circuit)
    start = initial_state(circuit, input_state, max_amplitudes)
    out: list[BranchOutcome] = []
    stack = [(0, start, {}, 1.0)]
    while stack:
        pos, state, record, prob = stack.pop()
        while pos < len(flat) and not isinstance(flat[pos], Measure):
            state = _step(state, flat[pos], record, circuit.d)
            pos += 1
        if pos == len(flat):
            out.append(BranchOutcome(record, prob, state))
            if len(out) > branch_cap:
                raise ResourceError(f"more than {branch_cap} measurement branches",
                                    required=len(out), limit=branch_cap)
            continue
        ins = flat[pos]
        children = []
        for outcome, p, post in st.branches(state, ins.wires, BRANCH_PRUNE / prob):
            rec = dict(record)
            rec.update(zip(ins.slots, outcome))
            children.append((pos + 1, post, rec, prob * p))
        if len(out) + len(stack) + len(children) > branch_cap:
            raise ResourceError(f"more than {branch_cap} measurement branches",
                                required=len(out) + len(stack) + len(children), limit=branch_cap)
        stack.extend(reversed(children))
    return out


def output_distribution(branches: Sequence[BranchOutcome], slots: Sequence[int]) -> dict[tuple[int, ...], float]:
    """Exact distribution of the record values in ``slots`` over all branches."""
    out: dict[tuple[int, ...], float] = {}
    for b in branches:
        key = tuple(b.record[s] for s in slots)
        out[key] = out.get(key, 0.0) + b.probability
    return out


# ---------------------------------------------------------------------------
# layer algebra used by the constructions


Layers = list  # list[list[Instruction]]


def parallel(*blocks: Sequence[Sequence[Instruction]]) -> Layers:
    """Run blocks side by side: layer ``i`` of the result is the union of every block's layer ``i``."""
    depth = max((len(b) for b in blocks), default=0)
    return [[ins for b in blocks if i < len(b) for ins in b[i]] for i in range(depth)]


def seq(*blocks: Sequence[Sequence[Instruction]]) -> Layers:
    return [list(layer) for b in blocks for layer in b if layer]


def invert(block: Sequence[Sequence[Instruction]]) -> Layers:
    out = []
    for layer in reversed(block):
        row = []
        for ins in layer:
            if not isinstance(ins, Unitary):
                raise UsageError("only unitary blocks can be inverted")
            row.append(ins.inverse())
        out.append(row)
    return out


class WireAllocator:
    """Hands out consecutive wire indices."""

    def __init__(self, start: int = 0):
        self.next = start

    def take(self, count: int) -> list[int]:
        out = list(range(self.next, self.next + count))
        self.next += count
        return out

    def one(self) -> int:
        return self.take(1)[0]
