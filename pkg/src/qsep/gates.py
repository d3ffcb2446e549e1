"""Qudit gate vocabulary.

Every gate is a small frozen dataclass. Wire order conventions, used by
:func:`qsep.state.apply` and by circuit instructions:

=================  ==========================================
gate               wires
=================  ==========================================
single-qudit       ``(w,)``
Sum / SumInv       ``(control, target)``
CTopLevelPhase     ``(control, target)``
CGradedPhase       ``(control, target)``
QMod               ``(target, *controls)``
Fanout             ``(source, *targets)``
MonomialAdd        ``(target, *controls)``
=================  ==========================================

Angles are exact rationals of a full turn (:class:`Phase`), converted to
complex exponentials only inside the kernels.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import ClassVar

from .errors import DomainError


@dataclass(frozen=True, order=True)
class Phase:
    """The angle ``2*pi*turns`` with ``turns`` an exact rational."""

    turns: Fraction = Fraction(0)

    def __post_init__(self):
        if not isinstance(self.turns, Fraction):
            object.__setattr__(self, "turns", Fraction(self.turns))

    @classmethod
    def of(cls, num: int, den: int = 1) -> "Phase":
        if den <= 0:
            raise DomainError("phase denominator must be positive")
        return cls(Fraction(num, den))

    @property
    def num(self) -> int:
        return self.turns.numerator

    @property
    def den(self) -> int:
        return self.turns.denominator

    @property
    def radians(self) -> float:
        return 2 * math.pi * float(self.turns)

    def __neg__(self) -> "Phase":
        return Phase(-self.turns)

    def __add__(self, other: "Phase") -> "Phase":
        return Phase(self.turns + other.turns)

    def __mul__(self, k: int) -> "Phase":
        return Phase(self.turns * k)

    __rmul__ = __mul__

    def unit(self, k: int = 1) -> complex:
        """``exp(i * k * angle)``, reduced modulo a full turn before exponentiating."""
        t = (self.turns * k) % 1
        if t == 0:
            return 1.0 + 0.0j
        if t == Fraction(1, 2):
            return -1.0 + 0.0j
        if t == Fraction(1, 4):
            return 1.0j
        if t == Fraction(3, 4):
            return -1.0j
        return cmath.exp(2j * math.pi * float(t))

    def to_json(self):
        return {"num": self.num, "den": self.den}

    @classmethod
    def from_json(cls, obj) -> "Phase":
        return cls.of(int(obj["num"]), int(obj["den"]))

    def __repr__(self):
        return f"Phase({self.num}/{self.den})"


class Gate:
    """Mixin with the shared gate protocol.

    ``min_wires``/``max_wires`` bound the number of wires the gate acts on;
    ``None`` means unbounded.
    """

    min_wires: ClassVar[int] = 1
    max_wires: ClassVar[int | None] = 1
    is_diagonal: ClassVar[bool] = False

    @property
    def name(self) -> str:
        return type(self).__name__

    def inverse(self) -> "Gate":
        raise NotImplementedError

    def power(self, k: int) -> "Gate | None":
        """The gate raised to the integer power ``k``; ``None`` stands for identity."""
        raise DomainError(f"{self.name} has no power form")

    def check_wires(self, wires) -> None:
        n = len(wires)
        if n < self.min_wires or (self.max_wires is not None and n > self.max_wires):
            hi = "any" if self.max_wires is None else self.max_wires
            raise DomainError(f"{self.name} takes {self.min_wires}..{hi} wires, got {n}")

    def params(self) -> dict:
        return {}

    def to_json(self):
        out = {"gate": self.name}
        for key, value in self.params().items():
            out[key] = value.to_json() if isinstance(value, Phase) else value
        return out


@dataclass(frozen=True)
class XShift(Gate):
    """``|m> -> |m + k mod d>``."""

    k: int = 1

    def inverse(self):
        return XShift(-self.k)

    def power(self, k):
        return XShift(self.k * k) if self.k * k else None

    def params(self):
        return {"k": self.k}


@dataclass(frozen=True)
class Fourier(Gate):
    """``|m> -> d^{-1/2} sum_n w^{mn} |n>`` with ``w = exp(2*pi*i/d)``."""

    def inverse(self):
        return FourierInv()


@dataclass(frozen=True)
class FourierInv(Gate):
    def inverse(self):
        return Fourier()


@dataclass(frozen=True)
class Negate(Gate):
    """``|m> -> |-m mod d>``."""

    def inverse(self):
        return self

    def power(self, k):
        return self if k % 2 else None


@dataclass(frozen=True)
class TopLevelPhase(Gate):
    """``diag(1, ..., 1, e^{i phi})``: phase only on the top level ``d-1``."""

    phase: Phase = field(default_factory=Phase)
    is_diagonal: ClassVar[bool] = True

    def inverse(self):
        return TopLevelPhase(-self.phase)

    def power(self, k):
        return TopLevelPhase(self.phase * k)

    def params(self):
        return {"phase": self.phase}


@dataclass(frozen=True)
class GradedPhase(Gate):
    """``sum_j e^{i phi j} |j><j|``."""

    phase: Phase = field(default_factory=Phase)
    is_diagonal: ClassVar[bool] = True

    def inverse(self):
        return GradedPhase(-self.phase)

    def power(self, k):
        return GradedPhase(self.phase * k)

    def params(self):
        return {"phase": self.phase}


@dataclass(frozen=True)
class Sum(Gate):
    """``|n>|m> -> |n>|n + m>``."""

    min_wires: ClassVar[int] = 2
    max_wires: ClassVar[int | None] = 2

    def inverse(self):
        return SumInv()


@dataclass(frozen=True)
class SumInv(Gate):
    """``|n>|m> -> |n>|m - n>``."""

    min_wires: ClassVar[int] = 2
    max_wires: ClassVar[int | None] = 2

    def inverse(self):
        return Sum()


@dataclass(frozen=True)
class CTopLevelPhase(Gate):
    """Control value ``n`` applies ``TopLevelPhase(n * phi)`` to the target."""

    phase: Phase = field(default_factory=Phase)
    min_wires: ClassVar[int] = 2
    max_wires: ClassVar[int | None] = 2
    is_diagonal: ClassVar[bool] = True

    def inverse(self):
        return CTopLevelPhase(-self.phase)

    def params(self):
        return {"phase": self.phase}


@dataclass(frozen=True)
class CGradedPhase(Gate):
    """``|n>|m> -> |n> GradedPhase(phi)^n |m>``."""

    phase: Phase = field(default_factory=Phase)
    min_wires: ClassVar[int] = 2
    max_wires: ClassVar[int | None] = 2
    is_diagonal: ClassVar[bool] = True

    def inverse(self):
        return CGradedPhase(-self.phase)

    def params(self):
        return {"phase": self.phase}


@dataclass(frozen=True)
class QMod(Gate):
    """Target gains ``sign * (sum of controls)`` mod d. Wires: ``(target, *controls)``."""

    sign: int = 1
    min_wires: ClassVar[int] = 1
    max_wires: ClassVar[int | None] = None

    def inverse(self):
        return QMod(-self.sign)

    def power(self, k):
        return QMod(self.sign * k) if self.sign * k else None

    def params(self):
        return {"sign": self.sign}


@dataclass(frozen=True)
class Fanout(Gate):
    """Each target gains ``sign * source`` mod d. Wires: ``(source, *targets)``."""

    sign: int = 1
    min_wires: ClassVar[int] = 1
    max_wires: ClassVar[int | None] = None

    def inverse(self):
        return Fanout(-self.sign)

    def power(self, k):
        return Fanout(self.sign * k) if self.sign * k else None

    def params(self):
        return {"sign": self.sign}


@dataclass(frozen=True)
class MonomialAdd(Gate):
    """Target gains ``sign * prod_i c_i^{e_i}`` mod d (with ``0^0 = 1``).

    Wires: ``(target, *controls)``; ``exponents`` has one entry per control.
    Used for reversible character evaluation.
    """

    exponents: tuple[int, ...] = ()
    sign: int = 1
    min_wires: ClassVar[int] = 1
    max_wires: ClassVar[int | None] = None

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(e) for e in self.exponents))
        if any(e < 0 for e in self.exponents):
            raise DomainError("monomial exponents must be non-negative")

    def check_wires(self, wires):
        super().check_wires(wires)
        if len(wires) != len(self.exponents) + 1:
            raise DomainError(
                f"MonomialAdd with {len(self.exponents)} exponents needs "
                f"{len(self.exponents) + 1} wires, got {len(wires)}"
            )

    def inverse(self):
        return MonomialAdd(self.exponents, -self.sign)

    def params(self):
        return {"exponents": list(self.exponents), "sign": self.sign}


GATE_TYPES = {
    cls.__name__: cls
    for cls in (
        XShift, Fourier, FourierInv, Negate, TopLevelPhase, GradedPhase, Sum, SumInv,
        CTopLevelPhase, CGradedPhase, QMod, Fanout, MonomialAdd,
    )
}


def gate_from_json(obj) -> Gate:
    obj = dict(obj)
    name = obj.pop("gate")
    try:
        cls = GATE_TYPES[name]
    except KeyError:
        raise DomainError(f"unknown gate {name!r}") from None
    kwargs = {}
    for key, value in obj.items():
        if key == "phase":
            value = Phase.from_json(value)
        elif key == "exponents":
            value = tuple(value)
        kwargs[key] = value
    return cls(**kwargs)
