"""Exact predicates for weighted shifts and diagonal operators on l2.

An operator is described by its kind and a :class:`WeightRule` (finitely
many exceptional weights plus a constant or power-law tail), so kernel,
range and annihilator questions have closed-form answers:

* right shift ``T e_j = w_j e_{j+1}``: ``e_1`` is never hit, so the range is
  never dense;
* left shift ``T e_1 = 0``, ``T e_{j+1} = w_j e_j``: the kernel is never
  trivial;
* diagonal ``T e_j = w_j e_j``.

A range spanned by weighted coordinate vectors is closed exactly when the
nonzero weights stay away from 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .fields import QQ
from .matrix import Matrix


@dataclass(frozen=True)
class Constant:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", QQ.coerce(self.value))

    def at(self, j: int) -> Fraction:
        return self.value

    def to_json(self):
        return {"constant": QQ.to_json(self.value)}


@dataclass(frozen=True)
class Harmonic:
    """``scale / j**power``; the default is ``1/j``."""

    scale: Fraction = Fraction(1)
    power: int = 1

    def __post_init__(self):
        object.__setattr__(self, "scale", QQ.coerce(self.scale))
        if self.scale == 0:
            raise ValueError("a harmonic tail needs a nonzero scale")
        if not isinstance(self.power, int) or self.power < 1:
            raise ValueError("a harmonic tail needs a positive integer power")

    def at(self, j: int) -> Fraction:
        return self.scale / Fraction(j) ** self.power

    def to_json(self):
        if self.scale == 1 and self.power == 1:
            return "harmonic"
        return {"harmonic": {"scale": QQ.to_json(self.scale), "power": self.power}}


def _tail_product(a, b):
    if isinstance(a, Constant) and isinstance(b, Constant):
        return Constant(a.value * b.value)
    if isinstance(a, Harmonic) and isinstance(b, Harmonic):
        return Harmonic(a.scale * b.scale, a.power + b.power)
    c, h = (a, b) if isinstance(a, Constant) else (b, a)
    if c.value == 0:
        return Constant(0)
    return Harmonic(c.value * h.scale, h.power)


@dataclass(frozen=True)
class WeightRule:
    """Weights ``w_j`` for ``j >= 1``: ``exceptional[j]`` if present, else the tail."""

    exceptional: dict = dc_field(default_factory=dict)
    tail: Constant | Harmonic = Constant(Fraction(1))

    def __post_init__(self):
        exc = {}
        for j, v in dict(self.exceptional).items():
            j = int(j)
            if j < 1:
                raise ValueError("weight indices start at 1")
            exc[j] = QQ.coerce(v)
        object.__setattr__(self, "exceptional", exc)

    def __hash__(self):
        return hash((tuple(sorted(self.exceptional.items())), self.tail))

    def at(self, j: int) -> Fraction:
        return self.exceptional[j] if j in self.exceptional else self.tail.at(j)

    @property
    def tail_is_zero(self) -> bool:
        return isinstance(self.tail, Constant) and self.tail.value == 0

    def zero_indices(self) -> "IndexSet":
        """Indices with ``w_j = 0``."""
        zeros = tuple(sorted(j for j, v in self.exceptional.items() if v == 0))
        if self.tail_is_zero:
            nonzero = tuple(sorted(j for j, v in self.exceptional.items() if v != 0))
            return IndexSet(cofinite=True, indices=nonzero)
        return IndexSet(cofinite=False, indices=zeros)

    @property
    def all_nonzero(self) -> bool:
        z = self.zero_indices()
        return not z.cofinite and not z.indices

    @property
    def nonzero_bounded_below(self) -> bool:
        """``inf { |w_j| : w_j != 0 } > 0`` (vacuously true if every weight is 0)."""
        return not isinstance(self.tail, Harmonic)

    def __mul__(self, other: "WeightRule") -> "WeightRule":
        keys = set(self.exceptional) | set(other.exceptional)
        return WeightRule({j: self.at(j) * other.at(j) for j in keys}, _tail_product(self.tail, other.tail))

    def to_json(self) -> dict:
        return {
            "exceptional": {str(j): QQ.to_json(v) for j, v in sorted(self.exceptional.items())},
            "tail": self.tail.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "WeightRule":
        return cls(dict(obj.get("exceptional") or {}), parse_tail(obj.get("tail", {"constant": "1"})))


def parse_tail(obj):
    if obj == "harmonic":
        return Harmonic()
    if isinstance(obj, dict) and len(obj) == 1:
        (name, value), = obj.items()
        if name == "constant":
            return Constant(QQ.coerce(value))
        if name == "harmonic":
            value = value or {}
            return Harmonic(QQ.coerce(value.get("scale", 1)), int(value.get("power", 1)))
    raise ValueError(f"unrecognized weight tail {obj!r}")


@dataclass(frozen=True)
class IndexSet:
    """A finite set of positive integers, or the complement of one."""

    cofinite: bool
    indices: tuple

    @property
    def empty(self) -> bool:
        return not self.cofinite and not self.indices

    def shifted_with_one(self) -> "IndexSet":
        """``{1} ∪ {j + 1 : j in self}``."""
        if self.cofinite:
            missing = tuple(j + 1 for j in self.indices)
            return IndexSet(True, missing)
        return IndexSet(False, (1,) + tuple(j + 1 for j in self.indices))

    def to_json(self) -> dict:
        if self.cofinite:
            return {"all_indices_except": list(self.indices)}
        return {"indices": list(self.indices)}


class Kind(str, enum.Enum):
    RIGHT_SHIFT = "RightShift"
    LEFT_SHIFT = "LeftShift"
    DIAGONAL = "Diagonal"

    @classmethod
    def parse(cls, name: str) -> "Kind":
        norm = name.replace("-", "").replace("_", "").lower()
        for k in cls:
            if k.value.lower() == norm:
                return k
        raise ValueError(f"unknown operator kind {name!r}")


@dataclass(frozen=True)
class StructuredOperator:
    kind: Kind
    weights: WeightRule = WeightRule()

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind) if not isinstance(self.kind, Kind) else self.kind)

    def __matmul__(self, other: "StructuredOperator") -> "StructuredOperator":
        if self.kind is not Kind.DIAGONAL or other.kind is not Kind.DIAGONAL:
            raise TypeError("only diagonal operators are closed under products here")
        return StructuredOperator(Kind.DIAGONAL, self.weights * other.weights)

    def to_json(self) -> dict:
        return {"kind": self.kind.value, **self.weights.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "StructuredOperator":
        return cls(Kind.parse(obj["kind"]), WeightRule.from_json(obj))


def right_shift(weights: WeightRule | None = None) -> StructuredOperator:
    return StructuredOperator(Kind.RIGHT_SHIFT, weights or WeightRule())


def left_shift(weights: WeightRule | None = None) -> StructuredOperator:
    return StructuredOperator(Kind.LEFT_SHIFT, weights or WeightRule())


def diagonal(weights: WeightRule) -> StructuredOperator:
    return StructuredOperator(Kind.DIAGONAL, weights)


def diag_harmonic() -> StructuredOperator:
    """``(T x)_j = x_j / j``."""
    return diagonal(WeightRule({}, Harmonic()))


PRESETS = {
    "right-shift": right_shift,
    "left-shift": left_shift,
    "diag-harmonic": diag_harmonic,
}


def kernel_basis(op: StructuredOperator) -> IndexSet:
    """Coordinates ``j`` whose vectors ``e_j`` span the kernel."""
    zeros = op.weights.zero_indices()
    if op.kind is Kind.LEFT_SHIFT:
        return zeros.shifted_with_one()
    return zeros


def range_complement(op: StructuredOperator) -> IndexSet:
    """Coordinates ``j`` with ``e_j`` orthogonal to the range."""
    zeros = op.weights.zero_indices()
    if op.kind is Kind.RIGHT_SHIFT:
        return zeros.shifted_with_one()
    return zeros


def kernel_trivial(op: StructuredOperator) -> bool:
    return kernel_basis(op).empty


@dataclass(frozen=True)
class RangeClass:
    dense: bool
    closed: bool
    equals_X: bool

    def to_json(self) -> dict:
        return {"dense": self.dense, "closed": self.closed, "equals_X": self.equals_X}


def range_classification(op: StructuredOperator) -> RangeClass:
    dense = range_complement(op).empty
    closed = op.weights.nonzero_bounded_below
    return RangeClass(dense, closed, dense and closed)


@dataclass(frozen=True)
class MembershipReport:
    left_annihilator: bool
    right_annihilator: bool
    in_F_possible: bool
    regular: bool | str
    left_witness: IndexSet | None = None
    right_witness: IndexSet | None = None
    range: RangeClass | None = None
    kernel_trivial: bool | None = None

    def to_json(self) -> dict:
        def witness(s):
            return None if s is None else {"kind": "coordinate_projection", **s.to_json()}

        return {
            "left_annihilator": self.left_annihilator,
            "right_annihilator": self.right_annihilator,
            "in_F_possible": self.in_F_possible,
            "regular": self.regular,
            "left_witness": witness(self.left_witness),
            "right_witness": witness(self.right_witness),
            "kernel_trivial": self.kernel_trivial,
            "range": None if self.range is None else self.range.to_json(),
        }


def membership_report(op: StructuredOperator) -> MembershipReport:
    """Annihilator existence and the necessary condition for being a finite product of idempotents.

    A nonzero idempotent left annihilator exists iff the range is not dense
    (project onto the missed coordinates); a right one iff the kernel is
    nontrivial.  ``in_F_possible`` needs both.  Regularity is decided for
    diagonal operators (regular iff the range is closed, using the
    generalized inverse ``diag(1/w_j or 0)``) and left as ``"unknown"``
    for shifts.
    """
    rc = range_classification(op)
    kt = kernel_trivial(op)
    left = not rc.dense
    right = not kt
    regular: bool | str = rc.closed if op.kind is Kind.DIAGONAL else "unknown"
    return MembershipReport(
        left_annihilator=left,
        right_annihilator=right,
        in_F_possible=left and right,
        regular=regular,
        left_witness=range_complement(op) if left else None,
        right_witness=kernel_basis(op) if right else None,
        range=rc,
        kernel_trivial=kt,
    )


def truncate(op: StructuredOperator, n: int) -> Matrix:
    """The top-left ``n x n`` corner of the operator's matrix, over Q."""
    if n < 1:
        raise ValueError("truncation size must be positive")
    w = op.weights
    rows = [[Fraction(0)] * n for _ in range(n)]
    for j in range(1, n + 1):
        if op.kind is Kind.DIAGONAL:
            rows[j - 1][j - 1] = w.at(j)
        elif op.kind is Kind.RIGHT_SHIFT and j < n:
            rows[j][j - 1] = w.at(j)
        elif op.kind is Kind.LEFT_SHIFT and j < n:
            rows[j - 1][j] = w.at(j)
    return Matrix(rows, QQ)


__all__ = [
    "Constant",
    "Harmonic",
    "IndexSet",
    "Kind",
    "MembershipReport",
    "PRESETS",
    "RangeClass",
    "StructuredOperator",
    "WeightRule",
    "diag_harmonic",
    "diagonal",
    "kernel_basis",
    "kernel_trivial",
    "left_shift",
    "membership_report",
    "parse_tail",
    "range_classification",
    "range_complement",
    "right_shift",
    "truncate",
]
