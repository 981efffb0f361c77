"""Scalar fields: exact rationals, binary64 floats and GF(p) for p in {2, 3, 5}.

A field object owns coercion, reduction and (de)serialization of its
scalars.  Matrices carry a field and delegate every scalar decision to it,
so the elimination code in :mod:`idemfactor.matrix` is written once.

Rationals are :class:`fractions.Fraction` (always reduced, positive
denominator).  GF(p) residues are plain ints in ``[0, p)``.
"""

from __future__ import annotations

import math
import numbers
from fractions import Fraction

from .errors import FieldMismatch

DEFAULT_RTOL = 1e-12
SUPPORTED_PRIMES = (2, 3, 5)


class Field:
    name: str = "?"
    exact: bool = True
    has_inner_product: bool = True

    zero = 0
    one = 1

    def coerce(self, x):
        raise NotImplementedError

    def reduce(self, x):
        """Normalize the result of ``+``, ``-`` or ``*`` on two scalars."""
        return x

    def inv(self, x):
        if self.is_zero(x):
            raise ZeroDivisionError("inverse of zero")
        return self.one / x

    def div(self, x, y):
        return self.reduce(x * self.inv(y))

    def is_zero(self, x, tol: float = 0.0) -> bool:
        return x == 0

    def magnitude(self, x) -> float:
        return float(abs(x))

    def to_json(self, x):
        raise NotImplementedError

    def from_json(self, x):
        return self.coerce(x)

    def __repr__(self):
        return f"<field {self.name}>"

    def __reduce__(self):
        return (get_field, (self.name,))


class RationalField(Field):
    name = "Q"
    zero = Fraction(0)
    one = Fraction(1)

    def coerce(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, bool):
            raise FieldMismatch("bool is not a rational scalar")
        if isinstance(x, numbers.Integral):
            return Fraction(int(x))
        if isinstance(x, str):
            try:
                return Fraction(x.strip())
            except ValueError as exc:
                raise FieldMismatch(f"not a rational literal: {x!r}") from exc
        raise FieldMismatch(f"{type(x).__name__} cannot enter the rational field")

    def inv(self, x):
        return 1 / x

    def div(self, x, y):
        return x / y

    def to_json(self, x):
        return str(x)


class Float64Field(Field):
    name = "F64"
    exact = False
    zero = 0.0
    one = 1.0

    def coerce(self, x):
        if isinstance(x, bool):
            raise FieldMismatch("bool is not a float scalar")
        if isinstance(x, float):
            return x
        if isinstance(x, numbers.Integral):
            return float(x)
        if isinstance(x, numbers.Real) and not isinstance(x, Fraction):
            return float(x)
        raise FieldMismatch(f"{type(x).__name__} cannot enter the float field")

    def div(self, x, y):
        return x / y

    def inv(self, x):
        return 1.0 / x

    def is_zero(self, x, tol: float = 0.0) -> bool:
        return abs(x) <= tol

    def to_json(self, x):
        if not math.isfinite(x):
            raise ValueError("non-finite float in matrix")
        return x


class PrimeField(Field):
    has_inner_product = False

    def __init__(self, p: int):
        if p not in SUPPORTED_PRIMES:
            raise ValueError(f"GF({p}) not supported; choose one of {SUPPORTED_PRIMES}")
        self.p = p
        self.name = f"GF{p}"
        self._inverses = {a: pow(a, -1, p) for a in range(1, p)}

    def coerce(self, x):
        if isinstance(x, bool) or not isinstance(x, numbers.Integral):
            raise FieldMismatch(f"{type(x).__name__} cannot enter GF({self.p})")
        return int(x) % self.p

    def reduce(self, x):
        return x % self.p

    def inv(self, x):
        x %= self.p
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        return self._inverses[x]

    def div(self, x, y):
        return (x * self.inv(y)) % self.p

    def magnitude(self, x) -> float:
        return 0.0 if x % self.p == 0 else 1.0

    def from_json(self, x):
        if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < self.p:
            raise FieldMismatch(f"GF({self.p}) entries must be integers in [0, {self.p})")
        return x

    def to_json(self, x):
        return int(x)


QQ = RationalField()
F64 = Float64Field()
GF2 = PrimeField(2)
GF3 = PrimeField(3)
GF5 = PrimeField(5)

_FIELDS = {f.name: f for f in (QQ, F64, GF2, GF3, GF5)}


def get_field(name: str) -> Field:
    """Look up a field by its JSON tag (``Q``, ``F64``, ``GF2``...), case-insensitively."""
    key = name.strip()
    for tag, field in _FIELDS.items():
        if tag.lower() == key.lower():
            return field
    raise ValueError(f"unknown field {name!r}; expected one of {sorted(_FIELDS)}")


def gf(p: int) -> PrimeField:
    return get_field(f"GF{p}")  # type: ignore[return-value]
