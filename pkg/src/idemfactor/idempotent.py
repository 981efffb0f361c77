"""Idempotent predicates, block classification and annihilator witnesses.

Classification works on a :class:`BlockRep` so that each class is a set of
block equations: range equal to K means ``T1 = I, T3 = 0, T4 = 0``, range
inside K means ``T3 = T4 = 0`` (then ``T1^2 = T1`` and ``T1 T2 = T2``), and
the L-side classes are the mirror images obtained by swapping the roles of
K and L.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field

from .decomposition import (
    BlockRep,
    complement_projector,
    extend_to_complement,
    projector,
)
from .errors import DimensionMismatch, NonSquare, WrongClass
from .fields import DEFAULT_RTOL
from .matrix import Matrix, colspace_basis, nullspace_basis, rank


def _tol_for(M: Matrix, tol: float) -> float:
    return 0.0 if M.field.exact else tol * max(1.0, M.frobenius_norm())


def is_idempotent(T: Matrix, tol: float = 1e-9) -> bool:
    """``T^2 = T`` exactly, or ``||T^2 - T||_F <= tol * max(1, ||T||_F)`` for floats."""
    if not T.is_square:
        raise NonSquare(f"idempotency of a {T.nrows}x{T.ncols} matrix")
    return (T @ T - T).is_zero(_tol_for(T, tol))


class Tag(str, enum.Enum):
    NOT_IDEMPOTENT = "NotIdempotent"
    ZERO = "Zero"
    IDENTITY = "Identity"
    RANGE_EQUALS_K = "RangeEqualsK"
    RANGE_EQUALS_L = "RangeEqualsL"
    RANGE_INSIDE_K = "RangeInsideK"
    RANGE_INSIDE_L = "RangeInsideL"
    CONTAINS_K = "ContainsK"
    CONTAINS_L = "ContainsL"
    GENERAL = "General"


# Finest first; classify_idempotent reports the first satisfied tag.
_ORDER = (
    Tag.ZERO,
    Tag.IDENTITY,
    Tag.RANGE_EQUALS_K,
    Tag.RANGE_EQUALS_L,
    Tag.RANGE_INSIDE_K,
    Tag.RANGE_INSIDE_L,
    Tag.CONTAINS_K,
    Tag.CONTAINS_L,
)


@dataclass(frozen=True)
class IdempotentClass:
    tag: Tag
    tags: frozenset = dc_field(default_factory=frozenset)
    witness: dict = dc_field(default_factory=dict, compare=False)

    def __contains__(self, tag) -> bool:
        return Tag(tag) in self.tags


def block_idempotency_residuals(b: BlockRep) -> dict[str, Matrix]:
    """The four block equations of ``T^2 = T`` written as ``lhs - rhs``."""
    T1, T2, T3, T4 = b.blocks
    return {
        "T1^2+T2T3-T1": T1 @ T1 + T2 @ T3 - T1,
        "T1T2+T2T4-T2": T1 @ T2 + T2 @ T4 - T2,
        "T3T1+T4T3-T3": T3 @ T1 + T4 @ T3 - T3,
        "T3T2+T4^2-T4": T3 @ T2 + T4 @ T4 - T4,
    }


def contains_k_equations(b: BlockRep) -> dict[str, Matrix]:
    """Equations every idempotent fixing K satisfies besides ``T1 = I``."""
    T1, T2, T3, T4 = b.blocks
    return {
        "T2T3": T2 @ T3,
        "T2T4": T2 @ T4,
        "T4T3": T4 @ T3,
        "T3T2-(T4-T4^2)": T3 @ T2 - (T4 - T4 @ T4),
    }


def classify_idempotent(b: BlockRep, tol: float = 1e-9) -> IdempotentClass:
    T1, T2, T3, T4 = b.blocks
    scale = max(1.0, b.coordinate_matrix().frobenius_norm())
    eps = 0.0 if b.field.exact else tol * scale

    def zero(M: Matrix) -> bool:
        return M.is_zero(eps)

    def ident(M: Matrix) -> bool:
        return M.is_identity(eps)

    if not all(zero(r) for r in block_idempotency_residuals(b).values()):
        return IdempotentClass(Tag.NOT_IDEMPOTENT, frozenset({Tag.NOT_IDEMPOTENT}))

    sat = set()
    witness: dict = {}
    k_side_zero = zero(T1) and zero(T2)
    l_side_zero = zero(T3) and zero(T4)
    if k_side_zero and l_side_zero:
        sat.add(Tag.ZERO)
    if ident(T1) and ident(T4) and zero(T2) and zero(T3):
        sat.add(Tag.IDENTITY)
    if l_side_zero:
        sat.add(Tag.RANGE_INSIDE_K)
        witness.setdefault("T1", T1)
        witness.setdefault("T2", T2)
        if ident(T1):
            sat.add(Tag.RANGE_EQUALS_K)
            witness["B"] = T2
    if k_side_zero:
        sat.add(Tag.RANGE_INSIDE_L)
        witness.setdefault("D", T4)
        witness.setdefault("C1", T3)
        if ident(T4):
            sat.add(Tag.RANGE_EQUALS_L)
            witness["C"] = T3
    # Q fixes K pointwise iff its first block column is [I; 0].
    if ident(T1) and zero(T3):
        sat.add(Tag.CONTAINS_K)
    if ident(T4) and zero(T2):
        sat.add(Tag.CONTAINS_L)
    finest = next((t for t in _ORDER if t in sat), Tag.GENERAL)
    sat.add(finest)
    return IdempotentClass(finest, frozenset(sat), witness)


def _is_range_k(b: BlockRep, tol: float) -> bool:
    return Tag.RANGE_EQUALS_K in classify_idempotent(b, tol).tags


def _is_range_l(b: BlockRep, tol: float) -> bool:
    return Tag.RANGE_EQUALS_L in classify_idempotent(b, tol).tags


def ek_product(Q: BlockRep, Q2: BlockRep, tol: float = 1e-9) -> BlockRep:
    """Product inside the semigroup of idempotents with range K (or with range L).

    In both semigroups the product of two members is the right-hand one.
    """
    if Q.decomposition != Q2.decomposition:
        raise DimensionMismatch("semigroup product needs a common decomposition")
    if _is_range_k(Q, tol) and _is_range_k(Q2, tol):
        out = Q @ Q2
        assert _is_range_k(out, tol)
        return out
    if _is_range_l(Q, tol) and _is_range_l(Q2, tol):
        out = Q @ Q2
        assert _is_range_l(out, tol)
        return out
    raise WrongClass("both factors must have range K, or both range L")


def ek_module_action(Q: BlockRep, E: BlockRep, side: str = "left", tol: float = 1e-9) -> BlockRep:
    """Act on an idempotent with range inside K by one with range exactly K.

    ``side="left"`` returns ``E Q`` (always equal to ``Q``); ``side="right"``
    returns ``Q E = [[T1, T1 B'], [0, 0]]``.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if Tag.RANGE_INSIDE_K not in classify_idempotent(Q, tol).tags:
        raise WrongClass("Q must be an idempotent with range inside K")
    if not _is_range_k(E, tol):
        raise WrongClass("E must be an idempotent with range K")
    if Q.decomposition != E.decomposition:
        raise DimensionMismatch("module action needs a common decomposition")
    out = E @ Q if side == "left" else Q @ E
    assert Tag.RANGE_INSIDE_K in classify_idempotent(out, tol).tags
    return out


class Verdict(str, enum.Enum):
    PASSES_NECESSARY = "PassesNecessary"
    FAILS_LEFT = "FailsLeft"
    FAILS_RIGHT = "FailsRight"
    FAILS_BOTH = "FailsBoth"
    TRIVIAL_OPERATOR = "TrivialOperator"


@dataclass(frozen=True)
class AnnihilatorReport:
    verdict: Verdict
    left_witness: Matrix | None = None
    right_witness: Matrix | None = None

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "left_witness": None if self.left_witness is None else self.left_witness.to_json(),
            "right_witness": None if self.right_witness is None else self.right_witness.to_json(),
        }


def left_annihilator_witness(T: Matrix, rtol: float = DEFAULT_RTOL) -> Matrix | None:
    """``I - p`` with p the projector onto R(T) along the greedy complement."""
    n = T.nrows
    r = rank(T, rtol)
    if r == n:
        return None
    if r == 0:
        return Matrix.identity(n, T.field)
    return complement_projector(extend_to_complement(colspace_basis(T, rtol), n))


def right_annihilator_witness(T: Matrix, rtol: float = DEFAULT_RTOL) -> Matrix | None:
    """Projector onto N(T) along the greedy complement of N(T)."""
    n = T.ncols
    N = nullspace_basis(T, rtol)
    if N.ncols == 0:
        return None
    if N.ncols == n:
        return Matrix.identity(n, T.field)
    return projector(extend_to_complement(N, n))


def annihilator_report(T: Matrix, rtol: float = DEFAULT_RTOL) -> AnnihilatorReport:
    """Nonzero idempotent left/right annihilators of a square ``T``.

    Both exist exactly when ``T`` is singular; having both is necessary for
    ``T`` to be a finite product of idempotents other than 0 and I.
    """
    if not T.is_square:
        raise NonSquare("annihilator report needs a square operator")
    n = T.nrows
    if T.is_zero():
        I = Matrix.identity(n, T.field)
        return AnnihilatorReport(Verdict.TRIVIAL_OPERATOR, I, I)
    left = left_annihilator_witness(T, rtol)
    right = right_annihilator_witness(T, rtol)
    if left is not None and right is not None:
        verdict = Verdict.PASSES_NECESSARY
    elif left is None and right is None:
        verdict = Verdict.FAILS_BOTH
    elif left is None:
        verdict = Verdict.FAILS_LEFT
    else:
        verdict = Verdict.FAILS_RIGHT
    return AnnihilatorReport(verdict, left, right)
