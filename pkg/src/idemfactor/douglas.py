"""Range-inclusion factorization: ``R(U) ⊆ R(V)`` iff ``U = V W``.

Among all such ``W`` there is exactly one, ``W0``, with ``N(W0) = N(U)``.
Over Q and F64 it is ``V⁺ U``: ``V V⁺`` fixes ``R(V) ⊇ R(U)``, so
``W0 x = 0`` forces ``U x = V W0 x = 0``, and ``U x = 0`` forces
``V⁺ U x = 0``.  GF(p) has no pseudoinverse; there the columnwise solve with
free variables zero is linear in the right-hand side, which gives
``N(U) ⊆ N(W0)``, and ``U = V W0`` gives the reverse inclusion.  Both
routes re-check the kernel equality before returning.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DimensionMismatch, InternalNormalizationFailure, NoSolution, RangeNotContained
from .fields import DEFAULT_RTOL
from .matrix import Matrix, hstack, nullity, nullspace_basis, pseudoinverse, rank, solve_linear


def range_included(U: Matrix, V: Matrix, rtol: float = DEFAULT_RTOL) -> bool:
    """Every column of ``U`` lies in the column space of ``V``."""
    if U.nrows != V.nrows:
        raise DimensionMismatch(f"U has {U.nrows} rows, V has {V.nrows}")
    return rank(hstack(V, U), rtol) == rank(V, rtol)


@dataclass(frozen=True)
class KernelReport:
    nullity_U: int
    nullity_W0: int
    annihilates_kernel: bool
    product_matches: bool

    @property
    def ok(self) -> bool:
        return self.product_matches and self.annihilates_kernel and self.nullity_U == self.nullity_W0

    def to_json(self) -> dict:
        return {
            "nullity_U": self.nullity_U,
            "nullity_W0": self.nullity_W0,
            "W0_annihilates_N(U)": self.annihilates_kernel,
            "V_W0_equals_U": self.product_matches,
            "kernel_equal": self.ok,
        }


def kernel_report(U: Matrix, V: Matrix, W0: Matrix, tol: float = 1e-9, rtol: float = DEFAULT_RTOL) -> KernelReport:
    NU = nullspace_basis(U, rtol)
    prod = (V @ W0).approx_equal(U, tol)
    scale = max(1.0, W0.frobenius_norm())
    kills = (W0 @ NU).is_zero(0.0 if U.field.exact else tol * scale)
    return KernelReport(nullity(U, rtol), nullity(W0, rtol), kills, prod)


def douglas_solve(U: Matrix, V: Matrix, rtol: float = DEFAULT_RTOL, tol: float = 1e-9) -> Matrix:
    """The unique ``W0`` with ``V W0 = U`` and ``N(W0) = N(U)``.

    Raises :class:`RangeNotContained` when ``R(U)`` is not inside ``R(V)``.
    """
    U._check_field(V)
    if not range_included(U, V, rtol):
        raise RangeNotContained("R(U) is not contained in R(V)")
    if U.field.has_inner_product:
        W0 = pseudoinverse(V, rtol) @ U
    else:
        try:
            W0 = solve_linear(V, U, rtol)
        except NoSolution as exc:  # pragma: no cover - excluded by range_included
            raise RangeNotContained(str(exc)) from exc
    report = kernel_report(U, V, W0, tol, rtol)
    if not report.ok:
        raise InternalNormalizationFailure(f"Douglas solution failed its kernel check: {report}")
    return W0
