"""Constructive two-idempotent factorizations of local block operators.

Every recipe takes a local block representation ``T = [[T1, T2], [0, 0]]``
relative to ``X = K (+) L``, builds both factors in block coordinates, maps
them back to the ambient basis, and re-verifies the certificate before
returning it.  Preconditions are checked first and reported through
:class:`NotApplicable`; bad user-supplied parameters raise
:class:`BadParameter`.

Recipes (block coordinates, ``I`` the identity of the relevant block):

``corner_pair``
    ``[[BC, B], [0, 0]] = [[I, B], [0, 0]] [[0, 0], [C, I]]`` and the mirror
    ``[[0, 0], [C, CB]]`` with the factors swapped.
``range_swallow``
    ``R(T1) ⊆ R(T2)``, ``T1 = T2 C``: ``E1 = [[I, T2], [0, 0]]``,
    ``E2 = [[0, 0], [C, I]]``.
``range_swallow_mirror``
    ``T = [[0, 0], [S3, S4]]`` with ``S4 = S3 B``: ``[[0, 0], [S3, I]]`` times
    ``[[I, B], [0, 0]]``.
``embed``
    ``dim K <= dim L``, ``T2 = T1 B``, ``J: K -> L`` with left inverse ``J*``:
    ``E1 = [[I, (T1 - I) J* + B], [0, 0]]``,
    ``E2 = [[I - B J, B - B J B], [J, J B]]``.
``kernel_shift``
    ``T1 = T2 C`` with ``N(C) = N(T1)``, ``T1 V = 0``:
    ``E1 = [[I, T2 - V], [0, 0]]``, ``E2 = [[V C, V], [C, I]]``.
``kernel_shift_idempotent``
    ``T1`` idempotent, ``T1 V = 0``, ``C V = 0``, ``C T1 = 0``, ``T2 C = 0``:
    ``E1`` as above, ``E2 = [[T1 + V C, V], [C, I]]``.
``idempotent_block`` / ``idempotent_block_prime``
    ``T1`` idempotent, ``D`` idempotent with ``N(D) ⊆ N(T2 - T1 T2)``:
    ``E1 = [[I, T2], [0, 0]]`` (or ``[[I, T2 D], [0, 0]]``) and
    ``E2 = [[T1, T2 (I - D)], [0, D]]``.  The bottom-right block must be
    ``D``; with 0 there ``E1 E2 = T`` fails whenever ``T2 D != 0``.
``invertible_pair``
    ``k = l``, ``C`` and ``D`` invertible, ``T1 C^-1 = T2 D^-1``:
    ``B = T1 C^-1 - C^-1 (I - D)``, ``E1 = [[I, B], [0, 0]]``,
    ``E2 = [[I - C^-1 D C, C^-1 (I - D) D], [C, D]]``.
``lift``
    ``T1 = E_1 ... E_s`` gives ``T = [[I, T2], [0, 0]] [[E_1, 0], [0, I]] ...``.
"""

from __future__ import annotations

import random
from functools import reduce

from .certificate import FactorizationCertificate, TwoIdempotentCertificate, checked
from .decomposition import BlockRep, Decomposition, local_block_rep
from .douglas import douglas_solve, range_included
from .errors import (
    BadJ,
    BadParameter,
    DimensionMismatch,
    FactorNotIdempotent,
    NoRecipeApplies,
    NotApplicable,
    ProductMismatch,
    SingularParameter,
)
from .fields import DEFAULT_RTOL, F64, QQ, Field, PrimeField
from .idempotent import Verdict, annihilator_report, is_idempotent
from .matrix import (
    Matrix,
    block2x2,
    hstack,
    inverse,
    is_invertible,
    left_inverse,
    nullspace_basis,
    rank,
    solve_linear,
    vstack,
)
from .consistency import peel_blocks

RECIPES = (
    "idempotent",
    "corner_pair",
    "range_swallow",
    "range_swallow_mirror",
    "embed",
    "kernel_shift",
    "kernel_shift_idempotent",
    "idempotent_block",
    "idempotent_block_prime",
    "invertible_pair",
    "lift",
)

MAX_ATTEMPTS = 100


# -- helpers ---------------------------------------------------------------


def _to_ambient(d: Decomposition, M: Matrix) -> Matrix:
    if d.P.is_identity():
        return M
    return d.P @ M @ d.P_inv


def _eye(n: int, f: Field) -> Matrix:
    return Matrix.identity(n, f)


def _zero(r: int, c: int, f: Field) -> Matrix:
    return Matrix.zeros(r, c, f)


def _require_local(b: BlockRep, tol: float = 1e-9):
    ok = b.is_local if b.field.exact else b.is_local_approx(tol)
    if not ok:
        raise NotApplicable("block representation is not local (T3, T4 must vanish)")


def _tol(M: Matrix, tol: float) -> float:
    return 0.0 if M.field.exact else tol * max(1.0, M.frobenius_norm())


def _two(b: BlockRep, E1: Matrix, E2: Matrix, recipe: str, params: dict, tol: float) -> TwoIdempotentCertificate:
    d = b.decomposition
    cert = TwoIdempotentCertificate(
        target=b.assemble(),
        factors=(_to_ambient(d, E1), _to_ambient(d, E2)),
        recipe=recipe,
        decomposition=d,
        parameters=params,
    )
    return checked(cert, tol)


def random_matrix(rng: random.Random, nrows: int, ncols: int, field: Field) -> Matrix:
    """Entries uniform in {-s..s} over Q and F64 (``s = rng.spread``, default 3), uniform field elements over GF(p)."""
    s = getattr(rng, "spread", 3)
    if isinstance(field, PrimeField):
        draw = lambda: rng.randrange(field.p)  # noqa: E731
    elif field is F64:
        draw = lambda: float(rng.randint(-s, s))  # noqa: E731
    else:
        draw = lambda: rng.randint(-s, s)  # noqa: E731
    return Matrix([[draw() for _ in range(ncols)] for _ in range(nrows)], field)


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


class _WideningRandom(random.Random):
    """Sampling range grows with each draw round, so a family over Q never runs dry."""

    spread = 3

    def widen(self):
        self.spread += 1


# -- peeling and lifting ---------------------------------------------------


def peel_candidate(b: BlockRep, B: Matrix, C: Matrix, D: Matrix) -> Matrix:
    """``S = [[T1 - B C, T2 - B D], [C, D]]`` in the ambient basis.

    ``Q_B S = T`` for every choice of ``B, C, D``, where
    ``Q_B = [[I, B], [0, 0]]``.
    """
    d = b.decomposition
    k, l = d.k, d.l
    for name, m, shape in (("B", B, (k, l)), ("C", C, (l, k)), ("D", D, (l, l))):
        b.T1._check_field(m)
        if m.shape != shape:
            raise DimensionMismatch(f"{name} has shape {m.shape}, expected {shape}")
    return _to_ambient(d, peel_blocks(b.T1, b.T2, B, C, D))


def corner_idempotent(d: Decomposition, B: Matrix) -> Matrix:
    """``Q_B = [[I, B], [0, 0]]`` in the ambient basis: range K, kernel ``{(-B y, y)}``."""
    f = d.field
    return _to_ambient(d, block2x2(_eye(d.k, f), B, _zero(d.l, d.k, f), _zero(d.l, d.l, f)))


def lift_factorization(b: BlockRep, factors_of_T1, tol: float = 1e-9) -> FactorizationCertificate:
    """Lift an idempotent factorization of ``T1`` on K to one of T on X.

    The result has ``len(factors_of_T1) + 1`` factors.
    """
    _require_local(b, tol)
    d = b.decomposition
    f = d.field
    k, l = d.k, d.l
    factors = list(factors_of_T1)
    for i, E in enumerate(factors):
        b.T1._check_field(E)
        if E.shape != (k, k):
            raise DimensionMismatch(f"factor {i} has shape {E.shape}, expected {(k, k)}")
        if not is_idempotent(E, tol):
            raise FactorNotIdempotent(f"factor {i} is not idempotent")
    prod = reduce(lambda a, c: a @ c, factors, _eye(k, f))
    if not prod.approx_equal(b.T1, tol):
        raise ProductMismatch("the factors do not multiply to T1")
    Q0 = block2x2(_eye(k, f), b.T2, _zero(l, k, f), _zero(l, l, f))
    lifted = [block2x2(E, _zero(k, l, f), _zero(l, k, f), _eye(l, f)) for E in factors]
    kind = TwoIdempotentCertificate if len(lifted) == 1 else FactorizationCertificate
    cert = kind(
        target=b.assemble(),
        factors=tuple(_to_ambient(d, Q) for Q in [Q0, *lifted]),
        recipe="lift",
        decomposition=d,
        parameters={"B": b.T2},
    )
    return checked(cert, tol)


# -- recipes ---------------------------------------------------------------


def factor_corner_pair(B: Matrix, C: Matrix, d: Decomposition, order: str = "KL", tol: float = 1e-9):
    """``[[BC, B], [0, 0]]`` (order ``KL``) or ``[[0, 0], [C, CB]]`` (order ``LK``)."""
    f = d.field
    k, l = d.k, d.l
    if B.shape != (k, l) or C.shape != (l, k):
        raise DimensionMismatch(f"need B of shape {(k, l)} and C of shape {(l, k)}")
    E1 = block2x2(_eye(k, f), B, _zero(l, k, f), _zero(l, l, f))
    E2 = block2x2(_zero(k, k, f), _zero(k, l, f), C, _eye(l, f))
    if order == "KL":
        first, second = E1, E2
    elif order == "LK":
        first, second = E2, E1
    else:
        raise ValueError("order must be 'KL' or 'LK'")
    T = first @ second
    b = BlockRep(d, T.submatrix(0, k, 0, k), T.submatrix(0, k, k, k + l),
                 T.submatrix(k, k + l, 0, k), T.submatrix(k, k + l, k, k + l))
    return _two(b, first, second, "corner_pair", {"B": B, "C": C}, tol)


def factor_range_swallow(b: BlockRep, tol: float = 1e-9, rtol: float = DEFAULT_RTOL) -> TwoIdempotentCertificate:
    _require_local(b, tol)
    T1, T2 = b.T1, b.T2
    if not range_included(T1, T2, rtol):
        raise NotApplicable("R(T1) is not contained in R(T2)", ["R(T1) ⊄ R(T2)"])
    f, k, l = b.field, b.decomposition.k, b.decomposition.l
    C = douglas_solve(T1, T2, rtol, tol)
    E1 = block2x2(_eye(k, f), T2, _zero(l, k, f), _zero(l, l, f))
    E2 = block2x2(_zero(k, k, f), _zero(k, l, f), C, _eye(l, f))
    return _two(b, E1, E2, "range_swallow", {"C": C}, tol)


def factor_range_swallow_mirror(b: BlockRep, tol: float = 1e-9, rtol: float = DEFAULT_RTOL) -> TwoIdempotentCertificate:
    """Operators ``[[0, 0], [S3, S4]]`` with ``R(S4) ⊆ R(S3)``."""
    T1, T2, S3, S4 = b.blocks
    eps = _tol(b.coordinate_matrix(), tol)
    if not (T1.is_zero(eps) and T2.is_zero(eps)):
        raise NotApplicable("the top block row must vanish", ["T1, T2 not both zero"])
    if not range_included(S4, S3, rtol):
        raise NotApplicable("R(S4) is not contained in R(S3)", ["R(S4) ⊄ R(S3)"])
    f, k, l = b.field, b.decomposition.k, b.decomposition.l
    B = douglas_solve(S4, S3, rtol, tol)
    F1 = block2x2(_zero(k, k, f), _zero(k, l, f), S3, _eye(l, f))
    F2 = block2x2(_eye(k, f), B, _zero(l, k, f), _zero(l, l, f))
    return _two(b, F1, F2, "range_swallow_mirror", {"B": B}, tol)


def default_J(k: int, l: int, field: Field) -> Matrix:  # noqa: E741
    """Coordinate injection of K into L: the first k standard vectors of L."""
    return _eye(l, field).submatrix(0, l, 0, k)


def factor_embed(b: BlockRep, J: Matrix | None = None, tol: float = 1e-9, rtol: float = DEFAULT_RTOL):
    _require_local(b, tol)
    T1, T2 = b.T1, b.T2
    f, k, l = b.field, b.decomposition.k, b.decomposition.l
    reasons = []
    if k > l:
        reasons.append("dim K > dim L")
    if not range_included(T2, T1, rtol):
        reasons.append("R(T2) ⊄ R(T1)")
    if reasons:
        raise NotApplicable("embedding recipe does not apply", reasons)
    if J is None:
        J = default_J(k, l, f)
    T1._check_field(J)
    if J.shape != (l, k):
        raise BadJ(f"J has shape {J.shape}, expected {(l, k)}")
    try:
        Jstar = left_inverse(J, rtol)
    except Exception as exc:
        raise BadJ("J has no left inverse") from exc
    if not (Jstar @ J).approx_equal(_eye(k, f), tol):
        raise BadJ("J* J != I")
    B = douglas_solve(T2, T1, rtol, tol)
    Ik, Il = _eye(k, f), _eye(l, f)
    E1 = block2x2(Ik, (T1 - Ik) @ Jstar + B, _zero(l, k, f), _zero(l, l, f))
    E2 = block2x2(Ik - B @ J, B - B @ J @ B, J, J @ B)
    return _two(b, E1, E2, "embed", {"B": B, "J": J}, tol)


def sample_kernel_shift_V(b: BlockRep, seed=0, rtol: float = DEFAULT_RTOL) -> Matrix:
    """Nonzero ``V = N(T1)-basis x random`` so that ``T1 V = 0``."""
    rng = _rng(seed)
    N = nullspace_basis(b.T1, rtol)
    if N.ncols == 0:
        raise BadParameter("N(T1) = {0}: no nonzero V available")
    for _ in range(MAX_ATTEMPTS):
        V = N @ random_matrix(rng, N.ncols, b.decomposition.l, b.field)
        if not V.is_zero():
            return V
    raise BadParameter("could not sample a nonzero V")


def factor_kernel_shift(b: BlockRep, V: Matrix | None = None, seed=0, tol: float = 1e-9, rtol: float = DEFAULT_RTOL):
    """``R(T1) ⊆ R(T2)`` and ``N(T1) != {0}``; ``V`` is sampled from ``seed`` when omitted."""
    _require_local(b, tol)
    T1, T2 = b.T1, b.T2
    f, k, l = b.field, b.decomposition.k, b.decomposition.l
    reasons = []
    if not range_included(T1, T2, rtol):
        reasons.append("R(T1) ⊄ R(T2)")
    if rank(T1, rtol) == k:
        reasons.append("N(T1) = {0}")
    if reasons:
        raise NotApplicable("kernel-shift recipe does not apply", reasons)
    if V is None:
        V = sample_kernel_shift_V(b, seed, rtol)
    T1._check_field(V)
    if V.shape != (k, l):
        raise BadParameter(f"V has shape {V.shape}, expected {(k, l)}")
    if not (T1 @ V).is_zero(_tol(T1, tol) * max(1.0, V.frobenius_norm())):
        raise BadParameter("R(V) is not contained in N(T1)")
    C = douglas_solve(T1, T2, rtol, tol)
    E1 = block2x2(_eye(k, f), T2 - V, _zero(l, k, f), _zero(l, l, f))
    E2 = block2x2(V @ C, V, C, _eye(l, f))
    return _two(b, E1, E2, "kernel_shift", {"C": C, "V": V}, tol)


def factor_kernel_shift_idempotent(
    b: BlockRep, V: Matrix | None = None, C: Matrix | None = None, seed=0,
    tol: float = 1e-9, rtol: float = DEFAULT_RTOL,
):
    """Idempotent ``T1 != I``.  ``C`` defaults to 0; ``V`` is sampled when omitted.

    Needs ``T1 V = 0``, ``C V = 0``, ``C T1 = 0`` and ``T2 C = 0``.
    """
    _require_local(b, tol)
    T1, T2 = b.T1, b.T2
    f, k, l = b.field, b.decomposition.k, b.decomposition.l
    reasons = []
    if not is_idempotent(T1, tol):
        reasons.append("T1 is not idempotent")
    elif T1.is_identity(_tol(T1, tol)):
        reasons.append("T1 = I")
    if reasons:
        raise NotApplicable("idempotent kernel-shift recipe does not apply", reasons)
    if C is None:
        C = _zero(l, k, f)
    T1._check_field(C)
    if C.shape != (l, k):
        raise BadParameter(f"C has shape {C.shape}, expected {(l, k)}")
    if V is None:
        rng = _rng(seed)
        N = nullspace_basis(vstack(T1, C), rtol)
        if N.ncols == 0:
            raise BadParameter("N(T1) ∩ N(C) = {0}: no nonzero V available")
        for _ in range(MAX_ATTEMPTS):
            V = N @ random_matrix(rng, N.ncols, l, f)
            if not V.is_zero():
                break
        else:
            raise BadParameter("could not sample a nonzero V")
    T1._check_field(V)
    if V.shape != (k, l):
        raise BadParameter(f"V has shape {V.shape}, expected {(k, l)}")
    eps = _tol(hstack(T1, T2, V, C.T), tol)
    for name, M in (("R(V) ⊄ N(T1)", T1 @ V), ("R(V) ⊄ N(C)", C @ V),
                    ("R(T1) ⊄ N(C)", C @ T1), ("R(C) ⊄ N(T2)", T2 @ C)):
        if not M.is_zero(eps):
            raise BadParameter(name)
    E1 = block2x2(_eye(k, f), T2 - V, _zero(l, k, f), _zero(l, l, f))
    E2 = block2x2(T1 + V @ C, V, C, _eye(l, f))
    return _two(b, E1, E2, "kernel_shift_idempotent", {"C": C, "V": V}, tol)


def _idempotent_block_gate(b: BlockRep, tol: float, rtol: float) -> list[str]:
    T1, T2 = b.T1, b.T2
    reasons = []
    if not is_idempotent(T1, tol):
        reasons.append("T1 is not idempotent")
    elif T1.is_identity(_tol(T1, tol)):
        reasons.append("T1 = I")
    if b.decomposition.l < 2:
        reasons.append("dim L < 2")
    # N(T2 - T1 T2) != {0} is exactly "N(T2) != {0} or R(T1) ∩ R(T2) != {0}".
    if rank(T2 - T1 @ T2, rtol) == b.decomposition.l:
        reasons.append("N(T2) = {0} and R(T1) ∩ R(T2) = {0}")
    return reasons


def sample_kernel_line_D(b: BlockRep, seed=0, rtol: float = DEFAULT_RTOL) -> Matrix:
    """``D = I - w phi`` with ``w`` a random vector of ``N(T2 - T1 T2)`` and ``phi w = 1``.

    D is idempotent with kernel ``span(w)``.
    """
    rng = _rng(seed)
    f, l = b.field, b.decomposition.l
    N = nullspace_basis(b.T2 - b.T1 @ b.T2, rtol)
    if N.ncols == 0:
        raise BadParameter("N(T2 - T1 T2) = {0}")
    for _ in range(MAX_ATTEMPTS):
        w = N @ random_matrix(rng, N.ncols, 1, f)
        if w.is_zero():
            continue
        phi = random_matrix(rng, 1, l, f)
        s = (phi @ w)[0, 0]
        if f.is_zero(s, 1e-12):
            continue
        phi = phi.scale(f.inv(s))
        return _eye(l, f) - w @ phi
    raise BadParameter("could not sample an admissible D")


def factor_idempotent_block(
    b: BlockRep, D: Matrix | None = None, seed=0, variant: str = "E1",
    tol: float = 1e-9, rtol: float = DEFAULT_RTOL,
):
    """Idempotent ``T1 != I``, ``dim L >= 2``; ``variant="E1prime"`` uses ``[[I, T2 D], [0, 0]]``."""
    _require_local(b, tol)
    if variant not in ("E1", "E1prime"):
        raise ValueError("variant must be 'E1' or 'E1prime'")
    reasons = _idempotent_block_gate(b, tol, rtol)
    if reasons:
        raise NotApplicable("idempotent-block recipe does not apply", reasons)
    T1, T2 = b.T1, b.T2
    f, k, l = b.field, b.decomposition.k, b.decomposition.l
    if D is None:
        D = sample_kernel_line_D(b, seed, rtol)
    T1._check_field(D)
    if D.shape != (l, l):
        raise BadParameter(f"D has shape {D.shape}, expected {(l, l)}")
    Il = _eye(l, f)
    if not is_idempotent(D, tol):
        raise BadParameter("D is not idempotent")
    nd = l - rank(D, rtol)
    if nd == 0 or nd == l:
        raise BadParameter("need {0} != N(D) != L")
    if not ((T2 - T1 @ T2) @ (Il - D)).is_zero(_tol(hstack(T1, T2), tol) * max(1.0, D.frobenius_norm())):
        raise BadParameter("N(D) is not contained in N(T2 - T1 T2)")
    top_right = T2 if variant == "E1" else T2 @ D
    E1 = block2x2(_eye(k, f), top_right, _zero(l, k, f), _zero(l, l, f))
    E2 = block2x2(T1, T2 @ (Il - D), _zero(l, k, f), D)
    recipe = "idempotent_block" if variant == "E1" else "idempotent_block_prime"
    return _two(b, E1, E2, recipe, {"D": D}, tol)


def prime_variant_coincides(b: BlockRep, D: Matrix, tol: float = 1e-9) -> bool:
    """Whether both first factors of the idempotent-block recipe agree, i.e. ``T2 D = T2``."""
    return (b.T2 @ D).approx_equal(b.T2, tol)


def factor_invertible_pair(b: BlockRep, C: Matrix, D: Matrix, tol: float = 1e-9, rtol: float = DEFAULT_RTOL):
    _require_local(b, tol)
    T1, T2 = b.T1, b.T2
    f, k, l = b.field, b.decomposition.k, b.decomposition.l
    if k != l:
        raise NotApplicable("invertible-pair recipe needs dim K = dim L", ["dim K != dim L"])
    if T1.is_identity(_tol(T1, tol)):
        raise NotApplicable("invertible-pair recipe excludes T1 = I", ["T1 = I"])
    for name, M in (("C", C), ("D", D)):
        T1._check_field(M)
        if M.shape != (k, k):
            raise BadParameter(f"{name} has shape {M.shape}, expected {(k, k)}")
        if not is_invertible(M, rtol):
            raise SingularParameter(f"{name} is singular")
    Ci, Di = inverse(C, rtol), inverse(D, rtol)
    lhs, rhs = T1 @ Ci, T2 @ Di
    if not lhs.approx_equal(rhs, tol):
        raise NotApplicable("T1 C^-1 != T2 D^-1", ["T1 C^-1 != T2 D^-1"])
    I = _eye(k, f)
    B = lhs - Ci @ (I - D)
    E1 = block2x2(I, B, _zero(k, k, f), _zero(k, k, f))
    E2 = block2x2(I - Ci @ D @ C, Ci @ (I - D) @ D, C, D)
    return _two(b, E1, E2, "invertible_pair", {"B": B, "C": C, "D": D}, tol)


def _random_invertible(rng: random.Random, n: int, f: Field, rtol: float) -> Matrix:
    for _ in range(MAX_ATTEMPTS):
        M = random_matrix(rng, n, n, f)
        if is_invertible(M, rtol):
            return M
    raise BadParameter("could not sample an invertible matrix")


# -- families --------------------------------------------------------------


def _family(make, m: int, key, rng: _WideningRandom):
    out, seen = [], set()
    for _ in range(MAX_ATTEMPTS * max(1, m)):
        if len(out) == m:
            break
        try:
            cert = make()
        except BadParameter:
            rng.widen()
            continue
        if key(cert) in seen:
            rng.widen()
            continue
        seen.add(key(cert))
        out.append(cert)
    if len(out) < m:
        raise BadParameter(f"found only {len(out)} distinct parameters out of {m}")
    return out


def kernel_shift_family(b: BlockRep, m: int, seed=0, tol: float = 1e-9, rtol: float = DEFAULT_RTOL):
    """``m`` certificates with pairwise distinct ``V`` (hence distinct second factors)."""
    rng = _WideningRandom(seed)
    return _family(lambda: factor_kernel_shift(b, None, rng, tol, rtol), m, lambda c: c.E2, rng)


def kernel_shift_idempotent_family(b: BlockRep, m: int, C: Matrix | None = None, seed=0,
                                   tol: float = 1e-9, rtol: float = DEFAULT_RTOL):
    rng = _WideningRandom(seed)
    return _family(lambda: factor_kernel_shift_idempotent(b, None, C, rng, tol, rtol), m, lambda c: c.E2, rng)


def idempotent_block_family(b: BlockRep, m: int, seed=0, variant: str = "E1",
                            tol: float = 1e-9, rtol: float = DEFAULT_RTOL):
    """``m`` certificates with pairwise distinct idempotents ``D``."""
    rng = _WideningRandom(seed)
    return _family(lambda: factor_idempotent_block(b, None, rng, variant, tol, rtol), m, lambda c: c.E2, rng)


def invertible_pair_family(b: BlockRep, C: Matrix, D: Matrix, m: int, seed=0,
                           tol: float = 1e-9, rtol: float = DEFAULT_RTOL):
    """Replace ``(C, D)`` by ``(D' C, D' D)`` for random invertible ``D'``; the first entry uses ``D' = I``."""
    rng = _WideningRandom(seed)
    k = b.decomposition.k
    state = {"first": True}

    def make():
        if state["first"]:
            state["first"] = False
            Dp = _eye(k, b.field)
        else:
            Dp = _random_invertible(rng, k, b.field, rtol)
        return factor_invertible_pair(b, Dp @ C, Dp @ D, tol, rtol)

    return _family(make, m, lambda c: c.E2, rng)


def embed_family(b: BlockRep, m: int, seed=0, tol: float = 1e-9, rtol: float = DEFAULT_RTOL):
    """Embeddings ``J = [M; 0]`` with random invertible ``M`` (the first is the default J)."""
    rng = _WideningRandom(seed)
    f, k, l = b.field, b.decomposition.k, b.decomposition.l
    state = {"first": True}

    def make():
        if state["first"]:
            state["first"] = False
            return factor_embed(b, None, tol, rtol)
        M = _random_invertible(rng, k, f, rtol)
        J = vstack(M, _zero(l - k, k, f)) if l > k else M
        return factor_embed(b, J, tol, rtol)

    return _family(make, m, lambda c: c.E2, rng)


# -- dispatcher ------------------------------------------------------------


def idempotent_certificate(T: Matrix, tol: float = 1e-9) -> FactorizationCertificate:
    if not is_idempotent(T, tol):
        raise NotApplicable("T is not idempotent", ["T^2 != T"])
    return checked(FactorizationCertificate(target=T, factors=(T,), recipe="idempotent"), tol)


def _invertible_pair_auto(b: BlockRep, tol: float, rtol: float):
    # With D = I the balance condition reads T1 = T2 C.
    k, l = b.decomposition.k, b.decomposition.l
    if k != l:
        raise NotApplicable("dim K != dim L", ["dim K != dim L"])
    try:
        C = solve_linear(b.T2, b.T1, rtol)
    except Exception:
        raise NotApplicable("no C with T1 = T2 C", ["T1 C^-1 = T2 D^-1 has no invertible solution with D = I"])
    if not is_invertible(C, rtol):
        raise NotApplicable("C is singular", ["T1 C^-1 = T2 D^-1 has no invertible solution with D = I"])
    return factor_invertible_pair(b, C, _eye(k, b.field), tol, rtol)


def _two_factor_attempts(b: BlockRep, seed, tol: float, rtol: float):
    return (
        ("range_swallow", lambda: factor_range_swallow(b, tol, rtol)),
        ("embed", lambda: factor_embed(b, None, tol, rtol)),
        ("kernel_shift", lambda: factor_kernel_shift(b, None, seed, tol, rtol)),
        ("idempotent_block", lambda: factor_idempotent_block(b, None, seed, "E1", tol, rtol)),
        ("invertible_pair", lambda: _invertible_pair_auto(b, tol, rtol)),
    )


def auto_factor(
    T: Matrix, seed=0, tol: float = 1e-9, rtol: float = DEFAULT_RTOL, recurse: bool = True,
) -> FactorizationCertificate:
    """First applicable recipe, tried in a fixed order.

    Order: idempotent, range_swallow, embed, kernel_shift, idempotent_block,
    invertible_pair, then lift (``T1`` factored by this function without
    further recursion).  Raises :class:`NoRecipeApplies` carrying the
    annihilator report and the failed preconditions of every recipe.
    """
    if not T.is_square:
        raise DimensionMismatch("auto_factor needs a square matrix")
    if is_idempotent(T, tol):
        return idempotent_certificate(T, tol)
    report = annihilator_report(T, rtol)
    if report.verdict != Verdict.PASSES_NECESSARY:
        raise NoRecipeApplies(
            "T lacks a nonzero idempotent annihilator", [f"annihilators: {report.verdict.value}"], report
        )
    d, b = local_block_rep(T, None, rtol)
    reasons: list[str] = []
    for name, attempt in _two_factor_attempts(b, seed, tol, rtol):
        try:
            cert = attempt()
        except (NotApplicable, BadParameter) as exc:
            detail = "; ".join(getattr(exc, "reasons", None) or [str(exc)])
            reasons.append(f"{name}: {detail}")
            continue
        return _retarget(cert, T, tol)
    try:
        if recurse:
            inner = auto_factor(b.T1, seed, tol, rtol, recurse=False)
            cert = lift_factorization(b, inner.factors, tol)
            return _retarget(cert, T, tol)
        reasons.append("lift: recursion depth exhausted")
    except NoRecipeApplies:
        reasons.append("lift: T1 has no factorization")
    except (NotApplicable, BadParameter, DimensionMismatch) as exc:
        detail = "; ".join(getattr(exc, "reasons", None) or [str(exc)])
        reasons.append(f"lift: {detail}")
    raise NoRecipeApplies("no recipe applies", reasons, report)


def _retarget(cert: FactorizationCertificate, T: Matrix, tol: float) -> FactorizationCertificate:
    # Over exact fields the assembled target equals T; keep the caller's matrix verbatim.
    kind = type(cert)
    return checked(kind(T, cert.factors, cert.recipe, cert.decomposition, dict(cert.parameters)), tol)


__all__ = [
    "RECIPES",
    "auto_factor",
    "corner_idempotent",
    "default_J",
    "embed_family",
    "factor_corner_pair",
    "factor_embed",
    "factor_idempotent_block",
    "factor_invertible_pair",
    "factor_kernel_shift",
    "factor_kernel_shift_idempotent",
    "factor_range_swallow",
    "factor_range_swallow_mirror",
    "idempotent_block_family",
    "idempotent_certificate",
    "invertible_pair_family",
    "kernel_shift_family",
    "kernel_shift_idempotent_family",
    "lift_factorization",
    "peel_candidate",
    "prime_variant_coincides",
    "random_matrix",
    "sample_kernel_line_D",
    "sample_kernel_shift_V",
]
