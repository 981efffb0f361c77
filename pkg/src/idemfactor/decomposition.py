"""Direct-sum decompositions ``X = K (+) L`` and 2x2 block representations.

A :class:`Decomposition` stores bases of K and L as the columns of
``P = [K_basis | L_basis]``.  Blocks live in those coordinates: for an n x n
operator ``T`` the matrix ``P^-1 T P`` is cut into ``T1`` (k x k), ``T2``
(k x l), ``T3`` (l x k) and ``T4`` (l x l), so ``T1 = p_K T i_K`` and so on.
Block equations then become literal matrix equations on small matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property

from .errors import (
    BadDimension,
    DependentColumns,
    DimensionMismatch,
    FieldUnsupported,
    NotApplicable,
)
from .fields import F64, DEFAULT_RTOL, Field
from .matrix import (
    Matrix,
    block2x2,
    colspace_basis,
    hstack,
    inverse,
    nullspace_basis,
    rank,
)


@dataclass(frozen=True, eq=False)
class Decomposition:
    """``X = span(K_basis) (+) span(L_basis)`` with ``1 <= k <= n - 1``."""

    K_basis: Matrix
    L_basis: Matrix
    orthogonal: bool = dc_field(default=False, compare=False)

    def __post_init__(self):
        K, L = self.K_basis, self.L_basis
        K._check_field(L)
        n = K.nrows
        if L.nrows != n:
            raise DimensionMismatch("K and L bases live in different ambient spaces")
        if K.ncols + L.ncols != n:
            raise BadDimension(f"dim K + dim L = {K.ncols + L.ncols}, ambient dimension {n}")
        if not 1 <= K.ncols <= n - 1:
            raise BadDimension("need {0} != K != X")
        if rank(self.P) != n:
            raise DependentColumns("[K_basis | L_basis] is not a basis")

    @property
    def field(self) -> Field:
        return self.K_basis.field

    @property
    def n(self) -> int:
        return self.K_basis.nrows

    @property
    def k(self) -> int:
        return self.K_basis.ncols

    @property
    def l(self) -> int:  # noqa: E743
        return self.L_basis.ncols

    @cached_property
    def P(self) -> Matrix:
        return hstack(self.K_basis, self.L_basis)

    @cached_property
    def P_inv(self) -> Matrix:
        return inverse(self.P)

    def __eq__(self, other):
        if not isinstance(other, Decomposition):
            return NotImplemented
        return self.K_basis == other.K_basis and self.L_basis == other.L_basis

    def __hash__(self):
        return hash((self.K_basis, self.L_basis))

    @classmethod
    def standard(cls, k: int, l: int, field: Field) -> "Decomposition":  # noqa: E741
        """K spanned by the first k standard vectors, L by the remaining l."""
        I = Matrix.identity(k + l, field)
        return cls(I.submatrix(0, k + l, 0, k), I.submatrix(0, k + l, k, k + l))

    def swapped(self) -> "Decomposition":
        """The mirrored decomposition ``X = L (+) K``."""
        return Decomposition(self.L_basis, self.K_basis, self.orthogonal)

    def to_json(self) -> dict:
        return {"K_basis": self.K_basis.to_json(), "L_basis": self.L_basis.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "Decomposition":
        return cls(Matrix.from_json(obj["K_basis"]), Matrix.from_json(obj["L_basis"]))


def _check_independent(K_basis: Matrix, n: int | None):
    n = K_basis.nrows if n is None else n
    if K_basis.nrows != n:
        raise DimensionMismatch(f"K_basis has {K_basis.nrows} rows, ambient dimension is {n}")
    k = K_basis.ncols
    if not 1 <= k <= n - 1:
        raise BadDimension(f"dim K = {k} must satisfy 1 <= dim K <= {n - 1}")
    if rank(K_basis) != k:
        raise DependentColumns("K_basis columns are dependent")
    return n


def extend_to_complement(K_basis: Matrix, n: int | None = None) -> Decomposition:
    """Complete ``K_basis`` greedily with standard basis vectors e_1, e_2, ...

    Each e_j is kept iff it is independent of everything chosen so far.
    """
    n = _check_independent(K_basis, n)
    field = K_basis.field
    I = Matrix.identity(n, field)
    current = K_basis
    chosen = []
    r = K_basis.ncols
    for j in range(n):
        if r == n:
            break
        trial = hstack(current, I.select_columns([j]))
        if rank(trial) > r:
            current, r = trial, r + 1
            chosen.append(j)
    return Decomposition(K_basis, I.select_columns(chosen))


def _gram_schmidt(cols: list[list], field: Field) -> list[list]:
    out: list[list] = []
    for v in cols:
        w = list(v)
        for u in out:
            uu = sum(x * x for x in u)
            c = sum(x * y for x, y in zip(w, u)) / uu
            w = [x - c * y for x, y in zip(w, u)]
        out.append(w)
    if field is F64:
        out = [[x / sum(y * y for y in w) ** 0.5 for x in w] for w in out]
    return out


def orthogonal_complement(K_basis: Matrix, n: int | None = None) -> Decomposition:
    """``X = K (+)perp L`` with L the orthogonal complement (Q and F64 only).

    L's basis is orthogonalized by Gram-Schmidt; over F64 both bases are
    additionally normalized, giving an orthonormal change of basis.
    """
    n = _check_independent(K_basis, n)
    field = K_basis.field
    if not field.has_inner_product:
        raise FieldUnsupported(f"no orthogonal complements over {field.name}")
    L = nullspace_basis(K_basis.T)
    Lcols = _gram_schmidt([list(c) for c in L.columns()], field)
    Kcols = [list(c) for c in K_basis.columns()]
    if field is F64:
        Kcols = _gram_schmidt(Kcols, field)
    return Decomposition(
        Matrix.from_columns(Kcols, n, field), Matrix.from_columns(Lcols, n, field), orthogonal=True
    )


def projector(d: Decomposition) -> Matrix:
    """The idempotent with range K and nullspace L: ``P diag(I_k, 0) P^-1``."""
    return d.K_basis @ d.P_inv.submatrix(0, d.k, 0, d.n)


def complement_projector(d: Decomposition) -> Matrix:
    """``I - p_K``: range L, nullspace K."""
    return d.L_basis @ d.P_inv.submatrix(d.k, d.n, 0, d.n)


@dataclass(frozen=True, eq=False)
class BlockRep:
    """Blocks of an operator relative to ``decomposition``, in its coordinates."""

    decomposition: Decomposition
    T1: Matrix
    T2: Matrix
    T3: Matrix
    T4: Matrix

    def __post_init__(self):
        d = self.decomposition
        k, l = d.k, d.l
        expected = {"T1": (k, k), "T2": (k, l), "T3": (l, k), "T4": (l, l)}
        for name, shape in expected.items():
            m = getattr(self, name)
            m._check_field(d.K_basis)
            if m.shape != shape:
                raise DimensionMismatch(f"{name} has shape {m.shape}, expected {shape}")

    @classmethod
    def local(cls, d: Decomposition, T1: Matrix, T2: Matrix) -> "BlockRep":
        """``[[T1, T2], [0, 0]]``."""
        f = d.field
        return cls(d, T1, T2, Matrix.zeros(d.l, d.k, f), Matrix.zeros(d.l, d.l, f))

    @property
    def field(self) -> Field:
        return self.decomposition.field

    @property
    def is_local(self) -> bool:
        return self.T3.is_zero() and self.T4.is_zero()

    def is_local_approx(self, tol: float) -> bool:
        return self.T3.is_zero(tol) and self.T4.is_zero(tol)

    @property
    def blocks(self) -> tuple[Matrix, Matrix, Matrix, Matrix]:
        return (self.T1, self.T2, self.T3, self.T4)

    def coordinate_matrix(self) -> Matrix:
        """``P^-1 T P`` as one (k+l) x (k+l) matrix."""
        return block2x2(self.T1, self.T2, self.T3, self.T4)

    def assemble(self) -> Matrix:
        d = self.decomposition
        return d.P @ self.coordinate_matrix() @ d.P_inv

    def __matmul__(self, other: "BlockRep") -> "BlockRep":
        if other.decomposition != self.decomposition:
            raise DimensionMismatch("block products need a common decomposition")
        a1, a2, a3, a4 = self.blocks
        b1, b2, b3, b4 = other.blocks
        return BlockRep(
            self.decomposition,
            a1 @ b1 + a2 @ b3,
            a1 @ b2 + a2 @ b4,
            a3 @ b1 + a4 @ b3,
            a3 @ b2 + a4 @ b4,
        )

    def __eq__(self, other):
        if not isinstance(other, BlockRep):
            return NotImplemented
        return self.decomposition == other.decomposition and self.blocks == other.blocks

    def __hash__(self):
        return hash((self.decomposition, self.blocks))

    def to_json(self) -> dict:
        return {
            "decomposition": self.decomposition.to_json(),
            "T1": self.T1.to_json(),
            "T2": self.T2.to_json(),
            "T3": self.T3.to_json(),
            "T4": self.T4.to_json(),
            "local": self.is_local,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BlockRep":
        d = Decomposition.from_json(obj["decomposition"])
        return cls(d, *(Matrix.from_json(obj[name]) for name in ("T1", "T2", "T3", "T4")))


def block_rep(T: Matrix, d: Decomposition) -> BlockRep:
    if not T.is_square or T.nrows != d.n:
        raise DimensionMismatch(f"operator of shape {T.shape} on a {d.n}-dimensional decomposition")
    M = d.P_inv @ T @ d.P
    k, n = d.k, d.n
    return BlockRep(
        d,
        M.submatrix(0, k, 0, k),
        M.submatrix(0, k, k, n),
        M.submatrix(k, n, 0, k),
        M.submatrix(k, n, k, n),
    )


def assemble(b: BlockRep) -> Matrix:
    return b.assemble()


def local_block_rep(
    T: Matrix, K_basis: Matrix | None = None, rtol: float = DEFAULT_RTOL
) -> tuple[Decomposition, BlockRep]:
    """Block form ``[[T1, T2], [0, 0]]`` with K containing R(T).

    By default K is exactly R(T) (its pivot columns) and L the greedy
    standard complement.  A caller-supplied ``K_basis`` must span a proper
    subspace containing R(T).

    Raises :class:`NotApplicable` when T = 0 or R(T) = X (then T has no
    nonzero left annihilator and no proper K exists).
    """
    if not T.is_square:
        raise DimensionMismatch("local block representation needs a square operator")
    n = T.nrows
    if T.is_zero():
        raise NotApplicable("T = 0 has no local block representation")
    if K_basis is None:
        K_basis = colspace_basis(T, rtol)
        if K_basis.ncols == n:
            raise NotApplicable("R(T) = X: no nonzero left annihilator")
    else:
        k = rank(K_basis, rtol)
        if rank(hstack(K_basis, T), rtol) != k:
            raise NotApplicable("supplied K does not contain R(T)")
    d = extend_to_complement(K_basis, n)
    b = block_rep(T, d)
    if T.field.exact and not b.is_local:
        raise AssertionError("local block representation has nonzero lower blocks")
    if not T.field.exact:
        f = T.field
        b = BlockRep(d, b.T1, b.T2, Matrix.zeros(d.l, d.k, f), Matrix.zeros(d.l, d.l, f))
    return d, b
