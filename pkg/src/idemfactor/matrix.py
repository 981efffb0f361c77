"""Dense immutable matrices over a :class:`~idemfactor.fields.Field`.

Everything here is elimination-based: one Gauss-Jordan routine drives
rank, RREF, kernel and column-space bases, inverses and ``A X = B`` solves.
Exact fields pivot on the first nonzero entry; the float field uses partial
pivoting and treats ``|x| < rtol * max|M|`` as zero.

Basis conventions are fixed so that certificates serialize identically on
every run:

* ``nullspace_basis`` takes free columns in increasing order, sets the free
  coordinate to 1 and the other free coordinates to 0;
* ``colspace_basis`` returns the pivot columns of the *original* matrix;
* ``solve_linear`` sets every free variable to 0.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    FieldMismatch,
    FieldUnsupported,
    NonSquare,
    NoSolution,
    SingularMatrix,
)
from .fields import DEFAULT_RTOL, F64, QQ, Field, get_field


class Matrix:
    """An ``nrows x ncols`` matrix whose entries all live in ``field``.

    Construct from a nested sequence of rows; entries are coerced by the
    field (``"3/4"`` and ``Fraction`` for Q, ints for GF(p), floats for F64).
    Empty shapes need :meth:`zeros` since a row list cannot carry a column
    count.
    """

    __slots__ = ("field", "nrows", "ncols", "_data", "_hash")

    def __init__(self, rows: Sequence[Sequence], field: Field = QQ):
        coerce = field.coerce
        data = tuple(tuple(coerce(x) for x in row) for row in rows)
        ncols = len(data[0]) if data else 0
        if any(len(r) != ncols for r in data):
            raise DimensionMismatch("ragged rows")
        self._set(field, len(data), ncols, data)

    def _set(self, field, nrows, ncols, data):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "nrows", nrows)
        object.__setattr__(self, "ncols", ncols)
        object.__setattr__(self, "_data", data)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    @classmethod
    def _raw(cls, field: Field, nrows: int, ncols: int, data) -> "Matrix":
        m = object.__new__(cls)
        m._set(field, nrows, ncols, data)
        return m

    # -- constructors -------------------------------------------------

    @classmethod
    def zeros(cls, nrows: int, ncols: int, field: Field = QQ) -> "Matrix":
        z = field.zero
        return cls._raw(field, nrows, ncols, tuple((z,) * ncols for _ in range(nrows)))

    @classmethod
    def identity(cls, n: int, field: Field = QQ) -> "Matrix":
        z, o = field.zero, field.one
        return cls._raw(
            field, n, n, tuple(tuple(o if i == j else z for j in range(n)) for i in range(n))
        )

    @classmethod
    def column(cls, values: Iterable, field: Field = QQ) -> "Matrix":
        return cls([[v] for v in values], field)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], nrows: int, field: Field = QQ) -> "Matrix":
        if not columns:
            return cls.zeros(nrows, 0, field)
        m = cls([list(c) for c in columns], field)
        if m.ncols != nrows:
            raise DimensionMismatch("column length does not match nrows")
        return m.T

    @classmethod
    def from_numpy(cls, arr, field: Field = F64) -> "Matrix":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise DimensionMismatch("expected a 2-d array")
        if field is F64:
            data = tuple(tuple(float(x) for x in row) for row in arr.tolist())
            return cls._raw(field, arr.shape[0], arr.shape[1], data)
        return cls(arr.tolist(), field) if arr.shape[0] else cls.zeros(0, arr.shape[1], field)

    # -- access -------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def __getitem__(self, idx):
        i, j = idx
        return self._data[i][j]

    def row(self, i: int) -> tuple:
        return self._data[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self._data)

    def columns(self) -> list[tuple]:
        return [self.col(j) for j in range(self.ncols)]

    def tolist(self) -> list[list]:
        return [list(r) for r in self._data]

    def entries(self):
        for r in self._data:
            yield from r

    def to_numpy(self, dtype=float) -> np.ndarray:
        if self.field is QQ and dtype is float:
            return np.array([[float(x) for x in r] for r in self._data], dtype=float).reshape(self.shape)
        return np.array(self.tolist(), dtype=dtype).reshape(self.shape)

    @property
    def T(self) -> "Matrix":
        if self.nrows == 0:
            return Matrix.zeros(self.ncols, 0, self.field)
        return Matrix._raw(self.field, self.ncols, self.nrows, tuple(zip(*self._data)))

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "Matrix":
        return Matrix._raw(
            self.field, r1 - r0, c1 - c0, tuple(r[c0:c1] for r in self._data[r0:r1])
        )

    def select_columns(self, cols: Sequence[int]) -> "Matrix":
        return Matrix._raw(
            self.field, self.nrows, len(cols), tuple(tuple(r[j] for j in cols) for r in self._data)
        )

    # -- arithmetic ---------------------------------------------------

    def _check_field(self, other: "Matrix"):
        if not isinstance(other, Matrix):
            raise TypeError(f"expected Matrix, got {type(other).__name__}")
        if other.field is not self.field:
            raise FieldMismatch(f"cannot combine {self.field.name} with {other.field.name}")

    def _elementwise(self, other: "Matrix", op) -> "Matrix":
        self._check_field(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"shapes {self.shape} and {other.shape} differ")
        red = self.field.reduce
        data = tuple(
            tuple(red(op(a, b)) for a, b in zip(ra, rb)) for ra, rb in zip(self._data, other._data)
        )
        return Matrix._raw(self.field, self.nrows, self.ncols, data)

    def __add__(self, other):
        return self._elementwise(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._elementwise(other, lambda a, b: a - b)

    def __neg__(self):
        red = self.field.reduce
        return Matrix._raw(
            self.field, self.nrows, self.ncols, tuple(tuple(red(-a) for a in r) for r in self._data)
        )

    def scale(self, c) -> "Matrix":
        c = self.field.coerce(c)
        red = self.field.reduce
        return Matrix._raw(
            self.field, self.nrows, self.ncols, tuple(tuple(red(c * a) for a in r) for r in self._data)
        )

    def __mul__(self, c):
        if isinstance(c, Matrix):
            raise TypeError("use @ for matrix products")
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check_field(other)
        if self.ncols != other.nrows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        field = self.field
        red, zero = field.reduce, field.zero
        if other.ncols == 0 or self.nrows == 0:
            return Matrix.zeros(self.nrows, other.ncols, field)
        cols = tuple(zip(*other._data)) if other.nrows else ((),) * other.ncols
        data = tuple(
            tuple(red(sum((a * b for a, b in zip(r, c)), zero)) for c in cols) for r in self._data
        )
        return Matrix._raw(field, self.nrows, other.ncols, data)

    def __pow__(self, k: int) -> "Matrix":
        if not self.is_square:
            raise NonSquare("power of a non-square matrix")
        out = Matrix.identity(self.nrows, self.field)
        for _ in range(k):
            out = out @ self
        return out

    # -- predicates ---------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.field is other.field and self.shape == other.shape and self._data == other._data
        )

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.field.name, self.shape, self._data)))
        return self._hash

    def max_abs(self) -> float:
        mag = self.field.magnitude
        return max((mag(x) for x in self.entries()), default=0.0)

    def frobenius_norm(self) -> float:
        return float(sum(self.field.magnitude(x) ** 2 for x in self.entries()) ** 0.5)

    def is_zero(self, tol: float = 0.0) -> bool:
        """True when every entry is zero; for floats, when ``||M||_F <= tol``."""
        if self.field.exact:
            return all(x == 0 for x in self.entries())
        return self.frobenius_norm() <= tol

    def is_identity(self, tol: float = 0.0) -> bool:
        return self.is_square and (self - Matrix.identity(self.nrows, self.field)).is_zero(tol)

    def approx_equal(self, other: "Matrix", tol: float = 1e-9) -> bool:
        """Exact equality for exact fields; relative Frobenius test for floats."""
        self._check_field(other)
        if self.shape != other.shape:
            return False
        if self.field.exact:
            return self._data == other._data
        scale = max(1.0, self.frobenius_norm(), other.frobenius_norm())
        return (self - other).frobenius_norm() <= tol * scale

    # -- serialization -----------------------------------------------

    def to_json(self) -> dict:
        enc = self.field.to_json
        out = {"field": self.field.name, "rows": [[enc(x) for x in r] for r in self._data]}
        if self.nrows == 0 or self.ncols == 0:
            out["shape"] = [self.nrows, self.ncols]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Matrix":
        if not isinstance(obj, dict) or "field" not in obj or "rows" not in obj:
            raise ValueError("matrix JSON needs 'field' and 'rows'")
        field = get_field(obj["field"])
        rows = obj["rows"]
        if not isinstance(rows, list) or any(not isinstance(r, list) for r in rows):
            raise ValueError("'rows' must be a list of lists")
        if "shape" in obj and (not rows or not rows[0]):
            r, c = obj["shape"]
            return cls.zeros(int(r), int(c), field)
        conv = field.from_json
        return cls([[conv(x) for x in r] for r in rows], field)

    def __repr__(self):
        body = "; ".join(", ".join(str(x) for x in r) for r in self._data)
        return f"Matrix[{self.field.name} {self.nrows}x{self.ncols}]([{body}])"


# -- block helpers ------------------------------------------------------


def hstack(*ms: Matrix) -> Matrix:
    first = ms[0]
    for m in ms[1:]:
        first._check_field(m)
        if m.nrows != first.nrows:
            raise DimensionMismatch("hstack needs equal row counts")
    data = tuple(sum((m._data[i] for m in ms), ()) for i in range(first.nrows))
    return Matrix._raw(first.field, first.nrows, sum(m.ncols for m in ms), data)


def vstack(*ms: Matrix) -> Matrix:
    first = ms[0]
    for m in ms[1:]:
        first._check_field(m)
        if m.ncols != first.ncols:
            raise DimensionMismatch("vstack needs equal column counts")
    data = sum((m._data for m in ms), ())
    return Matrix._raw(first.field, sum(m.nrows for m in ms), first.ncols, data)


def block2x2(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Matrix:
    """Assemble ``[[a, b], [c, d]]``."""
    return vstack(hstack(a, b), hstack(c, d))


# -- elimination --------------------------------------------------------


class RREF(NamedTuple):
    R: Matrix
    pivots: list[int]
    rank: int


def _eliminate(M: Matrix, pivot_limit: int | None = None, rtol: float = DEFAULT_RTOL):
    """Gauss-Jordan on a mutable copy; pivots are searched in the first
    ``pivot_limit`` columns only (row operations still span the full width)."""
    field = M.field
    rows = [list(r) for r in M._data]
    m, n = M.nrows, M.ncols
    limit = n if pivot_limit is None else pivot_limit
    pivots: list[int] = []
    exact = field.exact
    tol = 0.0 if exact else rtol * M.max_abs()
    red, div = field.reduce, field.div
    r = 0
    for c in range(limit):
        if r == m:
            break
        if exact:
            piv = next((i for i in range(r, m) if rows[i][c] != 0), None)
        else:
            piv = max(range(r, m), key=lambda i: abs(rows[i][c]))
            if abs(rows[piv][c]) <= tol:
                for i in range(r, m):
                    rows[i][c] = 0.0
                piv = None
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][c]
        prow = [div(x, pv) for x in rows[r]]
        prow[c] = field.one
        rows[r] = prow
        for i in range(m):
            if i == r:
                continue
            f = rows[i][c]
            if f == 0:
                continue
            ri = rows[i]
            rows[i] = [red(x - f * y) for x, y in zip(ri, prow)]
            rows[i][c] = field.zero
        if not exact:
            for i in range(m):
                rows[i] = [0.0 if abs(x) <= tol else x for x in rows[i]]
        pivots.append(c)
        r += 1
    return rows, pivots


def rref(M: Matrix, rtol: float = DEFAULT_RTOL) -> RREF:
    """Reduced row echelon form, pivot columns and rank of ``M``."""
    rows, pivots = _eliminate(M, rtol=rtol)
    R = Matrix._raw(M.field, M.nrows, M.ncols, tuple(tuple(r) for r in rows))
    return RREF(R, pivots, len(pivots))


def rank(M: Matrix, rtol: float = DEFAULT_RTOL) -> int:
    return rref(M, rtol).rank


def nullity(M: Matrix, rtol: float = DEFAULT_RTOL) -> int:
    return M.ncols - rank(M, rtol)


def nullspace_basis(M: Matrix, rtol: float = DEFAULT_RTOL) -> Matrix:
    """Columns form a basis of N(M) (see module docstring for the convention)."""
    R, pivots, _ = rref(M, rtol)
    field = M.field
    n = M.ncols
    pivset = set(pivots)
    free = [j for j in range(n) if j not in pivset]
    cols = []
    for f in free:
        v = [field.zero] * n
        v[f] = field.one
        for i, p in enumerate(pivots):
            v[p] = field.reduce(-R[i, f])
        cols.append(v)
    return Matrix.from_columns(cols, n, field)


def colspace_basis(M: Matrix, rtol: float = DEFAULT_RTOL) -> Matrix:
    """Pivot columns of ``M`` itself (not of its RREF)."""
    return M.select_columns(rref(M, rtol).pivots)


def solve_linear(A: Matrix, B: Matrix, rtol: float = DEFAULT_RTOL) -> Matrix:
    """One solution of ``A X = B`` with all free variables set to zero.

    Raises :class:`NoSolution` if some column of ``B`` lies outside R(A).
    Over exact fields the returned ``X`` satisfies ``A X = B`` exactly; the
    map ``B -> X`` is linear, so ``B n = 0`` implies ``X n = 0``.
    """
    A._check_field(B)
    if A.nrows != B.nrows:
        raise DimensionMismatch("solve_linear: A and B need the same number of rows")
    n = A.ncols
    aug = hstack(A, B)
    rows, pivots = _eliminate(aug, pivot_limit=n, rtol=rtol)
    field = A.field
    r = len(pivots)
    if field.exact:
        inconsistent = any(x != 0 for row in rows[r:] for x in row[n:])
    else:
        scale = max(1.0, aug.max_abs())
        inconsistent = any(abs(x) > 1e-9 * scale for row in rows[r:] for x in row[n:])
    if inconsistent:
        raise NoSolution("right-hand side is not in the column space")
    X = [[field.zero] * B.ncols for _ in range(n)]
    for i, p in enumerate(pivots):
        X[p] = rows[i][n:]
    if n == 0:
        return Matrix.zeros(0, B.ncols, field)
    return Matrix._raw(field, n, B.ncols, tuple(tuple(r) for r in X))


def inverse(M: Matrix, rtol: float = DEFAULT_RTOL) -> Matrix:
    if not M.is_square:
        raise NonSquare("inverse of a non-square matrix")
    if rank(M, rtol) != M.nrows:
        raise SingularMatrix("matrix is singular")
    return solve_linear(M, Matrix.identity(M.nrows, M.field), rtol)


def is_invertible(M: Matrix, rtol: float = DEFAULT_RTOL) -> bool:
    return M.is_square and rank(M, rtol) == M.nrows


def pseudoinverse(M: Matrix, rtol: float = DEFAULT_RTOL) -> Matrix:
    """Moore-Penrose inverse.

    Over Q it is built from the full-rank factorization ``M = F G`` (``F`` the
    pivot columns, ``G`` the nonzero RREF rows) as
    ``G^T (G G^T)^-1 (F^T F)^-1 F^T`` and is exact.  Over F64 it defers to
    ``numpy.linalg.pinv``.  GF(p) has no inner product, so it is refused.
    """
    field = M.field
    if not field.has_inner_product:
        raise FieldUnsupported(f"pseudoinverse is undefined over {field.name}; use solve_linear")
    m, n = M.shape
    if m == 0 or n == 0:
        return Matrix.zeros(n, m, field)
    if field is F64:
        return Matrix.from_numpy(np.linalg.pinv(M.to_numpy()), F64)
    R, pivots, r = rref(M, rtol)
    if r == 0:
        return Matrix.zeros(n, m, field)
    F = M.select_columns(pivots)
    G = R.submatrix(0, r, 0, n)
    Gt, Ft = G.T, F.T
    return Gt @ inverse(G @ Gt) @ inverse(Ft @ F) @ Ft


def left_inverse(J: Matrix, rtol: float = DEFAULT_RTOL) -> Matrix:
    """Some ``J*`` with ``J* J = I``; ``J`` must have independent columns.

    Uses the pseudoinverse where it exists, otherwise solves ``J^T Y = I``.
    """
    if rank(J, rtol) != J.ncols:
        raise SingularMatrix("left inverse needs independent columns")
    if J.field.has_inner_product:
        return pseudoinverse(J, rtol)
    return solve_linear(J.T, Matrix.identity(J.ncols, J.field), rtol).T


def residual(M: Matrix):
    """Size of a matrix that should vanish.

    Exact Q gives the largest absolute entry as a Fraction, GF(p) the number
    of nonzero entries, F64 the Frobenius norm.  Zero means "holds".
    """
    if M.field is QQ:
        return max((abs(x) for x in M.entries()), default=QQ.zero)
    if M.field is F64:
        return M.frobenius_norm()
    return sum(1 for x in M.entries() if x != 0)


def residual_to_json(value):
    if isinstance(value, float):
        return value
    if isinstance(value, int):
        return value
    return str(value)
