"""Exact idempotent index over M_n(GF(p)) by breadth-first semigroup closure.

Matrices are packed into integer keys: base-p digits, row-major, first
entry most significant.  Layer ``t`` holds the matrices whose shortest
factorization into idempotents has exactly ``t`` factors; layer 1 is the set
of idempotents itself, 0 and I included (both get index 1 by convention).
Since I is idempotent, the set of all ``t``-fold products is the union of
layers ``1..t``.

A new element ``x = y e`` (``y`` in the previous layer, ``e`` idempotent)
records ``witness(x) = witness(y) + [e]``.  Among all such pairs the one with
the smallest ``(key(e), key(y))`` wins, so witnesses do not depend on how
the frontier is split across threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import TooLarge
from .fields import SUPPORTED_PRIMES, gf
from .matrix import Matrix, colspace_basis, hstack, rank

MAX_UNIVERSE = 2_000_000
MAX_N = 3


def _check_size(n: int, p: int):
    if p not in SUPPORTED_PRIMES:
        raise TooLarge(f"p = {p} is not one of {SUPPORTED_PRIMES}")
    if n < 1:
        raise ValueError("n must be positive")
    if n > MAX_N or p ** (n * n) > MAX_UNIVERSE:
        raise TooLarge(f"M_{n}(GF({p})) has {p ** (n * n)} elements; the limit is n <= {MAX_N}, {MAX_UNIVERSE} elements")


def _weights(n: int, p: int) -> np.ndarray:
    return p ** np.arange(n * n - 1, -1, -1, dtype=np.int64)


def pack(arr: np.ndarray, p: int) -> np.ndarray:
    """Keys of a stack of n x n integer matrices (shape ``(..., n, n)``)."""
    n = arr.shape[-1]
    flat = arr.reshape(*arr.shape[:-2], n * n).astype(np.int64)
    return flat @ _weights(n, p)


def unpack(keys, n: int, p: int) -> np.ndarray:
    keys = np.asarray(keys, dtype=np.int64)
    digits = (keys[..., None] // _weights(n, p)) % p
    return digits.reshape(*keys.shape, n, n)


def _all_matrices(n: int, p: int) -> np.ndarray:
    return unpack(np.arange(p ** (n * n), dtype=np.int64), n, p)


def key_of(M: Matrix) -> int:
    p = M.field.p
    n = M.nrows
    return int(pack(np.array(M.tolist(), dtype=np.int64).reshape(1, n, n), p)[0])


def matrix_of(key: int, n: int, p: int) -> Matrix:
    return Matrix(unpack(np.array([key]), n, p)[0].tolist(), gf(p))


def _idempotent_keys(n: int, p: int) -> np.ndarray:
    _check_size(n, p)
    A = _all_matrices(n, p)
    sq = np.einsum("aij,ajk->aik", A, A) % p
    mask = (sq == A).all(axis=(1, 2))
    return np.sort(pack(A[mask], p))


def enumerate_idempotents(n: int, p: int) -> set:
    """Every ``M`` in M_n(GF(p)) with ``M^2 = M``."""
    return {matrix_of(int(k), n, p) for k in _idempotent_keys(n, p)}


def _resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("IDEMFACTOR_THREADS", "1") or 1)
    return max(1, int(threads))


def _row_table(rkeys: np.ndarray, n: int, p: int) -> np.ndarray:
    """``table[j, r]`` = packed row ``r E_j`` for every row vector ``r`` (packed base p)."""
    rows = (np.arange(p ** n, dtype=np.int64)[:, None] // p ** np.arange(n - 1, -1, -1)) % p
    E = unpack(rkeys, n, p)
    prod = np.einsum("ri,aik->ark", rows, E) % p
    return prod @ (p ** np.arange(n - 1, -1, -1, dtype=np.int64))


def _row_digits(ykeys: np.ndarray, n: int, p: int) -> list[np.ndarray]:
    block = p ** n
    return [(ykeys // block ** (n - 1 - i)) % block for i in range(n)]


def _products(ykeys: np.ndarray, ekeys: np.ndarray, n: int, p: int, table: np.ndarray | None = None):
    """Keys of all products ``y e`` with the factor keys alongside, flattened ``y``-major."""
    if table is None:
        table = _row_table(ekeys, n, p)
    block = p ** n
    x = np.zeros((len(ykeys), len(ekeys)), dtype=np.int64)
    for r in _row_digits(np.asarray(ykeys, dtype=np.int64), n, p):
        x = x * block + table[:, r].T
    yk = np.repeat(ykeys, len(ekeys))
    ek = np.tile(ekeys, len(ykeys))
    return x.ravel(), ek, yk


def _first_per_key(x, ek, yk):
    order = np.lexsort((yk, ek, x))
    x, ek, yk = x[order], ek[order], yk[order]
    first = np.ones(len(x), dtype=bool)
    first[1:] = x[1:] != x[:-1]
    return x[first], ek[first], yk[first]


CHUNK_PRODUCTS = 1 << 22


@dataclass(frozen=True, eq=False)
class IndexAtlas:
    """Complete index data for M_n(GF(p)), up to ``t_max`` layers."""

    n: int
    p: int
    idempotent_keys: tuple
    layers: tuple
    parent: dict = dc_field(repr=False)
    index: dict = dc_field(repr=False)
    closed: bool = True
    t_max: int | None = None

    @property
    def field(self):
        return gf(self.p)

    @property
    def universe_size(self) -> int:
        return self.p ** (self.n * self.n)

    @property
    def reachable_size(self) -> int:
        return len(self.index)

    def key(self, M: Matrix) -> int:
        if M.field is not self.field or M.shape != (self.n, self.n):
            raise ValueError(f"expected an {self.n}x{self.n} matrix over GF({self.p})")
        return key_of(M)

    def matrix(self, key: int) -> Matrix:
        return matrix_of(key, self.n, self.p)

    def idempotents(self) -> set:
        return {self.matrix(k) for k in self.idempotent_keys}

    def index_of(self, M: Matrix):
        """Layer number; ``math.inf`` when unreachable; ``None`` when the search stopped early."""
        k = self.key(M)
        if k in self.index:
            return self.index[k]
        return math.inf if self.closed else None

    def witness_keys(self, key: int) -> list[int] | None:
        if key not in self.index:
            return None
        out = []
        while key is not None:
            prev, e = self.parent[key]
            out.append(e)
            key = prev
        return out[::-1]

    def witness(self, M: Matrix) -> list[Matrix] | None:
        keys = self.witness_keys(self.key(M))
        return None if keys is None else [self.matrix(k) for k in keys]

    def layer(self, t: int) -> list[Matrix]:
        return [self.matrix(k) for k in self.layers[t - 1]] if 1 <= t <= len(self.layers) else []

    def cumulative_keys(self, t: int) -> frozenset:
        """All products of exactly ``t`` idempotents."""
        return frozenset(k for layer in self.layers[:t] for k in layer)

    def histogram(self) -> dict[int, int]:
        return {t: len(layer) for t, layer in enumerate(self.layers, start=1)}

    def is_trivial(self, M: Matrix) -> bool:
        """0 and I carry index 1 by convention."""
        return M.is_zero() or M.is_identity()

    def to_json(self) -> dict:
        return {
            "field": self.field.name,
            "n": self.n,
            "p": self.p,
            "idempotents": len(self.idempotent_keys),
            "histogram": {str(t): c for t, c in self.histogram().items()},
            "reachable": self.reachable_size,
            "universe": self.universe_size,
            "unreachable": self.universe_size - self.reachable_size if self.closed else None,
            "closed": self.closed,
        }


def build_atlas(n: int, p: int, t_max: int | None = None, threads: int | None = None) -> IndexAtlas:
    """Breadth-first layers until no new products appear or ``t_max`` layers exist."""
    ekeys = _idempotent_keys(n, p)
    table = _row_table(ekeys, n, p)
    workers = _resolve_threads(threads)
    visited = np.zeros(p ** (n * n), dtype=bool)
    visited[ekeys] = True
    layers = [tuple(int(k) for k in ekeys)]
    parent: dict = {int(k): (None, int(k)) for k in ekeys}
    index: dict = {int(k): 1 for k in ekeys}
    frontier = ekeys
    closed = True
    t = 1

    def expand(chunk):
        x, ek, yk = _products(chunk, ekeys, n, p, table)
        fresh = ~visited[x]
        return _first_per_key(x[fresh], ek[fresh], yk[fresh])

    while len(frontier):
        if t_max is not None and t >= t_max:
            closed = False
            break
        per_chunk = max(1, CHUNK_PRODUCTS // len(ekeys))
        chunks = [frontier[i:i + per_chunk] for i in range(0, len(frontier), per_chunk)]
        if workers > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(workers) as pool:
                parts = list(pool.map(expand, chunks))
        else:
            parts = [expand(c) for c in chunks]
        x, ek, yk = _first_per_key(*(np.concatenate([q[i] for q in parts]) for i in range(3)))
        t += 1
        visited[x] = True
        for xi, ei, yi in zip(x.tolist(), ek.tolist(), yk.tolist()):
            parent[xi] = (yi, ei)
            index[xi] = t
        if len(x):
            layers.append(tuple(x.tolist()))
        frontier = x
    return IndexAtlas(n, p, tuple(int(k) for k in ekeys), tuple(layers), parent, index, closed, t_max)


def layer_product_keys(atlas: IndexAtlas, s: int, t: int) -> set:
    A = np.array(atlas.layers[s - 1], dtype=np.int64)
    B = np.array(atlas.layers[t - 1], dtype=np.int64)
    x, _, _ = _products(A, B, atlas.n, atlas.p)
    return set(x.tolist())


def check_layer_products(atlas: IndexAtlas, max_sum: int = 6) -> list[dict]:
    """Pairs ``(s, t)`` with ``s + t <= max_sum`` where ``S_{s+t}`` escapes ``S_s S_t``."""
    failures = []
    depth = len(atlas.layers)
    for total in range(2, max_sum + 1):
        if total > depth:
            break
        target = set(atlas.layers[total - 1])
        for s in range(1, total):
            missing = target - layer_product_keys(atlas, s, total - s)
            if missing:
                failures.append({"s": s, "t": total - s, "missing": len(missing)})
    return failures


@dataclass(frozen=True)
class StructureReport:
    checked: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"checked": self.checked, "violations": list(self.violations)}


def _range_inside(A: Matrix, B: Matrix) -> bool:
    return rank(hstack(B, A)) == rank(B)


def verify_minimal_structure(atlas: IndexAtlas) -> StructureReport:
    """Check every stored minimal witness ``Q_1 ... Q_t`` with ``t >= 2``.

    * consecutive factors have mutually non-nested ranges;
    * the tail ``Q_2 ... Q_t`` has index exactly ``t - 1``;
    * ``rank(Q_2 ... Q_t) >= rank(T)``;
    * relative to ``K = R(Q_1)`` and any complement, ``Q_1 = [[I, B], [0, 0]]``.
    """
    from .decomposition import block_rep, extend_to_complement

    violations = []
    checked = 0
    n = atlas.n
    for t, layer in enumerate(atlas.layers, start=1):
        if t < 2:
            continue
        for key in layer:
            checked += 1
            T = atlas.matrix(key)
            Qs = [atlas.matrix(k) for k in atlas.witness_keys(key)]
            where = {"matrix": T.to_json()["rows"], "index": t}
            if len(Qs) != t:
                violations.append({**where, "check": "witness length"})
            prod = Qs[0]
            for Q in Qs[1:]:
                prod = prod @ Q
            if prod != T:
                violations.append({**where, "check": "witness product"})
            for j in range(len(Qs) - 1):
                if _range_inside(Qs[j], Qs[j + 1]) or _range_inside(Qs[j + 1], Qs[j]):
                    violations.append({**where, "check": "nested consecutive ranges", "position": j})
            tail = Qs[1]
            for Q in Qs[2:]:
                tail = tail @ Q
            if atlas.index.get(key_of(tail)) != t - 1:
                violations.append({**where, "check": "tail index"})
            if rank(tail) < rank(T):
                violations.append({**where, "check": "tail rank"})
            r1 = rank(Qs[0])
            if not 1 <= r1 <= n - 1:
                violations.append({**where, "check": "first factor range is trivial"})
                continue
            b = block_rep(Qs[0], extend_to_complement(colspace_basis(Qs[0]), n))
            if not (b.T1.is_identity() and b.T3.is_zero() and b.T4.is_zero()):
                violations.append({**where, "check": "first factor block form"})
    return StructureReport(checked, violations)


__all__ = [
    "IndexAtlas",
    "StructureReport",
    "build_atlas",
    "check_layer_products",
    "enumerate_idempotents",
    "key_of",
    "layer_product_keys",
    "matrix_of",
    "pack",
    "unpack",
    "verify_minimal_structure",
]
