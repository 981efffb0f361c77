"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion N ... PASS|FAIL`` line with its runtime
and limit, visible in the ``pytest -v`` log.
"""

import itertools
import random
import time
from contextlib import contextmanager

import pytest

from idemfactor import GF2, QQ, Matrix
from idemfactor.certificate import FactorizationCertificate, verify_certificate
from idemfactor.consistency import REDUCED_SYSTEMS, check_consistency
from idemfactor.decomposition import BlockRep, Decomposition, extend_to_complement
from idemfactor.douglas import douglas_solve, range_included
from idemfactor.errors import RangeNotContained
from idemfactor.factorize import (
    corner_idempotent,
    factor_corner_pair,
    factor_embed,
    factor_invertible_pair,
    factor_range_swallow,
    idempotent_block_family,
    kernel_shift_family,
    peel_candidate,
)
from idemfactor.idempotent import is_idempotent
from idemfactor.index_search import build_atlas, check_layer_products, verify_minimal_structure
from idemfactor.matrix import inverse, is_invertible, nullspace_basis, rank
from idemfactor.opcheck import PRESETS, membership_report

from conftest import M, rand_q


@contextmanager
def criterion(capsys, number, title, limit):
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - start
        if status == "PASS" and elapsed >= limit:
            status = "FAIL"
        with capsys.disabled():
            print(f"\ncriterion {number} [{title}]: {status} ({elapsed:.2f} s, limit {limit} s)")
    assert elapsed < limit, f"criterion {number} took {elapsed:.2f} s (limit {limit} s)"


def exact(cert):
    rep = verify_certificate(cert)
    return rep.ok and rep.residuals["product"] == 0 and all(r == 0 for r in rep.residuals["idempotency"])


def nullity(A):
    return nullspace_basis(A).ncols


def random_decomposition(rng, k, l):
    """Standard coordinates half the time, a random skew complement otherwise."""
    if rng.random() < 0.5:
        return Decomposition.standard(k, l, QQ)
    while True:
        K = rand_q(rng, k + l, k)
        if rank(K) == k:
            return extend_to_complement(K)


def random_invertible(rng, n):
    while True:
        A = rand_q(rng, n, n)
        if is_invertible(A):
            return A


def low_rank(rng, r, c, at_most):
    inner = rng.randint(0, at_most)
    if inner == 0:
        return Matrix.zeros(r, c)
    return rand_q(rng, r, inner) @ rand_q(rng, inner, c)


def random_idempotent(rng, k, rank_):
    P = random_invertible(rng, k)
    diag = Matrix([[int(i == j and i < rank_) for j in range(k)] for i in range(k)], QQ)
    return P @ diag @ inverse(P)


def sizes(rng, k_min=1, l_min=1, n_max=8):
    while True:
        n = rng.randint(k_min + l_min, n_max)
        k = rng.randint(k_min, n - l_min)
        if n - k >= l_min:
            return k, n - k


# -- 1 ---------------------------------------------------------------------


def test_criterion_1_two_by_two_fixtures(capsys):
    with criterion(capsys, 1, "2x2 fixtures a=5; b=3,c=7; a=2,b=3", 1):
        a = 5
        fixtures = [
            (M([[a, 0], [0, 0]]), [M([[1, a - 1], [0, 0]]), M([[1, 0], [1, 0]])]),
            (M([[21, 0], [0, 0]]), [M([[1, 3], [0, 0]]), M([[0, 0], [0, 1]]), M([[1, 0], [7, 0]])]),
        ]
        a, b = 2, 3
        fixtures.append((M([[a, a * b], [0, 0]]),
                         [M([[1, a - 1 + b], [0, 0]]), M([[1 - b, b * (1 - b)], [1, b]])]))
        for target, factors in fixtures:
            for F in factors:
                assert F @ F == F
            prod = factors[0]
            for F in factors[1:]:
                prod = prod @ F
            assert prod - target == Matrix.zeros(2, 2)
            assert exact(FactorizationCertificate(target, tuple(factors), "fixture"))


# -- 2 ---------------------------------------------------------------------


def test_criterion_2_douglas_suite(capsys):
    rng = random.Random(2)
    with criterion(capsys, 2, "range inclusion solver, 200 positive + 50 negative", 10):
        for _ in range(200):
            m, k, c = rng.randint(1, 8), rng.randint(1, 8), rng.randint(1, 8)
            V = rand_q(rng, m, k) if rng.random() < 0.5 else low_rank(rng, m, k, min(m, k))
            U = V @ rand_q(rng, k, c)
            W0 = douglas_solve(U, V)
            assert V @ W0 == U
            assert nullity(W0) == nullity(U)
        negatives = 0
        while negatives < 50:
            m = rng.randint(2, 8)
            k = rng.randint(1, m - 1)
            V = low_rank(rng, m, k, k)
            U = rand_q(rng, m, rng.randint(1, 8))
            if range_included(U, V):
                continue
            with pytest.raises(RangeNotContained):
                douglas_solve(U, V)
            negatives += 1


# -- 3 ---------------------------------------------------------------------


def _corner_pair(rng):
    k, l = sizes(rng)
    d = random_decomposition(rng, k, l)
    return factor_corner_pair(rand_q(rng, k, l), rand_q(rng, l, k), d, rng.choice(["KL", "LK"]))


def _range_swallow(rng):
    k, l = sizes(rng)
    T2 = rand_q(rng, k, l)
    T1 = T2 @ rand_q(rng, l, k)
    return factor_range_swallow(BlockRep.local(random_decomposition(rng, k, l), T1, T2))


def _embed(rng):
    while True:
        k, l = sizes(rng)
        if k <= l:
            break
    T1 = rand_q(rng, k, k)
    if T1.is_zero():
        T1 = Matrix.identity(k)
    T2 = T1 @ rand_q(rng, k, l)
    return factor_embed(BlockRep.local(random_decomposition(rng, k, l), T1, T2))


def _kernel_shift_family(rng):
    k, l = sizes(rng)
    T2 = rand_q(rng, k, l)
    C = low_rank(rng, l, k, k - 1)
    b = BlockRep.local(random_decomposition(rng, k, l), T2 @ C, T2)
    return kernel_shift_family(b, 10, seed=rng.randrange(2 ** 32))


def _idempotent_block_family(rng):
    k, l = sizes(rng, l_min=2)
    T1 = random_idempotent(rng, k, rng.randint(0, k - 1))
    T2 = low_rank(rng, k, l, l - 1)
    b = BlockRep.local(random_decomposition(rng, k, l), T1, T2)
    return idempotent_block_family(b, 10, seed=rng.randrange(2 ** 32))


def _invertible_pair(rng):
    k = rng.randint(1, 4)
    C, D = random_invertible(rng, k), random_invertible(rng, k)
    while True:
        T1 = rand_q(rng, k, k)
        if not T1.is_identity():
            break
    T2 = T1 @ inverse(C) @ D
    return factor_invertible_pair(BlockRep.local(random_decomposition(rng, k, k), T1, T2), C, D)


RECIPE_SUITES = {
    "corner_pair": (_corner_pair, False),
    "range_swallow": (_range_swallow, False),
    "embed": (_embed, False),
    "kernel_shift": (_kernel_shift_family, True),
    "idempotent_block": (_idempotent_block_family, True),
    "invertible_pair": (_invertible_pair, False),
}


def test_criterion_3_recipe_suites(capsys):
    with criterion(capsys, 3, "six recipes x 200 instances, families of 10 distinct", 60):
        for name, (make, family) in RECIPE_SUITES.items():
            rng = random.Random(name)
            for _ in range(200):
                out = make(rng)
                certs = out if family else [out]
                if family:
                    assert len({c.E2 for c in certs}) == 10, name
                for cert in certs:
                    assert exact(cert), name


# -- 4 ---------------------------------------------------------------------


def _all_gf2(r, c):
    for bits in itertools.product((0, 1), repeat=r * c):
        yield Matrix([list(bits[i * c:(i + 1) * c]) for i in range(r)], GF2)


def test_criterion_4_equation_set_equivalences(capsys):
    with criterion(capsys, 4, "equation-set equivalences over GF(2), exhaustive", 1):
        cases = discrepancies = certified = 0
        # The k=1, l=2 and k=2, l=1 shapes run exhaustively in test_consistency.py.
        for k, l in ((1, 1),):
            for T1, T2, B, C, D in itertools.product(
                _all_gf2(k, k), _all_gf2(k, l), _all_gf2(k, l), _all_gf2(l, k), _all_gf2(l, l)
            ):
                cases += 1
                rep = check_consistency(T1, T2, B, C, D)
                s = rep.systems
                full = s["sum:S_blocks+TS"]
                ok = s["sum:S_blocks"] == s["rearranged:S_blocks"]
                ok &= all(s[name] == full for name in REDUCED_SYSTEMS)
                ok &= s["S_idempotent_and_TS=T"] == full
                if s["S_idempotent_and_TS=T"]:
                    certified += 1
                    ok &= verify_certificate(rep.certificate()).ok
                discrepancies += not ok
        assert cases == 32
        assert certified > 0
        assert discrepancies == 0


# -- 5 ---------------------------------------------------------------------


def test_criterion_5_small_atlases(capsys):
    with criterion(capsys, 5, "GF(2) and GF(3) 2x2 atlases", 30):
        for p, count in ((2, 8), (3, 14)):
            atlas = build_atlas(2, p)
            assert len(atlas.idempotent_keys) == count
            for key in range(atlas.universe_size):
                T = atlas.matrix(key)
                if rank(T) < 2 and not is_idempotent(T):
                    assert atlas.index_of(T) < float("inf")
            seen = set()
            for layer in atlas.layers:
                assert not seen & set(layer)
                seen |= set(layer)
            assert check_layer_products(atlas, 6) == []
            assert verify_minimal_structure(atlas).ok


# -- 6 ---------------------------------------------------------------------


def test_criterion_6_idempotent_product_of_two(capsys):
    with criterion(capsys, 6, "two-idempotent product that is idempotent", 1):
        for field, a, b in ((GF2, 1, 1), (QQ, 2, "1/2")):
            Q1 = Matrix([[1, a], [0, 0]], field)
            Q2 = Matrix([[0, 0], [b, 1]], field)
            assert is_idempotent(Q1) and is_idempotent(Q2)
            assert is_idempotent(Q1 @ Q2)
        atlas = build_atlas(2, 2)
        P = Matrix([[1, 1], [0, 0]], GF2) @ Matrix([[0, 0], [1, 1]], GF2)
        assert atlas.index_of(P) == 1


# -- 7 ---------------------------------------------------------------------


def test_criterion_7_operator_verdicts(capsys):
    with criterion(capsys, 7, "shift and harmonic-diagonal verdicts", 1):
        r = membership_report(PRESETS["right-shift"]())
        assert (r.left_annihilator, r.right_annihilator, r.in_F_possible) == (True, False, False)
        r = membership_report(PRESETS["left-shift"]())
        assert (r.left_annihilator, r.right_annihilator, r.in_F_possible) == (False, True, False)
        r = membership_report(PRESETS["diag-harmonic"]())
        assert (r.left_annihilator, r.right_annihilator, r.in_F_possible) == (False, False, False)
        assert r.range.dense and not r.range.closed and r.regular is False


# -- 8 ---------------------------------------------------------------------


def test_criterion_8_peeling_identity(capsys):
    with criterion(capsys, 8, "Q_B S = T, 10^4 random over Q + exhaustive GF(2)", 10):
        rng = random.Random(8)
        d = Decomposition.standard(1, 1, QQ)
        failures = 0
        for i in range(10_000):
            if i % 100 == 0:
                k, l = rng.randint(1, 3), rng.randint(1, 3)
                d = random_decomposition(rng, k, l)
                b = BlockRep.local(d, rand_q(rng, k, k), rand_q(rng, k, l))
                T = b.assemble()
            B, C, D = rand_q(rng, k, l), rand_q(rng, l, k), rand_q(rng, l, l)
            failures += corner_idempotent(d, B) @ peel_candidate(b, B, C, D) != T
        dg = Decomposition.standard(1, 1, GF2)
        for T1, T2, B, C, D in itertools.product(*(_all_gf2(1, 1) for _ in range(5))):
            b = BlockRep.local(dg, T1, T2)
            failures += corner_idempotent(dg, B) @ peel_candidate(b, B, C, D) != b.assemble()
        assert failures == 0
