import random

import pytest

from idemfactor import F64, GF2, GF3, QQ, Matrix
from idemfactor.douglas import douglas_solve, kernel_report, range_included
from idemfactor.errors import DimensionMismatch, NoSolution, RangeNotContained
from idemfactor.matrix import nullity, nullspace_basis, solve_linear

from conftest import M, rand_gf, rand_q


def test_range_included_examples():
    assert range_included(M([[1, 2], [3, 4]]), M([[2, 1], [1, 1]]))
    assert not range_included(M([[1], [0]]), Matrix.zeros(2, 1))
    assert range_included(M([[2, 3], [0, 0]]), M([[1], [0]]))
    with pytest.raises(DimensionMismatch):
        range_included(M([[1]]), M([[1], [0]]))


def test_solve_examples():
    U = M([[1, 2], [3, 4]])
    assert douglas_solve(U, Matrix.identity(2)) == U
    W0 = douglas_solve(M([[2, 0], [0, 0]]), M([[1, 0], [0, 0]]))
    assert W0 == M([[2, 0], [0, 0]]) and nullity(W0) == 1
    W0 = douglas_solve(M([[2, 3], [0, 0]]), M([[1], [0]]))
    assert W0 == M([[2, 3]])
    assert (W0 @ M([[3], [-2]])).is_zero()


def test_minimal_kernel_differs_from_arbitrary_solution():
    # V = [1 1]: solutions of V W = U form a family; only one has N(W) = N(U).
    V = M([[1, 1]])
    U = M([[2, 0]])
    W0 = douglas_solve(U, V)
    assert V @ W0 == U and nullity(W0) == nullity(U) == 1
    other = M([[2, 1], [0, -1]])
    assert V @ other == U and nullity(other) == 0


def test_rejects_when_range_fails():
    with pytest.raises(RangeNotContained):
        douglas_solve(M([[0], [1]]), M([[1], [0]]))


def test_random_q_instances():
    rng = random.Random(2)
    for _ in range(60):
        n, m, q = rng.randint(1, 6), rng.randint(1, 6), rng.randint(1, 6)
        V = rand_q(rng, n, m)
        U = V @ rand_q(rng, m, q)
        W0 = douglas_solve(U, V)
        assert V @ W0 == U
        assert kernel_report(U, V, W0).ok


@pytest.mark.parametrize("field", [GF2, GF3])
def test_random_gf_instances(field):
    rng = random.Random(field.p)
    for _ in range(80):
        n, m, q = rng.randint(1, 4), rng.randint(1, 4), rng.randint(1, 4)
        V = rand_gf(rng, n, m, field)
        U = V @ rand_gf(rng, m, q, field)
        W0 = douglas_solve(U, V)
        assert V @ W0 == U
        assert nullity(W0) == nullity(U)
        assert (W0 @ nullspace_basis(U)).is_zero()


def test_negative_cross_checked_with_solver():
    rng = random.Random(5)
    hits = 0
    for _ in range(200):
        V = rand_q(rng, 4, 2)
        U = rand_q(rng, 4, 2)
        if range_included(U, V):
            continue
        hits += 1
        with pytest.raises(RangeNotContained):
            douglas_solve(U, V)
        with pytest.raises(NoSolution):
            solve_linear(V, U)
    assert hits > 100


def test_float_instances():
    rng = random.Random(9)
    for _ in range(30):
        V = Matrix([[float(rng.randint(-3, 3)) for _ in range(3)] for _ in range(5)], F64)
        W = Matrix([[float(rng.randint(-3, 3)) for _ in range(4)] for _ in range(3)], F64)
        U = V @ W
        W0 = douglas_solve(U, V)
        assert (V @ W0).approx_equal(U, 1e-9)
        assert nullity(W0) == nullity(U)
