import itertools
import random

import pytest

from idemfactor import GF2, QQ, Matrix
from idemfactor.certificate import verify_certificate
from idemfactor.consistency import (
    EQUATION_SYSTEMS,
    REARRANGED_FORM,
    REDUCED_SYSTEMS,
    SUM_FORM,
    check_consistency,
    peel_blocks,
)
from idemfactor.errors import DimensionMismatch
from idemfactor.idempotent import is_idempotent
from idemfactor.matrix import block2x2

from conftest import M, rand_q


def gf2_all(r, c):
    for bits in itertools.product((0, 1), repeat=r * c):
        yield Matrix([list(bits[i * c:(i + 1) * c]) for i in range(r)], GF2)


def assert_equivalences(rep):
    s = rep.systems
    assert s["sum:S_blocks"] == s["rearranged:S_blocks"]
    assert s["sum:S_blocks"] == s["S_idempotent"]
    full = s["sum:S_blocks+TS"]
    assert s["rearranged:S_blocks+TS"] == full
    assert s["S_idempotent_and_TS=T"] == full
    for name in REDUCED_SYSTEMS:
        assert s[name] == full, name
    for a, b in zip(SUM_FORM, REARRANGED_FORM):
        assert rep.equations[a] == rep.equations[b] or (
            rep.equations[a].is_zero() == rep.equations[b].is_zero()
        )
    cert = rep.certificate()
    if full:
        assert cert is not None and verify_certificate(cert).ok
    else:
        assert cert is None


def consistent_instance(rng, k, l):
    """Random idempotent S and B; then T := Q_B S has the right shape."""
    from idemfactor.matrix import inverse, is_invertible

    n = k + l
    while True:
        P = rand_q(rng, n, n)
        if is_invertible(P):
            break
    r = rng.randint(0, n)
    Dg = Matrix([[int(i == j and i < r) for j in range(n)] for i in range(n)], QQ)
    S = P @ Dg @ inverse(P)
    U, V, C, D = S.submatrix(0, k, 0, k), S.submatrix(0, k, k, n), S.submatrix(k, n, 0, k), S.submatrix(k, n, k, n)
    B = rand_q(rng, k, l)
    return U + B @ C, V + B @ D, B, C, D


def test_example_kernel_shift_instance():
    T1, T2 = M([[2, 3], [0, 0]]), M([[1], [0]])
    B, C, D = M([[-2], [2]]), M([[2, 3]]), M([[1]])
    rep = check_consistency(T1, T2, B, C, D)
    assert rep.systems["sum:S_blocks"] and rep.systems["rearranged:S_blocks"]
    assert rep.systems["defect_annihilated_by_C"] and rep.systems["defect_fixed_by_T1"]
    assert rep.S == M([[6, 9, 3], [-4, -6, -2], [2, 3, 1]])
    assert_equivalences(rep)


def test_example_invertible_balance():
    rep = check_consistency(M([[4]]), M([[2]]), M([["7/2"]]), M([[1]]), M([["1/2"]]))
    assert rep.systems["invertible_balance"]
    assert rep.systems["S_idempotent_and_TS=T"]
    assert rep.certificate().target == M([[4, 2], [0, 0]])


def test_invertible_balance_needs_invertible_parameters():
    rep = check_consistency(M([[4]]), M([[2]]), M([[0]]), M([[0]]), M([[1]]))
    assert rep.equations["T1C^-1=T2D^-1"] is None and not rep.systems["invertible_balance"]


def test_zero_parameters_with_non_idempotent_T1():
    Z = M([[0]])
    rep = check_consistency(M([[2]]), M([[1]]), Z, Z, Z)
    assert not rep.equations["U^2+VC=U"].is_zero()
    for name in EQUATION_SYSTEMS:
        assert not rep.systems[name]
    assert not rep.systems["S_idempotent"]
    assert rep.certificate() is None


def test_corner_balance_forms():
    T1, T2 = M([[1, 0], [0, 0]]), M([[1, 1], [0, 0]])
    D = M([[1, 0], [0, 0]])
    rep = check_consistency(T1, T2, T2, M([[0, 0], [0, 0]]), D)
    # T1 T2 = T2 makes the left side vanish and T1 T2 - T2 = 0 on the right.
    assert rep.systems["corner_balance"]
    assert rep.systems["corner_balance[B=T2]"] and rep.systems["corner_balance[B=T2D]"]
    rep = check_consistency(M([[0]]), M([[1]]), M([[0]]), M([[0]]), M([[2]]))
    assert not rep.systems["corner_balance"]


def test_peel_blocks_matches_layout():
    assert peel_blocks(M([[2]]), M([[1]]), M([[1]]), M([[1]]), M([[1]])) == M([[1, 0], [1, 1]])


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        check_consistency(M([[1]]), M([[1]]), M([[1, 1]]), M([[1]]), M([[1]]))


def test_consistent_instances_over_q():
    rng = random.Random(11)
    for _ in range(150):
        k, l = rng.randint(1, 3), rng.randint(1, 3)
        rep = check_consistency(*consistent_instance(rng, k, l))
        assert rep.systems["S_idempotent_and_TS=T"]
        assert_equivalences(rep)


def test_random_instances_over_q_agree():
    rng = random.Random(12)
    for _ in range(300):
        k, l = rng.randint(1, 3), rng.randint(1, 3)
        if rng.random() < 0.5:
            T1, T2, B, C, D = consistent_instance(rng, k, l)
            # Perturb one parameter so some equations break.
            D = D + Matrix.identity(l).scale(rng.choice([0, 1, 2]))
        else:
            T1, T2 = rand_q(rng, k, k), rand_q(rng, k, l)
            B, C, D = rand_q(rng, k, l), rand_q(rng, l, k), rand_q(rng, l, l)
        assert_equivalences(check_consistency(T1, T2, B, C, D))


@pytest.mark.parametrize("k,l", [(1, 1), (1, 2), (2, 1)])
def test_exhaustive_gf2(k, l):
    hits = 0
    for T1, T2, B, C, D in itertools.product(
        gf2_all(k, k), gf2_all(k, l), gf2_all(k, l), gf2_all(l, k), gf2_all(l, l)
    ):
        rep = check_consistency(T1, T2, B, C, D)
        assert_equivalences(rep)
        hits += rep.systems["S_idempotent_and_TS=T"]
        assert (rep.Q_B @ rep.S) == rep.T
    assert hits > 0


def test_float_tolerance():
    from idemfactor import F64

    f = lambda rows: Matrix(rows, F64)  # noqa: E731
    rep = check_consistency(f([[4.0]]), f([[2.0]]), f([[3.5 + 1e-13]]), f([[1.0]]), f([[0.5]]))
    assert rep.systems["S_idempotent_and_TS=T"]
    rep = check_consistency(f([[4.0]]), f([[2.0]]), f([[3.6]]), f([[1.0]]), f([[0.5]]))
    assert not rep.systems["S_idempotent_and_TS=T"]


def test_json_shape():
    obj = check_consistency(M([[4]]), M([[2]]), M([["7/2"]]), M([[1]]), M([["1/2"]])).to_json()
    assert set(obj) == {"inputs", "systems", "residuals"}
    assert obj["residuals"]["T1C^-1=T2D^-1"] is not None
    assert is_idempotent(block2x2(M([[1]]), M([["7/2"]]), M([[0]]), M([[0]])))
