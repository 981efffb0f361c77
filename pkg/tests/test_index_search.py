import math

import numpy as np
import pytest

from idemfactor import GF2, GF3, GF5, QQ, Matrix
from idemfactor.errors import NoRecipeApplies, TooLarge
from idemfactor.factorize import auto_factor
from idemfactor.idempotent import is_idempotent
from idemfactor.index_search import (
    build_atlas,
    check_layer_products,
    enumerate_idempotents,
    key_of,
    matrix_of,
    pack,
    unpack,
    verify_minimal_structure,
)
from idemfactor.matrix import rank


@pytest.fixture(scope="module")
def gf2():
    return build_atlas(2, 2)


@pytest.fixture(scope="module")
def gf3():
    return build_atlas(2, 3)


def brute_idempotents(n, p):
    out = 0
    for key in range(p ** (n * n)):
        A = matrix_of(key, n, p)
        out += A @ A == A
    return out


@pytest.mark.parametrize("n,p,count", [(1, 2, 2), (2, 2, 8), (2, 3, 14), (2, 5, 32), (3, 2, 58)])
def test_idempotent_counts(n, p, count):
    assert len(enumerate_idempotents(n, p)) == count
    if p ** (n * n) <= 1000:
        assert brute_idempotents(n, p) == count


def test_key_round_trip():
    rng = np.random.default_rng(0)
    A = rng.integers(0, 3, size=(20, 2, 2))
    assert (unpack(pack(A, 3), 2, 3) == A).all()
    M = Matrix([[1, 2], [0, 1]], GF3)
    assert matrix_of(key_of(M), 2, 3) == M
    # First entry is the most significant digit.
    assert key_of(Matrix([[1, 0], [0, 0]], GF2)) == 8


def test_gf2_histogram_and_witness(gf2):
    assert gf2.histogram() == {1: 8, 2: 3}
    assert gf2.closed and gf2.reachable_size == 11
    T = Matrix([[0, 1], [0, 0]], GF2)
    assert gf2.index_of(T) == 2
    w = gf2.witness(T)
    assert w == [Matrix([[1, 1], [0, 0]], GF2), Matrix([[0, 0], [0, 1]], GF2)]
    assert all(is_idempotent(Q) for Q in w) and w[0] @ w[1] == T


def test_every_singular_matrix_has_finite_index(gf2, gf3):
    for atlas in (gf2, gf3):
        for key in range(atlas.universe_size):
            M = atlas.matrix(key)
            idx = atlas.index_of(M)
            if rank(M) < atlas.n or M.is_identity():
                assert idx != math.inf and idx >= 1
            else:
                assert idx == math.inf
                assert atlas.witness(M) is None


def test_trivial_elements_have_index_one(gf2):
    for M in (Matrix.zeros(2, 2, GF2), Matrix.identity(2, GF2)):
        assert gf2.is_trivial(M) and gf2.index_of(M) == 1


def test_layers_disjoint(gf2, gf3):
    for atlas in (gf2, gf3):
        seen = set()
        for layer in atlas.layers:
            assert not seen & set(layer)
            seen |= set(layer)


def test_layer_products(gf2, gf3):
    assert check_layer_products(gf2) == []
    assert check_layer_products(gf3) == []


def test_cumulative_is_all_t_fold_products(gf3):
    E = np.array(gf3.idempotent_keys)
    prods = set(E.tolist())
    from idemfactor.index_search import _products

    for t in range(2, len(gf3.layers) + 1):
        x, _, _ = _products(np.array(sorted(prods)), E, 2, 3)
        prods = set(x.tolist())
        assert prods == gf3.cumulative_keys(t)


def test_minimal_structure(gf2, gf3):
    for atlas in (gf2, gf3):
        rep = verify_minimal_structure(atlas)
        assert rep.ok, rep.violations[:3]
        assert rep.checked == sum(len(l) for l in atlas.layers[1:])


def test_gf3_n3_reaches_every_singular_matrix():
    atlas = build_atlas(3, 3)
    # |GL_3(GF(3))| = 11232; the rest are singular, plus I itself.
    assert atlas.reachable_size == 3 ** 9 - 11232 + 1
    assert atlas.histogram() == {1: 236, 2: 3497, 3: 4719}


def test_gf2_n3_structure():
    atlas = build_atlas(3, 2)
    assert len(atlas.idempotent_keys) == 58
    assert verify_minimal_structure(atlas).ok
    assert check_layer_products(atlas, 4) == []


def test_early_stop_reports_unknown(gf3):
    partial = build_atlas(2, 3, t_max=1)
    assert not partial.closed
    M = gf3.layer(2)[0]
    assert partial.index_of(M) is None
    assert partial.to_json()["unreachable"] is None
    invertible = Matrix([[1, 1], [0, 1]], GF3)
    assert gf3.index_of(invertible) == math.inf


def test_threads_are_deterministic():
    a = build_atlas(2, 3, threads=1)
    b = build_atlas(2, 3, threads=4)
    assert a.layers == b.layers and a.parent == b.parent


def test_threads_env_fallback(monkeypatch):
    monkeypatch.setenv("IDEMFACTOR_THREADS", "3")
    assert build_atlas(2, 2).histogram() == {1: 8, 2: 3}


def test_too_large():
    with pytest.raises(TooLarge):
        build_atlas(4, 2)
    with pytest.raises(TooLarge):
        enumerate_idempotents(4, 2)
    with pytest.raises(TooLarge):
        build_atlas(2, 7)


def test_json(gf2):
    obj = gf2.to_json()
    assert obj["idempotents"] == 8 and obj["histogram"] == {"1": 8, "2": 3}
    assert obj["reachable"] + obj["unreachable"] == 16


def test_idempotent_product_pair():
    Q1 = Matrix([[1, 1], [0, 0]], GF2)
    Q2 = Matrix([[0, 0], [1, 1]], GF2)
    assert is_idempotent(Q1 @ Q2)
    Q1 = Matrix([[1, 2], [0, 0]], QQ)
    Q2 = Matrix([[0, 0], ["1/2", 1]], QQ)
    assert is_idempotent(Q1) and is_idempotent(Q2) and is_idempotent(Q1 @ Q2)


@pytest.mark.parametrize("atlas_args", [(2, 2), (2, 3), (2, 5), (3, 2)])
def test_certificates_never_beat_the_atlas(atlas_args):
    atlas = build_atlas(*atlas_args)
    checked = 0
    for layer in atlas.layers:
        for key in layer:
            M = atlas.matrix(key)
            try:
                cert = auto_factor(M)
            except NoRecipeApplies:
                continue
            checked += 1
            assert atlas.index_of(M) <= cert.index_upper_bound
    assert checked > 0
