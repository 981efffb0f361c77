import random
from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from idemfactor import QQ, Matrix

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def M(rows, field=QQ):
    return Matrix(rows, field)


def rand_q(rng: random.Random, r: int, c: int, lo: int = -3, hi: int = 3) -> Matrix:
    return Matrix([[rng.randint(lo, hi) for _ in range(c)] for _ in range(r)], QQ)


def rand_gf(rng: random.Random, r: int, c: int, field) -> Matrix:
    return Matrix([[rng.randrange(field.p) for _ in range(c)] for _ in range(r)], field)


@st.composite
def q_matrices(draw, max_rows=5, max_cols=5, rows=None, cols=None):
    r = rows if rows is not None else draw(st.integers(1, max_rows))
    c = cols if cols is not None else draw(st.integers(1, max_cols))
    ints = st.integers(-4, 4)
    entries = draw(st.lists(st.lists(ints, min_size=c, max_size=c), min_size=r, max_size=r))
    return Matrix(entries, QQ)


@pytest.fixture
def rng():
    return random.Random(12345)


def half():
    return Fraction(1, 2)
