import random

import pytest
from hypothesis import given, settings, strategies as st

from reldubois.complexes import ChainMap, CochainComplex, ComplexError, cone, twist
from reldubois.filtered import (
    FilteredComplex,
    FiltrationError,
    bete_filtration,
    check_ses,
    connecting_map,
    filtration_violation,
    graded_piece,
    quotient_complex,
    ses_violation,
    sub_complex,
    validate_filtration,
)
from reldubois.linalg import RatMatrix
from reldubois.models import truncated_de_rham

from helpers import random_complex

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_bete_levels_of_plane():
    F = bete_filtration(truncated_de_rham(2, 2))
    assert validate_filtration(F)
    assert F.n == 2
    F2, incl = sub_complex(F, 2)
    assert F2.dims_map() == {2: 6}
    assert incl.mat(2) == RatMatrix.identity(6)


def test_negative_levels_read_as_everything():
    F = bete_filtration(truncated_de_rham(1, 2))
    assert F.span(-3, 0) == F.span(0, 0)
    assert F.span(5, 1).cols == 0


def test_graded_piece_of_bete_is_one_degree():
    F = bete_filtration(truncated_de_rham(2, 2))
    assert graded_piece(F, 1).dims_map() == {1: 12}


def test_non_nested_filtration_detected():
    c = CochainComplex.build({0: 2})
    levels = {0: {0: RatMatrix.identity(2)},
              1: {0: RatMatrix.from_columns([[1, 0]], 2)},
              2: {0: RatMatrix.from_columns([[0, 1]], 2)}}
    F = FilteredComplex(c, levels, 2)
    assert "not inside" in filtration_violation(F)


def test_filtration_not_d_stable():
    c = CochainComplex.build({0: 1, 1: 1}, {0: RatMatrix.from_rows([[1]])})
    levels = {0: {0: RatMatrix.identity(1), 1: RatMatrix.identity(1)},
              1: {0: RatMatrix.identity(1)}}
    assert "d(F^1)" in filtration_violation(FilteredComplex(c, levels, 1))


def test_quotient_rejects_non_subcomplex():
    c = CochainComplex.build({0: 1, 1: 1}, {0: RatMatrix.from_rows([[1]])})
    with pytest.raises(FiltrationError):
        quotient_complex(c, {0: RatMatrix.identity(1)})


def test_ses_weight_message():
    c = truncated_de_rham(1, 2)
    a = ChainMap.identity(c)
    b = ChainMap.zero(twist(c, 1), CochainComplex.zero(1))
    with pytest.raises(ComplexError, match="weights"):
        ses_violation(a, b)


def test_cone_sequence_connecting_map_is_f():
    c = truncated_de_rham(1, 2)
    f = ChainMap.identity(c)
    C, inj, proj = cone(f)
    assert check_ses(inj, proj)
    delta = connecting_map(inj, proj)
    assert all(delta[m] == f.mat(m + 1) for m in delta)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_bete_of_random_complex(seed):
    c = random_complex(random.Random(seed))
    F = bete_filtration(c)
    assert validate_filtration(F)
    for p in range(F.n + 1):
        gr = graded_piece(F, p)
        assert gr.dims_map() == ({p: c.dim(p)} if c.dim(p) else {})


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_sub_quotient_sequence_exact(seed):
    c = random_complex(random.Random(seed))
    F = bete_filtration(c)
    p = random.Random(seed).randint(0, F.n + 1)
    sub, incl = sub_complex(F, p)
    q = quotient_complex(c, {m: incl.mat(m) for m in c.degrees})
    assert check_ses(incl, q.project)
    chi = sub.euler_characteristic() + q.complex.euler_characteristic()
    assert chi == c.euler_characteristic()
