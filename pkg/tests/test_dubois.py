import random

import pytest
from hypothesis import given, settings, strategies as st

from reldubois.complexes import (
    ChainMap,
    CochainComplex,
    cohomology_dims,
    compose,
    induced_cohomology_rank,
    maps_equal,
    quasi_iso,
    shift,
    twist,
)
from reldubois.dubois import (
    TowerError,
    WedgeOperator,
    abs_to_rel_triangles,
    base_case_check,
    build_tower,
    check_assoc_graded,
    filtered_map_levels,
    graded_quotient,
    induce_tower_morphism,
    stationary_check,
    validate_wedge,
    verify_functorial_diagram,
    verify_ses_tower,
    verify_subcomplex,
    wedge_violation,
    zero_wedge_split,
)
from reldubois.filtered import FilteredComplex, bete_filtration
from reldubois.linalg import RatMatrix
from reldubois.models import (
    build_nodal_union_family,
    build_smooth_plane_family,
    relative_de_rham_plane,
    truncated_de_rham,
)

from helpers import oracle_cohomology, random_complex

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture(scope="module")
def smooth():
    b = build_smooth_plane_family(2)
    return b, build_tower(b.F, b.W, -2)


@pytest.fixture(scope="module")
def nodal():
    b = build_nodal_union_family(2)
    return b, build_tower(b.F, b.W, -2)


def point_filtration():
    return bete_filtration(CochainComplex.build({0: 2}))


# wedge -------------------------------------------------------------------


def test_zero_wedge_is_valid():
    assert validate_wedge(WedgeOperator.zero(point_filtration()))


def test_smooth_wedge_is_valid(smooth):
    assert validate_wedge(smooth[0].W)


def broken_plane_wedge():
    # keep only the degree-0 part of "wedge with dt": d(f dt) = f_x dx^dt is not W(df)
    b = build_smooth_plane_family(2)
    return WedgeOperator(b.F, {0: b.W.mat(0)})


def test_wedge_not_commuting_detected():
    assert "commute" in wedge_violation(broken_plane_wedge())


def test_degree_zero_wedge_on_line_is_valid():
    # g -> g dx on the line is a legitimate wedge operator
    F = bete_filtration(truncated_de_rham(1, 2))
    assert validate_wedge(WedgeOperator(F, {0: RatMatrix.identity(3)}))


def test_wedge_not_filtered_detected():
    c = CochainComplex.build({0: 1, 1: 1})
    levels = {0: {0: RatMatrix.identity(1), 1: RatMatrix.identity(1)}, 1: {}, 2: {}}
    F = FilteredComplex(c, levels, 1)
    W = WedgeOperator(F, {0: RatMatrix.identity(1)})
    assert "F^0 into F^1" in wedge_violation(W)


def test_build_rejects_invalid_wedge():
    W = broken_plane_wedge()
    with pytest.raises(TowerError):
        build_tower(W.carrier, W)


# tower shape --------------------------------------------------------------


def test_point_fiber_base_case():
    F = point_filtration()
    t = build_tower(F, WedgeOperator.zero(F), -1)
    assert F.n == 0
    assert t.E[-1] == twist(shift(t.F_complex(0), 1), -1)
    assert t.E[0].is_zero()


def test_smooth_tower_dims(smooth):
    _, t = smooth
    assert t.E[1].dims_map() == {1: 6}
    assert t.E[0].dims_map() == {0: 12, 1: 12}
    assert t.E[2].is_zero() and t.E[3].is_zero()
    assert all(t.E[p].twist_weight == -1 for p in t.E)


def test_nodal_tower_dims(nodal):
    b, t = nodal
    assert b.F.ambient.dims_map() == {0: 7, 1: 8}
    assert t.E[0].dims_map() == {0: 6}


def test_base_case_both_models(smooth, nodal):
    assert base_case_check(smooth[1])
    assert base_case_check(nodal[1])


def test_smooth_E0_resolves_relative_de_rham(smooth):
    # H(E^0) agrees with the relative complex O -> O dx (oracle: sympy ranks)
    _, t = smooth
    rel = relative_de_rham_plane(2)
    assert cohomology_dims(t.E[0]) == oracle_cohomology(rel) == {0: 3, 1: 3}
    assert cohomology_dims(t.E[1]) == {1: 6}


def test_euler_bookkeeping(smooth, nodal):
    for _, t in (smooth, nodal):
        for p in range(t.p_min, t.n):
            F1 = shift(t.F_complex(p + 1), 1)
            assert t.E_L[p].euler_characteristic() == (
                t.E[p + 1].euler_characteristic() + F1.euler_characteristic())


def test_wedge_factorisations(smooth):
    _, t = smooth
    for p in range(t.p_min, t.n):
        assert maps_equal(compose(t.w_d(p), t.w_dd(p)), t.wedge_twisted(p))


# verifiers ---------------------------------------------------------------


@pytest.mark.parametrize("which", ["smooth", "nodal"])
def test_all_verifiers_pass(which, request):
    _, t = request.getfixturevalue(which)
    for rep in (verify_ses_tower(t), verify_subcomplex(t), abs_to_rel_triangles(t)):
        assert rep.passed, str(rep)


def test_ses_top_row_is_trivial(smooth):
    _, t = smooth
    inc, pro = t.ses_witnesses[t.n - 1]
    assert inc.source.is_zero()
    assert pro.mat(1) == RatMatrix.identity(6)


def test_graded_quotient_dims(smooth):
    _, t = smooth
    for p in range(t.p_min, t.n):
        gr = graded_quotient(t, p)
        for m in t.E[p].degrees:
            assert gr.dim(m) == t.E[p].dim(m) - t.E[p + 1].dim(m)
    assert graded_quotient(t, 1) == t.E[1]


def test_smooth_assoc_graded_exact(smooth):
    b, t = smooth
    rep = check_assoc_graded(t, b.reference(t.p_min), b.comparison_maps(t))
    assert rep.passed, str(rep)
    assert {f.evidence for f in rep.findings} == {"exact"}


def test_assoc_graded_missing_reference(smooth):
    _, t = smooth
    with pytest.raises(TowerError):
        check_assoc_graded(t, {})


def test_nodal_assoc_graded_levels(nodal):
    b, t = nodal
    rep = check_assoc_graded(t, b.reference(t.p_min), b.comparison_maps(t))
    assert rep.passed, str(rep)
    ev = {f.p: f.evidence for f in rep.findings}
    assert ev[0] == "exact" and ev[-1] == "dims-match"


def test_stationary(smooth, nodal):
    assert stationary_check(smooth[1])
    # nodal: H(E^0) = {0: 6} but H(E^-1) = {0: 7}, so δ_-1 is no quasi-isomorphism
    _, t = nodal
    assert cohomology_dims(t.E[0]) == {0: 6} and cohomology_dims(t.E[-1]) == {-1: 0, 0: 7}
    assert stationary_check(t) is False


def test_stationary_needs_p_min(smooth):
    b, _ = smooth
    with pytest.raises(TowerError):
        stationary_check(build_tower(b.F, b.W, -1))


def test_stationary_on_zero_complex():
    F = bete_filtration(CochainComplex.zero())
    assert stationary_check(build_tower(F, WedgeOperator.zero(F), -2))


def test_abs_to_rel_needs_p_min(smooth):
    b, _ = smooth
    with pytest.raises(TowerError):
        abs_to_rel_triangles(build_tower(b.F, b.W, 0))


def test_delta_matches_bete_inclusions(smooth):
    # under E^p ≃ σ_{>=p} of the relative complex, δ_0: E^1 -> E^0 is the
    # inclusion σ_{>=1} ⊂ σ_{>=0}; on cohomology it is rank 3 in degree 1
    _, t = smooth
    assert induced_cohomology_rank(t.delta[0]) == {1: 3}
    assert quasi_iso(t.delta[-1])


# functoriality -------------------------------------------------------------


def test_identity_morphism(smooth):
    b, t = smooth
    gamma = filtered_map_levels(ChainMap.identity(b.F.ambient), t, t)
    alpha = induce_tower_morphism(gamma, t, t)
    for p, a in alpha.items():
        assert maps_equal(a, ChainMap.identity(t.E[p]))
    assert verify_functorial_diagram(alpha, gamma, t, t).passed


def test_zero_morphism(smooth):
    b, t = smooth
    gamma = filtered_map_levels(ChainMap.zero(b.F.ambient, b.F.ambient), t, t)
    alpha = induce_tower_morphism(gamma, t, t)
    assert all(mat.is_zero() for a in alpha.values() for _, mat in a.mats)


def test_unfiltered_gamma_rejected():
    c = CochainComplex.build({0: 1, 1: 1})
    F = FilteredComplex(c, {0: {0: RatMatrix.identity(1), 1: RatMatrix.identity(1)},
                            1: {1: RatMatrix.identity(1)}, 2: {}}, 1)
    G = FilteredComplex(c, {0: {0: RatMatrix.identity(1), 1: RatMatrix.identity(1)},
                            1: {}, 2: {}}, 1)
    t = build_tower(F, WedgeOperator.zero(F))
    u = build_tower(G, WedgeOperator.zero(G))
    with pytest.raises(TowerError):
        filtered_map_levels(ChainMap.identity(c), t, u)


def test_corrupted_alpha0_reported_at_p0(smooth):
    b, t = smooth
    gamma = filtered_map_levels(ChainMap.identity(b.F.ambient), t, t)
    alpha = dict(induce_tower_morphism(gamma, t, t))
    a = alpha[0]
    m, mat = a.mats[0]
    alpha[0] = ChainMap(a.source, a.target, ((m, mat.with_entry(0, 0, mat[0, 0] + 1)),) + a.mats[1:])
    rep = verify_functorial_diagram(alpha, gamma, t, t)
    assert not rep.passed
    assert not next(f for f in rep.findings if f.p == 0).passed


# zero wedge ---------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_zero_wedge_collapse(seed):
    c = random_complex(random.Random(seed))
    F = bete_filtration(c)
    t = build_tower(F, WedgeOperator.zero(F), -1)
    assert zero_wedge_split(t)
    assert all(mat.is_zero() for p in t.w for _, mat in t.w[p].mats)
    assert verify_ses_tower(t).passed
    assert verify_subcomplex(t).passed
