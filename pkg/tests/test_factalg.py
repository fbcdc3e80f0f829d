import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from wittenfact.factalg import (
    LINE, Arc, Arrangement, CoverError, CoverSpec, FactorizationAssignment, FullTruncated, cech_complex, compare_fh_hh, disjoint_families,
    fact_extend, factorization_homology_circle, factorizing_degree, is_factorizing,
    long_arc_cover, parse_convention, right_exactness, standard_circle_cover, structure_map,
)
from wittenfact.homalg import (
    dual_numbers, ground_field, hh_dims, homology_dims, matrix_algebra, product_of_fields,
)

SUITE = [ground_field, lambda: product_of_fields(2), dual_numbers, lambda: matrix_algebra(2)]


def brute_force_factorizing(cover, max_points):
    """Try every point set of atom representatives against every disjoint subfamily."""
    arr = cover.arrangement
    reps = [arr.reps[i] for i in range(arr.n) if cover.target_mask >> i & 1]
    arcs = cover.arcs
    fams = [f for k in range(1, len(arcs) + 1) for f in itertools.combinations(range(len(arcs)), k)
            if all(cover.masks[i] & cover.masks[j] == 0 for i, j in itertools.combinations(f, 2))]
    for k in range(1, max_points + 1):
        for pts in itertools.combinations(reps, k):
            if not any(all(any(arcs[i].contains_point(p) for i in f) for p in pts) for f in fams):
                return False
    return True


grid_interval = st.tuples(st.integers(0, 5), st.integers(1, 6)).filter(lambda t: t[0] < t[1])


@given(st.lists(grid_interval, min_size=1, max_size=4, unique=True))
def test_factorizing_verdict_matches_brute_force(ivs):
    cover = CoverSpec.line(ivs)
    verdict = is_factorizing(cover)
    assert verdict.factorizing == brute_force_factorizing(cover, 4)
    if not verdict:
        # the witness really is a bad point set
        pts = verdict.witness
        fams = disjoint_families(cover)
        assert not any(all(any(cover.arcs[i].contains_point(p) for i in f) for p in pts) for f in fams)


@given(st.lists(grid_interval, min_size=1, max_size=4, unique=True))
def test_connected_target_is_factorizing_iff_covered_by_one_element(ivs):
    cover = CoverSpec.line(ivs)
    comps = cover.arrangement.components(cover.target_mask)
    if len(comps) == 1:
        assert bool(is_factorizing(cover)) == any(m == cover.target_mask for m in cover.masks)


def test_overlapping_pair_is_not_factorizing():
    verdict = is_factorizing(CoverSpec.line([(0, 2), (1, 3)]))
    assert not verdict
    assert len(verdict.witness) == 2


def test_structure_map_multiplies_in_spatial_order():
    A = matrix_algebra(2)
    left, right = Arc.interval(0, 1), Arc.interval(2, 3)
    outer = Arc.interval(0, 3)
    # E01 on the left, E10 on the right: E01 E10 = E00
    assert structure_map([right, left], outer, A, ["E10", "E01"]) == {A.names.index("E00"): 1}
    assert structure_map([left, right], outer, A, ["E10", "E01"]) == {A.names.index("E11"): 1}


def test_structure_map_rejects_overlaps():
    with pytest.raises(CoverError):
        structure_map([Arc.interval(0, 2), Arc.interval(1, 3)], Arc.interval(0, 3), ground_field(), [0, 0])


def test_cech_complex_requires_factorizing_cover():
    with pytest.raises(CoverError) as info:
        cech_complex(CoverSpec.line([(0, 2), (1, 3)]), ground_field())
    assert info.value.witness


@pytest.mark.parametrize("make", SUITE)
@pytest.mark.parametrize("ivs", [[(0, 3), (0, 2), (1, 3)], [(0, 3), (0, 1), (2, 3)], [(0, 3), (1, 2)]])
def test_locality_on_factorizing_covers(make, ivs):
    A = make()
    cover = CoverSpec.line(ivs)
    assert cech_complex(cover, A, max_degree=2).homology([0, 1, 2]) == [A.dim, 0, 0]
    assert right_exactness(cover, A).holds


@given(st.lists(grid_interval, min_size=0, max_size=2, unique=True), st.sampled_from([0, 2]))
def test_locality_property(extra, which):
    A = SUITE[which]()
    cover = CoverSpec.line([(0, 6)] + [iv for iv in extra if iv != (0, 6)])
    assert cech_complex(cover, A, max_degree=1).homology([0, 1]) == [A.dim, 0]


def test_conventions_agree_on_interval_covers():
    cover = CoverSpec.line([(0, 3), (0, 1), (2, 3)])
    A = dual_numbers()
    distinct = cech_complex(cover, A, max_degree=1).homology([0, 1])
    full = cech_complex(cover, A, FullTruncated(3)).homology([0, 1])
    assert distinct == full == [2, 0]


@pytest.mark.parametrize("make", SUITE)
def test_conventions_agree_at_length_four(make):
    A = make()
    pair = CoverSpec.line([(0, 3), (1, 2)])
    assert cech_complex(pair, A, max_degree=2).homology([0, 1, 2]) == [A.dim, 0, 0]
    assert cech_complex(pair, A, FullTruncated(4)).homology([0, 1, 2]) == [A.dim, 0, 0]
    distinct = factorization_homology_circle(A, 1, long_arc_cover(4), max_degree=2).dims
    full = factorization_homology_circle(A, 1, long_arc_cover(4), convention=FullTruncated(4)).dims
    assert full == distinct[:len(full)]


def test_ground_field_on_the_circle():
    assert factorization_homology_circle(ground_field(), 1, long_arc_cover(4), max_degree=2).dims == [1, 0, 0]


def test_value_on_disjoint_unions_is_a_tensor_power():
    arcs = [Arc.interval(0, 1), Arc.interval(2, 3), Arc.interval(4, 5), Arc.interval(0, 6)]
    arr = Arrangement(arcs, LINE, None)
    F = FactorizationAssignment(matrix_algebra(2), arr)
    m = [arr.mask(a) for a in arcs]
    assert F.dimension(m[0]) == 4
    assert F.dimension(m[0] | m[1]) == 16
    assert F.dimension(m[0] | m[1] | m[2]) == 64
    assert F.dimension(m[3]) == 4


@pytest.mark.parametrize("make", SUITE)
def test_nested_structure_maps_compose(make):
    # I1 | I2 | I3 inside J | I3 inside K, against I1 | I2 | I3 inside K directly
    arcs = [Arc.interval(0, 1), Arc.interval(2, 3), Arc.interval(4, 5), Arc.interval(0, 3), Arc.interval(0, 6)]
    arr = Arrangement(arcs, LINE, None)
    F = FactorizationAssignment(make(), arr)
    i1, i2, i3, j, k = (arr.mask(a) for a in arcs)
    inner = i1 | i2 | i3
    direct = F.structure_map(inner, k)
    nested = F.structure_map(j | i3, k).matmul(F.structure_map(inner, j | i3))
    assert direct.rows == nested.rows
    assert F.structure_map(inner, inner).rows == type(direct).identity(F.dimension(inner)).rows


def test_parse_convention():
    assert str(parse_convention("distinct")) == "distinct"
    assert parse_convention("full:4") == FullTruncated(4)
    with pytest.raises(ValueError):
        parse_convention("full:1")
    with pytest.raises(ValueError):
        parse_convention("other")


def test_fact_extend_on_disjoint_opens():
    A = dual_numbers()
    assert homology_dims(fact_extend(A, [(0, 1)])) == [2, 0]
    assert homology_dims(fact_extend(A, [(0, 1), (2, 3)], granularity=2)) == [4, 0]
    assert homology_dims(fact_extend(A, [])) == [1]


def test_circle_covers_by_proper_arcs_are_not_factorizing():
    for cover in (standard_circle_cover(4), long_arc_cover(4), long_arc_cover(6)):
        verdict = is_factorizing(cover)
        assert not verdict and verdict.witness
    assert factorizing_degree(standard_circle_cover(4)) == 1
    assert factorizing_degree(long_arc_cover(4)) == 3


@pytest.mark.parametrize("make", SUITE)
def test_long_arc_cover_recovers_hochschild_homology(make):
    A = make()
    hh = hh_dims(A, 1)
    for lam in (1, Fraction(7, 3)):
        assert factorization_homology_circle(A, lam, long_arc_cover(4, lam)).dims == hh


def test_consecutive_overlap_cover_overcounts_h1():
    # a 4-arc cover with consecutive overlaps sees too few disjoint families
    fh = factorization_homology_circle(product_of_fields(2), 1, standard_circle_cover(4))
    assert fh.dims == [2, 10]


def test_full_convention_agrees_on_the_circle():
    A = product_of_fields(2)
    fh = factorization_homology_circle(A, 1, long_arc_cover(4), convention=FullTruncated(3))
    assert fh.dims == [2, 0]


def test_compare_logs_refinement():
    cmp = compare_fh_hh(dual_numbers(), Fraction(7, 3))
    assert cmp.matches
    assert cmp.final_cover == "long-arc, 4 arcs"
    assert len(cmp.refinement_log) == 2
    assert "differs" in cmp.refinement_log[0]


@given(st.fractions(min_value=Fraction(1, 4), max_value=5, max_denominator=7))
def test_dilation_invariance(lam):
    A = product_of_fields(2)
    assert factorization_homology_circle(A, lam, long_arc_cover(4, lam)).dims == [2, 0]


def test_cover_validation():
    with pytest.raises(CoverError):
        Arc.interval(1, 1)
    with pytest.raises(CoverError):
        Arc.on_circle(0, 2, 1)
    with pytest.raises(CoverError):
        CoverSpec.line([(0, 1)], target=(0, 2))
    with pytest.raises(CoverError):
        standard_circle_cover(2)
