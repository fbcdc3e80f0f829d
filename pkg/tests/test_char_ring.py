import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from wittenfact.char_ring import (
    Generator, MixedClass, PreconditionError, RingSpec, SpecError, a_hat_class, a_hat_genus,
    chern_character, class_exp, class_log, formal_spec, integrate, projective_space,
    string_like_spec, todd_class, todd_genus, trivial_bundle_spec, witten_class, witten_genus,
    witten_limit_check, witten_test_fourfold,
)
from wittenfact.exact_core import QSeries, eisenstein_q, series_exp, series_log

small = st.fractions(min_value=-6, max_value=6, max_denominator=5)


def todd_series_oracle(order):
    # h / (1 - e^{-h}) = 1 / sum_k (-h)^k / (k+1)!
    f = QSeries([Fraction((-1) ** k, math.factorial(k + 1)) for k in range(order + 1)])
    return series_exp(-series_log(f))


def random_hspec(n, coeffs):
    total = {"1": 1}
    total.update({f"h^{i}": c for i, c in enumerate(coeffs[:n], start=1)})
    return formal_spec([("h", 2)], n, total, {f"h^{n}": 1}, name="random")


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_todd_of_projective_space_matches_series_oracle(n):
    P = projective_space(n)
    oracle = todd_series_oracle(n) ** (n + 1)
    h = MixedClass.generator(P.ring, "h")
    expected = sum((h ** i * oracle[i] for i in range(1, n + 1)), MixedClass.scalar(P.ring, oracle[0]))
    assert todd_class(P) == expected
    assert todd_genus(P) == 1


def test_chern_character_of_p2():
    ch = chern_character(projective_space(2), 2)
    h = MixedClass.generator(projective_space(2).ring, "h")
    assert ch[0] == 2
    assert ch[1].coeffs == {1: 3}
    assert ch[2].coeffs == {2: Fraction(3, 2)}
    assert not h.is_zero()


def test_a_hat_genera():
    assert a_hat_genus(projective_space(1)) == 0
    assert a_hat_genus(projective_space(2)) == Fraction(-1, 8)
    assert a_hat_genus(projective_space(3)) == 0


def test_product_genera_are_multiplicative():
    X = projective_space(1).product(projective_space(2))
    assert todd_genus(X) == 1
    Y = witten_test_fourfold()
    assert witten_genus(Y.product(Y), 4) == eisenstein_q(2, 4) * eisenstein_q(2, 4)


def test_product_renames_generators():
    X = projective_space(1).product(projective_space(1))
    assert [g.name for g in X.ring.generators] == ["h_1", "h_2"]
    td = todd_class(X)
    assert {X.ring.format_monomial(m): c for m, c in td.terms()} == {"1": 1, "h_1": 1, "h_2": 1, "h_1*h_2": 1}


def test_witten_class_of_test_fourfold():
    X = witten_test_fourfold()
    wit = witten_class(X, 3)
    u = MixedClass.generator(X.ring, "u")
    assert wit == MixedClass.scalar(X.ring, QSeries.constant(1, 3)) + u * eisenstein_q(2, 3)
    assert witten_genus(X, 3).coefficients == (Fraction(1, 120), 2, 18, 56)


def test_witten_genus_vanishes_below_dimension_four():
    assert witten_genus(projective_space(2), 3).is_zero()


LIMIT_SPECS = [
    trivial_bundle_spec(1),
    trivial_bundle_spec(3),
    witten_test_fourfold(),
    string_like_spec(0, 2, -6, {"e": 1}),
    string_like_spec(1, 0, 0, {"a^4": 1, "e": 0}),
    string_like_spec(2, -3, 5, {"a^4": 3, "a*b": 2, "e": 1}),
    string_like_spec(-4, 1, 1, {"a*b": 1}),
]


@pytest.mark.parametrize("spec", LIMIT_SPECS, ids=lambda s: s.name or "spec")
def test_witten_limit_holds_when_ch2_vanishes(spec):
    assert witten_limit_check(spec)


def test_witten_limit_rejects_p2_with_witness():
    with pytest.raises(PreconditionError) as info:
        witten_limit_check(projective_space(2))
    witness = info.value.witness
    assert {projective_space(2).ring.format_monomial(m): c for m, c in witness.terms()} == {"h^2": Fraction(3, 2)}


@given(st.integers(1, 4), st.lists(small, min_size=4, max_size=4))
def test_a_hat_is_twisted_todd(n, coeffs):
    X = random_hspec(n, coeffs)
    assert a_hat_class(X) == class_exp(X.chern_class(1) * Fraction(-1, 2)) * todd_class(X)


@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3), small, small)
def test_witten_limit_on_random_string_like_specs(c1, c3, c4, i1, i2):
    X = string_like_spec(c1, c3, c4, {"a^4": i1, "e": i2})
    assert witten_limit_check(X)


@given(st.integers(1, 4), st.lists(small, min_size=4, max_size=4))
def test_class_exp_log_inverse(n, coeffs):
    X = random_hspec(n, coeffs)
    nil = X.total_chern.nilpotent_part()
    assert class_log(class_exp(nil)) == nil
    assert class_exp(class_log(X.total_chern)) == X.total_chern


@given(st.integers(1, 4), st.lists(small, min_size=4, max_size=4), st.lists(small, min_size=4, max_size=4))
def test_chern_character_is_additive_on_sums(n, c, d):
    # ch of a direct sum: total Chern classes multiply, characters add
    from wittenfact.char_ring import chern_character_from_total
    X = random_hspec(n, c)
    Y = random_hspec(n, d)
    cy = MixedClass(X.ring, Y.total_chern.coeffs)
    both = chern_character_from_total(X.ring, X.total_chern * cy, 2 * n, n)
    a = chern_character_from_total(X.ring, X.total_chern, n, n)
    b = chern_character_from_total(X.ring, cy, n, n)
    assert all(p == q + r for p, q, r in zip(both, a, b))


def test_spec_validation():
    with pytest.raises(SpecError):
        RingSpec([Generator("h", 3)], 4)
    with pytest.raises(SpecError):
        formal_spec([("h", 2)], 2, {"1": 2}, {"h^2": 1})
    with pytest.raises(SpecError):
        formal_spec([("h", 2)], 2, {"1": 1, "h": 3}, {"h": 1})
    with pytest.raises(SpecError):
        formal_spec([("h", 2)], 2, {"1": 1, "h": 3}, {"h^2": 1}, ch2_trivialized=True)


def test_integrate_only_sees_top_degree():
    X = projective_space(2)
    h = MixedClass.generator(X.ring, "h")
    assert integrate(h * h * 5 + h + 1, X) == 5
