from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from wittenfact import bd
from wittenfact.bd import (
    BDError, BDPresentation, OddCotangentModel, check_bd, conjugate, conjugation_residual,
    differentials_equal, mutate_bracket, odd_cotangent_model, q_coefficient_presentation,
    realize_class, series_exp_poly, series_log_poly, specialize_hbar, trivial_presentation,
    twist_differential,
)
from wittenfact.char_ring import log_todd, log_witten_class, witten_test_fourfold
from wittenfact.exact_core import QSeries

M1 = OddCotangentModel(1, 4)
R1 = M1.ring
coeff = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@pytest.fixture(scope="module")
def P1():
    return odd_cotangent_model(1, 4)


def poly(terms):
    out = {}
    for name, c in terms.items():
        p = R1.one()
        if name != "1":
            for v in name.split("*"):
                p = R1.mul(p, R1.var(v))
        out = R1.add(out, R1.scale(p, Fraction(c)))
    return out


monomial_names = st.sampled_from(["1", "x", "xi", "dx", "dxi", "th", "x*xi", "x*dx", "xi*dxi",
                                  "dx*dxi", "x*dxi", "xi*dx", "x^2", "dx*th", "x*xi*dxi"])
polys = st.dictionaries(monomial_names, coeff, max_size=4).map(
    lambda d: poly({k.replace("x^2", "x*x"): v for k, v in d.items()}))


def test_frozen_operator_values():
    # i_pi differentiates by dxi first, then dx
    assert M1.L(poly({"x*dxi": 1})) == poly({"1": -1})
    assert M1.L(poly({"dx*dxi": 1})) == {}
    assert M1.bracket(poly({"x": 1}), poly({"xi": 1})) == {}
    assert M1.bracket(poly({"dx": 1}), poly({"xi": 1})) != {}


def test_odd_variables_anticommute():
    a, b = poly({"dx": 1}), poly({"dxi": 1})
    assert R1.mul(a, b) == R1.scale(R1.mul(b, a), -1)
    assert R1.mul(a, a) == {}


@given(polys)
def test_L_squares_to_zero(p):
    assert M1.L(M1.L(p)) == {}


even_polys = st.dictionaries(st.sampled_from(["1", "x", "xi", "x*xi", "dx*dxi", "dx*th", "dxi*th",
                                              "x*dx*dxi", "xi*dx*th", "x*x"]),
                             coeff, max_size=3).map(lambda d: poly({k: v for k, v in d.items()}))


@given(even_polys, even_polys, even_polys)
def test_L_has_order_two(a, b, c):
    # seven-term identity; on even elements all signs are +
    R, L = R1, M1.L
    lhs = L(R.mul(R.mul(a, b), c))
    terms = [(L(R.mul(a, b)), c), (L(R.mul(b, c)), a), (L(R.mul(a, c)), b)]
    for t, u in terms:
        lhs = R.add(lhs, R.mul(t, u), scale=-1)
    for t, u, v in [(L(a), b, c), (L(b), a, c), (L(c), a, b)]:
        lhs = R.add(lhs, R.mul(R.mul(t, u), v))
    assert lhs == {}


def _homogeneous(p):
    degs = {}
    for m, c in p.items():
        degs.setdefault(R1.mono_degree(m), {})[m] = c
    return max(degs.values(), key=len) if degs else {}


@given(polys, polys)
def test_bracket_symmetry_on_homogeneous_elements(a, b):
    a, b = _homogeneous(a), _homogeneous(b)
    if not a or not b:
        return
    da, db = R1.degree_of(a), R1.degree_of(b)
    lhs = M1.bracket(a, b)
    rhs = R1.scale(M1.bracket(b, a), (-1) ** (da * db))
    assert lhs == rhs


def test_model_passes_all_identities(P1):
    report = check_bd(P1)
    assert report.passed, report.violations()[:3]
    assert set(report.results) == set(bd.IDENTITIES)
    assert report.results["weights"].checked > 0


def test_mutation_is_detected(P1):
    bad = mutate_bracket(P1, ("dx", "xi"))
    report = check_bd(bad)
    assert not report.passed
    assert report.results["bd_leibniz"].witnesses[0][0] == ("dx", "xi")


def test_unknown_identity_is_rejected(P1):
    with pytest.raises(BDError):
        check_bd(P1, ["nope"])


@pytest.mark.parametrize("value", [0, 1])
def test_specializations(P1, value):
    Q = specialize_hbar(P1, value)
    assert check_bd(Q).passed
    if value == 0:
        assert all(not v for v in Q.D.values())


def test_twist_by_log_of_unipotent_base_form(P1):
    u = poly({"dx*th": 1})
    alpha = series_log_poly(M1, R1.add(R1.one(), u))
    Q = twist_differential(P1, P1.from_poly(alpha))
    assert not Q.window_violations
    assert check_bd(Q).passed


def test_twist_rejects_nonzero_degree(P1):
    with pytest.raises(BDError):
        twist_differential(P1, P1.element({"dx": 1}))


BASE = [poly({"dx*th": 1}), poly({"x*dx*th": 1}), poly({"x*x*dx*th": 1})]


@given(st.lists(coeff, min_size=3, max_size=3))
def test_conjugation_identity(cs):
    alpha = {}
    for c, b in zip(cs, BASE):
        alpha = R1.add(alpha, R1.scale(b, c))
    T = series_exp_poly(M1, alpha)
    for m in M1.basis_monomials():
        if sum(m) <= 2:
            assert conjugation_residual(M1, T, {m: Fraction(1)}) == {}


def test_conjugated_presentation(P1):
    T = R1.add(R1.one(), poly({"dx*th": 1}))
    conj = conjugate(P1, T)
    Q = conj.presentation
    assert check_bd(Q, ["d_squared"]).passed
    assert conj.chain_map(R1.one()) == T


def test_witten_twist_squares_to_zero_and_degenerates_to_todd(P1):
    X = witten_test_fourfold()
    images = {"u": poly({"dx*th": 1})}
    alpha = P1.from_poly(realize_class(log_witten_class(X, 3), M1, images))
    W = twist_differential(P1, alpha)
    assert check_bd(W, ["d_squared", "bd_leibniz"]).passed
    for n in range(4):
        Wn = q_coefficient_presentation(W, n)
        assert check_bd(Wn, ["d_squared"]).passed
    todd_alpha = P1.from_poly(realize_class(log_todd(X) - X.chern_class(1) * Fraction(1, 2), M1, images))
    assert differentials_equal(q_coefficient_presentation(W, 0), twist_differential(P1, todd_alpha)) == []
    assert isinstance(next(iter(alpha.values())), QSeries)


def test_json_roundtrip(P1):
    Q = BDPresentation.from_json(P1.to_json())
    assert Q.names == P1.names and Q.D == P1.D and Q.bracket == P1.bracket
    assert check_bd(Q, ["d_squared", "jacobi"]).passed


def test_trivial_presentation():
    P = trivial_presentation(["1", "e"], [0, -1], {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}})
    assert check_bd(P).passed


def test_exp_needs_nilpotent_input():
    with pytest.raises(BDError):
        series_exp_poly(M1, R1.one())
    with pytest.raises(BDError):
        series_log_poly(M1, R1.scale(R1.one(), 2))
