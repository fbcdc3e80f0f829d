import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from wittenfact.exact_core import (
    DomainError, QSeries, bernoulli, divisor_power_sum, eisenstein_lattice_numeric,
    eisenstein_lattice_tail, eisenstein_q, format_rational, q_from_tau, series_exp,
    series_log, to_fraction,
)

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def series(order=6, zero_constant=False, unit_constant=False):
    def build(cs):
        cs = list(cs)
        if zero_constant:
            cs[0] = Fraction(0)
        if unit_constant:
            cs[0] = Fraction(1)
        return QSeries(cs)
    return st.lists(fractions, min_size=order + 1, max_size=order + 1).map(build)


def bernoulli_akiyama_tanigawa(n):
    # independent of the recurrence used in the library; gives B_1 = +1/2
    a = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
    return a[0]


def test_to_fraction_and_format():
    assert to_fraction("3/6") == Fraction(1, 2)
    assert to_fraction(4) == 4
    assert format_rational(Fraction(-7, 3)) == "-7/3"
    assert format_rational(Fraction(2)) == "2"
    with pytest.raises((TypeError, ValueError)):
        to_fraction(0.5)


def test_bernoulli_against_akiyama_tanigawa():
    assert bernoulli(1) == Fraction(-1, 2)
    for n in range(2, 31):
        assert bernoulli(n) == bernoulli_akiyama_tanigawa(n)


def test_bernoulli_frozen_values():
    assert bernoulli(2) == Fraction(1, 6)
    assert bernoulli(4) == Fraction(-1, 30)
    assert bernoulli(12) == Fraction(-691, 2730)


@pytest.mark.parametrize("m", [1, 3, 5, 7])
def test_divisor_sums_brute_force(m):
    for n in range(1, 60):
        assert divisor_power_sum(n, m) == sum(d ** m for d in range(1, n + 1) if n % d == 0)


def test_eisenstein_frozen_coefficients():
    assert eisenstein_q(1, 3).coefficients == (Fraction(-1, 12), 2, 6, 8)
    assert eisenstein_q(2, 4).coefficients == (Fraction(1, 120), 2, 18, 56, 146)
    assert eisenstein_q(3, 3).coefficients == (Fraction(-1, 252), 2, 66, 488)


def test_eisenstein_constant_term_is_zeta_value():
    # -B_2k / 2k = (2k-1)! zeta(2k) / (2 pi i)^2k
    for k in range(1, 6):
        N = 20000
        zeta = sum(1 / n ** (2 * k) for n in range(1, N)) + N ** (1 - 2 * k) / (2 * k - 1) + N ** (-2 * k) / 2
        expected = math.factorial(2 * k - 1) * zeta * 2 / (2j * math.pi) ** (2 * k)
        assert float(eisenstein_q(k, 0)[0]) == pytest.approx(expected.real, rel=1e-9)


def test_eisenstein_e4_squared_is_e8():
    # weight-8 forms are one-dimensional: E_4^2 = E_8 in the classical normalization
    e4 = eisenstein_q(2, 8) * 120
    e8 = eisenstein_q(4, 8) * Fraction(-1, 1) / bernoulli(8) * 8
    assert e4 * e4 == e8


def test_lattice_sum_tail_correction():
    tau = 2j
    q = q_from_tau(tau)
    ref = eisenstein_q(2, 10).evaluate(q)
    corrected = eisenstein_lattice_numeric(2, tau, 200, tail_correction=True)
    assert corrected.relative_error(ref) < 1e-8
    # the plain box sum converges like cutoff^-2
    e100 = eisenstein_lattice_numeric(2, tau, 100).relative_error(ref)
    e200 = eisenstein_lattice_numeric(2, tau, 200).relative_error(ref)
    assert 3.5 < e100 / e200 < 4.5


def test_lattice_tail_is_small_for_higher_weights():
    tau = 1j + Fraction(1, 3)
    assert abs(eisenstein_lattice_tail(3, complex(tau), 50)) < 1e-9


def test_lattice_rejects_bad_input():
    with pytest.raises(ValueError):
        eisenstein_lattice_numeric(1, 2j, 10)
    with pytest.raises(ValueError):
        eisenstein_lattice_numeric(2, -1j, 10)


@given(series(), series(), series())
def test_series_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == 0


@given(series(zero_constant=True))
def test_exp_log_inverse(s):
    assert series_log(series_exp(s)) == s


@given(series(unit_constant=True))
def test_log_exp_inverse(s):
    assert series_exp(series_log(s)) == s


@given(series(zero_constant=True), series(zero_constant=True))
def test_exp_is_multiplicative(a, b):
    assert series_exp(a + b) == series_exp(a) * series_exp(b)


def test_exp_log_domain():
    with pytest.raises(DomainError):
        series_exp(QSeries([1, 1]))
    with pytest.raises(DomainError):
        series_log(QSeries([2, 1]))


def test_truncation_to_smaller_order():
    a = QSeries([1, 2, 3, 4])
    b = QSeries([1, 1])
    assert (a * b).order == 1
    assert (a + 1)[0] == 2
    with pytest.raises(ValueError):
        a.truncate(5)
