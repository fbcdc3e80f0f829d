"""Exact rational arithmetic, truncated q-series and Eisenstein series.

The rational field is :class:`fractions.Fraction`.  :class:`QSeries` is a
truncated power series with ``Fraction`` coefficients; the variable is called
``q`` but the same class is used for any formal variable (e.g. the ``x`` of a
characteristic-class generating function).
"""
from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable

import numpy as np

__all__ = [
    "Fraction",
    "QSeries",
    "LatticeSumEstimate",
    "DomainError",
    "bernoulli",
    "divisor_power_sum",
    "eisenstein_q",
    "eisenstein_lattice_numeric",
    "eisenstein_lattice_tail",
    "series_exp",
    "series_log",
    "to_fraction",
    "format_rational",
    "q_from_tau",
]


class DomainError(ValueError):
    """An operation was applied outside its domain (e.g. log of q-series with constant term != 1)."""


def to_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction (floats are refused)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def format_rational(value: Fraction | int) -> str:
    """Canonical ``p/q`` string; integers print without a denominator."""
    return str(Fraction(value))


class QSeries:
    """Truncated power series ``c_0 + c_1 q + ... + c_N q^N`` over the rationals.

    Binary operations truncate to the smaller of the two orders.  Plain
    rationals act as constant series of unbounded order.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coefficients: Iterable, order: int | None = None):
        coeffs = [to_fraction(c) for c in coefficients]
        if order is None:
            if not coeffs:
                raise ValueError("need at least one coefficient or an explicit order")
            order = len(coeffs) - 1
        if order < 0:
            raise ValueError("truncation order must be non-negative")
        coeffs = coeffs[: order + 1]
        coeffs.extend([Fraction(0)] * (order + 1 - len(coeffs)))
        self._coeffs = tuple(coeffs)

    @classmethod
    def constant(cls, value, order: int) -> QSeries:
        return cls([value], order)

    @classmethod
    def variable(cls, order: int) -> QSeries:
        """The series ``q`` truncated at ``order``."""
        return cls([0, 1], order)

    @property
    def order(self) -> int:
        return len(self._coeffs) - 1

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return self._coeffs

    def __getitem__(self, n: int) -> Fraction:
        return self._coeffs[n]

    def __len__(self) -> int:
        return len(self._coeffs)

    def __iter__(self):
        return iter(self._coeffs)

    def truncate(self, order: int) -> QSeries:
        if order > self.order:
            raise ValueError(f"cannot extend a series known to order {self.order} to {order}")
        return QSeries(self._coeffs[: order + 1])

    def is_zero(self) -> bool:
        return not any(self._coeffs)

    # arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> QSeries | None:
        if isinstance(other, QSeries):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return QSeries([other], self.order)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = min(self.order, o.order)
        return QSeries([a + b for a, b in zip(self._coeffs[: n + 1], o._coeffs)])

    __radd__ = __add__

    def __neg__(self) -> QSeries:
        return QSeries([-a for a in self._coeffs])

    def __pos__(self) -> QSeries:
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            c = Fraction(other)
            return QSeries([c * a for a in self._coeffs])
        if not isinstance(other, QSeries):
            return NotImplemented
        n = min(self.order, other.order)
        a, b = self._coeffs, other._coeffs
        out = [Fraction(0)] * (n + 1)
        for i in range(n + 1):
            ai = a[i]
            if not ai:
                continue
            for j in range(n + 1 - i):
                if b[j]:
                    out[i + j] += ai * b[j]
        return QSeries(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self * (Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, k: int) -> QSeries:
        if k < 0:
            raise DomainError("negative powers of q-series are not supported")
        result = QSeries.constant(1, self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, QSeries):
            return self.order == other.order and self._coeffs == other._coeffs
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self._coeffs[0] == other and not any(self._coeffs[1:])
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._coeffs)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __repr__(self) -> str:
        return f"QSeries({[format_rational(c) for c in self._coeffs]})"

    def __str__(self) -> str:
        terms = []
        for n, c in enumerate(self._coeffs):
            if not c:
                continue
            mono = "" if n == 0 else ("q" if n == 1 else f"q^{n}")
            if n and c == 1:
                terms.append(mono)
            elif n and c == -1:
                terms.append("-" + mono)
            else:
                terms.append(format_rational(c) + ("*" + mono if mono else ""))
        body = " + ".join(terms).replace("+ -", "- ") or "0"
        return f"{body} + O(q^{self.order + 1})"

    # calculus ---------------------------------------------------------------

    def derivative(self) -> QSeries:
        """Formal derivative; the result is known one order less."""
        if self.order == 0:
            return QSeries([0], 0)
        return QSeries([n * c for n, c in enumerate(self._coeffs)][1:])

    def evaluate(self, q: complex) -> complex:
        """Evaluate the truncated polynomial at a complex number (Horner, double precision)."""
        acc = 0j
        for c in reversed(self._coeffs):
            acc = acc * q + float(c)
        return acc

    def to_json(self) -> list[str]:
        return [format_rational(c) for c in self._coeffs]


def series_exp(s: QSeries) -> QSeries:
    """Formal exponential; requires zero constant term."""
    if s[0] != 0:
        raise DomainError(f"exp needs constant term 0, got {s[0]}")
    n = s.order
    g = s.coefficients
    f = [Fraction(0)] * (n + 1)
    f[0] = Fraction(1)
    # f' = g' f  =>  m f_m = sum_{k=1}^m k g_k f_{m-k}
    for m in range(1, n + 1):
        acc = Fraction(0)
        for k in range(1, m + 1):
            if g[k]:
                acc += k * g[k] * f[m - k]
        f[m] = acc / m
    return QSeries(f)


def series_log(s: QSeries) -> QSeries:
    """Formal logarithm; requires constant term 1."""
    if s[0] != 1:
        raise DomainError(f"log needs constant term 1, got {s[0]}")
    n = s.order
    f = s.coefficients
    g = [Fraction(0)] * (n + 1)
    # f' = g' f  =>  m g_m = m f_m - sum_{k=1}^{m-1} k g_k f_{m-k}
    for m in range(1, n + 1):
        acc = m * f[m]
        for k in range(1, m):
            if g[k]:
                acc -= k * g[k] * f[m - k]
        g[m] = acc / m
    return QSeries(g)


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n with B_1 = -1/2.

    Uses the recurrence sum_{k=0}^{n} C(n+1, k) B_k = 0.
    """
    if n < 0:
        raise ValueError("Bernoulli numbers are indexed by n >= 0")
    if n == 0:
        return Fraction(1)
    if n > 1 and n % 2:
        return Fraction(0)
    acc = Fraction(0)
    for k in range(n):
        acc += math.comb(n + 1, k) * bernoulli(k)
    return -acc / (n + 1)


def divisor_power_sum(n: int, m: int) -> int:
    """sigma_m(n), the sum of d**m over the positive divisors d of n."""
    if n < 1:
        raise ValueError("divisor sums need n >= 1")
    if m < 0:
        raise ValueError("divisor sums need a non-negative power")
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d**m
            e = n // d
            if e != d:
                total += e**m
        d += 1
    return total


def eisenstein_q(k: int, order: int) -> QSeries:
    """Rationally normalised Eisenstein series of weight 2k.

    Returns (2k-1)!/(2 pi i)^{2k} * E_{2k}(tau) as a q-series:

        -B_{2k}/(2k) + 2 * sum_{n>=1} sigma_{2k-1}(n) q^n

    truncated at ``order``.
    """
    if k < 1:
        raise ValueError("Eisenstein series need k >= 1")
    if order < 0:
        raise ValueError("order must be non-negative")
    coeffs = [-bernoulli(2 * k) / (2 * k)]
    coeffs += [2 * divisor_power_sum(n, 2 * k - 1) for n in range(1, order + 1)]
    return QSeries(coeffs)


class LatticeSumEstimate:
    """Floating-point value of a truncated lattice sum, with the data that produced it."""

    __slots__ = ("value", "cutoff", "tau", "tail_corrected")

    def __init__(self, value: complex, cutoff: int, tau: complex, tail_corrected: bool = False):
        if cutoff < 1:
            raise ValueError("cutoff must be >= 1")
        if tau.imag <= 0:
            raise ValueError("tau must lie in the upper half plane")
        self.value = complex(value)
        self.cutoff = int(cutoff)
        self.tau = complex(tau)
        self.tail_corrected = tail_corrected

    def relative_error(self, reference: complex) -> float:
        return abs(self.value - reference) / abs(reference)

    def __repr__(self) -> str:
        return (f"LatticeSumEstimate(value={self.value!r}, cutoff={self.cutoff}, "
                f"tau={self.tau!r}, tail_corrected={self.tail_corrected})")


def _normalisation(k: int) -> complex:
    return math.factorial(2 * k - 1) / (2j * math.pi) ** (2 * k)


def eisenstein_lattice_tail(k: int, tau: complex, cutoff: int) -> complex:
    """Continuum estimate of the part of the lattice sum outside the square box.

    Each lattice point owns the cell {s + t tau : |s|, |t| <= 1/2}, so the box
    ``|m|, |n| <= cutoff`` is approximated by the parallelogram of half-width
    ``cutoff + 1/2``.  The integral of z^{-2k} over its exterior, divided by the
    cell area Im(tau), is evaluated in closed form with the complex Green
    formula  iint f dA = (1/2i) oint conj(z) z^{-2k} dz.  The result is already
    multiplied by (2k-1)!/(2 pi i)^{2k}.
    """
    if k < 2:
        raise ValueError("the tail estimate needs k >= 2")
    h = cutoff + 0.5
    corners = [h + h * tau, -h + h * tau, -h - h * tau, h - h * tau]
    p = 2 * k
    boundary = 0j
    for a, b in zip(corners, corners[1:] + corners[:1]):
        e = b - a
        c1 = e.conjugate() / e
        c0 = a.conjugate() - c1 * a

        def primitive(w: complex) -> complex:
            return c0 * w ** (1 - p) / (1 - p) + c1 * w ** (2 - p) / (2 - p)

        boundary += primitive(b) - primitive(a)
    exterior = -boundary / 2j
    return exterior / tau.imag * _normalisation(k)


def eisenstein_lattice_numeric(k: int, tau: complex, cutoff: int,
                               tail_correction: bool = False) -> LatticeSumEstimate:
    """Direct lattice sum sum'_{(m,n)} (m + n tau)^{-2k} over the box |m|, |n| <= cutoff.

    The sum is accumulated in square shells of increasing max(|m|, |n|), in
    double precision, then multiplied by (2k-1)!/(2 pi i)^{2k}.  With
    ``tail_correction`` the continuum estimate of the missing exterior
    (:func:`eisenstein_lattice_tail`) is added; the plain box sum carries an
    O(cutoff^-2) truncation error for k = 2.
    """
    if k < 2:
        raise ValueError("the lattice sum converges absolutely only for k >= 2")
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half plane")
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    p = 2 * k
    total = 0j
    for r in range(1, cutoff + 1):
        side = np.arange(-r, r + 1)
        # top and bottom rows n = +-r, then the columns m = +-r without corners
        inner = np.arange(-r + 1, r)
        m = np.concatenate([side, side, np.full(inner.size, r), np.full(inner.size, -r)])
        n = np.concatenate([np.full(side.size, r), np.full(side.size, -r), inner, inner])
        z = m + n * tau
        total += complex(np.sum(z ** (-p)))
    value = total * _normalisation(k)
    if tail_correction:
        value += eisenstein_lattice_tail(k, tau, cutoff)
    return LatticeSumEstimate(value, cutoff, tau, tail_correction)


def q_from_tau(tau: complex) -> complex:
    return cmath.exp(2j * math.pi * complex(tau))
