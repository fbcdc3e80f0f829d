"""Formal models of even cohomology rings and the characteristic classes built on them.

A :class:`RingSpec` is a graded-commutative ring presented by even-degree
generators, monomial relations and truncation above the top degree.  A
:class:`ManifoldSpec` adds a complex dimension, a total Chern class of the
tangent bundle and an integration functional.  No geometry is computed: the
Todd, A-hat and Witten classes are universal expressions in Chern classes and
are evaluated exactly in these rings, with rational or q-series coefficients.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .exact_core import QSeries, bernoulli, eisenstein_q, to_fraction

Monomial = tuple  # exponent vector, one entry per generator


class SpecError(ValueError):
    """A ring or manifold description is malformed."""


class PreconditionError(ValueError):
    """An operation's mathematical precondition fails; ``witness`` names the offending data."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int


class RingSpec:
    """Truncated graded-commutative ring on even generators modulo monomial relations.

    The basis consists of the monomials of degree <= ``top_degree`` not
    divisible by any relation monomial.  ``integration`` is a linear
    functional on the top-degree basis monomials.
    """

    def __init__(self, generators: Sequence[Generator], top_degree: int,
                 relations: Iterable[Monomial] = (),
                 integration: Mapping[Monomial, Fraction] | None = None):
        self.generators = tuple(generators)
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise SpecError(f"duplicate generator names in {names}")
        for g in self.generators:
            if g.degree <= 0 or g.degree % 2:
                raise SpecError(f"generator {g.name} must have positive even degree, got {g.degree}")
        if top_degree < 0 or top_degree % 2:
            raise SpecError(f"top degree must be even and non-negative, got {top_degree}")
        self.top_degree = top_degree
        self.relations = tuple(tuple(r) for r in relations)
        for r in self.relations:
            if len(r) != len(self.generators) or any(e < 0 for e in r) or not any(r):
                raise SpecError(f"bad relation monomial {r}")
        self.basis: tuple[Monomial, ...] = tuple(self._enumerate_basis())
        self.index = {m: i for i, m in enumerate(self.basis)}
        self.degrees = tuple(self.monomial_degree(m) for m in self.basis)
        integration = dict(integration or {})
        self.integration: dict[int, Fraction] = {}
        for mono, value in integration.items():
            mono = tuple(mono)
            if mono not in self.index:
                raise SpecError(f"integration given on {self.format_monomial(mono)}, which is zero in the ring")
            if self.monomial_degree(mono) != top_degree:
                raise SpecError(f"integration must vanish outside the top degree; "
                                f"{self.format_monomial(mono)} has degree {self.monomial_degree(mono)}")
            value = to_fraction(value)
            if value:
                self.integration[self.index[mono]] = value
        self.table = self._multiplication_table()
        self.validate()

    # construction ---------------------------------------------------------

    def monomial_degree(self, mono: Monomial) -> int:
        return sum(e * g.degree for e, g in zip(mono, self.generators))

    def _survives(self, mono: Monomial) -> bool:
        if self.monomial_degree(mono) > self.top_degree:
            return False
        return not any(all(e >= r for e, r in zip(mono, rel)) for rel in self.relations)

    def _enumerate_basis(self):
        bounds = [self.top_degree // g.degree for g in self.generators]
        monos = [m for m in itertools.product(*(range(b + 1) for b in bounds)) if self._survives(m)]
        monos.sort(key=lambda m: (self.monomial_degree(m), tuple(-e for e in m)))
        return monos

    def _multiplication_table(self):
        table = {}
        for i, a in enumerate(self.basis):
            for j, b in enumerate(self.basis):
                prod = tuple(x + y for x, y in zip(a, b))
                table[i, j] = self.index.get(prod) if self._survives(prod) else None
        return table

    def validate(self) -> None:
        """Check associativity, graded commutativity and the unit on the basis."""
        n = len(self.basis)
        unit = self.index[tuple(0 for _ in self.generators)]
        for i in range(n):
            if self.table[unit, i] != i or self.table[i, unit] != i:
                raise SpecError(f"unit law fails at {self.format_monomial(self.basis[i])}")
            for j in range(n):
                # all generators are even, so graded commutativity is plain commutativity
                if self.table[i, j] != self.table[j, i]:
                    raise SpecError("multiplication is not commutative at "
                                    f"({self.format_monomial(self.basis[i])}, {self.format_monomial(self.basis[j])})")
                ij = self.table[i, j]
                for k in range(n):
                    left = None if ij is None else self.table[ij, k]
                    jk = self.table[j, k]
                    right = None if jk is None else self.table[i, jk]
                    if left != right:
                        raise SpecError("multiplication is not associative at "
                                        f"{tuple(self.format_monomial(self.basis[t]) for t in (i, j, k))}")

    # helpers ---------------------------------------------------------------

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def unit_index(self) -> int:
        return self.index[tuple(0 for _ in self.generators)]

    def generator_monomial(self, name: str) -> Monomial:
        for i, g in enumerate(self.generators):
            if g.name == name:
                return tuple(1 if j == i else 0 for j in range(len(self.generators)))
        raise KeyError(name)

    def format_monomial(self, mono: Monomial) -> str:
        parts = []
        for e, g in zip(mono, self.generators):
            if e == 1:
                parts.append(g.name)
            elif e > 1:
                parts.append(f"{g.name}^{e}")
        return "*".join(parts) or "1"

    def parse_monomial(self, exponents: Mapping[str, int]) -> Monomial:
        names = [g.name for g in self.generators]
        unknown = set(exponents) - set(names)
        if unknown:
            raise SpecError(f"unknown generators {sorted(unknown)}")
        return tuple(int(exponents.get(name, 0)) for name in names)

    def tensor(self, other: RingSpec) -> RingSpec:
        """Tensor product ring with the product integration functional."""
        left, right = list(self.generators), list(other.generators)
        clash = {g.name for g in left} & {g.name for g in right}
        if clash:
            left = [Generator(g.name + "_1" if g.name in clash else g.name, g.degree) for g in left]
            right = [Generator(g.name + "_2" if g.name in clash else g.name, g.degree) for g in right]
        gens = left + right
        rels = []
        rels += _factor_truncation_relations(self, other)
        integration = {}
        for i, a in self.integration.items():
            for j, b in other.integration.items():
                integration[self.basis[i] + other.basis[j]] = a * b
        return RingSpec(gens, self.top_degree + other.top_degree, rels, integration)


def _factor_truncation_relations(a: RingSpec, b: RingSpec) -> list[Monomial]:
    """Monomials of a factor that exceed its own top degree (or hit its relations) must die."""
    rels = []
    pad_b = tuple(0 for _ in b.generators)
    pad_a = tuple(0 for _ in a.generators)
    for ring, wrap in ((a, lambda m: m + pad_b), (b, lambda m: pad_a + m)):
        bounds = [ring.top_degree // g.degree + 1 for g in ring.generators]
        for m in itertools.product(*(range(x + 1) for x in bounds)):
            if any(m) and not ring._survives(m):
                # keep only minimal non-surviving monomials
                if all(ring._survives(tuple(e - (k == i) for k, e in enumerate(m)))
                       for i in range(len(m)) if m[i]):
                    rels.append(wrap(m))
    return rels


class MixedClass:
    """An element of a RingSpec with Fraction or QSeries coefficients.

    Stored as a dictionary from basis index to nonzero coefficient.
    """

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: RingSpec, coeffs: Mapping[int, object] | None = None):
        self.ring = ring
        self.coeffs = {i: c for i, c in (coeffs or {}).items() if c}

    # constructors ---------------------------------------------------------

    @classmethod
    def scalar(cls, ring: RingSpec, value) -> MixedClass:
        return cls(ring, {ring.unit_index: value})

    @classmethod
    def from_monomials(cls, ring: RingSpec, terms: Mapping[Monomial, object]) -> MixedClass:
        coeffs: dict[int, object] = {}
        for mono, c in terms.items():
            mono = tuple(mono)
            if not ring._survives(mono):
                continue
            i = ring.index[mono]
            coeffs[i] = coeffs.get(i, 0) + c
        return cls(ring, coeffs)

    @classmethod
    def generator(cls, ring: RingSpec, name: str, coefficient=1) -> MixedClass:
        return cls.from_monomials(ring, {ring.generator_monomial(name): Fraction(coefficient)})

    # arithmetic -----------------------------------------------------------

    def _check(self, other: MixedClass) -> None:
        if other.ring is not self.ring:
            raise SpecError("classes live in different rings")

    def __add__(self, other):
        if not isinstance(other, MixedClass):
            return self + MixedClass.scalar(self.ring, other)
        self._check(other)
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            out[i] = out[i] + c if i in out else c
        return MixedClass(self.ring, out)

    __radd__ = __add__

    def __neg__(self) -> MixedClass:
        return MixedClass(self.ring, {i: -c for i, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MixedClass):
            return MixedClass(self.ring, {i: c * other for i, c in self.coeffs.items()})
        self._check(other)
        table = self.ring.table
        out: dict[int, object] = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                k = table[i, j]
                if k is None:
                    continue
                term = a * b
                out[k] = out[k] + term if k in out else term
        return MixedClass(self.ring, out)

    def __rmul__(self, other):
        return MixedClass(self.ring, {i: other * c for i, c in self.coeffs.items()})

    def __pow__(self, k: int) -> MixedClass:
        result = MixedClass.scalar(self.ring, Fraction(1))
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, MixedClass):
            other = MixedClass.scalar(self.ring, other)
        if other.ring is not self.ring:
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        return all(_scalar_eq(self.coeffs.get(i, 0), other.coeffs.get(i, 0)) for i in keys)

    __hash__ = None

    # structure ------------------------------------------------------------

    def component(self, degree: int) -> MixedClass:
        return MixedClass(self.ring, {i: c for i, c in self.coeffs.items() if self.ring.degrees[i] == degree})

    def constant_term(self):
        return self.coeffs.get(self.ring.unit_index, Fraction(0))

    def nilpotent_part(self) -> MixedClass:
        return MixedClass(self.ring, {i: c for i, c in self.coeffs.items() if i != self.ring.unit_index})

    def is_zero(self) -> bool:
        return not self.coeffs

    def map_coefficients(self, fn) -> MixedClass:
        return MixedClass(self.ring, {i: fn(c) for i, c in self.coeffs.items()})

    def q_coefficient(self, n: int) -> MixedClass:
        """The class of q^n coefficients (rational classes are their own q^0 part)."""
        def pick(c):
            if isinstance(c, QSeries):
                return c[n]
            return c if n == 0 else Fraction(0)
        return self.map_coefficients(pick)

    def terms(self):
        """Yield (monomial, coefficient) in basis order."""
        for i in sorted(self.coeffs):
            yield self.ring.basis[i], self.coeffs[i]

    def __repr__(self) -> str:
        parts = [f"({c})*{self.ring.format_monomial(m)}" for m, c in self.terms()]
        return "MixedClass(" + (" + ".join(parts) or "0") + ")"


def _scalar_eq(a, b) -> bool:
    if isinstance(a, QSeries) or isinstance(b, QSeries):
        diff = a - b
        return not diff
    return a == b


def class_exp(x: MixedClass) -> MixedClass:
    """exp of a class with vanishing degree-0 part (a finite sum by nilpotency)."""
    if x.constant_term():
        raise PreconditionError("exp is only taken of classes with zero degree-0 part", x.constant_term())
    one = MixedClass.scalar(x.ring, Fraction(1))
    result, power = one, one
    for k in range(1, x.ring.top_degree // 2 + 1):
        power = power * x
        if power.is_zero():
            break
        result = result + power * Fraction(1, math.factorial(k))
    return result


def class_log(x: MixedClass) -> MixedClass:
    """log of a class whose degree-0 part is exactly 1."""
    if not _scalar_eq(x.constant_term(), Fraction(1)):
        raise PreconditionError("log needs degree-0 part equal to 1", x.constant_term())
    n = x.nilpotent_part()
    result = MixedClass(x.ring)
    power = MixedClass.scalar(x.ring, Fraction(1))
    for k in range(1, x.ring.top_degree // 2 + 1):
        power = power * n
        if power.is_zero():
            break
        result = result + power * Fraction((-1) ** (k + 1), k)
    return result


@dataclass
class ManifoldSpec:
    """A formal complex manifold: cohomology ring, dimension and c(TX)."""

    ring: RingSpec
    complex_dimension: int
    total_chern: MixedClass
    ch2_trivialized: bool = False
    name: str = ""

    def __post_init__(self):
        if self.complex_dimension < 0:
            raise SpecError("complex dimension must be non-negative")
        if self.ring.top_degree != 2 * self.complex_dimension:
            raise SpecError(f"top degree {self.ring.top_degree} != 2 * complex dimension {self.complex_dimension}")
        if not _scalar_eq(self.total_chern.constant_term(), Fraction(1)):
            raise SpecError("total Chern class must start with 1")
        for i, c in self.total_chern.coeffs.items():
            if isinstance(c, QSeries):
                raise SpecError("Chern classes must have rational coefficients")
            deg = self.ring.degrees[i]
            if deg > 2 * self.complex_dimension:
                raise SpecError(f"c_{deg // 2} exceeds the rank")
        if self.ch2_trivialized:
            ch2 = chern_character(self, 2)[2]
            if not ch2.is_zero():
                raise SpecError(f"ch2_trivialized is set but ch_2(TX) = {ch2!r}")

    def chern_class(self, i: int) -> MixedClass:
        return self.total_chern.component(2 * i)

    def product(self, other: ManifoldSpec) -> ManifoldSpec:
        """Product manifold: tensor product ring, c(T(X x Y)) = c(TX) c(TY)."""
        ring = self.ring.tensor(other.ring)
        pad_r = tuple(0 for _ in other.ring.generators)
        pad_l = tuple(0 for _ in self.ring.generators)
        left = MixedClass.from_monomials(ring, {m + pad_r: c for m, c in self.total_chern.terms()})
        right = MixedClass.from_monomials(ring, {pad_l + m: c for m, c in other.total_chern.terms()})
        return ManifoldSpec(ring, self.complex_dimension + other.complex_dimension, left * right,
                            self.ch2_trivialized and other.ch2_trivialized,
                            name=f"{self.name} x {other.name}".strip())


# characteristic classes ------------------------------------------------------

def power_sums(ring: RingSpec, total_chern: MixedClass, max_m: int) -> list[MixedClass]:
    """Newton power sums p_1..p_max_m of the Chern roots (index 0 is unused)."""
    c = [total_chern.component(2 * i) for i in range(max_m + 1)]
    p: list[MixedClass] = [MixedClass(ring)]
    for m in range(1, max_m + 1):
        acc = MixedClass(ring)
        for i in range(1, m):
            acc = acc + ((-1) ** (i - 1)) * (c[i] * p[m - i])
        acc = acc + ((-1) ** (m - 1) * m) * c[m]
        p.append(acc)
    return p


def chern_character_from_total(ring: RingSpec, total_chern: MixedClass, rank: int,
                               max_k: int) -> list[MixedClass]:
    """ch_0..ch_max_k of a bundle with the given rank and total Chern class."""
    p = power_sums(ring, total_chern, max_k)
    out = [MixedClass.scalar(ring, Fraction(rank))]
    for m in range(1, max_k + 1):
        out.append(p[m] * Fraction(1, math.factorial(m)))
    return out


def chern_character(spec: ManifoldSpec, max_k: int) -> list[MixedClass]:
    """Components ch_0..ch_max_k of the Chern character of TX (ch_0 = n)."""
    if max_k < 0:
        raise ValueError("max_k must be non-negative")
    return chern_character_from_total(spec.ring, spec.total_chern, spec.complex_dimension, max_k)


def _ch_upto_top(spec: ManifoldSpec) -> list[MixedClass]:
    return chern_character(spec, max(spec.complex_dimension, 2))


def log_todd(spec: ManifoldSpec) -> MixedClass:
    """ch_1/2 + sum_{k>=1} (-B_2k / 2k) ch_2k."""
    ch = _ch_upto_top(spec)
    acc = ch[1] * Fraction(1, 2)
    for k in range(1, len(ch) // 2 + 1):
        if 2 * k < len(ch):
            acc = acc + ch[2 * k] * (-bernoulli(2 * k) / (2 * k))
    return acc


def todd_class(spec: ManifoldSpec) -> MixedClass:
    return class_exp(log_todd(spec))


def a_hat_class(spec: ManifoldSpec) -> MixedClass:
    """exp(sum_{k>=1} (-B_2k / 2k) ch_2k), computed without going through Td."""
    ch = _ch_upto_top(spec)
    acc = MixedClass(spec.ring)
    for k in range(1, len(ch) // 2 + 1):
        if 2 * k < len(ch):
            acc = acc + ch[2 * k] * (-bernoulli(2 * k) / (2 * k))
    return class_exp(acc)


def log_witten_class(spec: ManifoldSpec, q_order: int) -> MixedClass:
    """sum_{k>=2} e_2k(q) ch_2k with e_2k the rational Eisenstein series."""
    if q_order < 0:
        raise ValueError("q_order must be non-negative")
    ch = _ch_upto_top(spec)
    acc = MixedClass(spec.ring)
    for k in range(2, len(ch) // 2 + 1):
        if 2 * k < len(ch) and not ch[2 * k].is_zero():
            acc = acc + ch[2 * k] * eisenstein_q(k, q_order)
    return acc


def witten_class(spec: ManifoldSpec, q_order: int) -> MixedClass:
    """Wit = exp(sum_{k>=2} e_2k(q) ch_2k(TX)); coefficients are QSeries truncated at q_order."""
    one = MixedClass.scalar(spec.ring, QSeries.constant(1, q_order))
    log_wit = log_witten_class(spec, q_order)
    if log_wit.is_zero():
        return one
    return one + (class_exp(log_wit) - MixedClass.scalar(spec.ring, Fraction(1))).map_coefficients(
        lambda c: c if isinstance(c, QSeries) else QSeries.constant(c, q_order))


def witten_limit_check(spec: ManifoldSpec) -> bool:
    """Check q^0(Wit) == exp(-c_1/2) Td exactly; requires ch_2(TX) = 0."""
    ch2 = chern_character(spec, 2)[2]
    if not ch2.is_zero():
        raise PreconditionError(f"ch_2(TX) must vanish for the limit identity, got {format_class(ch2)}",
                                witness=ch2)
    q0 = witten_class(spec, 0).q_coefficient(0)
    rhs = class_exp(spec.chern_class(1) * Fraction(-1, 2)) * todd_class(spec)
    return q0 == rhs


def integrate(cls: MixedClass, spec: ManifoldSpec):
    """Apply the integration functional to the top-degree component."""
    if cls.ring is not spec.ring:
        raise SpecError("class does not belong to this manifold")
    total = None
    for i, value in spec.ring.integration.items():
        c = cls.coeffs.get(i)
        if c is None:
            continue
        term = c * value
        total = term if total is None else total + term
    if total is None:
        q_orders = [c.order for c in cls.coeffs.values() if isinstance(c, QSeries)]
        return QSeries.constant(0, min(q_orders)) if q_orders else Fraction(0)
    return total


def witten_genus(spec: ManifoldSpec, q_order: int) -> QSeries:
    value = integrate(witten_class(spec, q_order), spec)
    if not isinstance(value, QSeries):
        value = QSeries.constant(value, q_order)
    return value


def todd_genus(spec: ManifoldSpec) -> Fraction:
    return integrate(todd_class(spec), spec)


def a_hat_genus(spec: ManifoldSpec) -> Fraction:
    return integrate(a_hat_class(spec), spec)


def format_class(cls: MixedClass) -> str:
    parts = []
    for mono, c in cls.terms():
        m = cls.ring.format_monomial(mono)
        text = str(c)
        if m != "1":
            text = (f"({text})" if " " in text else text) + "*" + m
        parts.append(text)
    return " + ".join(parts) or "0"


# standard specs -------------------------------------------------------------

def projective_space(n: int) -> ManifoldSpec:
    """P^n: H = Q[h]/(h^{n+1}), c(TP^n) = (1+h)^{n+1}, integral of h^n = 1."""
    if n < 0:
        raise SpecError("dimension must be non-negative")
    gens = [Generator("h", 2)] if n else []
    ring = RingSpec(gens, 2 * n, integration={(n,) if n else (): 1})
    if n == 0:
        return ManifoldSpec(ring, 0, MixedClass.scalar(ring, Fraction(1)), name="P^0")
    total = {(i,): Fraction(math.comb(n + 1, i)) for i in range(n + 1)}
    return ManifoldSpec(ring, n, MixedClass.from_monomials(ring, total), name=f"P^{n}")


def trivial_bundle_spec(n: int) -> ManifoldSpec:
    """A dimension-n spec with trivial tangent bundle: Q[t]/(t^2), t in degree 2n, c = 1."""
    if n == 0:
        return projective_space(0)
    ring = RingSpec([Generator("t", 2 * n)], 2 * n, integration={(1,): 1})
    return ManifoldSpec(ring, n, MixedClass.scalar(ring, Fraction(1)), ch2_trivialized=True,
                        name=f"trivial-{n}")


def formal_spec(generators: Sequence[tuple[str, int]], complex_dimension: int,
                total_chern: Mapping[Mapping[str, int] | tuple, object],
                integration: Mapping, relations: Iterable = (),
                ch2_trivialized: bool = False, name: str = "") -> ManifoldSpec:
    """Build a spec from generator names, exponent dictionaries and rational values."""
    ring = RingSpec([Generator(n, d) for n, d in generators], 2 * complex_dimension,
                    [_as_monomial_tuple(ring_names(generators), r) for r in relations],
                    {_as_monomial_tuple(ring_names(generators), m): v for m, v in _items(integration)})
    terms = {_as_monomial_tuple(ring_names(generators), m): to_fraction(v) for m, v in _items(total_chern)}
    return ManifoldSpec(ring, complex_dimension, MixedClass.from_monomials(ring, terms),
                        ch2_trivialized, name)


def ring_names(generators) -> list[str]:
    return [n for n, _ in generators]


def _items(mapping):
    if isinstance(mapping, Mapping):
        return mapping.items()
    return mapping


def _as_monomial_tuple(names: list[str], mono) -> Monomial:
    if isinstance(mono, tuple) and all(isinstance(e, int) for e in mono):
        return mono
    if isinstance(mono, str):
        mono = _parse_monomial_string(mono)
    unknown = set(mono) - set(names)
    if unknown:
        raise SpecError(f"unknown generators {sorted(unknown)}")
    return tuple(int(mono.get(n, 0)) for n in names)


def _parse_monomial_string(text: str) -> dict[str, int]:
    """Parse "h^2*u" style monomials; "1" is the unit."""
    text = text.replace(" ", "")
    if text in ("", "1"):
        return {}
    out: dict[str, int] = {}
    for factor in text.split("*"):
        name, _, exp = factor.partition("^")
        out[name] = out.get(name, 0) + (int(exp) if exp else 1)
    return out


def witten_test_fourfold() -> ManifoldSpec:
    """Formal 4-fold with one class u in degree 8, c = 1 - 6u, so ch_4 = u and ch_1 = ch_2 = 0."""
    return formal_spec([("u", 8)], 4, {"1": 1, "u": -6}, {"u": 1}, ch2_trivialized=True,
                       name="formal-4fold-u")


def string_like_spec(c1: int, c3: int, c4: int, integrals: Mapping[str, object],
                     name: str = "") -> ManifoldSpec:
    """Formal 4-fold on free generators a (deg 2), b (deg 6), e (deg 8).

    c(TX) = 1 + c1*a + (c1*a)^2/2 + c3*b + c4*e, chosen so that ch_2 = 0 while
    c_1 can be nonzero.
    """
    total = {"1": 1, "a": c1, "a^2": Fraction(c1 * c1, 2), "b": c3, "e": c4}
    return formal_spec([("a", 2), ("b", 6), ("e", 8)], 4, total, integrals,
                       ch2_trivialized=True, name=name)
