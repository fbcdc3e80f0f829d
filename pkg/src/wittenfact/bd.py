"""BD algebras by basis and structure constants, and the odd-cotangent model.

A :class:`BDPresentation` lists a graded basis, product and bracket
structure constants and a differential whose values are polynomials in hbar.
Missing table entries mean "outside the truncation window"; identities
touching them are skipped, never guessed.

The odd-cotangent model is the super-polynomial algebra on x_i, xi_i (degree
0), dx_i, dxi_i (degree -1, odd) and Dolbeault parameters th_i (degree +1,
odd, killed by d) with

    d     = sum_i dx_i d/dx_i + dxi_i d/dxi_i
    i_pi  = sum_i (d/d dx_i)(d/d dxi_i)        (left derivatives)
    L_pi  = i_pi d - d i_pi
    {a,b} = L(ab) - L(a) b - (-1)^|a| a L(b)

so {dx, xi} = 1.  C^x-weights: xi_i, dxi_i and hbar have weight 1.

Sign rules.  The bracket defined by the BD identity is related to the
Gerstenhaber-signed bracket [a,b] = (-1)^|a| {a,b}, which is graded
antisymmetric and Jacobi in the shifted sense.  Translated back:

    {a,b}     = (-1)^{|a||b|} {b,a}
    {a,bc}    = {a,b}c + (-1)^{(|a|+1)|b|} b{a,c}
    {a,{b,c}} = (-1)^{|a|+1} {{a,b},c} + (-1)^{(|a|+1)(|b|+1)} {b,{a,c}}
    D{a,b}    = -{Da,b} - (-1)^{|a|} {a,Db}
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .exact_core import QSeries, to_fraction

HBAR_BOUND = 3
MAX_WITNESSES = 20


class BDError(ValueError):
    pass


def _is_zero(c) -> bool:
    return not c


def _fmt(c) -> str:
    return str(c)


# super-polynomials ---------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    degree: int
    weight: int
    kind: str  # "x", "xi", "dx", "dxi", "th"

    @property
    def odd(self) -> bool:
        return self.degree % 2 == 1


class SuperPolyRing:
    """Graded-commutative polynomials in even and odd variables; coefficients Fraction or QSeries."""

    def __init__(self, variables: Sequence[Var]):
        self.vars = tuple(variables)
        self.nv = len(self.vars)
        self.odd = tuple(v.odd for v in self.vars)
        self.index = {v.name: i for i, v in enumerate(self.vars)}

    # monomials are exponent tuples
    def mono_degree(self, m) -> int:
        return sum(e * v.degree for e, v in zip(m, self.vars))

    def mono_weight(self, m) -> int:
        return sum(e * v.weight for e, v in zip(m, self.vars))

    def mono_size(self, m) -> int:
        return sum(m)

    def mono_mul(self, a, b):
        """(sign, product), or (0, None) when an odd variable repeats.

        Each odd variable of b moves left past the odd variables of a that
        sit after it in the variable order.
        """
        sign = 1
        a_odd_after = 0
        for i in range(self.nv - 1, -1, -1):
            if self.odd[i]:
                if a[i] and b[i]:
                    return 0, None
                if b[i] and a_odd_after % 2:
                    sign = -sign
                if a[i]:
                    a_odd_after += 1
        return sign, tuple(x + y for x, y in zip(a, b))

    def mul(self, p: Mapping, q: Mapping) -> dict:
        out: dict = {}
        for ma, ca in p.items():
            for mb, cb in q.items():
                s, m = self.mono_mul(ma, mb)
                if not s:
                    continue
                t = ca * cb if s > 0 else -(ca * cb)
                out[m] = out[m] + t if m in out else t
        return {m: c for m, c in out.items() if not _is_zero(c)}

    def add(self, p: Mapping, q: Mapping, scale=1) -> dict:
        out = dict(p)
        for m, c in q.items():
            t = c * scale if scale != 1 else c
            out[m] = out[m] + t if m in out else t
        return {m: c for m, c in out.items() if not _is_zero(c)}

    def scale(self, p: Mapping, s) -> dict:
        return {m: c * s for m, c in p.items() if not _is_zero(c * s)}

    def deriv(self, p: Mapping, i: int) -> dict:
        """Left derivative with respect to variable i."""
        out: dict = {}
        odd_i = self.odd[i]
        for m, c in p.items():
            e = m[i]
            if not e:
                continue
            if odd_i:
                before = sum(m[j] for j in range(i) if self.odd[j])
                t = -c if before % 2 else c
            else:
                t = c * e
            nm = m[:i] + (e - 1,) + m[i + 1:]
            out[nm] = out[nm] + t if nm in out else t
        return {m: c for m, c in out.items() if not _is_zero(c)}

    def var(self, name: str, coeff=Fraction(1)) -> dict:
        i = self.index[name]
        return {tuple(1 if j == i else 0 for j in range(self.nv)): coeff}

    def one(self, coeff=Fraction(1)) -> dict:
        return {tuple(0 for _ in range(self.nv)): coeff}

    def degree_of(self, p: Mapping) -> int | None:
        degs = {self.mono_degree(m) for m in p}
        if len(degs) > 1:
            raise BDError("element is not homogeneous")
        return degs.pop() if degs else None

    def mono_name(self, m) -> str:
        parts = []
        for e, v in zip(m, self.vars):
            if e == 1:
                parts.append(v.name)
            elif e > 1:
                parts.append(f"{v.name}^{e}")
        return "*".join(parts) or "1"

    def format(self, p: Mapping) -> str:
        parts = []
        for m in sorted(p, key=lambda m: (sum(m), m)):
            name = self.mono_name(m)
            c = _fmt(p[m])
            if " " in c:
                c = f"({c})"
            parts.append(c if name == "1" else f"{c}*{name}")
        return " + ".join(parts) or "0"


class OddCotangentModel:
    """Forms on T*A^n with reversed grading, plus Dolbeault parameters th_i."""

    def __init__(self, n: int, bound: int, dolbeault: bool = True):
        if n < 1:
            raise BDError("n must be at least 1")
        if bound < 2:
            raise BDError("bound must be at least 2")
        self.n, self.bound, self.dolbeault = n, bound, dolbeault
        sfx = (lambda i: "") if n == 1 else (lambda i: str(i + 1))
        vs = []
        for i in range(n):
            vs.append(Var("x" + sfx(i), 0, 0, "x"))
        for i in range(n):
            vs.append(Var("xi" + sfx(i), 0, 1, "xi"))
        for i in range(n):
            vs.append(Var("dx" + sfx(i), -1, 0, "dx"))
        for i in range(n):
            vs.append(Var("dxi" + sfx(i), -1, 1, "dxi"))
        if dolbeault:
            for i in range(n):
                vs.append(Var("th" + sfx(i), 1, 0, "th"))
        self.ring = SuperPolyRing(vs)
        R = self.ring
        self.x = [R.index["x" + sfx(i)] for i in range(n)]
        self.xi = [R.index["xi" + sfx(i)] for i in range(n)]
        self.dx = [R.index["dx" + sfx(i)] for i in range(n)]
        self.dxi = [R.index["dxi" + sfx(i)] for i in range(n)]
        self.th = [R.index["th" + sfx(i)] for i in range(n)] if dolbeault else []

    def d(self, p: Mapping) -> dict:
        R = self.ring
        out: dict = {}
        for i in range(self.n):
            out = R.add(out, R.mul(R.var(R.vars[self.dx[i]].name), R.deriv(p, self.x[i])))
            out = R.add(out, R.mul(R.var(R.vars[self.dxi[i]].name), R.deriv(p, self.xi[i])))
        return out

    def i_pi(self, p: Mapping) -> dict:
        R = self.ring
        out: dict = {}
        for i in range(self.n):
            out = R.add(out, R.deriv(R.deriv(p, self.dxi[i]), self.dx[i]))
        return out

    def L(self, p: Mapping) -> dict:
        return self.ring.add(self.i_pi(self.d(p)), self.d(self.i_pi(p)), scale=-1)

    def bracket(self, a: Mapping, b: Mapping) -> dict:
        R = self.ring
        da = R.degree_of(a) or 0
        out = self.L(R.mul(a, b))
        out = R.add(out, R.mul(self.L(a), b), scale=-1)
        out = R.add(out, R.mul(a, self.L(b)), scale=-1 if da % 2 == 0 else 1)
        return out

    def is_base(self, p: Mapping) -> bool:
        """Pulled back from the base: no xi or dxi."""
        return all(m[i] == 0 for m in p for i in self.xi + self.dxi)

    def basis_monomials(self) -> list[tuple[int, ...]]:
        R = self.ring
        ranges = [range(2) if v.odd else range(self.bound + 1) for v in R.vars]
        monos = [m for m in itertools.product(*ranges) if sum(m) <= self.bound]
        monos.sort(key=lambda m: (sum(m), R.mono_degree(m), tuple(-e for e in m)))
        return monos

    def base_forms(self, max_size: int | None = None) -> list[tuple[int, ...]]:
        """Basis monomials of degree 0 pulled back from the base with form degree >= 1."""
        R = self.ring
        out = []
        for m in self.basis_monomials():
            if max_size is not None and sum(m) > max_size:
                continue
            if R.mono_degree(m) != 0 or any(m[i] for i in self.xi + self.dxi):
                continue
            if sum(m[i] for i in self.dx) >= 1:
                out.append(m)
        return out


# presentations -------------------------------------------------------------------

HVec = dict  # (basis index, hbar power) -> coefficient


@dataclass
class BDPresentation:
    """Finite graded basis with product, bracket and differential tables.

    ``mult[(i, j)]`` and ``bracket[(i, j)]`` are {k: c}; ``D[i]`` is
    {(k, h): c} meaning c hbar^h e_k.  ``hbar`` is None for a formal
    parameter or the value 0 / 1 after specialization.  ``size`` and
    ``bound`` (optional) restrict checked tuples to total size <= bound.
    """

    names: list[str]
    degrees: list[int]
    unit: int
    mult: dict[tuple[int, int], dict[int, object]]
    bracket: dict[tuple[int, int], dict[int, object]]
    D: dict[int, HVec]
    weights: list[int] | None = None
    hbar: int | None = None
    size: list[int] | None = None
    bound: int | None = None
    model: OddCotangentModel | None = field(default=None, repr=False)
    monomials: list[tuple[int, ...]] | None = field(default=None, repr=False)
    window_violations: list[str] = field(default_factory=list)

    def __post_init__(self):
        if len(self.names) != len(self.degrees):
            raise BDError("names and degrees differ in length")
        if self.weights is not None and len(self.weights) != len(self.names):
            raise BDError("weights differ in length from the basis")
        if self.hbar not in (None, 0, 1):
            raise BDError("hbar must be formal (None) or specialized to 0 or 1")
        self.index = {n: i for i, n in enumerate(self.names)}
        if self.monomials is not None:
            self._mono_index = {m: i for i, m in enumerate(self.monomials)}

    @property
    def dim(self) -> int:
        return len(self.names)

    def copy(self, **changes) -> BDPresentation:
        data = dict(names=self.names, degrees=self.degrees, unit=self.unit, mult=self.mult,
                    bracket=self.bracket, D=self.D, weights=self.weights, hbar=self.hbar,
                    size=self.size, bound=self.bound, model=self.model, monomials=self.monomials,
                    window_violations=list(self.window_violations))
        data.update(changes)
        return BDPresentation(**data)

    # conversions between model polynomials and basis vectors
    def from_poly(self, p: Mapping) -> dict[int, object] | None:
        out = {}
        for m, c in p.items():
            k = self._mono_index.get(m)
            if k is None:
                return None
            out[k] = c
        return out

    def to_poly(self, v: Mapping[int, object]) -> dict:
        return {self.monomials[k]: c for k, c in v.items()}

    def element(self, text_terms: Mapping[str, object]) -> dict[int, object]:
        return {self.index[n]: to_fraction(c) if not isinstance(c, QSeries) else c for n, c in text_terms.items()}

    def format(self, v: Mapping) -> str:
        parts = []
        for key in sorted(v):
            k, h = key if isinstance(key, tuple) else (key, 0)
            c = _fmt(v[key])
            if " " in c:
                c = f"({c})"
            factors = [] if k == self.unit else [self.names[k]]
            if h:
                factors.append("hbar" if h == 1 else f"hbar^{h}")
            parts.append("*".join([c] + factors))
        return " + ".join(parts) or "0"

    # JSON -------------------------------------------------------------------
    def to_json(self) -> dict:
        def vec(v):
            return {self.names[k]: _json_scalar(c) for k, c in sorted(v.items())}

        out = {
            "basis": [{"name": n, "degree": d, **({"weight": self.weights[i]} if self.weights else {})}
                      for i, (n, d) in enumerate(zip(self.names, self.degrees))],
            "unit": self.names[self.unit],
            "products": [{"left": self.names[i], "right": self.names[j], "value": vec(v)}
                         for (i, j), v in sorted(self.mult.items())],
            "brackets": [{"left": self.names[i], "right": self.names[j], "value": vec(v)}
                         for (i, j), v in sorted(self.bracket.items())],
            "differential": [[self.names[i], self.names[k], _json_scalar(c), h]
                             for i, v in sorted(self.D.items()) for (k, h), c in sorted(v.items())],
        }
        if self.hbar is not None:
            out["hbar"] = self.hbar
        if self.size is not None and self.bound is not None:
            out["window"] = {"bound": self.bound, "size": {n: s for n, s in zip(self.names, self.size)}}
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> BDPresentation:
        names = [b["name"] for b in data["basis"]]
        idx = {n: i for i, n in enumerate(names)}
        if len(idx) != len(names):
            raise BDError("duplicate basis names")

        def look(n):
            if n not in idx:
                raise BDError(f"unknown basis element {n!r}")
            return idx[n]

        def vec(v):
            return {look(k): to_fraction(c) for k, c in v.items() if to_fraction(c)}

        degrees = [int(b["degree"]) for b in data["basis"]]
        weights = [int(b["weight"]) for b in data["basis"]] if all("weight" in b for b in data["basis"]) else None
        mult = {(look(e["left"]), look(e["right"])): vec(e["value"]) for e in data.get("products", [])}
        br = {(look(e["left"]), look(e["right"])): vec(e["value"]) for e in data.get("brackets", [])}
        D: dict[int, HVec] = {i: {} for i in range(len(names))}
        for src, tgt, c, h in data.get("differential", []):
            c = to_fraction(c)
            if c:
                D[look(src)][look(tgt), int(h)] = D[look(src)].get((look(tgt), int(h)), 0) + c
        size = bound = None
        if "window" in data:
            bound = int(data["window"]["bound"])
            size = [int(data["window"]["size"][n]) for n in names]
        return cls(names, degrees, look(data["unit"]), mult, br, D, weights, data.get("hbar"), size, bound)


def _json_scalar(c):
    if isinstance(c, QSeries):
        return [str(x) for x in c.coefficients]
    return str(c)


# vector operations on a presentation --------------------------------------------------

class _Ops:
    def __init__(self, P: BDPresentation):
        self.P = P

    def hmul(self, u: HVec, v: HVec) -> HVec | None:
        out: dict = {}
        mult = self.P.mult
        for (i, h1), a in u.items():
            for (j, h2), b in v.items():
                t = mult.get((i, j))
                if t is None:
                    return None
                h = h1 + h2
                if h > HBAR_BOUND:
                    continue
                for k, c in t.items():
                    key = (k, h)
                    val = a * b * c
                    out[key] = out[key] + val if key in out else val
        return {k: c for k, c in out.items() if not _is_zero(c)}

    def hbr(self, u: HVec, v: HVec) -> HVec | None:
        out: dict = {}
        br = self.P.bracket
        for (i, h1), a in u.items():
            for (j, h2), b in v.items():
                t = br.get((i, j))
                if t is None:
                    return None
                h = h1 + h2
                if h > HBAR_BOUND:
                    continue
                for k, c in t.items():
                    key = (k, h)
                    val = a * b * c
                    out[key] = out[key] + val if key in out else val
        return {k: c for k, c in out.items() if not _is_zero(c)}

    def hD(self, u: HVec) -> HVec | None:
        out: dict = {}
        for (i, h1), a in u.items():
            t = self.P.D.get(i)
            if t is None:
                return None
            for (k, h2), c in t.items():
                h = h1 + h2
                if self.P.hbar is not None:
                    h = 0
                if h > HBAR_BOUND:
                    continue
                key = (k, h)
                val = a * c
                out[key] = out[key] + val if key in out else val
        return {k: c for k, c in out.items() if not _is_zero(c)}

    def times_hbar(self, u: HVec) -> HVec:
        if self.P.hbar is None:
            return {(k, h + 1): c for (k, h), c in u.items() if h + 1 <= HBAR_BOUND}
        if self.P.hbar == 0:
            return {}
        return dict(u)

    @staticmethod
    def comb(*terms) -> HVec | None:
        """Sum of (sign, vector) pairs; None if any vector is undefined."""
        out: dict = {}
        for s, v in terms:
            if v is None:
                return None
            for k, c in v.items():
                t = c if s == 1 else -c
                out[k] = out[k] + t if k in out else t
        return {k: c for k, c in out.items() if not _is_zero(c)}


def _e(i: int) -> HVec:
    return {(i, 0): Fraction(1)}


# the checker -------------------------------------------------------------------------

@dataclass
class IdentityResult:
    name: str
    checked: int = 0
    skipped: int = 0
    violations: int = 0
    witnesses: list[tuple[tuple[str, ...], str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass
class BDReport:
    results: dict[str, IdentityResult]
    hbar: int | None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def violations(self) -> list[tuple[str, tuple[str, ...], str]]:
        out = []
        for name in sorted(self.results):
            for w, residual in self.results[name].witnesses:
                out.append((name, w, residual))
        return out

    def summary(self) -> dict:
        return {name: {"checked": r.checked, "skipped": r.skipped, "violations": r.violations,
                       "witnesses": [{"elements": list(w), "residual": res} for w, res in r.witnesses]}
                for name, r in sorted(self.results.items())}


def _record(res: IdentityResult, P: BDPresentation, tup: Sequence[int], residual: HVec | None) -> None:
    if residual is None:
        res.skipped += 1
        return
    res.checked += 1
    if residual:
        res.violations += 1
        if len(res.witnesses) < MAX_WITNESSES:
            res.witnesses.append((tuple(P.names[i] for i in tup), P.format(residual)))


def _tuples(P: BDPresentation, k: int, extra: int = 0) -> Iterable[tuple[int, ...]]:
    n = P.dim
    if P.size is None or P.bound is None:
        yield from itertools.product(range(n), repeat=k)
        return
    limit = P.bound + extra
    order = sorted(range(n), key=lambda i: P.size[i])
    sizes = P.size

    def rec(prefix, total):
        if len(prefix) == k:
            yield tuple(prefix)
            return
        for i in order:
            s = total + sizes[i]
            if s > limit:
                break
            prefix.append(i)
            yield from rec(prefix, s)
            prefix.pop()

    yield from rec([], 0)


def _vec_degree_ok(P: BDPresentation, v: HVec, expected: int) -> bool:
    return all(P.degrees[k] == expected for (k, _h) in v)


IDENTITIES = ("d_squared", "d_unit", "d_degree", "bd_leibniz", "order_two", "d_bracket",
              "commutativity", "associativity", "unit", "bracket_degree", "bracket_symmetry",
              "bracket_leibniz", "jacobi", "weights")


def check_bd(P: BDPresentation, identities: Iterable[str] | None = None) -> BDReport:
    """Check the BD axioms on all basis pairs and triples in the window.

    Identities: d_squared, d_unit, d_degree, bd_leibniz, order_two,
    d_bracket, commutativity, associativity, unit, bracket_degree,
    bracket_symmetry, bracket_leibniz, jacobi, weights.
    """
    ops = _Ops(P)
    deg = P.degrees
    wanted = set(identities) if identities is not None else None
    if wanted is not None and wanted - set(IDENTITIES):
        raise BDError(f"unknown identities {sorted(wanted - set(IDENTITIES))}")
    results: dict[str, IdentityResult] = {}

    def want(name):
        if wanted is not None and name not in wanted:
            return None
        return results.setdefault(name, IdentityResult(name))

    def sgn(p):
        return -1 if p % 2 else 1

    # unary identities
    r_dd, r_d1, r_ddeg = want("d_squared"), want("d_unit"), want("d_degree")
    for i in range(P.dim):
        Di = ops.hD(_e(i))
        if r_dd is not None:
            _record(r_dd, P, (i,), ops.hD(Di) if Di is not None else None)
        if r_ddeg is not None and Di is not None:
            r_ddeg.checked += 1
            bad = {k: c for k, c in Di.items() if deg[k[0]] != deg[i] + 1}
            if bad:
                r_ddeg.violations += 1
                if len(r_ddeg.witnesses) < MAX_WITNESSES:
                    r_ddeg.witnesses.append(((P.names[i],), P.format(bad)))
    if r_d1 is not None:
        _record(r_d1, P, (P.unit,), ops.hD(_e(P.unit)))

    # binary identities
    r_bdl, r_comm, r_unit = want("bd_leibniz"), want("commutativity"), want("unit")
    r_bdeg, r_bsym, r_dbr = want("bracket_degree"), want("bracket_symmetry"), want("d_bracket")
    r_w = want("weights") if P.weights is not None and P.hbar != 1 else None
    W = P.weights
    for i, j in _tuples(P, 2):
        a, b = _e(i), _e(j)
        ab = ops.hmul(a, b)
        if r_bdl is not None:
            lhs = ops.hD(ab) if ab is not None else None
            Da, Db = ops.hD(a), ops.hD(b)
            br = ops.hbr(a, b)
            rhs_terms = [(1, lhs),
                         (-1, ops.hmul(Da, b) if Da is not None else None),
                         (-sgn(deg[i]), ops.hmul(a, Db) if Db is not None else None),
                         (-1, ops.times_hbar(br) if br is not None else None)]
            _record(r_bdl, P, (i, j), ops.comb(*rhs_terms))
        if r_comm is not None:
            ba = ops.hmul(b, a)
            _record(r_comm, P, (i, j), ops.comb((1, ab), (-sgn(deg[i] * deg[j]), ba)))
        if r_unit is not None and i == P.unit:
            _record(r_unit, P, (j,), ops.comb((1, ab), (-1, b)))
            _record(r_unit, P, (j,), ops.comb((1, ops.hmul(b, a)), (-1, b)))
        br_ab = ops.hbr(a, b)
        if r_bdeg is not None and br_ab is not None:
            r_bdeg.checked += 1
            if not _vec_degree_ok(P, br_ab, deg[i] + deg[j] + 1):
                r_bdeg.violations += 1
                if len(r_bdeg.witnesses) < MAX_WITNESSES:
                    r_bdeg.witnesses.append(((P.names[i], P.names[j]), P.format(br_ab)))
        if r_bsym is not None:
            br_ba = ops.hbr(b, a)
            _record(r_bsym, P, (i, j), ops.comb((1, br_ab), (-sgn(deg[i] * deg[j]), br_ba)))
        if r_dbr is not None:
            # D{a,b} = -{Da,b} - (-1)^{|a|}{a,Db}
            Da, Db = ops.hD(a), ops.hD(b)
            _record(r_dbr, P, (i, j), ops.comb(
                (1, ops.hD(br_ab) if br_ab is not None else None),
                (1, ops.hbr(Da, b) if Da is not None else None),
                (sgn(deg[i]), ops.hbr(a, Db) if Db is not None else None)))
        if r_w is not None:
            bad = []
            if ab is not None:
                bad += [k for (k, h) in ab if W[k] + h != W[i] + W[j]]
            if br_ab is not None:
                bad += [k for (k, h) in br_ab if W[k] + h != W[i] + W[j] - 1]
            r_w.checked += 1
            if bad:
                r_w.violations += 1
                if len(r_w.witnesses) < MAX_WITNESSES:
                    r_w.witnesses.append(((P.names[i], P.names[j]), ", ".join(P.names[k] for k in bad)))
    if r_w is not None:
        for i in range(P.dim):
            Di = ops.hD(_e(i))
            if Di is None:
                continue
            r_w.checked += 1
            hb = 1 if P.hbar is None else 0
            # with formal hbar, D preserves total weight; specialized at 0 all surviving terms must too
            bad = [k for (k, h) in Di if W[k] + (h if hb else 0) != W[i]]
            if bad:
                r_w.violations += 1
                if len(r_w.witnesses) < MAX_WITNESSES:
                    r_w.witnesses.append(((P.names[i],), ", ".join(P.names[k] for k in bad)))

    # ternary identities
    r_ass, r_bl, r_jac, r_o2 = want("associativity"), want("bracket_leibniz"), want("jacobi"), want("order_two")
    if any(r is not None for r in (r_ass, r_bl, r_jac, r_o2)):
        for i, j, k in _tuples(P, 3):
            a, b, c = _e(i), _e(j), _e(k)
            ab, bc = ops.hmul(a, b), ops.hmul(b, c)
            if r_ass is not None:
                _record(r_ass, P, (i, j, k), ops.comb(
                    (1, ops.hmul(ab, c) if ab is not None else None),
                    (-1, ops.hmul(a, bc) if bc is not None else None)))
            if r_bl is not None:
                # {a, bc} = {a,b}c + (-1)^{(|a|+1)|b|} b{a,c}
                abr, acr = ops.hbr(a, b), ops.hbr(a, c)
                _record(r_bl, P, (i, j, k), ops.comb(
                    (1, ops.hbr(a, bc) if bc is not None else None),
                    (-1, ops.hmul(abr, c) if abr is not None else None),
                    (-sgn((deg[i] + 1) * deg[j]), ops.hmul(b, acr) if acr is not None else None)))
            if r_jac is not None:
                # {a,{b,c}} = (-1)^{|a|+1}{{a,b},c} + (-1)^{(|a|+1)(|b|+1)} {b,{a,c}}
                bcr, abr, acr = ops.hbr(b, c), ops.hbr(a, b), ops.hbr(a, c)
                _record(r_jac, P, (i, j, k), ops.comb(
                    (1, ops.hbr(a, bcr) if bcr is not None else None),
                    (-sgn(deg[i] + 1), ops.hbr(abr, c) if abr is not None else None),
                    (-sgn((deg[i] + 1) * (deg[j] + 1)), ops.hbr(b, acr) if acr is not None else None)))
            if r_o2 is not None:
                _record(r_o2, P, (i, j, k), _order_two_residual(ops, P, i, j, k))
    return BDReport(results, P.hbar)


def _order_two_residual(ops: _Ops, P: BDPresentation, i: int, j: int, k: int) -> HVec | None:
    """D(abc) - D(ab)c - (-1)^|a| a D(bc) - (-1)^{(|a|+1)|b|} b D(ac)
    + D(a)bc + (-1)^|a| a D(b) c + (-1)^{|a|+|b|} ab D(c) - D(1)abc."""
    deg = P.degrees
    a, b, c = _e(i), _e(j), _e(k)
    s = lambda p: -1 if p % 2 else 1
    ab, bc, ac = ops.hmul(a, b), ops.hmul(b, c), ops.hmul(a, c)
    if ab is None or bc is None or ac is None:
        return None
    abc = ops.hmul(ab, c)
    if abc is None:
        return None
    Da, Db, Dc = ops.hD(a), ops.hD(b), ops.hD(c)
    D1 = ops.hD(_e(P.unit))
    if None in (Da, Db, Dc, D1):
        return None

    def m(*xs):
        out = xs[0]
        for x in xs[1:]:
            if out is None or x is None:
                return None
            out = ops.hmul(out, x)
        return out

    return ops.comb(
        (1, ops.hD(abc)),
        (-1, m(ops.hD(ab), c)),
        (-s(deg[i]), m(a, ops.hD(bc))),
        (-s((deg[i] + 1) * deg[j]), m(b, ops.hD(ac))),
        (1, m(Da, b, c)),
        (s(deg[i]), m(a, Db, c)),
        (s(deg[i] + deg[j]), m(a, b, Dc)),
        (-1, m(D1, abc)),
    )


# construction -------------------------------------------------------------------------

def odd_cotangent_model(n: int, bound: int, dolbeault: bool = True) -> BDPresentation:
    """Presentation of (Omega^{-*}(T*A^n)[hbar], hbar L_pi) truncated at polynomial size ``bound``."""
    M = OddCotangentModel(n, bound, dolbeault)
    R = M.ring
    monos = M.basis_monomials()
    idx = {m: i for i, m in enumerate(monos)}
    names = [R.mono_name(m) for m in monos]
    degrees = [R.mono_degree(m) for m in monos]
    weights = [R.mono_weight(m) for m in monos]
    size = [sum(m) for m in monos]
    polys = [{m: Fraction(1)} for m in monos]
    L = [M.L(p) for p in polys]

    def to_vec(p):
        out = {}
        for mm, c in p.items():
            k = idx.get(mm)
            if k is None:
                return None
            out[k] = c
        return out

    mult, bracket = {}, {}
    for i, a in enumerate(monos):
        for j, b in enumerate(monos):
            if size[i] + size[j] <= bound:
                s, prod = R.mono_mul(a, b)
                mult[i, j] = {idx[prod]: Fraction(s)} if s else {}
            if size[i] + size[j] <= bound + 2:
                # bracket from the defining formula
                ab = R.mul(polys[i], polys[j])
                br = M.L(ab)
                br = R.add(br, R.mul(L[i], polys[j]), scale=-1)
                br = R.add(br, R.mul(polys[i], L[j]), scale=-1 if degrees[i] % 2 == 0 else 1)
                v = to_vec(br)
                if v is not None:
                    bracket[i, j] = v
    D = {}
    for i in range(len(monos)):
        v = to_vec(L[i])
        if v is not None:
            D[i] = {(k, 1): c for k, c in v.items()}
    return BDPresentation(names, degrees, idx[tuple(0 for _ in range(R.nv))], mult, bracket, D,
                          weights, None, size, bound, M, monos)


def trivial_presentation(names: Sequence[str], degrees: Sequence[int], mult_table, unit: int = 0) -> BDPresentation:
    """A graded-commutative algebra with zero bracket and zero differential."""
    n = len(names)
    return BDPresentation(list(names), list(degrees), unit, dict(mult_table),
                          {(i, j): {} for i in range(n) for j in range(n)}, {i: {} for i in range(n)})


# twisting, conjugation and specialization ------------------------------------------------

def twist_differential(P: BDPresentation, alpha: Mapping[int, object]) -> BDPresentation:
    """Replace D by D + hbar{alpha, -}.  Entries whose bracket leaves the window become undefined."""
    ops = _Ops(P)
    alpha = {k: c for k, c in alpha.items() if not _is_zero(c)}
    for k in alpha:
        if P.degrees[k] != 0:
            raise BDError(f"alpha must have degree 0; {P.names[k]} has degree {P.degrees[k]}")
    if not alpha:
        return P.copy()
    av = {(k, 0): c for k, c in alpha.items()}
    D = {}
    violations = list(P.window_violations)
    for i in range(P.dim):
        base = P.D.get(i)
        br = ops.hbr(av, _e(i))
        if base is None or br is None:
            violations.append(P.names[i])
            continue
        D[i] = ops.comb((1, base), (1, ops.times_hbar(br)))
    return P.copy(D=D, window_violations=violations)


def _model_of(P: BDPresentation) -> OddCotangentModel:
    if P.model is None:
        raise BDError("this operation needs the odd-cotangent model behind the presentation")
    return P.model


def series_exp_poly(M: OddCotangentModel, alpha: Mapping, one=Fraction(1)) -> dict:
    """exp of a nilpotent element (no constant term), computed until powers vanish."""
    R = M.ring
    zero_m = tuple(0 for _ in range(R.nv))
    if zero_m in alpha:
        raise BDError("exp needs an element without constant term")
    result = R.one(one)
    power = R.one(one)
    k = 0
    while True:
        k += 1
        power = R.mul(power, alpha)
        if not power:
            return result
        if k > 4 * (M.n * 5 + 2):
            raise BDError("element is not nilpotent")
        result = R.add(result, R.scale(power, Fraction(1, math.factorial(k))))


def series_log_poly(M: OddCotangentModel, T: Mapping) -> dict:
    R = M.ring
    zero_m = tuple(0 for _ in range(R.nv))
    c0 = T.get(zero_m, 0)
    if isinstance(c0, QSeries):
        ok = not (c0 - 1)
    else:
        ok = c0 == 1
    if not ok:
        raise BDError("log needs constant term 1")
    N = {m: c for m, c in T.items() if m != zero_m}
    result: dict = {}
    power = R.one()
    k = 0
    while True:
        k += 1
        power = R.mul(power, N)
        if not power:
            return result
        if k > 4 * (M.n * 5 + 2):
            raise BDError("element is not unipotent")
        result = R.add(result, R.scale(power, Fraction((-1) ** (k + 1), k)))


def inverse_poly(M: OddCotangentModel, T: Mapping) -> dict:
    R = M.ring
    zero_m = tuple(0 for _ in range(R.nv))
    c0 = T.get(zero_m, 0)
    if _is_zero(c0):
        raise BDError("T has zero constant term and is not invertible")
    if isinstance(c0, QSeries):
        inv0 = 1 / c0
    else:
        inv0 = 1 / Fraction(c0)
    N = {m: c * inv0 for m, c in T.items() if m != zero_m}
    result = R.one(inv0)
    power = R.one()
    k = 0
    while True:
        k += 1
        power = R.mul(power, R.scale(N, -1))
        if not power:
            return result
        if k > 4 * (M.n * 5 + 2):
            raise BDError("T is not invertible by a finite series")
        result = R.add(result, R.scale(power, inv0))


@dataclass
class Conjugation:
    presentation: BDPresentation
    T: dict
    T_inverse: dict

    def chain_map(self, a: Mapping) -> dict:
        """Multiplication by T, on model polynomials."""
        return self.presentation.model.ring.mul(self.T, a)


def conjugate(P: BDPresentation, T: Mapping) -> Conjugation:
    """T^{-1} o D o T, computed exactly in the polynomial algebra, with D = hbar L_pi on P's model.

    T is a model polynomial (exponent tuple -> coefficient) with invertible
    constant term.
    """
    M = _model_of(P)
    R = M.ring
    Tinv = inverse_poly(M, T)
    D = {}
    violations = list(P.window_violations)
    for i in range(P.dim):
        a = {P.monomials[i]: Fraction(1)}
        val = R.mul(Tinv, M.L(R.mul(T, a)))
        v = P.from_poly(val)
        if v is None:
            violations.append(P.names[i])
            continue
        D[i] = {(k, 1): c for k, c in v.items()}
    return Conjugation(P.copy(D=D, window_violations=violations), dict(T), Tinv)


def conjugation_residual(M: OddCotangentModel, T: Mapping, a: Mapping) -> dict:
    """T^{-1} L(T a) - L a - {log T, a}; zero when the conjugation identity holds."""
    R = M.ring
    lhs = R.mul(inverse_poly(M, T), M.L(R.mul(T, a)))
    rhs = R.add(M.L(a), M.bracket(series_log_poly(M, T), a))
    return R.add(lhs, rhs, scale=-1)


def specialize_hbar(P: BDPresentation, value: int) -> BDPresentation:
    if value not in (0, 1):
        raise BDError("hbar can be specialized to 0 or 1")
    if P.hbar is not None:
        raise BDError("presentation is already specialized")
    D = {}
    for i, v in P.D.items():
        out: dict = {}
        for (k, h), c in v.items():
            if value == 0 and h > 0:
                continue
            out[k, 0] = out[k, 0] + c if (k, 0) in out else c
        D[i] = {k: c for k, c in out.items() if not _is_zero(c)}
    return P.copy(D=D, hbar=value)


def mutate_bracket(P: BDPresentation, pair: tuple[str, str]) -> BDPresentation:
    """Flip the sign of the bracket constants of one ordered basis pair."""
    i, j = P.index[pair[0]], P.index[pair[1]]
    if (i, j) not in P.bracket or not P.bracket[i, j]:
        raise BDError(f"bracket {pair} is zero or undefined; nothing to flip")
    br = dict(P.bracket)
    br[i, j] = {k: -c for k, c in br[i, j].items()}
    return P.copy(bracket=br)


# characteristic classes in the model ------------------------------------------------------

def realize_class(cls, M: OddCotangentModel, images: Mapping[str, Mapping]) -> dict:
    """Image of a MixedClass under the ring map sending each generator to a model polynomial.

    Coefficients (Fraction or QSeries) are carried over unchanged.
    """
    R = M.ring
    ring = cls.ring
    names = [g.name for g in ring.generators]
    missing = set(names) - set(images)
    if missing:
        raise BDError(f"no image given for generators {sorted(missing)}")
    out: dict = {}
    for mono, c in cls.terms():
        p = R.one()
        for name, e in zip(names, mono):
            for _ in range(e):
                p = R.mul(p, images[name])
        out = R.add(out, R.scale(p, c) if not isinstance(c, QSeries) else {m: c * v for m, v in p.items()})
    return {m: c for m, c in out.items() if not _is_zero(c)}


def presentation_vector(P: BDPresentation, poly: Mapping) -> dict[int, object]:
    v = P.from_poly(poly)
    if v is None:
        raise BDError("element lies outside the truncation window")
    return v


def q_coefficient_presentation(P: BDPresentation, n: int) -> BDPresentation:
    """Take the q^n coefficient of every QSeries entry of D (rational entries count as q^0)."""
    def pick(c):
        if isinstance(c, QSeries):
            return c[n]
        return c if n == 0 else Fraction(0)

    D = {i: {k: pick(c) for k, c in v.items() if pick(c)} for i, v in P.D.items()}
    return P.copy(D=D)


def differentials_equal(P: BDPresentation, Q: BDPresentation) -> list[str]:
    """Basis names where the differentials of P and Q differ (both must be defined)."""
    bad = []
    for i in range(P.dim):
        a, b = P.D.get(i), Q.D.get(i)
        if a is None or b is None:
            if (a is None) != (b is None):
                bad.append(P.names[i])
            continue
        diff = _Ops.comb((1, a), (-1, b))
        if diff:
            bad.append(P.names[i])
    return bad
