"""The factorization algebra F_A of an associative algebra on the line and on circles.

Opens are finite unions of open intervals (arcs on a circle R / lam Z) with
rational endpoints.  Every open built from a finite cover is encoded as a
bitmask over the atoms of the endpoint arrangement: the endpoints themselves
and the open gaps between consecutive endpoints.  Connected components are
maximal runs of atoms, so all combinatorics are exact.

F_A(V) = A^{(x) c} for V with c components (ordered by first atom) and
F_A(empty) = Q.  An inclusion V -> W multiplies, inside each component of W,
the factors of the components of V in spatial order, inserting the unit where
a component of W contains none.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .exact_core import to_fraction
from .homalg import (ChainComplex, FinDimAlgebra, SizeBudgetExceeded, SparseMatrix, hh_dims,
                     homology_dims)

LINE = "line"
CIRCLE = "circle"
DEFAULT_BUDGET = 60000
WITNESS_SEARCH_CAP = 200000


class CoverError(ValueError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class Arc:
    """An open interval (a, b) of the line, or an open arc of the circle of circumference ``lam``.

    Circle arcs are stored by their lift (start, start + length) to R with
    0 <= start < lam; ``length == lam`` with ``full=True`` is the whole circle.
    """

    start: Fraction
    end: Fraction
    ambient: str = LINE
    lam: Fraction | None = None
    full: bool = False

    @classmethod
    def interval(cls, a, b) -> Arc:
        a, b = to_fraction(a), to_fraction(b)
        if not a < b:
            raise CoverError(f"interval needs a < b, got ({a}, {b})")
        return cls(a, b)

    @classmethod
    def on_circle(cls, start, length, lam) -> Arc:
        start, length, lam = to_fraction(start), to_fraction(length), to_fraction(lam)
        if lam <= 0:
            raise CoverError("circumference must be positive")
        if not 0 < length <= lam:
            raise CoverError(f"arc length must lie in (0, {lam}], got {length}")
        start = start % lam
        return cls(start, start + length, CIRCLE, lam, full=False)

    @classmethod
    def full_circle(cls, lam) -> Arc:
        lam = to_fraction(lam)
        return cls(Fraction(0), lam, CIRCLE, lam, full=True)

    @property
    def length(self) -> Fraction:
        return self.end - self.start

    @property
    def proper(self) -> bool:
        """Admits a section of R -> S^1_lam, i.e. is not the whole circle."""
        return not self.full

    def lift(self) -> tuple[Fraction, Fraction]:
        if self.full:
            raise CoverError("the full circle has no lift to R")
        return self.start, self.end

    def contains_point(self, x: Fraction) -> bool:
        if self.ambient == LINE:
            return self.start < x < self.end
        if self.full:
            return True
        offset = (x - self.start) % self.lam
        return 0 < offset < self.length

    def endpoints(self) -> list[Fraction]:
        if self.ambient == LINE:
            return [self.start, self.end]
        if self.full:
            return []
        return [self.start % self.lam, self.end % self.lam]

    def scaled(self, factor) -> Arc:
        factor = to_fraction(factor)
        if self.ambient == LINE:
            return Arc(self.start * factor, self.end * factor)
        if self.full:
            return Arc.full_circle(self.lam * factor)
        return Arc.on_circle(self.start * factor, self.length * factor, self.lam * factor)

    def to_json(self) -> dict:
        if self.ambient == LINE:
            return {"a": str(self.start), "b": str(self.end)}
        return {"start": str(self.start), "length": str(self.length)}

    def __str__(self) -> str:
        if self.ambient == LINE:
            return f"({self.start}, {self.end})"
        if self.full:
            return f"S^1_{self.lam}"
        return f"arc[{self.start} +{self.length}]/{self.lam}"


class Arrangement:
    """Atoms of the endpoint arrangement of a finite set of arcs."""

    def __init__(self, arcs: Sequence[Arc], ambient: str, lam: Fraction | None):
        self.ambient = ambient
        self.lam = lam
        pts = sorted({e for arc in arcs for e in arc.endpoints()})
        self.points = pts
        reps: list[Fraction] = []
        kinds: list[str] = []
        if ambient == LINE:
            if not pts:
                raise CoverError("empty arrangement")
            reps.append(pts[0] - 1)
            kinds.append("gap")
            for i, p in enumerate(pts):
                reps.append(p)
                kinds.append("point")
                nxt = pts[i + 1] if i + 1 < len(pts) else p + 2
                reps.append((p + nxt) / 2)
                kinds.append("gap")
        else:
            if not pts:
                # only full circles: a single atom
                reps, kinds = [Fraction(0)], ["gap"]
            for i, p in enumerate(pts):
                reps.append(p)
                kinds.append("point")
                nxt = pts[i + 1] if i + 1 < len(pts) else pts[0] + lam
                reps.append(((p + nxt) / 2) % lam)
                kinds.append("gap")
        self.reps = reps
        self.kinds = kinds
        self.n = len(reps)
        self.cyclic = ambient == CIRCLE
        self.all_mask = (1 << self.n) - 1

    def mask(self, arc: Arc) -> int:
        m = 0
        for i, x in enumerate(self.reps):
            if arc.contains_point(x):
                m |= 1 << i
        return m

    def components(self, mask: int) -> tuple[tuple[int, ...], ...]:
        """Maximal runs of atoms in spatial order, sorted by first atom."""
        if mask == 0:
            return ()
        n = self.n
        bits = [(mask >> i) & 1 for i in range(n)]
        if self.cyclic and all(bits):
            return (tuple(range(n)),)
        runs = []
        if self.cyclic:
            start = next(i for i in range(n) if not bits[i])
            order = [(start + 1 + k) % n for k in range(n)]
        else:
            order = list(range(n))
        cur: list[int] = []
        for i in order:
            if bits[i]:
                cur.append(i)
            elif cur:
                runs.append(tuple(cur))
                cur = []
        if cur:
            runs.append(tuple(cur))
        runs.sort(key=lambda r: r[0])
        return tuple(runs)

    def is_full_circle(self, mask: int) -> bool:
        return self.cyclic and mask == self.all_mask


@dataclass
class CoverSpec:
    """Indexed arcs covering ``target`` (default: their union)."""

    arcs: list[Arc]
    ambient: str = LINE
    lam: Fraction | None = None
    target: list[Arc] | None = None
    arrangement: Arrangement = field(init=False, repr=False)
    masks: list[int] = field(init=False, repr=False)
    target_mask: int = field(init=False, repr=False)

    def __post_init__(self):
        if not self.arcs:
            raise CoverError("a cover needs at least one arc")
        for arc in self.arcs:
            if arc.ambient != self.ambient or (self.ambient == CIRCLE and arc.lam != self.lam):
                raise CoverError(f"arc {arc} does not live on the cover's ambient space")
        extra = self.target or []
        self.arrangement = Arrangement(list(self.arcs) + list(extra), self.ambient, self.lam)
        self.masks = [self.arrangement.mask(a) for a in self.arcs]
        union = 0
        for m in self.masks:
            union |= m
        if self.target is None:
            self.target_mask = union
        else:
            t = 0
            for a in self.target:
                t |= self.arrangement.mask(a)
            self.target_mask = t
            if union != t:
                raise CoverError("the arcs do not cover the target exactly",
                                 witness=self._atom_points(union ^ t))

    @classmethod
    def line(cls, intervals: Iterable[tuple], target: tuple | None = None) -> CoverSpec:
        arcs = [Arc.interval(a, b) for a, b in intervals]
        return cls(arcs, LINE, None, [Arc.interval(*target)] if target is not None else None)

    @classmethod
    def circle(cls, lam, arcs: Iterable[tuple]) -> CoverSpec:
        lam = to_fraction(lam)
        return cls([Arc.on_circle(s, l, lam) for s, l in arcs], CIRCLE, lam,
                   [Arc.full_circle(lam)])

    def _atom_points(self, mask: int) -> list[Fraction]:
        return [self.arrangement.reps[i] for i in range(self.arrangement.n) if mask >> i & 1]

    def __len__(self) -> int:
        return len(self.arcs)

    def scaled(self, factor) -> CoverSpec:
        factor = to_fraction(factor)
        target = [a.scaled(factor) for a in self.target] if self.target else None
        return CoverSpec([a.scaled(factor) for a in self.arcs], self.ambient,
                         self.lam * factor if self.lam is not None else None, target)

    def to_json(self) -> dict:
        out = {"ambient": self.ambient, "arcs": [a.to_json() for a in self.arcs]}
        if self.lam is not None:
            out["lambda"] = str(self.lam)
        return out


def standard_circle_cover(m: int, lam=1) -> CoverSpec:
    """m arcs [i lam/m, i lam/m + 3 lam/(2m)); consecutive arcs overlap, U_i and U_{i+2} are disjoint for m >= 4."""
    lam = to_fraction(lam)
    if m < 3:
        raise CoverError("need at least three arcs to cover the circle by proper arcs")
    return CoverSpec.circle(lam, [(i * lam / m, 3 * lam / (2 * m)) for i in range(m)])


def long_arc_cover(m: int, lam=1) -> CoverSpec:
    """m arcs [i lam/m, i lam/m + lam - lam/(2m)): each misses one short gap, the gaps are disjoint.

    Any m - 1 points of the circle lie in a single arc.
    """
    lam = to_fraction(lam)
    if m < 3:
        raise CoverError("need at least three arcs")
    return CoverSpec.circle(lam, [(i * lam / m, lam - lam / (2 * m)) for i in range(m)])


# disjoint families and the factorizing condition ---------------------------------

def disjoint_families(cover: CoverSpec) -> list[tuple[int, ...]]:
    """All nonempty families of pairwise disjoint cover elements, by size then lexicographically (0-based)."""
    n = len(cover.masks)
    disjoint = [[cover.masks[i] & cover.masks[j] == 0 for j in range(n)] for i in range(n)]
    out: list[tuple[int, ...]] = []

    def extend(fam: tuple[int, ...], start: int):
        for j in range(start, n):
            if all(disjoint[i][j] for i in fam):
                new = fam + (j,)
                out.append(new)
                extend(new, j + 1)

    extend((), 0)
    out.sort(key=lambda f: (len(f), f))
    return out


def family_mask(cover: CoverSpec, family: Sequence[int]) -> int:
    m = 0
    for i in family:
        m |= cover.masks[i]
    return m


@dataclass
class FactorizingVerdict:
    factorizing: bool
    witness: list[Fraction] | None = None  # points no disjoint family covers
    checked_points: int = 0

    def __bool__(self) -> bool:
        return self.factorizing


def is_factorizing(cover: CoverSpec, max_points: int | None = None) -> FactorizingVerdict:
    """Decide whether every finite point set of the target lies in a union of disjoint cover elements.

    Membership in every arc is constant on atoms, so it suffices to test one
    representative per atom of the target.  Coverability is inherited by
    subsets, so the cover is factorizing iff the set of all representatives
    is covered by one disjoint family.  On failure a smallest violating point
    set is returned.  ``max_points`` restricts the question to point sets of
    at most that size.
    """
    arr = cover.arrangement
    atoms = [i for i in range(arr.n) if cover.target_mask >> i & 1]
    fam_masks = sorted({family_mask(cover, f) for f in disjoint_families(cover)})

    def coverable(mask: int) -> bool:
        return any(mask & fm == mask for fm in fam_masks)

    full = 0
    for i in atoms:
        full |= 1 << i
    limit = len(atoms) if max_points is None else min(max_points, len(atoms))
    if coverable(full):
        return FactorizingVerdict(True, None, limit)
    # smallest witness by increasing size, while the enumeration stays small
    s = 0
    for s in range(1, limit + 1):
        if math.comb(len(atoms), s) > WITNESS_SEARCH_CAP:
            break
        for combo in itertools.combinations(atoms, s):
            m = 0
            for i in combo:
                m |= 1 << i
            if not coverable(m):
                return FactorizingVerdict(False, [arr.reps[i] for i in combo], s)
    else:
        return FactorizingVerdict(True, None, limit)
    # fall back to shrinking the full set to an inclusion-minimal witness
    chosen = list(atoms)
    for i in list(chosen):
        trial = [j for j in chosen if j != i]
        m = 0
        for j in trial:
            m |= 1 << j
        if not coverable(m):
            chosen = trial
    return FactorizingVerdict(False, [arr.reps[i] for i in chosen], len(chosen))


def factorizing_degree(cover: CoverSpec, max_k: int = 8) -> int:
    """Largest k <= max_k such that every k-point subset of the target lies in a disjoint family."""
    k = 0
    while k < max_k and is_factorizing(cover, max_points=k + 1).factorizing:
        k += 1
    return k


# the prefactorization algebra F_A --------------------------------------------------

class FactorizationAssignment:
    """F_A on the opens of one arrangement, with cached structure maps."""

    def __init__(self, algebra: FinDimAlgebra, arrangement: Arrangement):
        self.algebra = algebra
        self.arr = arrangement
        self._bases: dict[int, list[tuple[int, ...]]] = {}
        self._maps: dict[tuple[int, int], SparseMatrix] = {}

    def components(self, mask: int):
        return self.arr.components(mask)

    def dimension(self, mask: int) -> int:
        return self.algebra.dim ** len(self.components(mask))

    def basis(self, mask: int) -> list[tuple[int, ...]]:
        if mask not in self._bases:
            c = len(self.components(mask))
            self._bases[mask] = list(itertools.product(range(self.algebra.dim), repeat=c))
        return self._bases[mask]

    def _placement(self, inner: int, outer: int):
        """For each outer component, the inner component indices it contains in spatial order."""
        if inner & ~outer:
            raise CoverError("inner open is not contained in the outer open")
        icomps = self.components(inner)
        ocomps = self.components(outer)
        if self.arr.is_full_circle(outer) and icomps:
            raise CoverError("no left-to-right order inside the full circle; the outer open must be a proper arc")
        where = []
        for k, oc in enumerate(ocomps):
            pos = {a: t for t, a in enumerate(oc)}
            inside = [(pos[ic[0]], j) for j, ic in enumerate(icomps) if ic[0] in pos]
            for _, j in inside:
                if any(a not in pos for a in icomps[j]):
                    raise CoverError("an inner component straddles two outer components")
            where.append([j for _, j in sorted(inside)])
        return where

    def structure_map(self, inner: int, outer: int) -> SparseMatrix:
        """The matrix of F(inner) -> F(outer)."""
        key = (inner, outer)
        if key in self._maps:
            return self._maps[key]
        where = self._placement(inner, outer)
        A = self.algebra
        unit = A.unit
        obasis = self.basis(outer)
        oindex = {t: k for k, t in enumerate(obasis)}
        cols = []
        for t in self.basis(inner):
            factors = []
            for group in where:
                v = dict(unit)
                for j in group:
                    v = A.multiply(v, {t[j]: Fraction(1)})
                factors.append(v)
            col: dict[int, Fraction] = {}
            for combo in itertools.product(*(sorted(f.items()) for f in factors)):
                idx = tuple(i for i, _ in combo)
                c = Fraction(1)
                for _, x in combo:
                    c *= x
                k = oindex[idx]
                col[k] = col.get(k, 0) + c
            cols.append({k: v for k, v in col.items() if v})
        M = SparseMatrix.from_columns(len(obasis), cols)
        self._maps[key] = M
        return M

    def apply(self, inner: int, outer: int, element: dict[tuple[int, ...], Fraction]) -> dict[tuple[int, ...], Fraction]:
        M = self.structure_map(inner, outer)
        ib = {t: k for k, t in enumerate(self.basis(inner))}
        ob = self.basis(outer)
        out: dict[tuple[int, ...], Fraction] = {}
        for t, c in element.items():
            j = ib[t]
            for i, row in M.rows.items():
                if j in row:
                    out[ob[i]] = out.get(ob[i], 0) + c * row[j]
        return {k: v for k, v in out.items() if v}


def structure_map(inner: Sequence[Arc], outer: Arc, A: FinDimAlgebra,
                  elements: Sequence[dict | int | str]) -> dict[int, Fraction]:
    """F_A(U_1 | ... | U_n) -> F_A(outer): multiply the elements in the spatial order of the arcs.

    ``elements[i]`` sits on ``inner[i]`` (a sparse vector, basis index or basis name).
    """
    if len(inner) != len(elements):
        raise CoverError("one element per inner arc is required")
    if outer.ambient == CIRCLE and outer.full:
        raise CoverError("the outer open must be a proper arc")
    arcs = list(inner) + [outer]
    arr = Arrangement(arcs, outer.ambient, outer.lam)
    masks = [arr.mask(a) for a in inner]
    for i, j in itertools.combinations(range(len(inner)), 2):
        if masks[i] & masks[j]:
            raise CoverError(f"inner arcs {inner[i]} and {inner[j]} intersect")
    omask = arr.mask(outer)
    for a, m in zip(inner, masks):
        if m & ~omask:
            raise CoverError(f"{a} is not contained in {outer}")
    comps = arr.components(omask)
    opos = {atom: t for t, atom in enumerate(comps[0])}
    order = sorted(range(len(inner)), key=lambda i: opos[arr.components(masks[i])[0][0]])
    names = {n: i for i, n in enumerate(A.names)}

    def as_vec(e):
        if isinstance(e, dict):
            return {int(k): Fraction(v) for k, v in e.items()}
        if isinstance(e, str):
            return {names[e]: Fraction(1)}
        return {int(e): Fraction(1)}

    v = dict(A.unit)
    for i in order:
        v = A.multiply(v, as_vec(elements[i]))
    return v


# Cech complexes ----------------------------------------------------------------------

@dataclass(frozen=True)
class Distinct:
    """Increasing tuples of distinct disjoint families with alternating signs."""

    def __str__(self):
        return "distinct"


@dataclass(frozen=True)
class FullTruncated:
    """All ordered tuples (repeats allowed) of length <= L."""

    L: int

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("FullTruncated needs L >= 2")

    def __str__(self):
        return f"full:{self.L}"


def parse_convention(text: str):
    if text == "distinct":
        return Distinct()
    if text.startswith("full:"):
        return FullTruncated(int(text.split(":", 1)[1]))
    raise ValueError(f"unknown convention {text!r}; use 'distinct' or 'full:L'")


@dataclass
class CechComplex:
    complex: ChainComplex
    families: list[tuple[int, ...]]
    simplices: dict[int, list[tuple[int, ...]]]
    assignment: FactorizationAssignment
    cover: CoverSpec
    convention: object
    factorizing: FactorizingVerdict

    def homology(self, degrees=None) -> list[int]:
        return homology_dims(self.complex, degrees)


def _simplices(nfam: int, k: int, convention):
    if isinstance(convention, FullTruncated):
        return list(itertools.product(range(nfam), repeat=k))
    return list(itertools.combinations(range(nfam), k))


def cech_complex(cover: CoverSpec, A: FinDimAlgebra, convention=None, max_degree: int = 2,
                 require_factorizing: bool = True, budget: int = DEFAULT_BUDGET) -> CechComplex:
    """Cech complex of F_A over the disjoint families of a cover, homological degree k-1 for k families.

    The Distinct convention is built through degree max_degree + 1 (capped
    by the number of families), so homology is exact through max_degree.
    FullTruncated(L) uses tuples of length <= L and is exact through L - 2.
    """
    convention = convention or Distinct()
    verdict = is_factorizing(cover)
    if require_factorizing and not verdict:
        raise CoverError("cover is not factorizing; no disjoint family covers the points "
                         + ", ".join(str(p) for p in verdict.witness), witness=verdict.witness)
    fams = disjoint_families(cover)
    fmasks = [family_mask(cover, f) for f in fams]
    F = FactorizationAssignment(A, cover.arrangement)
    if isinstance(convention, FullTruncated):
        top_k = convention.L
        exact = convention.L - 2
    else:
        top_k = min(max_degree + 2, len(fams))
        exact = max_degree
    simplices: dict[int, list[tuple[int, ...]]] = {}
    masks: dict[int, list[int]] = {}
    dims: dict[int, int] = {}
    offsets: dict[int, list[int]] = {}
    total = 0
    for k in range(1, top_k + 1):
        sims = _simplices(len(fams), k, convention)
        ms = []
        offs = []
        size = 0
        for s in sims:
            m = cover.arrangement.all_mask
            for v in s:
                m &= fmasks[v]
            ms.append(m)
            offs.append(size)
            size += F.dimension(m)
        total += size
        if total > budget:
            raise SizeBudgetExceeded(total, budget, f" (Cech complex through {k} families)")
        simplices[k - 1], masks[k - 1], dims[k - 1], offsets[k - 1] = sims, ms, size, offs
    bounds = {}
    for deg in range(1, top_k):
        tindex = {s: i for i, s in enumerate(simplices[deg - 1])}
        rows: dict[int, dict[int, Fraction]] = {}
        for s, m, off in zip(simplices[deg], masks[deg], offsets[deg]):
            for i in range(len(s)):
                face = s[:i] + s[i + 1:]
                ti = tindex[face]
                M = F.structure_map(m, masks[deg - 1][ti])
                toff = offsets[deg - 1][ti]
                sign = -1 if i % 2 else 1
                for r, row in M.rows.items():
                    acc = rows.setdefault(toff + r, {})
                    for c, v in row.items():
                        acc[off + c] = acc.get(off + c, 0) + sign * v
        bounds[deg] = SparseMatrix(dims[deg - 1], dims[deg], rows)
    cx = ChainComplex(dims, bounds, exact_through=exact)
    return CechComplex(cx, fams, simplices, F, cover, convention, verdict)


@dataclass
class RightExactness:
    cokernel_dim: int
    target_dim: int
    augmentation_rank: int
    composite_zero: bool

    @property
    def holds(self) -> bool:
        return self.composite_zero and self.cokernel_dim == self.target_dim == self.augmentation_rank


def right_exactness(cover: CoverSpec, A: FinDimAlgebra) -> RightExactness:
    """Exactness of (+) F(a cap b) -> (+) F(c) -> F(U) -> 0 over ordered pairs of disjoint families."""
    cech = cech_complex(cover, A, FullTruncated(2), require_factorizing=False)
    F = cech.assignment
    d1 = cech.complex.d(1)
    target = cover.target_mask
    fams = cech.families
    cols = []
    for f in fams:
        M = F.structure_map(family_mask(cover, f), target)
        for j in range(M.ncols):
            cols.append({i: row[j] for i, row in M.rows.items() if j in row})
    eps = SparseMatrix.from_columns(F.dimension(target), cols)
    composite = eps.matmul(d1)
    return RightExactness(cech.complex.dims[0] - d1.rank(), F.dimension(target), eps.rank(),
                          composite.is_zero())


def augmentation(cech: CechComplex) -> SparseMatrix:
    """(+) F(U_alpha) -> F(target) on degree-0 chains (needs a target that is not the full circle)."""
    F = cech.assignment
    cols = []
    for (v,), m in zip(cech.simplices[0], [family_mask(cech.cover, f) for f in cech.families]):
        M = F.structure_map(m, cech.cover.target_mask)
        for j in range(M.ncols):
            cols.append({i: row[j] for i, row in M.rows.items() if j in row})
    return SparseMatrix.from_columns(F.dimension(cech.cover.target_mask), cols)


# Fact extension from a grid basis ------------------------------------------------------

def grid_basis(V: Sequence[tuple], granularity: int) -> list[Arc]:
    """Intervals with endpoints on (1/granularity)Z contained in some component of V."""
    out = []
    g = Fraction(1, granularity)
    for a, b in V:
        a, b = to_fraction(a), to_fraction(b)
        lo = -((-a) // g)  # ceil(a / g)
        hi = b // g
        ticks = [k * g for k in range(int(lo), int(hi) + 1)]
        for x, y in itertools.combinations(ticks, 2):
            out.append(Arc.interval(x, y))
    return out


def fact_extend(A: FinDimAlgebra, V: Sequence[tuple], granularity: int = 3, max_degree: int = 1,
                convention=None, budget: int = DEFAULT_BUDGET) -> ChainComplex:
    """Cech complex of F_A over the grid sub-basis of opens contained in V (a list of disjoint intervals)."""
    if not V:
        return ChainComplex({0: 1}, {})
    comps = sorted((to_fraction(a), to_fraction(b)) for a, b in V)
    for (a1, b1), (a2, b2) in zip(comps, comps[1:]):
        if a2 < b1:
            raise CoverError("components of V must be disjoint")
    basis = grid_basis(comps, granularity)
    cover_target = [Arc.interval(a, b) for a, b in comps]
    if not basis:
        raise CoverError(f"grid of granularity {granularity} has no interval inside V")
    try:
        cover = CoverSpec(basis, LINE, None, cover_target)
    except CoverError as exc:
        raise CoverError(f"grid of granularity {granularity} is too coarse to cover V", exc.witness) from None
    return cech_complex(cover, A, convention, max_degree, budget=budget).complex


# factorization homology of the circle -----------------------------------------------------

@dataclass
class CircleFH:
    dims: list[int]
    cover_size: int
    lam: Fraction
    convention: str
    factorizing: bool
    witness: list[Fraction] | None
    factorizing_degree: int


def factorization_homology_circle(A: FinDimAlgebra, lam=1, cover: CoverSpec | None = None,
                                  max_degree: int = 1, convention=None,
                                  budget: int = DEFAULT_BUDGET) -> CircleFH:
    """Homology of the Cech complex of F_A over a cover of S^1_lam by proper arcs.

    Proper arcs carry their lifts to R, which fixes the left-to-right order
    used by the structure maps.  No finite cover of the circle by proper arcs
    is factorizing for all point sets; the verdict, a witness and the largest
    k for which every k-point set is covered are reported with the dimensions.
    The default cover is ``long_arc_cover(4, lam)``.
    """
    lam = to_fraction(lam)
    cover = cover or long_arc_cover(4, lam)
    if cover.ambient != CIRCLE:
        raise CoverError("factorization homology of the circle needs a circle cover")
    for arc in cover.arcs:
        if not arc.proper:
            raise CoverError(f"{arc} is not a proper arc")
    cech = cech_complex(cover, A, convention, max_degree, require_factorizing=False, budget=budget)
    return CircleFH(cech.homology(range(0, max_degree + 1)), len(cover), cover.lam, str(cech.convention),
                    cech.factorizing.factorizing, cech.factorizing.witness, factorizing_degree(cover))


def default_cover_schedule(lam=1) -> list[tuple[str, CoverSpec]]:
    """Covers tried in order when comparing FH(S^1) with HH; at most 8 arcs."""
    return [("consecutive-overlap, 4 arcs", standard_circle_cover(4, lam)),
            ("long-arc, 4 arcs", long_arc_cover(4, lam)),
            ("long-arc, 6 arcs", long_arc_cover(6, lam)),
            ("long-arc, 8 arcs", long_arc_cover(8, lam))]


@dataclass
class FHComparison:
    algebra: str
    hh: list[int]
    attempts: list[tuple[str, list[int]]]  # (cover label, dims)
    matches: bool
    lam: Fraction

    @property
    def refinement_log(self) -> list[str]:
        return [f"{label}: dims {d}" + (" matches HH" if d == self.hh else f" differs from HH {self.hh}")
                for label, d in self.attempts]

    @property
    def final_cover(self) -> str | None:
        return self.attempts[-1][0] if self.matches else None


def compare_fh_hh(A: FinDimAlgebra, lam=1, max_degree: int = 1,
                  schedule: Sequence[tuple[str, CoverSpec]] | None = None,
                  budget: int = DEFAULT_BUDGET) -> FHComparison:
    """FH(S^1_lam, F_A) against HH(A), moving through the cover schedule until they agree."""
    hh = hh_dims(A, max_degree)
    attempts = []
    for label, cover in (schedule if schedule is not None else default_cover_schedule(lam)):
        try:
            fh = factorization_homology_circle(A, lam, cover, max_degree, budget=budget)
        except SizeBudgetExceeded:
            attempts.append((label + " (size budget exceeded)", []))
            continue
        attempts.append((label, fh.dims))
        if fh.dims == hh:
            return FHComparison(A.name, hh, attempts, True, to_fraction(lam))
    return FHComparison(A.name, hh, attempts, False, to_fraction(lam))
