"""Chain complexes over Q, Hochschild complexes, the HKR map and the Rees algebra of Q[x].

Homological grading throughout: HH_n sits in degree n >= 0.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import linalg
from .exact_core import to_fraction

DEFAULT_BUDGET = 20000


class AlgebraError(ValueError):
    """Structure constants fail a defining law; ``witness`` holds the offending data."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class ComplexError(ValueError):
    pass


class SizeBudgetExceeded(RuntimeError):
    def __init__(self, dimension: int, budget: int, where: str = ""):
        super().__init__(f"complex needs {dimension} basis elements{where}, budget is {budget}")
        self.dimension = dimension
        self.budget = budget


# sparse matrices and complexes ------------------------------------------------

class SparseMatrix:
    """Rational matrix stored as {row: {col: value}} with no explicit zeros."""

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, nrows: int, ncols: int, rows: Mapping[int, Mapping[int, object]] | None = None):
        self.nrows, self.ncols = nrows, ncols
        self.rows: dict[int, dict[int, Fraction]] = {}
        for i, row in (rows or {}).items():
            clean = {j: Fraction(v) for j, v in row.items() if v}
            if clean:
                if not 0 <= i < nrows or any(not 0 <= j < ncols for j in clean):
                    raise ComplexError(f"entry out of range in a {nrows}x{ncols} matrix")
                self.rows[i] = clean

    @classmethod
    def from_columns(cls, nrows: int, columns: Sequence[Mapping[int, object]]) -> SparseMatrix:
        rows: dict[int, dict[int, Fraction]] = {}
        for j, col in enumerate(columns):
            for i, v in col.items():
                if v:
                    r = rows.setdefault(i, {})
                    r[j] = r.get(j, 0) + v
        return cls(nrows, len(columns), rows)

    @classmethod
    def zero(cls, nrows: int, ncols: int) -> SparseMatrix:
        return cls(nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> SparseMatrix:
        return cls(n, n, {i: {i: 1} for i in range(n)})

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.rows.get(i, {}).get(j, Fraction(0))

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows.values())

    def is_zero(self) -> bool:
        return not self.rows

    def rank(self) -> int:
        if not self.rows:
            return 0
        return linalg.rank(self.rows.values(), self.ncols)

    def matmul(self, other: SparseMatrix) -> SparseMatrix:
        if self.ncols != other.nrows:
            raise ComplexError(f"shape mismatch {self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
        out: dict[int, dict[int, Fraction]] = {}
        for i, row in self.rows.items():
            acc: dict[int, Fraction] = {}
            for k, a in row.items():
                for j, b in other.rows.get(k, {}).items():
                    acc[j] = acc.get(j, 0) + a * b
            out[i] = acc
        return SparseMatrix(self.nrows, other.ncols, out)

    def vstack(self, other: SparseMatrix) -> SparseMatrix:
        if self.ncols != other.ncols:
            raise ComplexError("vstack needs equal column counts")
        rows = dict(self.rows)
        rows.update({i + self.nrows: r for i, r in other.rows.items()})
        return SparseMatrix(self.nrows + other.nrows, self.ncols, rows)

    def restrict_columns(self, cols: Sequence[int]) -> SparseMatrix:
        pos = {c: k for k, c in enumerate(cols)}
        rows = {i: {pos[j]: v for j, v in r.items() if j in pos} for i, r in self.rows.items()}
        return SparseMatrix(self.nrows, len(cols), rows)

    def to_text(self) -> str:
        """Sparse text format: header "rows cols nnz", then "i j p/q" lines sorted."""
        lines = [f"{self.nrows} {self.ncols} {self.nnz()}"]
        for i in sorted(self.rows):
            for j in sorted(self.rows[i]):
                lines.append(f"{i} {j} {self.rows[i][j]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> SparseMatrix:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        nrows, ncols, nnz = (int(t) for t in lines[0].split())
        rows: dict[int, dict[int, Fraction]] = {}
        for ln in lines[1:]:
            i, j, v = ln.split()
            rows.setdefault(int(i), {})[int(j)] = Fraction(v)
        if len(lines) - 1 != nnz:
            raise ComplexError(f"expected {nnz} entries, found {len(lines) - 1}")
        return cls(nrows, ncols, rows)

    def __eq__(self, other) -> bool:
        return isinstance(other, SparseMatrix) and (self.nrows, self.ncols, self.rows) == (
            other.nrows, other.ncols, other.rows)

    def __repr__(self) -> str:
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz()})"


class ChainComplex:
    """Chain complex of finite-dimensional Q-vector spaces in degrees lo..hi.

    ``boundaries[n]`` is d_n: C_n -> C_{n-1}, a dims[n-1] x dims[n] matrix;
    missing boundaries are zero.  ``exact_through`` is the top degree whose
    homology the complex computes correctly (for truncated constructions).
    """

    def __init__(self, dims: Mapping[int, int], boundaries: Mapping[int, SparseMatrix] | None = None,
                 exact_through: int | None = None, check: bool = True):
        if not dims:
            raise ComplexError("a complex needs at least one degree")
        self.lo, self.hi = min(dims), max(dims)
        self.dims = {n: int(dims.get(n, 0)) for n in range(self.lo, self.hi + 1)}
        self.boundaries: dict[int, SparseMatrix] = {}
        for n, d in (boundaries or {}).items():
            if not (self.lo < n <= self.hi):
                if d.is_zero():
                    continue
                raise ComplexError(f"boundary d_{n} leaves the degree range [{self.lo}, {self.hi}]")
            if (d.nrows, d.ncols) != (self.dims[n - 1], self.dims[n]):
                raise ComplexError(f"d_{n} has shape {d.nrows}x{d.ncols}, expected "
                                   f"{self.dims[n - 1]}x{self.dims[n]}")
            self.boundaries[n] = d
        self.exact_through = self.hi if exact_through is None else exact_through
        if check:
            self.check_square_zero()

    def d(self, n: int) -> SparseMatrix:
        if n in self.boundaries:
            return self.boundaries[n]
        return SparseMatrix.zero(self.dims.get(n - 1, 0), self.dims.get(n, 0))

    def check_square_zero(self) -> None:
        for n in range(self.lo + 2, self.hi + 1):
            if n in self.boundaries and n - 1 in self.boundaries:
                comp = self.boundaries[n - 1].matmul(self.boundaries[n])
                if not comp.is_zero():
                    i = min(comp.rows)
                    j = min(comp.rows[i])
                    raise ComplexError(f"d_{n - 1} d_{n} != 0 (entry ({i}, {j}) = {comp.rows[i][j]})")

    def rank_d(self, n: int) -> int:
        return self.boundaries[n].rank() if n in self.boundaries else 0

    def total_dimension(self) -> int:
        return sum(self.dims.values())

    def to_text(self) -> str:
        parts = [f"complex {self.lo} {self.hi} {self.exact_through}",
                 "dims " + " ".join(str(self.dims[n]) for n in range(self.lo, self.hi + 1))]
        for n in sorted(self.boundaries):
            parts.append(f"d {n}")
            parts.append(self.boundaries[n].to_text().rstrip("\n"))
        return "\n".join(parts) + "\n"

    @classmethod
    def from_text(cls, text: str) -> ChainComplex:
        lines = text.splitlines()
        _, lo, hi, exact = lines[0].split()
        lo, hi = int(lo), int(hi)
        dims = dict(zip(range(lo, hi + 1), (int(t) for t in lines[1].split()[1:])))
        bounds = {}
        k = 2
        while k < len(lines):
            if not lines[k].strip():
                k += 1
                continue
            n = int(lines[k].split()[1])
            nnz = int(lines[k + 1].split()[2])
            bounds[n] = SparseMatrix.from_text("\n".join(lines[k + 1:k + 2 + nnz]))
            k += 2 + nnz
        return cls(dims, bounds, exact_through=int(exact))


def homology_dims(C: ChainComplex, degrees: Iterable[int] | None = None) -> list[int]:
    """dim H_n = dim C_n - rank d_n - rank d_{n+1}.

    By default reports degrees lo..exact_through.
    """
    if degrees is None:
        degrees = range(C.lo, C.exact_through + 1)
    ranks: dict[int, int] = {}

    def rk(n):
        if n not in ranks:
            ranks[n] = C.rank_d(n)
        return ranks[n]

    out = []
    for n in degrees:
        if n > C.exact_through:
            raise ComplexError(f"degree {n} is above the exactness bound {C.exact_through} of this complex")
        if n < C.lo or n > C.hi:
            out.append(0)
            continue
        out.append(C.dims[n] - rk(n) - rk(n + 1))
    return out


# algebras ---------------------------------------------------------------------

Vector = dict  # basis index -> Fraction


class FinDimAlgebra:
    """Associative unital algebra over Q by basis and structure constants.

    ``mult[(i, j)]`` is e_i e_j as a sparse vector.  Optional ``grading``
    (integer per basis element) and ``differential`` (d e_i as sparse vector)
    make it a dg algebra; optional ``weights`` give an extra multiplicative
    grading used to cut complexes into finite windows.
    """

    def __init__(self, names: Sequence[str], unit: Mapping[int, object],
                 mult: Mapping[tuple[int, int], Mapping[int, object]],
                 grading: Sequence[int] | None = None,
                 differential: Mapping[int, Mapping[int, object]] | None = None,
                 weights: Sequence[int] | None = None, name: str = ""):
        self.names = tuple(names)
        n = len(self.names)
        if n == 0:
            raise AlgebraError("an algebra needs a nonempty basis")
        self.dim = n
        self.unit: Vector = _clean(unit)
        self.mult: dict[tuple[int, int], Vector] = {}
        for (i, j), v in mult.items():
            if not (0 <= i < n and 0 <= j < n) or any(not 0 <= k < n for k in v):
                raise AlgebraError(f"structure constant index out of range at {(i, j)}", (i, j))
            cv = _clean(v)
            if cv:
                self.mult[i, j] = cv
        self.grading = tuple(grading) if grading is not None else None
        self.differential = {i: _clean(v) for i, v in (differential or {}).items() if _clean(v)}
        if self.differential and self.grading is None:
            raise AlgebraError("a differential needs a grading")
        self.weights = tuple(weights) if weights is not None else None
        self.name = name
        self.validate()

    # basic operations ------------------------------------------------------

    def basis_vector(self, i: int) -> Vector:
        return {i: Fraction(1)}

    def multiply(self, u: Mapping[int, Fraction], v: Mapping[int, Fraction]) -> Vector:
        out: dict[int, Fraction] = {}
        for i, a in u.items():
            for j, b in v.items():
                for k, c in self.mult.get((i, j), {}).items():
                    out[k] = out.get(k, 0) + a * b * c
        return {k: c for k, c in out.items() if c}

    def apply_d(self, u: Mapping[int, Fraction]) -> Vector:
        out: dict[int, Fraction] = {}
        for i, a in u.items():
            for k, c in self.differential.get(i, {}).items():
                out[k] = out.get(k, 0) + a * c
        return {k: c for k, c in out.items() if c}

    @property
    def is_dg(self) -> bool:
        return bool(self.differential) or (self.grading is not None and any(self.grading))

    def validate(self) -> None:
        n = self.dim
        e = [self.basis_vector(i) for i in range(n)]
        for i in range(n):
            if self.multiply(self.unit, e[i]) != e[i] or self.multiply(e[i], self.unit) != e[i]:
                raise AlgebraError(f"unit law fails on basis element {self.names[i]}", (self.names[i],))
        for i, j, k in itertools.product(range(n), repeat=3):
            left = self.multiply(self.mult.get((i, j), {}), e[k])
            right = self.multiply(e[i], self.mult.get((j, k), {}))
            if left != right:
                raise AlgebraError("associativity fails on basis triple "
                                   f"({self.names[i]}, {self.names[j]}, {self.names[k]})",
                                   (self.names[i], self.names[j], self.names[k]))
        if self.grading is not None:
            if len(self.grading) != n:
                raise AlgebraError("grading length differs from the basis size")
            for (i, j), v in self.mult.items():
                for k in v:
                    if self.grading[k] != self.grading[i] + self.grading[j]:
                        raise AlgebraError(f"product {self.names[i]}*{self.names[j]} is not homogeneous",
                                           (self.names[i], self.names[j]))
            for i, v in self.differential.items():
                for k in v:
                    if self.grading[k] != self.grading[i] - 1:
                        raise AlgebraError(f"d({self.names[i]}) is not of degree -1", (self.names[i],))
            for i in range(n):
                if self.apply_d(self.apply_d(e[i])):
                    raise AlgebraError(f"d^2 != 0 on {self.names[i]}", (self.names[i],))
            for i, j in itertools.product(range(n), repeat=2):
                lhs = self.apply_d(self.mult.get((i, j), {}))
                sign = -1 if self.grading[i] % 2 else 1
                rhs = _add(self.multiply(self.apply_d(e[i]), e[j]),
                           {k: sign * c for k, c in self.multiply(e[i], self.apply_d(e[j])).items()})
                if lhs != rhs:
                    raise AlgebraError(f"Leibniz rule fails on ({self.names[i]}, {self.names[j]})",
                                       (self.names[i], self.names[j]))
        if self.weights is not None:
            if len(self.weights) != n:
                raise AlgebraError("weights length differs from the basis size")
            for (i, j), v in self.mult.items():
                for k in v:
                    if self.weights[k] != self.weights[i] + self.weights[j]:
                        raise AlgebraError(f"product {self.names[i]}*{self.names[j]} breaks the weight grading",
                                           (self.names[i], self.names[j]))

    def unit_basis_index(self) -> int | None:
        """Index of the unit when it is itself a basis vector."""
        if len(self.unit) == 1:
            (i, c), = self.unit.items()
            if c == 1:
                return i
        return None

    def with_unit_basis(self) -> FinDimAlgebra:
        """An isomorphic algebra whose basis element 0 is the unit."""
        if self.unit_basis_index() == 0:
            return self
        # replace the first basis vector with nonzero unit coefficient by the unit
        pivot = min(self.unit)
        order = [pivot] + [i for i in range(self.dim) if i != pivot]
        # new basis: f_0 = unit, f_k = e_order[k] for k >= 1; express old e_pivot in new basis
        up = self.unit[pivot]
        old_to_new: dict[int, Vector] = {}
        for k, i in enumerate(order):
            if k:
                old_to_new[i] = {k: Fraction(1)}
        epiv = {0: 1 / up}
        for i, c in self.unit.items():
            if i != pivot:
                k = order.index(i)
                epiv[k] = epiv.get(k, 0) - c / up
        old_to_new[pivot] = epiv

        def convert(v):
            out: dict[int, Fraction] = {}
            for i, c in v.items():
                for k, d in old_to_new[i].items():
                    out[k] = out.get(k, 0) + c * d
            return {k: c for k, c in out.items() if c}

        new_basis_old = [dict(self.unit)] + [{i: Fraction(1)} for i in order[1:]]
        mult = {}
        for a in range(self.dim):
            for b in range(self.dim):
                mult[a, b] = convert(self.multiply(new_basis_old[a], new_basis_old[b]))
        names = ["1"] + [self.names[i] for i in order[1:]]
        grading = None
        if self.grading is not None:
            grading = [self.grading[pivot]] + [self.grading[i] for i in order[1:]]
        diff = {a: convert(self.apply_d(new_basis_old[a])) for a in range(self.dim)}
        return FinDimAlgebra(names, {0: 1}, mult, grading, diff, None, self.name)

    def commutator_quotient_dim(self) -> int:
        """dim A/[A,A], computed directly from the commutators e_i e_j - e_j e_i."""
        rows = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                rows.append(_add(self.mult.get((i, j), {}),
                                 {k: -c for k, c in self.mult.get((j, i), {}).items()}))
        return self.dim - linalg.rank([r for r in rows if r], self.dim)

    def is_commutative(self) -> bool:
        return all(self.mult.get((i, j), {}) == self.mult.get((j, i), {})
                   for i in range(self.dim) for j in range(i + 1, self.dim))

    def to_json(self) -> dict:
        out = {"basis": list(self.names),
               "unit": {self.names[i]: str(c) for i, c in sorted(self.unit.items())},
               "products": [{"left": self.names[i], "right": self.names[j],
                             "value": {self.names[k]: str(c) for k, c in sorted(v.items())}}
                            for (i, j), v in sorted(self.mult.items())]}
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> FinDimAlgebra:
        names = list(data["basis"])
        idx = {n: i for i, n in enumerate(names)}
        if len(idx) != len(names):
            raise AlgebraError("duplicate basis names", tuple(names))

        def vec(d):
            try:
                return {idx[k]: to_fraction(v) for k, v in d.items()}
            except KeyError as exc:
                raise AlgebraError(f"unknown basis element {exc.args[0]!r}", exc.args[0]) from None

        mult = {}
        for entry in data.get("products", []):
            key = (idx[entry["left"]], idx[entry["right"]])
            mult[key] = vec(entry["value"])
        grading = data.get("grading")
        if grading is not None:
            grading = [grading[n] for n in names]
        weights = data.get("weights")
        if weights is not None:
            weights = [weights[n] for n in names]
        diff = {idx[k]: vec(v) for k, v in data.get("differential", {}).items()}
        return cls(names, vec(data["unit"]), mult, grading, diff, weights, data.get("name", ""))

    def __repr__(self) -> str:
        return f"FinDimAlgebra({self.name or 'A'}, dim={self.dim})"


def _clean(v: Mapping[int, object]) -> Vector:
    return {int(k): Fraction(c) for k, c in v.items() if c}


def _add(u: Mapping[int, Fraction], v: Mapping[int, Fraction]) -> Vector:
    out = dict(u)
    for k, c in v.items():
        out[k] = out.get(k, 0) + c
    return {k: c for k, c in out.items() if c}


def ground_field() -> FinDimAlgebra:
    return FinDimAlgebra(["1"], {0: 1}, {(0, 0): {0: 1}}, weights=[0], name="Q")


def product_of_fields(n: int = 2) -> FinDimAlgebra:
    """Q^n with orthogonal idempotents."""
    names = [f"e{i}" for i in range(n)]
    return FinDimAlgebra(names, {i: 1 for i in range(n)}, {(i, i): {i: 1} for i in range(n)},
                         name="Q^" + str(n) if n != 2 else "QxQ")


def truncated_polynomial(n_vars: int, bound: int) -> FinDimAlgebra:
    """Q[x_1..x_n] modulo monomials of total degree > bound, weighted by degree."""
    monos = monomials(n_vars, bound)
    index = {m: i for i, m in enumerate(monos)}
    mult = {}
    for i, a in enumerate(monos):
        for j, b in enumerate(monos):
            c = tuple(x + y for x, y in zip(a, b))
            if c in index:
                mult[i, j] = {index[c]: 1}
    names = [monomial_name(m) for m in monos]
    return FinDimAlgebra(names, {0: 1}, mult, weights=[sum(m) for m in monos],
                         name=f"Q[{n_vars} vars]/deg>{bound}")


def dual_numbers() -> FinDimAlgebra:
    a = truncated_polynomial(1, 1)
    return FinDimAlgebra(["1", "eps"], {0: 1}, a.mult, weights=[0, 1], name="Q[eps]/(eps^2)")


def group_algebra_z2() -> FinDimAlgebra:
    return FinDimAlgebra(["1", "g"], {0: 1}, {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}, (1, 1): {0: 1}},
                         name="Q[Z/2]")


def matrix_algebra(n: int) -> FinDimAlgebra:
    """M_n(Q) on elementary matrices E_ij."""
    names = [f"E{i}{j}" for i in range(n) for j in range(n)]
    idx = {(i, j): i * n + j for i in range(n) for j in range(n)}
    mult = {}
    for (i, j), a in idx.items():
        for (k, l), b in idx.items():
            if j == k:
                mult[a, b] = {idx[i, l]: 1}
    return FinDimAlgebra(names, {idx[i, i]: 1 for i in range(n)}, mult, name=f"M{n}(Q)")


STANDARD_ALGEBRAS = {
    "Q": ground_field,
    "QxQ": product_of_fields,
    "dual-numbers": dual_numbers,
    "Q[Z/2]": group_algebra_z2,
    "M2": lambda: matrix_algebra(2),
}


def monomials(n_vars: int, bound: int) -> list[tuple[int, ...]]:
    out = [m for m in itertools.product(range(bound + 1), repeat=n_vars) if sum(m) <= bound]
    out.sort(key=lambda m: (sum(m), tuple(-e for e in m)))
    return out


def monomial_name(m: Sequence[int]) -> str:
    parts = []
    for i, e in enumerate(m):
        v = f"x{i + 1}" if len(m) > 1 else "x"
        if e == 1:
            parts.append(v)
        elif e > 1:
            parts.append(f"{v}^{e}")
    return "*".join(parts) or "1"


# Hochschild complex ---------------------------------------------------------------

class _TensorBasis:
    """Basis of A^{(x)(n+1)} (or A (x) Abar^{(x)n}) restricted to a weight window."""

    def __init__(self, dim: int, n: int, allowed: Sequence[int], weights=None, max_weight=None):
        self.tuples: list[tuple[int, ...]] = []
        for t in itertools.product(range(dim), *([allowed] * n)):
            if max_weight is not None and sum(weights[i] for i in t) > max_weight:
                continue
            self.tuples.append(t)
        self.index = {t: k for k, t in enumerate(self.tuples)}

    def __len__(self):
        return len(self.tuples)


def _count_chains(dim: int, nbar: int, n: int, weights, allowed, max_weight) -> int:
    if max_weight is None:
        return dim * nbar ** n
    # count tuples with weight <= max_weight via convolution of weight counts
    from collections import Counter
    first = Counter(weights[i] for i in range(dim))
    rest = Counter(weights[i] for i in allowed)
    cur = first
    for _ in range(n):
        nxt: Counter = Counter()
        for w, c in cur.items():
            for w2, c2 in rest.items():
                if w + w2 <= max_weight:
                    nxt[w + w2] += c * c2
        cur = nxt
    return sum(c for w, c in cur.items() if w <= max_weight)


def bar_complex(A: FinDimAlgebra, max_degree: int, normalized: bool = False,
                budget: int = DEFAULT_BUDGET, max_weight: int | None = None) -> ChainComplex:
    """Hochschild chains C_n = A^{(x)(n+1)} with the cyclic bar boundary.

    Chain groups are built through degree max_degree + 1 so that H_n is
    exact for n <= max_degree (``exact_through``).  ``normalized`` uses
    A (x) (A/Q1)^{(x)n}.  ``max_weight`` restricts to the subcomplex of total
    weight <= max_weight (needs ``A.weights``).
    """
    if max_degree < 0:
        raise ValueError("max_degree must be non-negative")
    if A.is_dg:
        raise AlgebraError("bar_complex is implemented for algebras concentrated in degree 0")
    if max_weight is not None and A.weights is None:
        raise AlgebraError("max_weight needs a weight grading on the algebra")
    if normalized:
        A = A.with_unit_basis() if A.unit_basis_index() is None else A
        u = A.unit_basis_index()
        allowed = [i for i in range(A.dim) if i != u]
    else:
        u = None
        allowed = list(range(A.dim))
    top = max_degree + 1
    total = sum(_count_chains(A.dim, len(allowed), n, A.weights, allowed, max_weight) for n in range(top + 1))
    if total > budget:
        raise SizeBudgetExceeded(total, budget, f" for {A.name or 'algebra'} through degree {top}")
    bases = [_TensorBasis(A.dim, n, allowed, A.weights, max_weight) for n in range(top + 1)]
    dims = {n: len(bases[n]) for n in range(top + 1)}
    bounds = {}
    for n in range(1, top + 1):
        cols = []
        target = bases[n - 1]
        for t in bases[n].tuples:
            col: dict[int, Fraction] = {}
            for i in range(n + 1):
                # face d_i: multiply a_i a_{i+1} (cyclic for i = n)
                if i < n:
                    prod = A.mult.get((t[i], t[i + 1]), {})
                    sign = -1 if i % 2 else 1
                    for k, c in prod.items():
                        new = t[:i] + (k,) + t[i + 2:]
                        _accumulate(col, new, sign * c, target, u)
                else:
                    prod = A.mult.get((t[n], t[0]), {})
                    sign = -1 if n % 2 else 1
                    for k, c in prod.items():
                        new = (k,) + t[1:n]
                        _accumulate(col, new, sign * c, target, u)
            cols.append(col)
        bounds[n] = SparseMatrix.from_columns(len(target), cols)
    return ChainComplex(dims, bounds, exact_through=max_degree)


def _accumulate(col, new, value, target, unit):
    if unit is not None and unit in new[1:]:
        return  # degenerate chain, zero in the normalized complex
    k = target.index.get(new)
    if k is None:
        # only possible when a weight window cuts the complex: products preserve weight
        raise ComplexError(f"chain {new} left the weight window")
    col[k] = col.get(k, 0) + value
    if not col[k]:
        del col[k]


def hh_dims(A: FinDimAlgebra, max_degree: int = 2, normalized: bool = False,
            budget: int = DEFAULT_BUDGET, max_weight: int | None = None) -> list[int]:
    """Dimensions of HH_0..HH_max_degree."""
    return homology_dims(bar_complex(A, max_degree, normalized, budget, max_weight), range(0, max_degree + 1))


# HKR ----------------------------------------------------------------------------

@dataclass
class HKRMap:
    """The HKR chain map from Hochschild chains of a truncated polynomial algebra to forms.

    ``maps[m]`` has rows indexed by ``forms[m]`` (pairs (exponent, wedge
    indices)) and columns by the degree-m bar basis.  The target complex has
    zero differential.
    """

    n_vars: int
    bound: int
    algebra: FinDimAlgebra
    bar: ChainComplex
    forms: dict[int, list[tuple[tuple[int, ...], tuple[int, ...]]]]
    maps: dict[int, SparseMatrix]
    target: ChainComplex
    bar_bases: dict[int, list[tuple[int, ...]]] = field(repr=False, default_factory=dict)

    def apply(self, m: int, chain: Sequence[str]) -> dict[str, Fraction]:
        """Image of a single tensor of named monomials, as {form name: coefficient}."""
        names = {n: i for i, n in enumerate(self.algebra.names)}
        t = tuple(names[c] for c in chain)
        col = self.bar_bases[m].index(t)
        out = {}
        for r, row in self.maps[m].rows.items():
            if col in row:
                out[form_name(self.forms[m][r], self.n_vars)] = row[col]
        return out


def form_name(form, n_vars: int) -> str:
    alpha, wedge = form
    coeff = monomial_name(alpha)
    dx = "^".join((f"dx{i + 1}" if n_vars > 1 else "dx") for i in wedge)
    if not dx:
        return coeff
    return dx if coeff == "1" else f"{coeff} {dx}"


def _forms(n_vars: int, m: int, max_weight: int):
    out = []
    for wedge in itertools.combinations(range(n_vars), m):
        for alpha in monomials(n_vars, max_weight - m):
            out.append((alpha, wedge))
    out.sort(key=lambda f: (sum(f[0]) + len(f[1]), f[1], tuple(-e for e in f[0])))
    return out


def _wedge_terms(monos: Sequence[tuple[int, ...]]):
    """Expand da_1 ^ ... ^ da_m for monomials a_i: yields (coeff, exponent, sorted wedge)."""
    n = len(monos[0]) if monos else 0
    partials = []
    for a in monos:
        terms = []
        for i in range(n):
            if a[i]:
                e = list(a)
                e[i] -= 1
                terms.append((a[i], tuple(e), i))
        partials.append(terms)
    for combo in itertools.product(*partials):
        idx = [t[2] for t in combo]
        if len(set(idx)) < len(idx):
            continue
        sign = _perm_sign(idx)
        coeff = sign
        expo = [0] * n
        for c, e, _ in combo:
            coeff *= c
            expo = [x + y for x, y in zip(expo, e)]
        yield coeff, tuple(expo), tuple(sorted(idx))


def _perm_sign(seq) -> int:
    sign = 1
    s = list(seq)
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if s[i] > s[j]:
                sign = -sign
    return sign


def hkr_map(n_vars: int, poly_degree_bound: int, chain_degree: int,
            window: int | None = None, budget: int = DEFAULT_BUDGET) -> HKRMap:
    """a_0 (x) ... (x) a_m -> (1/m!) a_0 da_1 ^ ... ^ da_m for m <= chain_degree.

    The algebra is Q[x_1..x_n] truncated above ``poly_degree_bound``; forms
    are truncated at the same weight (|exponent| + number of dx), which is
    exactly the truncation that makes the formula a chain map.  ``window``
    restricts everything to total weight <= window (default: no restriction).
    """
    A = truncated_polynomial(n_vars, poly_degree_bound)
    mw = poly_degree_bound if window is None else window
    bar = bar_complex(A, chain_degree, budget=budget, max_weight=window)
    monos = monomials(n_vars, poly_degree_bound)
    forms, maps, bases = {}, {}, {}
    for m in range(chain_degree + 1):
        fb = _forms(n_vars, m, mw)
        fidx = {f: i for i, f in enumerate(fb)}
        basis = _TensorBasis(A.dim, m, list(range(A.dim)), A.weights, window).tuples
        cols = []
        scale = Fraction(1, math.factorial(m))
        for t in basis:
            col: dict[int, Fraction] = {}
            a0 = monos[t[0]]
            for c, e, wedge in _wedge_terms([monos[i] for i in t[1:]]) if m else [(1, (0,) * n_vars, ())]:
                alpha = tuple(x + y for x, y in zip(a0, e))
                r = fidx.get((alpha, wedge))
                if r is None:
                    continue  # weight above the truncation: zero in the target
                col[r] = col.get(r, 0) + scale * c
            cols.append({k: v for k, v in col.items() if v})
        forms[m], maps[m], bases[m] = fb, SparseMatrix.from_columns(len(fb), cols), basis
    target = ChainComplex({m: len(forms[m]) for m in range(chain_degree + 1)}, {})
    return HKRMap(n_vars, poly_degree_bound, A, bar, forms, maps, target, bases)


@dataclass
class HKRCheck:
    degree: int
    chain_map: bool
    hochschild_dim: int
    forms_dim: int
    image_rank_on_cycles: int

    @property
    def isomorphism(self) -> bool:
        return self.chain_map and self.hochschild_dim == self.forms_dim == self.image_rank_on_cycles


def hkr_check(n_vars: int, poly_degree_bound: int, degrees: Sequence[int] = (0, 1),
              window: int | None = None) -> list[HKRCheck]:
    """Check that HKR induces isomorphisms H_m(bar) -> forms_m on the weight window.

    Default window is weight <= bound - 1, keeping clear of truncation
    artifacts at the top degree.  rank(f restricted to cycles) is computed as
    rank([d_m; f_m]) - rank(d_m).
    """
    if window is None:
        window = poly_degree_bound - 1
    top = max(degrees)
    H = hkr_map(n_vars, poly_degree_bound, top, window=window)
    out = []
    for m in degrees:
        f = H.maps[m]
        chain_ok = True
        if m + 1 in H.bar.boundaries and m + 1 <= top + 1:
            # compose with d_{m+1}: need f_m on C_m, which we have
            chain_ok = f.matmul(H.bar.d(m + 1)).is_zero()
        dm = H.bar.d(m)
        stacked = dm.vstack(f)
        rank_on_cycles = stacked.rank() - dm.rank()
        hdim = homology_dims(H.bar, [m])[0]
        out.append(HKRCheck(m, chain_ok, hdim, f.nrows, rank_on_cycles))
    return out


# Rees algebra ---------------------------------------------------------------------

class ReesElement:
    """Element of the truncated Rees algebra: {(a, b, c): coeff} for x^a p^b hbar^c.

    ``overflow`` records that some term of a product fell outside the bounds
    and was dropped; such elements are excluded from assertions.
    """

    __slots__ = ("algebra", "terms", "overflow")

    def __init__(self, algebra: ReesAlgebra, terms: Mapping[tuple[int, int, int], object], overflow=False):
        self.algebra = algebra
        self.terms = {k: Fraction(v) for k, v in terms.items() if v}
        self.overflow = overflow

    def __add__(self, other: ReesElement) -> ReesElement:
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return ReesElement(self.algebra, out, self.overflow or other.overflow)

    def __neg__(self):
        return ReesElement(self.algebra, {k: -v for k, v in self.terms.items()}, self.overflow)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, ReesElement):
            return self.algebra.multiply(self, other)
        return ReesElement(self.algebra, {k: v * other for k, v in self.terms.items()}, self.overflow)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, ReesElement) and self.terms == other.terms

    __hash__ = None

    def specialize(self, hbar) -> dict[tuple[int, int], Fraction]:
        """Set hbar to a rational value: {(a, b): coeff} for x^a p^b."""
        hbar = Fraction(hbar)
        out: dict[tuple[int, int], Fraction] = {}
        for (a, b, c), v in self.terms.items():
            w = v * hbar ** c
            if w:
                out[a, b] = out.get((a, b), 0) + w
        return {k: v for k, v in out.items() if v}

    def __repr__(self):
        parts = [f"{v}*x^{a}p^{b}h^{c}" for (a, b, c), v in sorted(self.terms.items())]
        return "ReesElement(" + (" + ".join(parts) or "0") + (", overflow" if self.overflow else "") + ")"


def _normal_order_terms(b: int, a2: int):
    """p^b x^a2 = sum_k k! C(b,k) C(a2,k) hbar^k x^(a2-k) p^(b-k)."""
    for k in range(min(b, a2) + 1):
        yield k, math.factorial(k) * math.comb(b, k) * math.comb(a2, k)


class ReesAlgebra:
    """x^a p^b hbar^c with a <= A, b <= B, c <= C and p x = x p + hbar (p = hbar d/dx)."""

    def __init__(self, bounds: tuple[int, int, int]):
        if len(bounds) != 3 or any(int(b) < 1 for b in bounds):
            raise ValueError("bounds must be three integers >= 1")
        self.bounds = tuple(int(b) for b in bounds)

    def monomial(self, a: int, b: int, c: int = 0, coeff=1) -> ReesElement:
        A, B, C = self.bounds
        if a > A or b > B or c > C:
            return ReesElement(self, {}, overflow=True)
        return ReesElement(self, {(a, b, c): coeff})

    def x(self):
        return self.monomial(1, 0, 0)

    def p(self):
        return self.monomial(0, 1, 0)

    def hbar(self):
        return self.monomial(0, 0, 1)

    def one(self):
        return self.monomial(0, 0, 0)

    def in_bounds_monomials(self):
        A, B, C = self.bounds
        return [(a, b, c) for a in range(A + 1) for b in range(B + 1) for c in range(C + 1)]

    def multiply(self, u: ReesElement, v: ReesElement) -> ReesElement:
        A, B, C = self.bounds
        out: dict[tuple[int, int, int], Fraction] = {}
        overflow = u.overflow or v.overflow
        for (a1, b1, c1), s in u.terms.items():
            for (a2, b2, c2), t in v.terms.items():
                for k, coeff in _normal_order_terms(b1, a2):
                    key = (a1 + a2 - k, b1 + b2 - k, c1 + c2 + k)
                    if key[0] > A or key[1] > B or key[2] > C:
                        overflow = True
                        continue
                    out[key] = out.get(key, 0) + s * t * coeff
        return ReesElement(self, out, overflow)

    def commutator(self, u: ReesElement, v: ReesElement) -> ReesElement:
        return u * v - v * u


def rees_weyl(bounds: tuple[int, int, int]) -> ReesAlgebra:
    return ReesAlgebra(bounds)


def specialized_product(u: Mapping[tuple[int, int], Fraction], v: Mapping[tuple[int, int], Fraction],
                        hbar) -> dict[tuple[int, int], Fraction]:
    """Product of hbar-specialized elements computed directly in Q[x, p] with [p, x] = hbar.

    No truncation: this is the oracle for the ring-map property of specialization.
    """
    hbar = Fraction(hbar)
    out: dict[tuple[int, int], Fraction] = {}
    for (a1, b1), s in u.items():
        for (a2, b2), t in v.items():
            for k, coeff in _normal_order_terms(b1, a2):
                w = s * t * coeff * hbar ** k
                if w:
                    key = (a1 + a2 - k, b1 + b2 - k)
                    out[key] = out.get(key, 0) + w
    return {k: c for k, c in out.items() if c}


def weyl_derivative_action(element: Mapping[tuple[int, int], Fraction], poly: Mapping[int, Fraction]) -> dict[int, Fraction]:
    """Act with a specialized (hbar = 1) element on a polynomial in x, p acting as d/dx.

    Independent oracle for the Weyl relations: operators compared by their action.
    """
    out: dict[int, Fraction] = {}
    for (a, b), c in element.items():
        for e, v in poly.items():
            if e < b:
                continue
            coeff = c * v * math.perm(e, b)
            out[e - b + a] = out.get(e - b + a, 0) + coeff
    return {k: c for k, c in out.items() if c}
