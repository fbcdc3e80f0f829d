import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from wittenfact.homalg import (
    AlgebraError, ChainComplex, ComplexError, FinDimAlgebra, SizeBudgetExceeded, SparseMatrix,
    bar_complex, dual_numbers, ground_field, group_algebra_z2, hh_dims, hkr_check, hkr_map,
    homology_dims, matrix_algebra, product_of_fields, rees_weyl, specialized_product,
    truncated_polynomial, weyl_derivative_action,
)


def dense_rank(m):
    m = [list(map(Fraction, r)) for r in m]
    rank = 0
    ncols = len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][col]:
                f = m[i][col] / m[rank][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def periodic_hh_oracle(n, max_degree):
    """HH of Q[x]/(x^n) from the 2-periodic resolution A <-0- A <-(n x^{n-1})- A <-0- ..."""
    # multiplication by n x^{n-1} on the basis 1, x, ..., x^{n-1}
    mult = [[Fraction(0)] * n for _ in range(n)]
    mult[n - 1][0] = Fraction(n)
    r = dense_rank(mult)
    # odd degrees: cokernel of the map; even degrees > 0: its kernel; both have dim n - r
    return [n] + [n - r] * max_degree


def change_basis(A, P):
    """The algebra A written in the basis f_i = sum_j P[i][j] e_j."""
    n = A.dim
    inv = invert(P)

    def old(v):
        out = {}
        for i, c in v.items():
            for j in range(n):
                if P[i][j]:
                    out[j] = out.get(j, 0) + c * P[i][j]
        return out

    def new(v):
        out = {}
        for j, c in v.items():
            for i in range(n):
                if inv[j][i]:
                    out[i] = out.get(i, 0) + c * inv[j][i]
        return {k: c for k, c in out.items() if c}

    mult = {(a, b): new(A.multiply(old({a: 1}), old({b: 1}))) for a in range(n) for b in range(n)}
    return FinDimAlgebra([f"f{i}" for i in range(n)], new(A.unit), mult, name="changed")


def invert(P):
    n = len(P)
    m = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(P)]
    for col in range(n):
        piv = next(i for i in range(col, n) if m[i][col])
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for i in range(n):
            if i != col and m[i][col]:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[col])]
    return [row[n:] for row in m]


SUITE = [
    (ground_field, [1, 0, 0]),
    (lambda: product_of_fields(2), [2, 0, 0]),
    (dual_numbers, [2, 1, 1]),
    (group_algebra_z2, [2, 0, 0]),
    (lambda: matrix_algebra(2), [1, 0, 0]),
]


@pytest.mark.parametrize("make,expected", SUITE)
def test_hh_suite(make, expected):
    A = make()
    assert hh_dims(A, 2) == expected
    assert hh_dims(A, 2, normalized=True) == expected
    assert expected[0] == A.commutator_quotient_dim()


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_hh_truncated_polynomial_matches_periodic_resolution(n):
    assert hh_dims(truncated_polynomial(1, n - 1), 2) == periodic_hh_oracle(n, 2)


def test_hh_of_dual_numbers_in_higher_degrees():
    assert hh_dims(dual_numbers(), 4) == periodic_hh_oracle(2, 4) == [2, 1, 1, 1, 1]


def test_morita_invariance_for_m3():
    assert hh_dims(matrix_algebra(3), 1) == [1, 0]


invertible = st.lists(st.integers(-2, 2), min_size=4, max_size=4).filter(
    lambda v: v[0] * v[3] - v[1] * v[2] != 0)


@given(invertible, st.sampled_from([0, 1, 2]))
def test_hh_invariant_under_change_of_basis(v, which):
    A = [product_of_fields(2), dual_numbers(), group_algebra_z2()][which]
    B = change_basis(A, [v[:2], v[2:]])
    assert hh_dims(B, 2) == hh_dims(A, 2)
    assert B.commutator_quotient_dim() == A.commutator_quotient_dim()


def test_associativity_failure_reports_triple():
    mult = {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}, (0, 2): {2: 1}, (2, 0): {2: 1},
            (1, 1): {2: 1}, (1, 2): {1: 1}}
    with pytest.raises(AlgebraError) as info:
        FinDimAlgebra(["1", "a", "b"], {0: 1}, mult)
    assert info.value.witness == ("a", "a", "a")


def test_algebra_json_roundtrip():
    A = matrix_algebra(2)
    B = FinDimAlgebra.from_json(A.to_json())
    assert B.mult == A.mult and B.names == A.names


def test_bar_complex_is_a_complex_and_respects_budget():
    C = bar_complex(truncated_polynomial(1, 3), 3)
    assert C.exact_through == 3
    C.check_square_zero()
    with pytest.raises(ComplexError):
        homology_dims(C, [4])
    with pytest.raises(SizeBudgetExceeded):
        bar_complex(matrix_algebra(2), 4, budget=1000)


def test_bar_complex_weight_window():
    A = truncated_polynomial(1, 4)
    full = bar_complex(A, 2)
    low = bar_complex(A, 2, max_weight=2)
    assert low.total_dimension() < full.total_dimension()


def test_chain_complex_rejects_nonzero_square():
    d1 = SparseMatrix(1, 1, {0: {0: Fraction(1)}})
    d2 = SparseMatrix(1, 1, {0: {0: Fraction(1)}})
    with pytest.raises(ComplexError):
        ChainComplex({0: 1, 1: 1, 2: 1}, {1: d1, 2: d2})


matrices = st.integers(1, 5).flatmap(lambda r: st.integers(1, 5).flatmap(lambda c: st.lists(
    st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=3), min_size=c, max_size=c),
    min_size=r, max_size=r)))


@given(matrices)
def test_sparse_matrix_text_roundtrip_and_rank(m):
    cols = [{i: m[i][j] for i in range(len(m)) if m[i][j]} for j in range(len(m[0]))]
    S = SparseMatrix.from_columns(len(m), cols)
    assert SparseMatrix.from_text(S.to_text()).rows == S.rows
    assert S.rank() == dense_rank(m)


def test_complex_text_roundtrip():
    C = bar_complex(dual_numbers(), 2)
    D = ChainComplex.from_text(C.to_text())
    assert homology_dims(D) == homology_dims(C)


@pytest.mark.parametrize("n_vars,bound", [(1, 5), (2, 3)])
def test_hkr_is_an_isomorphism_on_the_window(n_vars, bound):
    checks = hkr_check(n_vars, bound, degrees=(0, 1))
    assert all(c.chain_map for c in checks)
    assert all(c.isomorphism for c in checks)


def test_hkr_formula():
    H = hkr_map(1, 4, 2)
    assert H.apply(1, ["x", "x^2"]) == {"x^2 dx": 2}
    assert H.apply(0, ["x^3"]) == {"x^3": 1}
    # degree-2 chains with two copies of dx wedge to zero in one variable
    assert H.apply(2, ["1", "x", "x"]) == {}


def test_rees_relations():
    R = rees_weyl((4, 4, 4))
    x, p, h = R.x(), R.p(), R.hbar()
    assert R.commutator(p, x) == h
    assert R.commutator(p * p, x) == h * p * 2
    assert R.commutator(p, x * x) == h * x * 2


def test_rees_overflow_is_flagged():
    R = rees_weyl((1, 1, 1))
    assert (R.p() * R.x() * R.x()).overflow


rees_monos = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 2))


@given(rees_monos, rees_monos, st.sampled_from([0, 1, Fraction(1, 2)]))
def test_specialization_is_a_ring_map(a, b, hbar):
    R = rees_weyl((6, 6, 6))
    u, v = R.monomial(*a), R.monomial(*b)
    assert (u * v).specialize(hbar) == specialized_product(u.specialize(hbar), v.specialize(hbar), hbar)


@given(rees_monos, rees_monos)
def test_classical_limit_is_commutative(a, b):
    R = rees_weyl((6, 6, 6))
    u, v = R.monomial(*a), R.monomial(*b)
    assert R.commutator(u, v).specialize(0) == {}


def test_weyl_relation_acting_on_polynomials():
    R = rees_weyl((3, 3, 3))
    comm = R.commutator(R.p(), R.x()).specialize(1)
    poly = {0: Fraction(3), 2: Fraction(-1), 5: Fraction(2)}
    assert weyl_derivative_action(comm, poly) == poly
