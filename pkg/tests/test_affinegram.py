"""Decision-coefficient polynomials, DSOS variables, DD rows, decompositions."""

import random

import numpy as np
import pytest

from barrierlp.affinegram import (
    AffineExpr,
    AffinePolynomial,
    DecisionAllocator,
    coefficient_system,
    dd_linear_constraints,
    dsos_decomposition,
    expand_decomposition,
    fresh_dsos_poly,
    fresh_free_poly,
    gram_expansion,
    is_diagonally_dominant,
    mul_fixed,
)
from barrierlp.polyring import Polynomial, monomial_basis


def random_dd_matrix(rng, k, scale=2.0):
    M = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            M[i, j] = M[j, i] = rng.uniform(-scale, scale)
    for i in range(k):
        off = sum(abs(M[i, j]) for j in range(k) if j != i)
        M[i, i] = off + rng.uniform(0.0, scale)
    return M


def test_fresh_free_poly_univariate_quadratic():
    alloc = DecisionAllocator()
    ap = fresh_free_poly(alloc, 1, 2)
    assert alloc.count == 3
    assert set(ap.terms) == {(0,), (1,), (2,)}
    # One fresh variable per basis monomial, in basis order.
    assert ap.terms[(0,)].linear == {0: 1.0}
    assert ap.terms[(1,)].linear == {1: 1.0}
    assert ap.terms[(2,)].linear == {2: 1.0}


def test_fresh_free_poly_counts():
    alloc = DecisionAllocator()
    fresh_free_poly(alloc, 2, 0)
    assert alloc.count == 1
    fresh_free_poly(alloc, 2, 1)
    assert alloc.count == 4


def test_fresh_dsos_expansion_univariate():
    alloc = DecisionAllocator()
    v = fresh_dsos_poly(alloc, 1, 1)
    # Basis [1, x]: expansion Q11 + 2 Q12 x + Q22 x^2 with Q allocated first.
    assert v.basis == [(0,), (1,)]
    e = v.expansion
    assert e.terms[(0,)].linear == {v.Q.var(0, 0): 1.0}
    assert e.terms[(1,)].linear == {v.Q.var(0, 1): 2.0}
    assert e.terms[(2,)].linear == {v.Q.var(1, 1): 1.0}


def test_fresh_dsos_degree_zero():
    alloc = DecisionAllocator()
    v = fresh_dsos_poly(alloc, 2, 0)
    rows = dd_linear_constraints(v)
    # Single Gram entry, single DD row -Q11 <= 0.
    assert v.dim == 1
    assert len(rows) == 1
    assert rows[0].linear == {v.Q.var(0, 0): -1.0}


def test_fresh_dsos_variable_counts():
    alloc = DecisionAllocator()
    v = fresh_dsos_poly(alloc, 2, 1)
    assert v.dim == 3
    assert v.Q.nvariables() == 6
    assert v.tau.nvariables() == 6
    assert alloc.count == 12


def test_mul_fixed_reproduces_multiplier_row():
    # (c1 + c2 x + c3 x^2)(x^2 - 4): exact symbolic coefficients.
    alloc = DecisionAllocator()
    ap = fresh_free_poly(alloc, 1, 2)
    x = Polynomial.variable(0, 1)
    prod = mul_fixed(ap, x**2 - 4)
    assert prod.terms[(0,)].linear == {0: -4.0}
    assert prod.terms[(1,)].linear == {1: -4.0}
    assert prod.terms[(2,)].linear == {0: 1.0, 2: -4.0}
    assert prod.terms[(3,)].linear == {1: 1.0}
    assert prod.terms[(4,)].linear == {2: 1.0}
    assert all(expr.constant == 0.0 for expr in prod.terms.values())


def test_mul_fixed_identity_and_zero():
    alloc = DecisionAllocator()
    ap = fresh_free_poly(alloc, 2, 1)
    one = Polynomial.one(2)
    same = mul_fixed(ap, one)
    assert same.terms.keys() == ap.terms.keys()
    for key in ap.terms:
        assert same.terms[key].linear == ap.terms[key].linear
    assert mul_fixed(ap, Polynomial.zero(2)).terms == {}


def test_coefficient_system_examples():
    alloc = DecisionAllocator()
    ap = fresh_free_poly(alloc, 1, 2)
    x = Polynomial.variable(0, 1)
    prod = mul_fixed(ap, x**2 - 4)
    system = coefficient_system(prod)
    assert len(system) == 5
    # Third entry is the x^2 coefficient c1 - 4 c3.
    assert system[2].linear == {0: 1.0, 2: -4.0}

    assert coefficient_system(AffinePolynomial.zero(3)) == []

    alloc = DecisionAllocator()
    s0 = fresh_dsos_poly(alloc, 1, 0)
    e = AffinePolynomial.from_polynomial(Polynomial.one(1)) + s0.expansion
    system = coefficient_system(e)
    assert len(system) == 1
    assert system[0].constant == 1.0
    assert system[0].linear == {s0.Q.var(0, 0): 1.0}


def test_dd_rows_k2_exact_set():
    alloc = DecisionAllocator()
    v = fresh_dsos_poly(alloc, 1, 1)
    q11, q12, q22 = v.Q.var(0, 0), v.Q.var(0, 1), v.Q.var(1, 1)
    t12 = v.tau.var(0, 1)
    rows = dd_linear_constraints(v)
    assert len(rows) == 4
    got = {tuple(sorted(r.linear.items())) for r in rows}
    expected = {
        tuple(sorted({q11: -1.0, t12: 1.0}.items())),
        tuple(sorted({q22: -1.0, t12: 1.0}.items())),
        tuple(sorted({q12: 1.0, t12: -1.0}.items())),
        tuple(sorted({q12: -1.0, t12: -1.0}.items())),
    }
    assert got == expected
    assert all(r.constant == 0.0 for r in rows)


def test_dd_row_count_formula():
    for halfdeg, nvars in [(1, 2), (2, 1), (1, 3)]:
        alloc = DecisionAllocator()
        v = fresh_dsos_poly(alloc, nvars, halfdeg)
        k = v.dim
        assert len(dd_linear_constraints(v)) == k + k * (k - 1)


def test_dd_feasible_assignment_is_dd():
    # Assign Q from a random dd matrix and tau_ij = |Q_ij|: every row holds.
    rng = random.Random(3)
    for k, nvars, halfdeg in [(3, 2, 1), (6, 2, 2)]:
        alloc = DecisionAllocator()
        v = fresh_dsos_poly(alloc, nvars, halfdeg)
        assert v.dim == k
        M = random_dd_matrix(rng, k)
        z = np.zeros(alloc.count)
        for (i, j) in v.Q.pairs:
            z[v.Q.var(i, j)] = M[i, j]
            z[v.tau.var(i, j)] = abs(M[i, j]) if i != j else 0.0
        for row in dd_linear_constraints(v):
            assert row.value(z) <= 1e-12
        assert is_diagonally_dominant(v.Q.materialize(z), tol=1e-9)


def test_is_diagonally_dominant_examples():
    assert is_diagonally_dominant(np.eye(3))
    assert not is_diagonally_dominant(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert is_diagonally_dominant(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_is_diagonally_dominant_rejects_nonsquare():
    with pytest.raises(ValueError):
        is_diagonally_dominant(np.ones((2, 3)))


def test_decomposition_examples():
    basis = monomial_basis(1, 1)
    parts = dsos_decomposition(np.diag([2.0, 3.0]), basis)
    x = Polynomial.variable(0, 1)
    assert expand_decomposition(parts, 1) == 2 + 3 * x**2

    parts = dsos_decomposition(np.array([[1.0, 1.0], [1.0, 1.0]]), basis)
    assert len(parts) == 1
    w, p = parts[0]
    assert w == 1.0 and p == 1 + x

    parts = dsos_decomposition(np.array([[1.0, -1.0], [-1.0, 1.0]]), basis)
    w, p = parts[0]
    assert w == 1.0 and p == 1 - x


def test_decomposition_requires_dd():
    with pytest.raises(ValueError):
        dsos_decomposition(np.array([[1.0, 2.0], [2.0, 1.0]]), monomial_basis(1, 1))


def test_decomposition_round_trip_random():
    rng = random.Random(20260816)
    for _ in range(100):
        nvars = rng.randrange(1, 3)
        halfdeg = rng.randrange(0, 3)
        basis = monomial_basis(nvars, halfdeg)
        M = random_dd_matrix(rng, len(basis))
        parts = dsos_decomposition(M, basis)
        assert all(w >= 0 for w, _ in parts)
        direct = gram_expansion(M, basis)
        assert expand_decomposition(parts, nvars).almost_equal(direct, tol=1e-9)


def test_linearity_is_preserved_everywhere():
    # No operation multiplies two decision-dependent expressions: instantiate
    # then evaluate must agree with evaluating coefficient expressions.
    rng = random.Random(5)
    alloc = DecisionAllocator()
    ap = fresh_free_poly(alloc, 2, 2)
    v = fresh_dsos_poly(alloc, 2, 1)
    x1 = Polynomial.variable(0, 2)
    x2 = Polynomial.variable(1, 2)
    fixed = 2 * x1**2 - x2 + 0.5
    e = mul_fixed(ap + v.expansion, fixed) - fixed
    z = [rng.uniform(-2, 2) for _ in range(alloc.count)]
    inst = e.instantiate(z)
    for mono, expr in e.terms.items():
        assert abs(inst.terms.get(mono, 0.0) - expr.value(z)) <= 1e-12


def test_coefficient_system_zero_implies_zero_polynomial():
    rng = random.Random(11)
    alloc = DecisionAllocator()
    ap = fresh_free_poly(alloc, 1, 1)
    x = Polynomial.variable(0, 1)
    # e = (c0 + c1 x)(x - 1) + (x^2 - x) c with c fixed to 1: solving the
    # coefficient system forces e to vanish identically.
    e = mul_fixed(ap, x - 1) + (x**2 - x)
    system = coefficient_system(e)
    # c0 = 0, c1 = -1 solves the system.
    z = [0.0, -1.0]
    assert all(abs(expr.value(z)) <= 1e-12 for expr in system)
    inst = e.instantiate(z)
    for _ in range(100):
        pt = [rng.uniform(-3, 3)]
        assert abs(inst(pt)) <= 1e-8


def test_affine_expr_prunes_zero_entries():
    e = AffineExpr(1.0, {0: 1.0}) - AffineExpr(0.0, {0: 1.0})
    assert e.linear == {}
    assert e.constant == 1.0
