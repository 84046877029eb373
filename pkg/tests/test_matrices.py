from __future__ import annotations

import random
from fractions import Fraction

import pytest

from densikit.matrices import (
    PolyMatrix,
    fraction_rank,
    jacobian,
    solve_exact,
    unitriangular_inverse,
)
from densikit.poly import Polynomial, parse_poly, var_context


def _random_matrix(rng, context, size, max_exp=2):
    rows = []
    for _ in range(size):
        row = []
        for _ in range(size):
            exp = tuple(rng.randint(0, max_exp) for _ in context.names)
            row.append(Polynomial.monomial(context, exp, rng.randint(-3, 3)))
        rows.append(row)
    return PolyMatrix(context, rows)


def test_identity_and_product():
    ctx = var_context("x y")
    eye = PolyMatrix.identity(ctx, 3)
    rng = random.Random(2)
    m = _random_matrix(rng, ctx, 3)
    assert eye * m == m
    assert m * eye == m


def test_product_associative_random():
    rng = random.Random(31)
    ctx = var_context("x y")
    for _ in range(10):
        a = _random_matrix(rng, ctx, 2)
        b = _random_matrix(rng, ctx, 2)
        c = _random_matrix(rng, ctx, 2)
        assert (a * b) * c == a * (b * c)


def test_transpose_reverses_products():
    rng = random.Random(37)
    ctx = var_context("x y")
    a = _random_matrix(rng, ctx, 3)
    b = _random_matrix(rng, ctx, 3)
    assert (a * b).transpose() == b.transpose() * a.transpose()


def test_row_and_column_products():
    ctx = var_context("x y")
    m = PolyMatrix(ctx, [
        [parse_poly("x", ctx), parse_poly("y", ctx)],
        [parse_poly("1", ctx), parse_poly("x*y", ctx)],
    ])
    row = [parse_poly("1", ctx), parse_poly("x", ctx)]
    out = m.row_vector_product(row)
    assert out[0] == parse_poly("x + x", ctx)
    assert out[1] == parse_poly("y + x^2*y", ctx)
    col = [parse_poly("y", ctx), parse_poly("1", ctx)]
    out = m.column_product(col)
    assert out[0] == parse_poly("x*y + y", ctx)
    assert out[1] == parse_poly("y + x*y", ctx)


def test_determinant_multiplicative():
    rng = random.Random(43)
    ctx = var_context("x y")
    for _ in range(8):
        a = _random_matrix(rng, ctx, 3, max_exp=1)
        b = _random_matrix(rng, ctx, 3, max_exp=1)
        assert (a * b).determinant() == a.determinant() * b.determinant()


def test_determinant_known():
    ctx = var_context("x y")
    m = PolyMatrix(ctx, [
        [parse_poly("x", ctx), parse_poly("y", ctx)],
        [parse_poly("y", ctx), parse_poly("x", ctx)],
    ])
    assert m.determinant() == parse_poly("x^2 - y^2", ctx)


def test_minors_row_subsets():
    ctx = var_context("x y")
    # 3 x 2 matrix: three 2 x 2 minors by dropping one row each,
    # ordered by the row subset.
    m = PolyMatrix(ctx, [
        [parse_poly("x", ctx), parse_poly("0", ctx)],
        [parse_poly("0", ctx), parse_poly("y", ctx)],
        [parse_poly("1", ctx), parse_poly("1", ctx)],
    ])
    mins = m.minors(2)
    assert len(mins) == 3
    assert mins[0] == parse_poly("x*y", ctx)
    assert mins[1] == parse_poly("x", ctx)
    assert mins[2] == parse_poly("-y", ctx)


def test_unitriangular_detection_and_inverse():
    ctx = var_context("x y")
    one = Polynomial.constant(ctx, 1)
    zero = Polynomial.zero(ctx)
    lower = PolyMatrix(ctx, [
        [one, zero, zero],
        [parse_poly("x", ctx), one, zero],
        [parse_poly("x*y", ctx), parse_poly("y", ctx), one],
    ])
    assert lower.is_unitriangular() == "lower"
    inv = unitriangular_inverse(lower)
    assert lower * inv == PolyMatrix.identity(ctx, 3)
    assert inv * lower == PolyMatrix.identity(ctx, 3)

    upper = lower.transpose()
    assert upper.is_unitriangular() == "upper"
    invu = unitriangular_inverse(upper)
    assert upper * invu == PolyMatrix.identity(ctx, 3)

    not_uni = PolyMatrix(ctx, [[parse_poly("x", ctx)]])
    assert not_uni.is_unitriangular() is None
    with pytest.raises(ValueError):
        unitriangular_inverse(not_uni)


def test_unitriangular_inverse_random():
    rng = random.Random(47)
    ctx = var_context("x y z")
    for _ in range(6):
        size = rng.randint(2, 4)
        rows = []
        for i in range(size):
            row = []
            for j in range(size):
                if i == j:
                    row.append(Polynomial.constant(ctx, 1))
                elif i > j:
                    exp = tuple(rng.randint(0, 2) for _ in ctx.names)
                    row.append(Polynomial.monomial(ctx, exp, rng.randint(-2, 2)))
                else:
                    row.append(Polynomial.zero(ctx))
            rows.append(row)
        m = PolyMatrix(ctx, rows)
        assert m * unitriangular_inverse(m) == PolyMatrix.identity(ctx, size)


def test_jacobian_entries():
    ctx = var_context("x y z")
    polys = [parse_poly("x*y - z^2", ctx), parse_poly("x + y^3", ctx)]
    jac = jacobian(polys, ctx)
    assert jac.nrows == 2 and jac.ncols == 3
    assert jac[0, 0] == parse_poly("y", ctx)
    assert jac[0, 2] == parse_poly("-2*z", ctx)
    assert jac[1, 1] == parse_poly("3*y^2", ctx)


def test_evaluate_matrix():
    ctx = var_context("x y")
    m = PolyMatrix(ctx, [[parse_poly("x + y", ctx), parse_poly("x*y", ctx)]])
    vals = m.evaluate((Fraction(2), Fraction(3)))
    assert vals == [[Fraction(5), Fraction(6)]]


def test_fraction_rank():
    rows = [
        [Fraction(1), Fraction(2), Fraction(3)],
        [Fraction(2), Fraction(4), Fraction(6)],
        [Fraction(0), Fraction(1), Fraction(1)],
    ]
    assert fraction_rank(rows) == 2
    assert fraction_rank([[Fraction(0), Fraction(0)]]) == 0
    assert fraction_rank([]) == 0


def test_solve_exact():
    rows = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(-1)]]
    sol = solve_exact(rows, [Fraction(5), Fraction(1)])
    assert sol == [Fraction(2), Fraction(1)]
    # singular system: no unique solution
    rows = [[Fraction(1), Fraction(1)], [Fraction(2), Fraction(2)]]
    assert solve_exact(rows, [Fraction(1), Fraction(2)]) is None


def test_shape_validation():
    ctx = var_context("x")
    with pytest.raises(ValueError):
        PolyMatrix(ctx, [[Polynomial.constant(ctx, 1)], []])
    a = PolyMatrix.identity(ctx, 2)
    b = PolyMatrix.identity(ctx, 3)
    with pytest.raises(ValueError):
        a * b
