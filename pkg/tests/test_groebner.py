from __future__ import annotations

import random
from fractions import Fraction

import pytest

from densikit.errors import BudgetError
from densikit.groebner import (
    IdealPresentation,
    buchberger,
    poly_divmod,
    s_polynomial,
)
from densikit.poly import Polynomial, parse_poly, var_context


def _random_poly(rng, context, max_terms=5, max_exp=3):
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        exp = tuple(rng.randint(0, max_exp) for _ in context.names)
        terms[exp] = Fraction(rng.randint(-6, 6))
    return Polynomial(context, terms)


def test_poly_divmod_reconstructs():
    rng = random.Random(5)
    ctx = var_context("x y")
    for _ in range(40):
        f = _random_poly(rng, ctx)
        divisors = [_random_poly(rng, ctx, max_terms=3) for _ in range(2)]
        divisors = [d for d in divisors if not d.is_zero()]
        if not divisors:
            continue
        quots, rem = poly_divmod(f, divisors)
        recon = rem
        for q, d in zip(quots, divisors):
            recon = recon + q * d
        assert recon == f
        # no remainder term is divisible by any divisor lead
        for exp in rem.terms:
            for d in divisors:
                lead = d.leading_monomial()
                assert not all(e >= l for e, l in zip(exp, lead))


def test_s_polynomial_cancels_leads():
    ctx = var_context("x y")
    f = parse_poly("x^2 + y", ctx)
    g = parse_poly("x*y - 1", ctx)
    s = s_polynomial(f, g)
    # leading monomials x^2 and x*y lift to x^2*y which cancels
    assert s == parse_poly("y^2 + x", ctx)


def test_buchberger_reduces_spolys_to_zero():
    rng = random.Random(13)
    ctx = var_context("x y z")
    for trial in range(10):
        gens = [_random_poly(rng, ctx, max_terms=3, max_exp=2) for _ in range(2)]
        gens = [g for g in gens if not g.is_zero()]
        if not gens:
            continue
        basis = buchberger(gens)
        ideal = IdealPresentation(ctx, gens)
        for i in range(len(basis)):
            for j in range(i + 1, len(basis)):
                s = s_polynomial(basis[i], basis[j])
                assert ideal.normal_form(s).is_zero()


def test_normal_form_kills_generators():
    ctx = var_context("x y z")
    gens = [parse_poly("x*y - z^2", ctx), parse_poly("x + y + z", ctx)]
    ideal = IdealPresentation(ctx, gens)
    for g in gens:
        assert ideal.normal_form(g).is_zero()
    combo = gens[0] * parse_poly("z - 3", ctx) + gens[1] * gens[1]
    assert ideal.contains(combo)
    assert not ideal.contains(parse_poly("x", ctx))


def test_normal_form_is_linear_and_idempotent():
    rng = random.Random(29)
    ctx = var_context("x y")
    ideal = IdealPresentation(ctx, [parse_poly("x^2 - y", ctx)])
    for _ in range(30):
        a = _random_poly(rng, ctx)
        b = _random_poly(rng, ctx)
        nf = ideal.normal_form
        assert nf(a + b) == nf(a) + nf(b)
        assert nf(nf(a)) == nf(a)
        assert nf(a * b) == nf(nf(a) * nf(b))


def test_contains_one_detects_unit_ideal():
    ctx = var_context("x y")
    unit = IdealPresentation(ctx, [parse_poly("x", ctx), parse_poly("x - 1", ctx)])
    assert unit.contains_one()
    assert not unit.is_proper()
    gb = unit.groebner()
    assert len(gb) == 1 and gb[0].is_constant()

    proper = IdealPresentation(ctx, [parse_poly("x*y - 1", ctx)])
    assert proper.is_proper()
    assert not proper.contains_one()


def test_known_groebner_basis():
    # twisted cubic style relations; the reduced basis is order dependent
    # but membership is not.
    ctx = var_context("x y z", order="lex")
    gens = [parse_poly("y - x^2", ctx), parse_poly("z - x^3", ctx)]
    ideal = IdealPresentation(ctx, gens)
    assert ideal.contains(parse_poly("x*y - z", ctx))
    assert ideal.contains(parse_poly("y^3 - z^2", ctx))
    assert not ideal.contains(parse_poly("y^2 - z", ctx))


def test_membership_closed_under_ring_ops():
    rng = random.Random(41)
    ctx = var_context("x y z")
    gens = [parse_poly("x^2 - y*z", ctx), parse_poly("y^2 - x", ctx)]
    ideal = IdealPresentation(ctx, gens)
    for _ in range(20):
        g = gens[rng.randrange(len(gens))]
        mult = _random_poly(rng, ctx, max_terms=3, max_exp=2)
        assert ideal.contains(g * mult)
        other = gens[rng.randrange(len(gens))]
        assert ideal.contains(g * mult + other)


def test_budget_error_raised_and_clean():
    ctx = var_context("x y z")
    gens = [
        parse_poly("x^5*y^4 - z^3 + x*y*z", ctx),
        parse_poly("y^5*z^4 - x^3 + 2", ctx),
        parse_poly("z^5*x^4 - y^3 - 7*x", ctx),
    ]
    with pytest.raises(BudgetError):
        buchberger(gens, budget=50)
    # a roomier budget finishes the same computation
    ideal = IdealPresentation(ctx, [parse_poly("x^2 - y", ctx)])
    assert ideal.normal_form(parse_poly("x^4", ctx)) == parse_poly("y^2", ctx)


def test_groebner_cached_per_presentation():
    ctx = var_context("x y")
    ideal = IdealPresentation(ctx, [parse_poly("x^2 - y", ctx)])
    first = ideal.groebner()
    second = ideal.groebner()
    assert first is second


def test_empty_ideal():
    ctx = var_context("x y")
    ideal = IdealPresentation(ctx, [])
    p = parse_poly("x^2 + y", ctx)
    assert ideal.normal_form(p) == p
    assert not ideal.contains_one()
    assert ideal.is_proper()
