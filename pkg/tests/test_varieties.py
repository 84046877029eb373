from __future__ import annotations

import random
from fractions import Fraction

import pytest

from densikit.errors import CertificateError
from densikit.poly import parse_poly, var_context
from densikit.varieties import VarietyPresentation, affine_space, sample_point


def _danielewski_variety(p_text="z^2 - 1"):
    ctx = var_context("x y z")
    rel = parse_poly(f"x*y - ({p_text})", ctx)
    return VarietyPresentation(ctx, [rel]), ctx


def test_dimension_bookkeeping():
    variety, ctx = _danielewski_variety()
    assert variety.dim == 2
    assert affine_space(ctx).dim == 3
    with pytest.raises(ValueError):
        VarietyPresentation(
            var_context("x"),
            [parse_poly("x", var_context("x")), parse_poly("x - 1", var_context("x"))],
        )


def test_proper_vs_unit_relations():
    ctx = var_context("x y")
    good = VarietyPresentation(ctx, [parse_poly("x*y - 1", ctx)])
    assert good.is_proper()
    empty = VarietyPresentation(ctx, [parse_poly("x", ctx), parse_poly("x - 1", ctx)])
    assert not empty.is_proper()


def test_normal_form_mod_relation():
    variety, ctx = _danielewski_variety()
    # x*y reduces to z^2 - 1 on the surface
    nf = variety.normal_form(parse_poly("x*y", ctx))
    assert nf == variety.normal_form(parse_poly("z^2 - 1", ctx))
    assert variety.normal_form(parse_poly("x*y - z^2 + 1", ctx)).is_zero()


def test_contains_point():
    variety, _ = _danielewski_variety()
    assert variety.contains_point((Fraction(1), Fraction(3), Fraction(2)))
    assert not variety.contains_point((Fraction(1), Fraction(1), Fraction(5)))


def test_verify_dimension_at_smooth_point():
    variety, _ = _danielewski_variety()
    assert variety.verify_dimension((Fraction(1), Fraction(3), Fraction(2)))
    with pytest.raises(ValueError):
        variety.verify_dimension((Fraction(0), Fraction(0), Fraction(0)))


def test_verify_dimension_flags_singular_point():
    # cone x*y - z^2: the origin is singular, the Jacobian vanishes there
    ctx = var_context("x y z")
    cone = VarietyPresentation(ctx, [parse_poly("x*y - z^2", ctx)])
    assert not cone.verify_dimension((Fraction(0), Fraction(0), Fraction(0)))
    assert cone.verify_dimension((Fraction(1), Fraction(4), Fraction(2)))


def test_sample_point_lands_on_variety():
    variety, ctx = _danielewski_variety("z^3 - z")
    for seed in range(20):
        pt = sample_point(variety, seed=seed)
        assert variety.contains_point(pt)


def test_sample_point_respects_avoid():
    variety, ctx = _danielewski_variety()
    avoid = [parse_poly("x", ctx), parse_poly("z - 1", ctx), parse_poly("z + 1", ctx)]
    rng = random.Random(0)
    for seed in (rng.randint(0, 10 ** 6) for _ in range(10)):
        pt = sample_point(variety, seed=seed, avoid=avoid)
        assert variety.contains_point(pt)
        assert all(a.evaluate(pt) != 0 for a in avoid)


def test_sample_point_deterministic():
    variety, _ = _danielewski_variety()
    assert sample_point(variety, seed=7) == sample_point(variety, seed=7)


def test_sample_point_affine_space():
    ctx = var_context("u v")
    space = affine_space(ctx)
    pt = sample_point(space, seed=3, avoid=[parse_poly("u", ctx)])
    assert pt[0] != 0


def test_sample_point_context_mismatch():
    variety, _ = _danielewski_variety()
    other = var_context("a b")
    with pytest.raises(ValueError):
        sample_point(variety, avoid=[parse_poly("a", other)])


def test_sample_point_impossible_avoid():
    ctx = var_context("x")
    space = affine_space(ctx)
    # avoiding both x - c for every sampled value is impossible when the
    # avoid locus covers the whole sampling range
    avoid = [parse_poly(f"x - {c}", ctx) for c in range(-5, 6)]
    with pytest.raises(CertificateError):
        sample_point(space, seed=1, avoid=avoid, max_attempts=8)
