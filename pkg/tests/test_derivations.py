from __future__ import annotations

import random
from fractions import Fraction

import pytest

from densikit.derivations import (
    KernelMultipleCertificate,
    LinearCoefficientsCertificate,
    LndCertificate,
    TriangularLinearCertificate,
    UnknownCompleteness,
    VectorField,
    algebraic_flow,
    completeness_certificate,
    flow_field_consistency_check,
    flow_group_law_check,
    flow_identity_check,
    flow_preserves_variety,
    fresh_time_symbols,
    kernel_degree,
    lie_bracket,
    lnd_certificate,
    numeric_flow_check,
    shear_multiple,
)
from densikit.errors import CertificateError
from densikit.poly import Polynomial, parse_poly, var_context
from densikit.varieties import VarietyPresentation, affine_space, sample_point


def _danielewski(p_text="z^2 - 1"):
    ctx = var_context("x y z")
    p = parse_poly(p_text, ctx)
    dp = p.partial("z")
    variety = VarietyPresentation(ctx, [parse_poly("x*y", ctx) - p])
    theta1 = VectorField.parse(variety, {"x": "x", "y": "-y"})
    theta2 = VectorField(variety, {
        "x": dp, "z": Polynomial.variable(ctx, "y")})
    theta3 = VectorField(variety, {
        "y": dp, "z": Polynomial.variable(ctx, "x")})
    return variety, theta1, theta2, theta3


def _random_field(rng, variety, max_terms=3, max_exp=2):
    ctx = variety.context
    coeffs = {}
    for name in ctx.names:
        terms = {}
        for _ in range(rng.randint(0, max_terms)):
            exp = tuple(rng.randint(0, max_exp) for _ in ctx.names)
            terms[exp] = Fraction(rng.randint(-4, 4))
        coeffs[name] = Polynomial(ctx, terms)
    return VectorField(variety, coeffs)


def test_apply_is_a_derivation():
    rng = random.Random(9)
    space = affine_space(var_context("x y z"))
    ctx = space.context
    for _ in range(25):
        v = _random_field(rng, space)
        a = Polynomial(ctx, {
            tuple(rng.randint(0, 2) for _ in ctx.names): Fraction(rng.randint(-3, 3))
            for _ in range(3)})
        b = Polynomial(ctx, {
            tuple(rng.randint(0, 2) for _ in ctx.names): Fraction(rng.randint(-3, 3))
            for _ in range(3)})
        assert v.apply(a * b) == v.apply(a) * b + a * v.apply(b)
        assert v.apply(a + b) == v.apply(a) + v.apply(b)
    assert v.apply(Polynomial.constant(ctx, 5)).is_zero()


def test_field_arithmetic_and_support():
    variety, theta1, theta2, _ = _danielewski()
    ctx = variety.context
    s = theta1 + theta2
    assert s.coefficient("x") == parse_poly("x + 2*z", ctx)
    assert (-theta1).coefficient("y") == parse_poly("y", ctx)
    assert theta2.support() == ("x", "z")
    assert (theta1 - theta1).is_zero()
    scaled = theta1.scale(parse_poly("z", ctx))
    assert scaled.coefficient("x") == parse_poly("x*z", ctx)


def test_coordinate_field():
    space = affine_space(var_context("x y"))
    dx = VectorField.coordinate(space, "x")
    assert dx.apply(parse_poly("x^2*y", space.context)) == parse_poly(
        "2*x*y", space.context)


def test_tangency():
    variety, theta1, theta2, theta3 = _danielewski()
    assert theta1.is_tangent()
    assert theta2.is_tangent()
    assert theta3.is_tangent()
    bad = VectorField.parse(variety, {"x": "1"})
    assert not bad.is_tangent()


def test_evaluate():
    variety, theta1, _, _ = _danielewski()
    vals = theta1.evaluate((Fraction(1), Fraction(3), Fraction(2)))
    assert vals == (Fraction(1), Fraction(-3), Fraction(0))


def test_lie_bracket_laws_random():
    rng = random.Random(17)
    space = affine_space(var_context("x y"))
    zero = VectorField(space, {})
    for _ in range(12):
        a = _random_field(rng, space, max_terms=2)
        b = _random_field(rng, space, max_terms=2)
        c = _random_field(rng, space, max_terms=2)
        assert lie_bracket(a, b) == -lie_bracket(b, a)
        assert lie_bracket(a, a) == zero
        jac = (
            lie_bracket(a, lie_bracket(b, c))
            + lie_bracket(b, lie_bracket(c, a))
            + lie_bracket(c, lie_bracket(a, b))
        )
        assert jac == zero


def test_lie_bracket_matches_commutator_of_applications():
    rng = random.Random(21)
    space = affine_space(var_context("x y"))
    ctx = space.context
    for _ in range(10):
        a = _random_field(rng, space, max_terms=2)
        b = _random_field(rng, space, max_terms=2)
        f = Polynomial(ctx, {
            tuple(rng.randint(0, 2) for _ in ctx.names): Fraction(rng.randint(-3, 3))
            for _ in range(3)})
        assert lie_bracket(a, b).apply(f) == a.apply(b.apply(f)) - b.apply(a.apply(f))


def test_danielewski_commutators():
    variety, theta1, theta2, theta3 = _danielewski()
    # the hyperbolic field rescales both shears by constants
    assert lie_bracket(theta1, theta2) == theta2.scale(-1)
    assert lie_bracket(theta1, theta3) == theta3


def test_kernel_degree_known_values():
    variety, theta1, theta2, theta3 = _danielewski()
    ctx = variety.context
    y = parse_poly("y", ctx)
    z = parse_poly("z", ctx)
    x = parse_poly("x", ctx)
    assert kernel_degree(y, theta2) == 1
    assert kernel_degree(z, theta2) == 2
    assert kernel_degree(x, theta2) == 3
    assert kernel_degree(x, theta3) == 1
    # the hyperbolic field never kills x
    assert kernel_degree(x, theta1, cap=16) is None
    with pytest.raises(CertificateError):
        kernel_degree(x, VectorField.parse(variety, {"x": "1"}))


def test_lnd_scan_positive():
    variety, _, theta2, _ = _danielewski()
    scan = lnd_certificate(theta2)
    assert scan.status == "lnd"
    assert scan.depths == {"x": 3, "y": 1, "z": 2}
    assert [str(c) for c in scan.chains["z"]] == ["z", "y"]


def test_lnd_scan_eigen_witness():
    variety, theta1, _, _ = _danielewski()
    scan = lnd_certificate(theta1)
    assert scan.status == "not_lnd"
    name, ratio, k = scan.eigen
    assert name in ("x", "y")
    assert ratio in (Fraction(1), Fraction(-1))
    assert k == 1


def test_lnd_scan_abort_paths():
    space = affine_space(var_context("x y"))
    # x -> y^2 -> 2x^2 y -> ... degrees climb forever
    grower = VectorField.parse(space, {"x": "y^2", "y": "x^2"})
    scan = lnd_certificate(grower, growth_window=4)
    assert scan.status == "unknown"
    scan = lnd_certificate(grower, term_cap=1)
    assert scan.status == "unknown"


def test_completeness_variants():
    variety, theta1, theta2, theta3 = _danielewski()
    assert isinstance(completeness_certificate(theta1), LinearCoefficientsCertificate)
    c2 = completeness_certificate(theta2)
    assert isinstance(c2, LndCertificate)
    assert dict(c2.depths) == {"x": 3, "y": 1, "z": 2}
    assert isinstance(completeness_certificate(theta3), LndCertificate)


def test_completeness_kernel_multiple():
    variety, _, theta2, _ = _danielewski()
    ctx = variety.context
    # a small kernel factor keeps the product visibly nilpotent:
    # (f*V)^k = f^k * V^k when V kills f
    small = shear_multiple(parse_poly("y", ctx), theta2)
    assert isinstance(completeness_certificate(small), LndCertificate)
    # a huge kernel factor overruns the scan's term cap, so only the
    # shear provenance can still certify the product
    big = shear_multiple(parse_poly("(y + 1)^200", ctx), theta2)
    cert = completeness_certificate(big)
    assert isinstance(cert, KernelMultipleCertificate)
    assert cert.factor == parse_poly("(y + 1)^200", ctx)
    assert cert.flow_capable
    assert dict(cert.inner.depths) == {"x": 3, "y": 1, "z": 2}
    # without provenance the same coefficients fall back to weaker evidence
    bare = VectorField(variety, dict(big.coeffs))
    anon = completeness_certificate(bare)
    assert not isinstance(anon, KernelMultipleCertificate)
    assert not isinstance(anon, LndCertificate)


def test_completeness_triangular():
    space = affine_space(var_context("x y z"))
    v = VectorField.parse(space, {"x": "y^2 + z", "y": "3*y + z^3", "z": "0"})
    cert = completeness_certificate(v)
    assert isinstance(cert, TriangularLinearCertificate)
    assert cert.ordering[0] == "z"


def test_completeness_unknown():
    space = affine_space(var_context("x y"))
    v = VectorField.parse(space, {"x": "y^2", "y": "x^2"})
    cert = completeness_certificate(v)
    assert isinstance(cert, UnknownCompleteness)
    assert not cert.flow_capable
    assert cert.reason


def test_shear_multiple_records_provenance():
    variety, _, theta2, _ = _danielewski()
    f = parse_poly("y^2", variety.context)
    sheared = shear_multiple(f, theta2)
    assert sheared.shear == (f, theta2)
    assert sheared.coefficient("x") == f * theta2.coefficient("x")


def test_fresh_time_symbols():
    assert fresh_time_symbols(var_context("x y z")) == ["t"]
    assert fresh_time_symbols(var_context("x t")) == ["s"]
    assert fresh_time_symbols(var_context("x y"), count=2) == ["t", "s"]
    crowded = var_context("t s r u")
    assert fresh_time_symbols(crowded, count=2) == ["t0", "t1"]


def test_algebraic_flow_images():
    variety, _, theta2, _ = _danielewski()
    flow = algebraic_flow(theta2)
    assert flow.time == "t"
    ext = flow.context
    assert flow.image("x") == parse_poly("x + 2*z*t + y*t^2", ext)
    assert flow.image("y") == parse_poly("y", ext)
    assert flow.image("z") == parse_poly("z + y*t", ext)


def test_flow_checks_pass_for_lnd():
    variety, _, theta2, theta3 = _danielewski("z^3 - z")
    for field in (theta2, theta3):
        flow = algebraic_flow(field)
        assert flow_identity_check(flow)
        assert flow_preserves_variety(flow)
        assert flow_group_law_check(flow)
        assert flow_field_consistency_check(flow)


def test_flow_of_kernel_multiple():
    variety, _, theta2, _ = _danielewski()
    sheared = shear_multiple(parse_poly("y", variety.context), theta2)
    flow = algebraic_flow(sheared)
    assert flow_identity_check(flow)
    assert flow_preserves_variety(flow)
    assert flow_group_law_check(flow)
    assert flow_field_consistency_check(flow)


def test_flow_refused_without_capable_evidence():
    variety, theta1, _, _ = _danielewski()
    with pytest.raises(CertificateError):
        algebraic_flow(theta1)


def test_numeric_flow_check():
    variety, _, theta2, _ = _danielewski()
    flow = algebraic_flow(theta2)
    pt = sample_point(variety, seed=4)
    ok, max_err = numeric_flow_check(flow, pt)
    assert ok
    assert max_err <= 1e-8


def test_group_law_detects_fake_flow():
    variety, _, theta2, _ = _danielewski()
    flow = algebraic_flow(theta2)
    ext = flow.context
    broken = dict(flow.images)
    broken["x"] = broken["x"] + parse_poly("t^3", ext)
    fake = type(flow)(field=flow.field, time=flow.time, context=ext, images=broken)
    assert flow_identity_check(fake)
    assert not flow_group_law_check(fake) or not flow_field_consistency_check(fake)
