from __future__ import annotations

from fractions import Fraction

import pytest

from densikit.catalog import (
    danielewski,
    product_line_bundle,
    product_with_line,
    sl_bundle,
    sp_bundle,
)
from densikit.certificates import sufficiency_check, span_everywhere, verify_tuple
from densikit.derivations import kernel_degree
from densikit.errors import CertificateError
from densikit.poly import Polynomial, parse_poly, var_context


def test_danielewski_bundle_shape():
    b = danielewski("z^2 - 1", point=(1, 3, 2))
    cert = b.certificate
    assert cert.field_names() == ("theta1", "theta2", "theta3")
    assert cert.tree.root == "theta1"
    assert cert.evidence.assignment == {"x": "theta3", "y": "theta2", "z": "theta1"}
    ctx = cert.variety.context
    assert cert.fields["theta2"].coefficient("x") == parse_poly("2*z", ctx)
    assert cert.fields["theta2"].coefficient("z") == parse_poly("y", ctx)
    report = verify_tuple(cert)
    assert report.verdict == b.expected_verdict == "VERIFIED"


def test_danielewski_accepts_polynomial_argument():
    ctx = var_context("x y z")
    b = danielewski(parse_poly("z^3 - z", ctx))
    assert verify_tuple(b.certificate).verdict == "VERIFIED"


def test_danielewski_rejects_bad_p():
    with pytest.raises(CertificateError):
        danielewski("z^2")  # repeated root
    with pytest.raises(CertificateError):
        danielewski("z^3 - 2*z^2 + z")  # z*(z-1)^2
    with pytest.raises(ValueError):
        danielewski("x*z")


def test_danielewski_span_claims():
    b = danielewski("z^2 - 1")
    claims = {c.field_names: c.expected for c in b.spans}
    assert claims[("theta1", "theta2", "theta3")] is True
    assert claims[("theta2", "theta3")] is False
    # a linear p has constant derivative, so the shear pair alone spans
    linear = danielewski("z")
    claims = {c.field_names: c.expected for c in linear.spans}
    assert claims[("theta2", "theta3")] is True
    for bundle in (b, linear):
        cert = bundle.certificate
        for claim in bundle.spans:
            fields = [cert.fields[n] for n in claim.field_names]
            assert span_everywhere(fields) == claim.expected


def test_danielewski_sufficiency_instance():
    b = danielewski("z^2 - 1", point=(1, 3, 2))
    inst = b.sufficiency
    assert inst.point == (Fraction(1), Fraction(3), Fraction(2))
    report = sufficiency_check(
        b.certificate.variety,
        b.certificate.root_field(),
        inst.companions,
        inst.functions,
        inst.point,
    )
    assert report.passed


def test_danielewski_sampled_point_avoids_degeneracies():
    for seed in range(5):
        b = danielewski("z^3 - z", seed=seed)
        x, y, z = b.sufficiency.point
        assert x != 0 and y != 0
        assert (3 * z * z - 1) != 0


def test_danielewski_rejects_off_surface_point():
    with pytest.raises(CertificateError):
        danielewski("z^2 - 1", point=(1, 1, 1))


def test_sl_bundle():
    b = sl_bundle(3, 2, 3, 1)
    cert = b.certificate
    assert cert.field_names() == ("v2", "v1")
    assert cert.tree.root == "v2"
    report = verify_tuple(cert)
    assert report.verdict == "VERIFIED"
    # both fields are translations, hence locally nilpotent
    lines = {c.name: c.detail for c in report.checks}
    assert lines["completeness v1"] == "LND"
    assert lines["completeness v2"] == "LND"
    with pytest.raises(ValueError):
        sl_bundle(2, 2, 1, 1)


def test_sp4_bundle_fields():
    b = sp_bundle(2, 2, (1, 0))
    cert = b.certificate
    ctx = cert.variety.context
    assert ctx.names == ("z2", "z3", "w1", "w2", "w3")
    rels = [str(r) for r in cert.variety.relations.generators]
    assert rels == ["z2*w1 + z3*w2 - 1", "z2*w2 + z3*w3 + 1"]
    v1 = cert.fields["v1"]
    assert str(v1.coefficient("z2")) == "-z2*w3"
    assert str(v1.coefficient("z3")) == "z2*w2"
    assert str(v1.coefficient("w1")) == "-w2^2 + w1*w3"
    v2 = cert.fields["v2"]
    assert str(v2.coefficient("w1")) == "z3^2"
    assert str(v2.coefficient("w2")) == "-z2*z3"
    assert str(v2.coefficient("w3")) == "z2^2"
    report = verify_tuple(cert)
    assert report.verdict == "VERIFIED"


def test_sp4_kernel_degrees():
    cert = sp_bundle(2, 2, (1, 0)).certificate
    ctx = cert.variety.context
    w2 = Polynomial.variable(ctx, "w2")
    assert kernel_degree(w2, cert.fields["v2"]) == 2
    assert kernel_degree(w2, cert.fields["v3"]) == 2
    assert kernel_degree(w2, cert.fields["v1"]) == 1


def test_sp_bundle_sizes():
    assert verify_tuple(sp_bundle(3, 2, (1, 0, 0)).certificate).verdict == "VERIFIED"
    assert verify_tuple(sp_bundle(2, 3, (1, 0)).certificate).verdict == "VERIFIED"
    with pytest.raises(ValueError):
        sp_bundle(1, 2, (1,))
    with pytest.raises(ValueError):
        sp_bundle(2, 2, (0, 0))


def test_product_with_line():
    base = danielewski("z^2 - 1").certificate
    cert = product_with_line(base, "theta2")
    assert cert.variety.context.names == ("x", "y", "z", "t")
    assert cert.tree.root == "theta2"
    assert cert.field_names() == ("theta2", "dt")
    assert cert.evidence.assignment["t"] == "theta2"
    assert cert.evidence.assignment["x"] == "dt"
    assert verify_tuple(cert).verdict == "VERIFIED"
    with pytest.raises(ValueError):
        product_with_line(base, "nope")


def test_product_line_bundle():
    b = product_line_bundle("z^2 - 1")
    assert b.name == "product-line"
    assert verify_tuple(b.certificate).verdict == "VERIFIED"
