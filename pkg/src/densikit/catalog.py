"""Worked example bundles: the Danielewski surfaces, the SL and Sp
fiber tuples, and the product-with-line construction.

Each bundle packages a tuple certificate with the extras the checkers
consume: an expected verdict, an optional sufficiency instance, and
optional global spanning claims.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import CertificateError
from .certificates import (
    AdmissibleTree,
    Coverage,
    SufficiencyInstance,
    TreeEdge,
    TupleCertificate,
    VERIFIED,
)
from .derivations import VectorField
from .fibration import det_vector_field, gv_variety, var_name
from .groebner import IdealPresentation
from .poly import Polynomial, VarContext, parse_poly
from .varieties import VarietyPresentation, sample_point


@dataclass
class SpanClaim:
    field_names: tuple[str, ...]
    expected: bool


@dataclass
class ExampleBundle:
    name: str
    certificate: TupleCertificate
    expected_verdict: str = VERIFIED
    sufficiency: SufficiencyInstance | None = None
    spans: tuple[SpanClaim, ...] = ()


def danielewski(
    p, point: Sequence[Fraction] | None = None, seed: int = 0
) -> ExampleBundle:
    """The surface xy = p(z) with its three-field certificate.

    p must be a squarefree polynomial in z (as a string or a Polynomial
    in the surface context).  The sufficiency instance pins the shear
    pair (theta2, theta3) at the given point, or at a sampled point
    with nonzero coordinates and p'(z) != 0.
    """
    context = VarContext(("x", "y", "z"))
    if isinstance(p, str):
        p = parse_poly(p, context)
    elif p.context != context:
        p = p.in_context(context)
    if p.degree_in("x") > 0 or p.degree_in("y") > 0:
        raise ValueError("p must only involve z")
    dp = p.partial("z")
    if not IdealPresentation(context, [p, dp]).contains_one():
        raise CertificateError("p must be squarefree")

    x = Polynomial.variable(context, "x")
    y = Polynomial.variable(context, "y")
    z = Polynomial.variable(context, "z")
    variety = VarietyPresentation(context, [x * y - p])

    theta1 = VectorField(variety, {"x": x, "y": -y})
    theta2 = VectorField(variety, {"x": dp, "z": y})
    theta3 = VectorField(variety, {"y": dp, "z": x})

    tree = AdmissibleTree(
        root="theta1",
        edges=(
            TreeEdge("theta2", "theta1", z),
            TreeEdge("theta3", "theta1", z),
        ),
    )
    coverage = Coverage({"x": "theta3", "y": "theta2", "z": "theta1"})
    cert = TupleCertificate(
        variety,
        {"theta1": theta1, "theta2": theta2, "theta3": theta3},
        tree,
        coverage,
    )

    if point is None:
        point = sample_point(variety, seed=seed, avoid=[x, y, dp])
    point = tuple(Fraction(v) for v in point)
    if not variety.contains_point(point):
        raise CertificateError("sufficiency point is not on the surface")
    functions = (
        y - Polynomial.constant(context, point[1]),
        x - Polynomial.constant(context, point[0]),
    )
    sufficiency = SufficiencyInstance(
        companions=(("theta2", theta2), ("theta3", theta3)),
        functions=functions,
        point=point,
    )
    # the shear pair alone drops rank where p' vanishes, so it spans
    # everywhere only when p' is a nonzero constant
    pair_spans = dp.is_constant() and not dp.is_zero()
    spans = (
        SpanClaim(("theta1", "theta2", "theta3"), True),
        SpanClaim(("theta2", "theta3"), pair_spans),
    )
    return ExampleBundle(
        name="danielewski",
        certificate=cert,
        sufficiency=sufficiency,
        spans=spans,
    )


def sl_bundle(n: int, levels: int, index: int, target) -> ExampleBundle:
    """The two-field certificate on an SL fiber, n >= 3.

    Both fields move a coordinate pair of one factor by the crossed
    partial derivatives of the pinned component, so each annihilates
    the component exactly and is a translation along its pair.
    """
    if n < 3:
        raise ValueError("the two-field construction needs n >= 3")
    gv = gv_variety("sl", n, levels, index=index, target=target)
    variety = gv.variety
    comp = gv.fibration.component(index)

    def crossed(move_a: str, move_b: str) -> VectorField:
        return VectorField(
            variety,
            {move_a: comp.partial(move_b), move_b: -comp.partial(move_a)},
        )

    v1 = crossed(var_name(1, n, 1), var_name(1, n, 2))
    v2 = crossed(var_name(2, 1, n), var_name(2, 2, n))
    label = Polynomial.variable(variety.context, var_name(1, n, 2))
    tree = AdmissibleTree("v2", (TreeEdge("v1", "v2", label),))
    assignment = {}
    for name in variety.context.names:
        if name in v2.support():
            assignment[name] = "v1"
        else:
            assignment[name] = "v2"
    cert = TupleCertificate(
        variety, {"v2": v2, "v1": v1}, tree, Coverage(assignment)
    )
    return ExampleBundle(name="sl", certificate=cert)


def sp_bundle(n: int, levels: int, target) -> ExampleBundle:
    if n < 2:
        raise ValueError("matrix size must be at least 2")
    if n == 2 and levels == 2:
        return _sp4_bundle(target)
    gv = gv_variety("sp", n, levels, target=target)
    variety = gv.variety
    context = variety.context
    x_names = [var_name(1, k, n) for k in range(1, n + 1)]
    x_names.append(var_name(2, 1, 1))
    v = det_vector_field(variety, x_names)
    if n >= 3:
        # quadratic translation in three second-factor coordinates,
        # built from two first-factor entries
        u2 = Polynomial.variable(context, var_name(1, 2, n))
        u3 = Polynomial.variable(context, var_name(1, 3, n))
        gamma = VectorField(
            variety,
            {
                var_name(2, 2, 2): u3 * u3,
                var_name(2, 2, 3): -u2 * u3,
                var_name(2, 3, 3): u2 * u2,
            },
        )
        label_name = var_name(2, 2, 2)
    else:
        # n = 2 needs a third factor; the coefficients come from the
        # second half of the two-level prefix row
        if levels < 3:
            raise ValueError("n = 2 needs at least three levels")
        s1 = gv.fibration.prefix_rows[2][n]
        s2 = gv.fibration.prefix_rows[2][n + 1]
        gamma = VectorField(
            variety,
            {
                var_name(3, 1, 1): s2 * s2,
                var_name(3, 1, 2): -s1 * s2,
                var_name(3, 2, 2): s1 * s1,
            },
        )
        label_name = var_name(3, 2, 2)
    label = Polynomial.variable(context, label_name)
    tree = AdmissibleTree("v", (TreeEdge("gamma", "v", label),))
    assignment = {}
    for name in context.names:
        if name in v.support():
            assignment[name] = "gamma"
        else:
            assignment[name] = "v"
    cert = TupleCertificate(
        variety, {"v": v, "gamma": gamma}, tree, Coverage(assignment)
    )
    return ExampleBundle(name="sp", certificate=cert)


def _sp4_bundle(target) -> ExampleBundle:
    """The three-field certificate on the renamed two-level fiber of
    the 4x4 symplectic family."""
    gv = gv_variety("sp", 2, 2, target=target)
    renamed = VarContext(("z2", "z3", "w1", "w2", "w3"))
    name_map = {
        var_name(1, 1, 2): "z2",
        var_name(1, 2, 2): "z3",
        var_name(2, 1, 1): "w1",
        var_name(2, 1, 2): "w2",
        var_name(2, 2, 2): "w3",
    }
    relations = [
        r.rename(renamed, name_map) for r in gv.variety.relations.generators
    ]
    variety = VarietyPresentation(renamed, relations)
    v1 = det_vector_field(variety, ("z2", "z3", "w1"))
    v2 = det_vector_field(variety, ("w1", "w2", "w3"))
    v3 = det_vector_field(variety, ("z2", "w2", "w3"))
    w2 = Polynomial.variable(renamed, "w2")
    tree = AdmissibleTree(
        "v1",
        (TreeEdge("v2", "v1", w2), TreeEdge("v3", "v1", w2)),
    )
    coverage = Coverage(
        {"z2": "v2", "z3": "v2", "w1": "v3", "w2": "v1", "w3": "v1"}
    )
    cert = TupleCertificate(
        variety, {"v1": v1, "v2": v2, "v3": v3}, tree, coverage
    )
    return ExampleBundle(name="sp4", certificate=cert)


def product_with_line(
    cert: TupleCertificate, lift_name: str, time_name: str = "t"
) -> TupleCertificate:
    """The certificate for X x C with a lifted field as root and the
    line direction as its only child."""
    if lift_name not in cert.fields:
        raise ValueError(f"{lift_name} is not a field of the certificate")
    old = cert.variety.context
    if time_name in old.names:
        raise ValueError(f"{time_name} already names a coordinate")
    extended = old.extend((time_name,))
    relations = [r.in_context(extended) for r in cert.variety.relations.generators]
    variety = VarietyPresentation(extended, relations)
    lifted = VectorField(
        variety,
        {
            name: c.in_context(extended)
            for name, c in cert.fields[lift_name].coeffs.items()
        },
    )
    line = VectorField.coordinate(variety, time_name)
    line_name = f"d{time_name}"
    label = Polynomial.variable(extended, time_name)
    tree = AdmissibleTree(lift_name, (TreeEdge(line_name, lift_name, label),))
    assignment = {name: line_name for name in old.names}
    assignment[time_name] = lift_name
    return TupleCertificate(
        variety,
        {lift_name: lifted, line_name: line},
        tree,
        Coverage(assignment),
    )


def product_line_bundle(p, seed: int = 0) -> ExampleBundle:
    """The Danielewski surface times a line, rooted at the lifted
    shear theta2."""
    base = danielewski(p, seed=seed)
    cert = product_with_line(base.certificate, "theta2")
    return ExampleBundle(name="product-line", certificate=cert)
