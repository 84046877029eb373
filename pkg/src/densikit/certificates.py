"""Certificates for compatible tuples of complete vector fields:
admissible rooted trees, kernel-product coverage, the bracket
recursion, tangent-space spanning, and the sufficiency checker for
producing new complete fields at a point.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from typing import Sequence

from .errors import BudgetError, CertificateError
from .derivations import (
    CompletenessCertificate,
    UnknownCompleteness,
    VectorField,
    completeness_certificate,
    kernel_degree,
    lie_bracket,
    shear_multiple,
)
from .groebner import IdealPresentation
from .matrices import PolyMatrix, fraction_rank, jacobian, solve_exact
from .poly import Polynomial
from .varieties import VarietyPresentation

VERIFIED = "VERIFIED"
REFUTED = "REFUTED"
INSUFFICIENT = "INSUFFICIENT"
BUDGET_EXCEEDED = "BUDGET_EXCEEDED"


@dataclass(frozen=True)
class TreeEdge:
    child: str
    parent: str
    label: Polynomial


@dataclass(frozen=True)
class AdmissibleTree:
    """Rooted directed tree over field names; edges point child to
    parent and carry a labelling function."""

    root: str
    edges: tuple[TreeEdge, ...]

    def vertices(self) -> tuple[str, ...]:
        seen = [self.root]
        for e in self.edges:
            for v in (e.child, e.parent):
                if v not in seen:
                    seen.append(v)
        return tuple(seen)

    def children(self, vertex: str) -> list[TreeEdge]:
        return [e for e in self.edges if e.parent == vertex]


@dataclass
class Coverage:
    """Condition-1 evidence: every ambient coordinate is assigned a
    field whose kernel contains it (degree at most one)."""

    assignment: dict[str, str]


@dataclass
class WitnessProduct:
    factors: list[tuple[Polynomial, str]]  # (kernel element, field name)


@dataclass
class WitnessTarget:
    target: Polynomial
    products: list[WitnessProduct]


@dataclass
class Witness:
    """Condition-1 evidence: explicit decompositions of target
    functions as sums of products of kernel elements."""

    targets: list[WitnessTarget]


@dataclass
class TupleCertificate:
    """A named tuple of fields with its tree and condition-1 evidence.

    Field order matters: the first named field is the root of the tree.
    """

    variety: VarietyPresentation
    fields: dict[str, VectorField]
    tree: AdmissibleTree
    evidence: Coverage | Witness | None = None

    def field_names(self) -> tuple[str, ...]:
        return tuple(self.fields)

    def root_field(self) -> VectorField:
        return self.fields[self.tree.root]


@dataclass
class CheckLine:
    name: str
    passed: bool
    detail: str = ""

    def render(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        if self.detail:
            return f"check {self.name} : {mark} ({self.detail})"
        return f"check {self.name} : {mark}"


@dataclass
class VerifyReport:
    verdict: str
    checks: list[CheckLine] = dataclass_field(default_factory=list)

    def render(self) -> str:
        lines = [c.render() for c in self.checks]
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
        }

    def failed_checks(self) -> list[CheckLine]:
        return [c for c in self.checks if not c.passed]


def validate_tree(tree: AdmissibleTree, field_names: Sequence[str]) -> str | None:
    """Structural validation; returns a problem description or None."""
    names = set(field_names)
    if tree.root not in names:
        return f"root {tree.root} is not a declared field"
    outgoing: dict[str, int] = {}
    for e in tree.edges:
        if e.child not in names:
            return f"edge child {e.child} is not a declared field"
        if e.parent not in names:
            return f"edge parent {e.parent} is not a declared field"
        if e.child == e.parent:
            return f"self loop at {e.child}"
        outgoing[e.child] = outgoing.get(e.child, 0) + 1
    if outgoing.get(tree.root):
        return "root must not have a parent"
    for v in names:
        if v == tree.root:
            continue
        if outgoing.get(v, 0) != 1:
            return f"vertex {v} needs exactly one parent edge"
    # every non-root vertex must reach the root
    parent_of = {e.child: e.parent for e in tree.edges}
    for v in names:
        cur = v
        hops = 0
        while cur != tree.root:
            cur = parent_of.get(cur)
            hops += 1
            if cur is None or hops > len(names):
                return f"vertex {v} does not reach the root"
    return None


def verify_tuple(
    cert: TupleCertificate,
    kernel_cap: int = 32,
    budget: int | None = None,
) -> VerifyReport:
    """Machine check of a compatibility certificate.

    Hard failures refute; a completeness certificate that comes back
    Unknown downgrades the verdict to INSUFFICIENT instead, since the
    syntactic criteria are sufficient but not necessary.
    """
    checks: list[CheckLine] = []
    insufficient = False
    try:
        proper = cert.variety.is_proper(budget)
        checks.append(
            CheckLine(
                "variety-proper",
                proper,
                "" if proper else "relation ideal contains 1",
            )
        )
        if not proper:
            return VerifyReport(REFUTED, checks)

        tangent_ok = True
        for name, field in cert.fields.items():
            ok = field.is_tangent(budget)
            checks.append(
                CheckLine(
                    f"tangency {name}",
                    ok,
                    "" if ok else "a relation image leaves the ideal",
                )
            )
            tangent_ok = tangent_ok and ok
        if not tangent_ok:
            return VerifyReport(REFUTED, checks)

        for name, field in cert.fields.items():
            evidence = completeness_certificate(field, budget=budget)
            ok = evidence.variant != "Unknown"
            detail = evidence.variant if ok else f"Unknown: {evidence.reason}"
            checks.append(CheckLine(f"completeness {name}", ok, detail))
            if not ok:
                insufficient = True

        names = cert.field_names()
        problem = validate_tree(cert.tree, names)
        shape_ok = problem is None
        root_ok = cert.tree.root == names[0]
        detail = problem or ""
        if shape_ok and not root_ok:
            detail = f"root must be the first field {names[0]}"
        checks.append(CheckLine("tree-shape", shape_ok and root_ok, detail))
        if not (shape_ok and root_ok):
            return VerifyReport(REFUTED, checks)

        edges_ok = True
        for e in cert.tree.edges:
            child = cert.fields[e.child]
            parent = cert.fields[e.parent]
            d_child = kernel_degree(e.label, child, kernel_cap, budget)
            d_parent = kernel_degree(e.label, parent, kernel_cap, budget)
            ok = d_child == 2 and d_parent is not None and d_parent <= 1
            checks.append(
                CheckLine(
                    f"edge-degrees {e.child}->{e.parent}",
                    ok,
                    f"child degree {d_child}, parent degree {d_parent}",
                )
            )
            edges_ok = edges_ok and ok
        if not edges_ok:
            return VerifyReport(REFUTED, checks)

        if cert.evidence is not None:
            if isinstance(cert.evidence, Coverage):
                ok, detail = _check_coverage(cert, cert.evidence, kernel_cap, budget)
                checks.append(CheckLine("kernel-coverage", ok, detail))
            else:
                ok, detail = _check_witness(cert, cert.evidence, kernel_cap, budget)
                checks.append(CheckLine("kernel-witness", ok, detail))
            if not ok:
                return VerifyReport(REFUTED, checks)
    except BudgetError as exc:
        checks.append(CheckLine("budget", False, str(exc)))
        return VerifyReport(BUDGET_EXCEEDED, checks)

    if insufficient:
        return VerifyReport(INSUFFICIENT, checks)
    return VerifyReport(VERIFIED, checks)


def _check_coverage(
    cert: TupleCertificate, coverage: Coverage, kernel_cap: int, budget
) -> tuple[bool, str]:
    context = cert.variety.context
    missing = [n for n in context.names if n not in coverage.assignment]
    if missing:
        return False, f"unassigned coordinates: {', '.join(missing)}"
    for coord, fname in coverage.assignment.items():
        if coord not in context.names:
            return False, f"assignment names unknown coordinate {coord}"
        if fname not in cert.fields:
            return False, f"{coord} assigned to unknown field {fname}"
        var = Polynomial.variable(context, coord)
        d = kernel_degree(var, cert.fields[fname], kernel_cap, budget)
        if d is None or d > 1:
            return False, f"{coord} has kernel degree {d} for {fname}"
    return True, "all coordinates covered"


def _check_witness(
    cert: TupleCertificate, witness: Witness, kernel_cap: int, budget
) -> tuple[bool, str]:
    variety = cert.variety
    for item in witness.targets:
        total = Polynomial.zero(variety.context)
        for product in item.products:
            piece = Polynomial.constant(variety.context, 1)
            for element, fname in product.factors:
                if fname not in cert.fields:
                    return False, f"unknown field {fname} in witness"
                d = kernel_degree(element, cert.fields[fname], kernel_cap, budget)
                if d is None or d > 1:
                    return False, (
                        f"witness factor {element} has kernel degree {d} "
                        f"for {fname}"
                    )
                piece = piece * element
            total = total + piece
        if not variety.normal_form(item.target - total, budget).is_zero():
            return False, f"decomposition misses target {item.target}"
    return True, "all targets decompose"


# the scaled-bracket identity and the tree recursion built on it


def scaled_bracket_identity_check(
    theta: VectorField,
    phi: VectorField,
    element: Polynomial,
    budget: int | None = None,
) -> bool:
    """[a*theta, phi] - [theta, a*phi] = -phi(a)*theta in the
    coordinate ring, for a in the kernel of theta."""
    variety = theta.variety
    if not variety.normal_form(theta.apply(element), budget).is_zero():
        raise CertificateError("element must lie in the kernel of the first field")
    lhs = lie_bracket(theta.scale(element), phi) - lie_bracket(
        theta, phi.scale(element)
    )
    rhs = theta.scale(-phi.apply(element))
    delta = lhs - rhs
    return all(
        variety.normal_form(c, budget).is_zero() for c in delta.coeffs.values()
    )


@dataclass
class RecursionReport:
    result: VectorField
    closed_form: VectorField
    sign: int | None  # the matching global sign, None when neither matches
    matched: bool


def bracket_recursion(
    cert: TupleCertificate,
    kernel_choices: dict[str, Polynomial],
    budget: int | None = None,
) -> RecursionReport:
    """Iterated scaled brackets along the tree versus the closed form.

    kernel_choices assigns each field name an element of its kernel.
    Walking the tree from the leaves, each child is folded into its
    parent through the scaled-bracket identity; the result must be the
    root field times the product of all chosen kernel elements and of
    each non-root field's image of its own edge label, up to one
    global sign.
    """
    variety = cert.variety
    for name, f in kernel_choices.items():
        if name not in cert.fields:
            raise CertificateError(f"kernel choice for unknown field {name}")
        fld = cert.fields[name]
        if not variety.normal_form(fld.apply(f), budget).is_zero():
            raise CertificateError(
                f"chosen element for {name} is not in its kernel"
            )
    for name in cert.fields:
        if name not in kernel_choices:
            raise CertificateError(f"missing kernel choice for field {name}")

    def recurse(vertex: str) -> VectorField:
        base = shear_multiple(kernel_choices[vertex], cert.fields[vertex])
        current = base
        for edge in cert.tree.children(vertex):
            child_field = recurse(edge.child)
            label = edge.label
            if not variety.normal_form(
                cert.fields[vertex].apply(label), budget
            ).is_zero():
                raise CertificateError(
                    f"edge label for {edge.child} is outside the kernel of "
                    f"{vertex}"
                )
            current = lie_bracket(child_field.scale(label), current) - lie_bracket(
                child_field, current.scale(label)
            )
        return current

    result = recurse(cert.tree.root)

    label_of = {e.child: e.label for e in cert.tree.edges}
    scalar = kernel_choices[cert.tree.root]
    for name in cert.fields:
        if name == cert.tree.root:
            continue
        scalar = scalar * kernel_choices[name] * cert.fields[name].apply(label_of[name])
    closed = cert.root_field().scale(scalar)

    for sign in ((-1) ** len(cert.tree.edges), -((-1) ** len(cert.tree.edges))):
        candidate = closed.scale(sign)
        delta = result - candidate
        if all(
            variety.normal_form(c, budget).is_zero()
            for c in delta.coeffs.values()
        ):
            return RecursionReport(result, closed, sign, True)
    return RecursionReport(result, closed, None, False)


# tangent space spanning


def field_matrix(fields: Sequence[VectorField]) -> PolyMatrix:
    """Rows are the fields' coefficient vectors."""
    if not fields:
        raise ValueError("need at least one field")
    context = fields[0].variety.context
    return PolyMatrix(context, [f.coefficient_vector() for f in fields])


def span_at_point(
    fields: Sequence[VectorField],
    point: Sequence[Fraction],
) -> bool:
    """Whether the fields span the tangent space at a smooth point."""
    variety = fields[0].variety
    if not variety.contains_point(point):
        raise CertificateError("spanning point is not on the variety")
    matrix = field_matrix(fields)
    return fraction_rank(matrix.evaluate(point)) == variety.dim


def span_everywhere(
    fields: Sequence[VectorField],
    budget: int | None = None,
) -> bool:
    """Whether the fields span the tangent space at every variety point.

    The rank of the stacked coefficient matrix drops exactly on the
    common zero locus of its dim x dim minors; spanning everywhere means
    that locus misses the variety, i.e. relations plus minors generate
    the unit ideal.
    """
    variety = fields[0].variety
    matrix = field_matrix(fields)
    size = variety.dim
    if size == 0:
        return True
    if min(matrix.nrows, matrix.ncols) < size:
        return False
    gens = list(variety.relations.generators) + matrix.minors(size)
    ideal = IdealPresentation(variety.context, gens)
    return ideal.contains_one(budget)


# sufficiency checker for the point criterion


@dataclass
class SufficiencyInstance:
    """A pinned hypothesis set: companion fields with their paired
    kernel functions and the base point."""

    companions: tuple[tuple[str, VectorField], ...]
    functions: tuple[Polynomial, ...]
    point: tuple[Fraction, ...]


@dataclass
class SufficiencyReport:
    passed: bool
    checks: list[CheckLine]

    def render(self) -> str:
        lines = [c.render() for c in self.checks]
        lines.append(f"verdict: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def sufficiency_check(
    variety: VarietyPresentation,
    root: VectorField,
    companions: Sequence[tuple[str, VectorField]],
    functions: Sequence[Polynomial],
    point: Sequence[Fraction],
    budget: int | None = None,
) -> SufficiencyReport:
    """Hypothesis checks for manufacturing a complete field through the
    point from shears of the companion fields.

    Mandatory: each companion carries completeness evidence, the
    companions span the tangent space at the point, each paired
    function lies in its companion's kernel and vanishes at the point,
    and the root field pairs nontrivially with each function at the
    point.  The two global spanning variants are reported as
    informational lines.
    """
    if len(companions) != len(functions):
        raise ValueError("one function per companion field is required")
    point = tuple(Fraction(v) for v in point)
    checks: list[CheckLine] = []
    mandatory: list[bool] = []

    if not variety.contains_point(point):
        raise CertificateError("base point is not on the variety")

    for (name, fld) in companions:
        evidence = completeness_certificate(fld, budget=budget)
        ok = not isinstance(evidence, UnknownCompleteness)
        checks.append(CheckLine(f"completeness {name}", ok, evidence.variant))
        mandatory.append(ok)

    companion_fields = [fld for _, fld in companions]
    ok = span_at_point(companion_fields, point)
    checks.append(CheckLine("span-at-point", ok))
    mandatory.append(ok)

    try:
        everywhere = span_everywhere(companion_fields, budget)
        checks.append(
            CheckLine(
                "span-everywhere companions",
                True,
                f"{'holds' if everywhere else 'fails somewhere'}",
            )
        )
    except BudgetError:
        checks.append(CheckLine("span-everywhere companions", True, "budget exceeded"))
    try:
        everywhere_root = span_everywhere([root] + companion_fields, budget)
        checks.append(
            CheckLine(
                "span-everywhere with-root",
                True,
                f"{'holds' if everywhere_root else 'fails somewhere'}",
            )
        )
    except BudgetError:
        checks.append(CheckLine("span-everywhere with-root", True, "budget exceeded"))

    for (name, fld), f in zip(companions, functions):
        in_kernel = variety.normal_form(fld.apply(f), budget).is_zero()
        checks.append(CheckLine(f"kernel {name}", in_kernel, f"function {f}"))
        mandatory.append(in_kernel)

    for (name, _), f in zip(companions, functions):
        vanish = f.evaluate(point) == 0
        checks.append(CheckLine(f"vanishes {name}", vanish, f"function {f}"))
        mandatory.append(vanish)

    root_at = root.evaluate(point)
    names = variety.context.names
    for (name, _), f in zip(companions, functions):
        pairing = sum(
            f.partial(v).evaluate(point) * rv for v, rv in zip(names, root_at)
        )
        ok = pairing != 0
        checks.append(
            CheckLine(
                f"root-pairing {name}",
                ok,
                f"d_x f (root) = {pairing}",
            )
        )
        mandatory.append(ok)

    return SufficiencyReport(all(mandatory), checks)


def find_kernel_function(
    field: VectorField,
    point: Sequence[Fraction],
    direction: Sequence[Fraction],
) -> Polynomial:
    """Coordinate function for the sufficiency setup at a point.

    Given a determinant field, a variety point, and a tangent direction
    outside the field's line, produce z_j - z_j(x) with z_j outside the
    determinant variables, in the field's kernel, vanishing at the
    point, and pairing nontrivially with the direction.  The companion
    basis consists of the determinant fields obtained by swapping one
    determinant variable for one outside variable.
    """
    from .fibration import det_vector_field  # local import, no cycle at runtime

    variety = field.variety
    context = variety.context
    if field.det_vars is None:
        raise CertificateError(
            "kernel function search needs a determinant-field construction"
        )
    point = tuple(Fraction(v) for v in point)
    w = tuple(Fraction(v) for v in direction)
    if not variety.contains_point(point):
        raise CertificateError("point is not on the variety")
    gens = variety.relations.generators
    if gens:
        for row in jacobian(list(gens), context).evaluate(point):
            if sum(r * wv for r, wv in zip(row, w)) != 0:
                raise CertificateError("direction is not tangent at the point")

    field_at = list(field.evaluate(point))
    if all(v == 0 for v in field_at):
        raise CertificateError("field vanishes at the point")
    if fraction_rank([field_at, list(w)]) < 2:
        raise CertificateError("direction lies on the field's own line")

    det_set = list(field.det_vars)
    outside = [n for n in context.names if n not in det_set]
    pivot = None
    for name in det_set:
        if field.coefficient(name).evaluate(point) != 0:
            pivot = name
            break
    if pivot is None:
        raise CertificateError("field vanishes on its determinant variables")

    companions: list[tuple[str, VectorField]] = []
    for name in outside:
        swapped = sorted(
            [n for n in det_set if n != pivot] + [name],
            key=context.index,
        )
        companions.append((name, det_vector_field(variety, swapped)))

    columns = [field_at] + [list(fld.evaluate(point)) for _, fld in companions]
    rows = [[col[i] for col in columns] for i in range(context.arity)]
    solution = solve_exact(rows, list(w))
    if solution is None:
        raise CertificateError(
            "no admissible coordinate: companion basis is degenerate at the point"
        )
    for (name, _), mu in zip(companions, solution[1:]):
        if mu != 0:
            var = Polynomial.variable(context, name)
            value = var.evaluate(point)
            return var - Polynomial.constant(context, value)
    raise CertificateError(
        "no admissible coordinate: direction needs no outside component"
    )
