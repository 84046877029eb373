"""Line-oriented certificate files and their JSON mirror.

The format is block-structured plain text with a version tag,
deterministic to render and stable under a parse/render round trip:

    densikit-certificate v1
    name danielewski
    variety {
      order degrevlex
      vars x, y, z
      relation x*y - z^2 + 1
    }
    field theta1 {
      x = x
      y = -y
    }
    tuple theta1, theta2, theta3
    tree {
      root theta1
      edge theta2 -> theta1 = z
    }
    coverage {
      x = theta3
    }

Condition-1 evidence is either a coverage block or a witness block
(targets with sum-of-product terms).  An optional sufficiency block
pins companions, kernel functions, and a base point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError
from .certificates import (
    AdmissibleTree,
    Coverage,
    SufficiencyInstance,
    TreeEdge,
    TupleCertificate,
    Witness,
    WitnessProduct,
    WitnessTarget,
)
from .derivations import VectorField
from .poly import Polynomial, VarContext, parse_poly, render_poly
from .varieties import VarietyPresentation

FORMAT_TAG = "densikit-certificate v1"


@dataclass
class CertificateDocument:
    name: str
    certificate: TupleCertificate
    sufficiency: SufficiencyInstance | None = None


def render_certificate(doc: CertificateDocument) -> str:
    cert = doc.certificate
    context = cert.variety.context
    lines = [FORMAT_TAG, f"name {doc.name}"]
    lines.append("variety {")
    lines.append(f"  order {context.order}")
    lines.append(f"  vars {', '.join(context.names)}")
    for rel in cert.variety.relations.generators:
        lines.append(f"  relation {render_poly(rel)}")
    lines.append("}")
    for name, field in cert.fields.items():
        lines.append(f"field {name} {{")
        for var in context.names:
            coeff = field.coeffs.get(var)
            if coeff is not None:
                lines.append(f"  {var} = {render_poly(coeff)}")
        lines.append("}")
    lines.append(f"tuple {', '.join(cert.fields)}")
    lines.append("tree {")
    lines.append(f"  root {cert.tree.root}")
    for edge in cert.tree.edges:
        lines.append(
            f"  edge {edge.child} -> {edge.parent} = {render_poly(edge.label)}"
        )
    lines.append("}")
    evidence = cert.evidence
    if isinstance(evidence, Coverage):
        lines.append("coverage {")
        for var in context.names:
            if var in evidence.assignment:
                lines.append(f"  {var} = {evidence.assignment[var]}")
        lines.append("}")
    elif isinstance(evidence, Witness):
        lines.append("witness {")
        for item in evidence.targets:
            lines.append(f"  target {render_poly(item.target)}")
            for product in item.products:
                parts = " * ".join(
                    f"({render_poly(f)} @ {fname})"
                    for f, fname in product.factors
                )
                lines.append(f"  term {parts}")
        lines.append("}")
    if doc.sufficiency is not None:
        suff = doc.sufficiency
        lines.append("sufficiency {")
        lines.append(f"  point {', '.join(str(v) for v in suff.point)}")
        for (name, _), func in zip(suff.companions, suff.functions):
            lines.append(f"  pair {name} = {render_poly(func)}")
        lines.append("}")
    return "\n".join(lines) + "\n"


class _Lines:
    def __init__(self, text: str):
        self.raw = text.split("\n")
        self.pos = 0

    def next_content(self) -> tuple[int, str] | None:
        while self.pos < len(self.raw):
            line = self.raw[self.pos].strip()
            self.pos += 1
            if line:
                return self.pos, line
        return None

    def expect(self, what: str) -> tuple[int, str]:
        got = self.next_content()
        if got is None:
            raise ParseError(f"unexpected end of file, expected {what}")
        return got


def _fail(lineno: int, message: str) -> ParseError:
    return ParseError(f"line {lineno}: {message}")


def _block_lines(lines: _Lines, opener: str) -> list[tuple[int, str]]:
    body = []
    while True:
        lineno, line = lines.expect(f"'}}' closing {opener}")
        if line == "}":
            return body
        body.append((lineno, line))


def parse_certificate(text: str) -> CertificateDocument:
    lines = _Lines(text)
    lineno, tag = lines.expect("format tag")
    if tag != FORMAT_TAG:
        raise _fail(lineno, f"expected '{FORMAT_TAG}', got {tag!r}")
    lineno, line = lines.expect("name line")
    if not line.startswith("name "):
        raise _fail(lineno, "expected a name line")
    name = line[5:].strip()

    lineno, line = lines.expect("variety block")
    if line != "variety {":
        raise _fail(lineno, "expected 'variety {'")
    order = "degrevlex"
    var_names: tuple[str, ...] | None = None
    relation_texts: list[tuple[int, str]] = []
    for lno, entry in _block_lines(lines, "variety"):
        if entry.startswith("order "):
            order = entry[6:].strip()
        elif entry.startswith("vars "):
            var_names = tuple(
                v.strip() for v in entry[5:].split(",") if v.strip()
            )
        elif entry.startswith("relation "):
            relation_texts.append((lno, entry[9:]))
        else:
            raise _fail(lno, f"unknown variety entry {entry!r}")
    if var_names is None:
        raise _fail(lineno, "variety block is missing a vars line")
    try:
        context = VarContext(var_names, order)
    except ValueError as exc:
        raise _fail(lineno, str(exc))
    relations = [_parse_expr(t, context, lno) for lno, t in relation_texts]
    variety = VarietyPresentation(context, relations)

    fields: dict[str, VectorField] = {}
    tuple_order: tuple[str, ...] | None = None
    tree: AdmissibleTree | None = None
    evidence = None
    sufficiency: SufficiencyInstance | None = None

    while True:
        got = lines.next_content()
        if got is None:
            break
        lineno, line = got
        if line.startswith("field ") and line.endswith("{"):
            fname = line[6:-1].strip()
            if not fname:
                raise _fail(lineno, "field block needs a name")
            if fname in fields:
                raise _fail(lineno, f"duplicate field {fname}")
            coeffs: dict[str, Polynomial] = {}
            for lno, entry in _block_lines(lines, f"field {fname}"):
                var, sep, expr = entry.partition(" = ")
                if not sep:
                    raise _fail(lno, "field entries read 'var = expression'")
                coeffs[var.strip()] = _parse_expr(expr, context, lno)
            try:
                fields[fname] = VectorField(variety, coeffs)
            except (KeyError, ValueError) as exc:
                raise _fail(lineno, f"bad field {fname}: {exc}")
        elif line.startswith("tuple "):
            tuple_order = tuple(
                v.strip() for v in line[6:].split(",") if v.strip()
            )
        elif line == "tree {":
            root: str | None = None
            edges: list[TreeEdge] = []
            for lno, entry in _block_lines(lines, "tree"):
                if entry.startswith("root "):
                    root = entry[5:].strip()
                elif entry.startswith("edge "):
                    rest = entry[5:]
                    head, sep, label_text = rest.partition(" = ")
                    if not sep:
                        raise _fail(lno, "edge lines read 'child -> parent = label'")
                    child, sep2, parent = head.partition(" -> ")
                    if not sep2:
                        raise _fail(lno, "edge lines read 'child -> parent = label'")
                    edges.append(
                        TreeEdge(
                            child.strip(),
                            parent.strip(),
                            _parse_expr(label_text, context, lno),
                        )
                    )
                else:
                    raise _fail(lno, f"unknown tree entry {entry!r}")
            if root is None:
                raise _fail(lineno, "tree block is missing a root line")
            tree = AdmissibleTree(root, tuple(edges))
        elif line == "coverage {":
            assignment: dict[str, str] = {}
            for lno, entry in _block_lines(lines, "coverage"):
                var, sep, fname = entry.partition(" = ")
                if not sep:
                    raise _fail(lno, "coverage entries read 'var = field'")
                assignment[var.strip()] = fname.strip()
            evidence = Coverage(assignment)
        elif line == "witness {":
            targets: list[WitnessTarget] = []
            for lno, entry in _block_lines(lines, "witness"):
                if entry.startswith("target "):
                    targets.append(
                        WitnessTarget(_parse_expr(entry[7:], context, lno), [])
                    )
                elif entry.startswith("term "):
                    if not targets:
                        raise _fail(lno, "term line before any target")
                    targets[-1].products.append(
                        _parse_witness_term(entry[5:], context, lno)
                    )
                else:
                    raise _fail(lno, f"unknown witness entry {entry!r}")
            evidence = Witness(targets)
        elif line == "sufficiency {":
            point: tuple[Fraction, ...] | None = None
            pairs: list[tuple[str, Polynomial]] = []
            for lno, entry in _block_lines(lines, "sufficiency"):
                if entry.startswith("point "):
                    try:
                        point = tuple(
                            Fraction(v.strip())
                            for v in entry[6:].split(",")
                        )
                    except (ValueError, ZeroDivisionError) as exc:
                        raise _fail(lno, f"bad point: {exc}")
                elif entry.startswith("pair "):
                    fname, sep, expr = entry[5:].partition(" = ")
                    if not sep:
                        raise _fail(lno, "pair entries read 'field = expression'")
                    pairs.append(
                        (fname.strip(), _parse_expr(expr, context, lno))
                    )
                else:
                    raise _fail(lno, f"unknown sufficiency entry {entry!r}")
            if point is None:
                raise _fail(lineno, "sufficiency block is missing a point")
            companions = []
            for fname, _ in pairs:
                if fname not in fields:
                    raise _fail(
                        lineno, f"sufficiency pair names unknown field {fname}"
                    )
                companions.append((fname, fields[fname]))
            sufficiency = SufficiencyInstance(
                companions=tuple(companions),
                functions=tuple(func for _, func in pairs),
                point=point,
            )
        else:
            raise _fail(lineno, f"unknown section {line!r}")

    if tuple_order is None:
        raise ParseError("certificate is missing a tuple line")
    if tree is None:
        raise ParseError("certificate is missing a tree block")
    if evidence is None:
        raise ParseError("certificate needs a coverage or witness block")
    missing = [n for n in tuple_order if n not in fields]
    if missing:
        raise ParseError(f"tuple names undeclared fields: {', '.join(missing)}")
    if set(tuple_order) != set(fields):
        raise ParseError("tuple line must list every declared field")
    if tree.root not in fields:
        raise ParseError(f"tree root {tree.root} is not a declared field")
    for e in tree.edges:
        for v in (e.child, e.parent):
            if v not in fields:
                raise ParseError(f"tree edge names undeclared field {v}")
    if isinstance(evidence, Coverage):
        for var, fname in evidence.assignment.items():
            if var not in context.names:
                raise ParseError(f"coverage assigns unknown coordinate {var}")
            if fname not in fields:
                raise ParseError(f"coverage names undeclared field {fname}")
    else:
        for item in evidence.targets:
            for product in item.products:
                for _, fname in product.factors:
                    if fname not in fields:
                        raise ParseError(
                            f"witness names undeclared field {fname}"
                        )
    ordered = {n: fields[n] for n in tuple_order}
    cert = TupleCertificate(variety, ordered, tree, evidence)
    return CertificateDocument(name, cert, sufficiency)


def _parse_expr(text: str, context: VarContext, lineno: int) -> Polynomial:
    try:
        return parse_poly(text, context)
    except ParseError as exc:
        raise _fail(lineno, str(exc))


def _parse_witness_term(
    text: str, context: VarContext, lineno: int
) -> WitnessProduct:
    factors: list[tuple[Polynomial, str]] = []
    for chunk in text.split(" * "):
        chunk = chunk.strip()
        if not (chunk.startswith("(") and chunk.endswith(")")):
            raise _fail(lineno, "witness factors read '(expression @ field)'")
        body = chunk[1:-1]
        expr, sep, fname = body.rpartition(" @ ")
        if not sep:
            raise _fail(lineno, "witness factors read '(expression @ field)'")
        factors.append((_parse_expr(expr, context, lineno), fname.strip()))
    if not factors:
        raise _fail(lineno, "empty witness term")
    return WitnessProduct(factors)


def certificate_to_json(doc: CertificateDocument) -> dict:
    cert = doc.certificate
    context = cert.variety.context
    out: dict = {
        "format": FORMAT_TAG,
        "name": doc.name,
        "variety": {
            "order": context.order,
            "vars": list(context.names),
            "relations": [
                render_poly(r) for r in cert.variety.relations.generators
            ],
        },
        "fields": {
            name: {
                var: render_poly(field.coeffs[var])
                for var in context.names
                if var in field.coeffs
            }
            for name, field in cert.fields.items()
        },
        "tuple": list(cert.fields),
        "tree": {
            "root": cert.tree.root,
            "edges": [
                {
                    "child": e.child,
                    "parent": e.parent,
                    "label": render_poly(e.label),
                }
                for e in cert.tree.edges
            ],
        },
    }
    evidence = cert.evidence
    if isinstance(evidence, Coverage):
        out["coverage"] = {
            var: evidence.assignment[var] for var in context.names
        }
    elif isinstance(evidence, Witness):
        out["witness"] = [
            {
                "target": render_poly(item.target),
                "terms": [
                    [
                        {"factor": render_poly(f), "field": fname}
                        for f, fname in product.factors
                    ]
                    for product in item.products
                ],
            }
            for item in evidence.targets
        ]
    if doc.sufficiency is not None:
        suff = doc.sufficiency
        out["sufficiency"] = {
            "point": [str(v) for v in suff.point],
            "pairs": [
                {"field": name, "function": render_poly(func)}
                for (name, _), func in zip(suff.companions, suff.functions)
            ],
        }
    return out


def certificate_from_json(data: dict) -> CertificateDocument:
    try:
        if data.get("format") != FORMAT_TAG:
            raise ParseError(
                f"expected format {FORMAT_TAG!r}, got {data.get('format')!r}"
            )
        name = data["name"]
        vblock = data["variety"]
        context = VarContext(
            tuple(vblock["vars"]), vblock.get("order", "degrevlex")
        )
        relations = [parse_poly(t, context) for t in vblock["relations"]]
        variety = VarietyPresentation(context, relations)
        fields = {}
        for fname in data["tuple"]:
            coeffs = {
                var: parse_poly(t, context)
                for var, t in data["fields"][fname].items()
            }
            fields[fname] = VectorField(variety, coeffs)
        tree = AdmissibleTree(
            data["tree"]["root"],
            tuple(
                TreeEdge(
                    e["child"], e["parent"], parse_poly(e["label"], context)
                )
                for e in data["tree"]["edges"]
            ),
        )
        if "coverage" in data:
            evidence = Coverage(dict(data["coverage"]))
        elif "witness" in data:
            evidence = Witness(
                [
                    WitnessTarget(
                        parse_poly(item["target"], context),
                        [
                            WitnessProduct(
                                [
                                    (
                                        parse_poly(f["factor"], context),
                                        f["field"],
                                    )
                                    for f in term
                                ]
                            )
                            for term in item["terms"]
                        ],
                    )
                    for item in data["witness"]
                ]
            )
        else:
            raise ParseError("certificate needs coverage or witness evidence")
        sufficiency = None
        if "sufficiency" in data:
            sblock = data["sufficiency"]
            point = tuple(Fraction(v) for v in sblock["point"])
            companions = []
            functions = []
            for pair in sblock["pairs"]:
                companions.append((pair["field"], fields[pair["field"]]))
                functions.append(parse_poly(pair["function"], context))
            sufficiency = SufficiencyInstance(
                tuple(companions), tuple(functions), point
            )
        cert = TupleCertificate(variety, fields, tree, evidence)
        return CertificateDocument(name, cert, sufficiency)
    except (AttributeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed certificate JSON: {exc}")
