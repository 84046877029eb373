"""The SL and Sp fibration families: factor matrices, projected
components, fiber varieties, partial-derivative identities, fiber
reduction, and the two-route smoothness check.

Variable naming is z{level}_{k}{l}.  SL factors alternate lower
unitriangular (odd levels, entries k > l) and upper unitriangular (even
levels, entries k < l); Sp factors are block-unitriangular with a
symmetric block (entries k <= l), sitting in the lower left for odd
levels and the upper right for even levels.  SL components project the
product of factor inverses onto the last row; Sp components project the
direct product onto the last row, which reduces the first factor to its
last-row variables.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import BudgetError, CertificateError
from .derivations import VectorField
from .groebner import IdealPresentation
from .matrices import PolyMatrix, jacobian, unitriangular_inverse
from .poly import Polynomial, VarContext
from .varieties import VarietyPresentation


def var_name(level: int, k: int, l: int) -> str:
    return f"z{level}_{k}{l}"


def sl_level_pairs(level: int, n: int) -> list[tuple[int, int]]:
    if level % 2:
        return [(k, l) for k in range(2, n + 1) for l in range(1, k)]
    return [(k, l) for k in range(1, n) for l in range(k + 1, n + 1)]


def sp_level_pairs(n: int) -> list[tuple[int, int]]:
    return [(k, l) for k in range(1, n + 1) for l in range(k, n + 1)]


def sl_context(n: int, levels: int, order: str = "degrevlex") -> VarContext:
    names: list[str] = []
    for level in range(1, levels + 1):
        names.extend(var_name(level, k, l) for k, l in sl_level_pairs(level, n))
    return VarContext(tuple(names), order)


def sp_context(n: int, levels: int, order: str = "degrevlex") -> VarContext:
    # the first factor only contributes its last row to the projection
    names = [var_name(1, k, n) for k in range(1, n + 1)]
    for level in range(2, levels + 1):
        names.extend(var_name(level, k, l) for k, l in sp_level_pairs(n))
    return VarContext(tuple(names), order)


def sl_factor(context: VarContext, level: int, n: int) -> PolyMatrix:
    rows = [
        [Polynomial.constant(context, 1 if i == j else 0) for j in range(n)]
        for i in range(n)
    ]
    for k, l in sl_level_pairs(level, n):
        rows[k - 1][l - 1] = Polynomial.variable(context, var_name(level, k, l))
    return PolyMatrix(context, rows)


def sp_symmetric_block(context: VarContext, level: int, n: int) -> PolyMatrix:
    rows = [[None] * n for _ in range(n)]
    for k, l in sp_level_pairs(n):
        v = Polynomial.variable(context, var_name(level, k, l))
        rows[k - 1][l - 1] = v
        rows[l - 1][k - 1] = v
    return PolyMatrix(context, rows)


def sp_factor(context: VarContext, level: int, n: int) -> PolyMatrix:
    zero = Polynomial.zero(context)
    one = Polynomial.constant(context, 1)
    block = sp_symmetric_block(context, level, n)
    rows = []
    for i in range(2 * n):
        row = []
        for j in range(2 * n):
            bi, bj = i // n, j // n
            si, sj = i % n, j % n
            if bi == bj:
                row.append(one if si == sj else zero)
            elif (bi, bj) == ((0, 1) if level % 2 == 0 else (1, 0)):
                row.append(block[si, sj])
            else:
                row.append(zero)
        rows.append(row)
    return PolyMatrix(context, rows)


def symplectic_form(context: VarContext, n: int) -> PolyMatrix:
    zero = Polynomial.zero(context)
    one = Polynomial.constant(context, 1)
    rows = []
    for i in range(2 * n):
        row = [zero] * (2 * n)
        if i < n:
            row[n + i] = one
        else:
            row[i - n] = -one
        rows.append(row)
    return PolyMatrix(context, rows)


def is_symplectic(matrix: PolyMatrix, n: int) -> bool:
    omega = symplectic_form(matrix.context, n)
    return matrix.transpose() * omega * matrix == omega


@dataclass
class FibrationPresentation:
    """The projected row family up to a level, with its prefix rows.

    prefix_rows[L] is the row vector after L factors (factor inverses in
    the SL case); components is the last prefix row.  For Sp the first
    factor exists only through prefix_rows[1], since the ambient keeps
    just its last-row variables.
    """

    kind: str
    n: int
    levels: int
    context: VarContext
    components: tuple[Polynomial, ...]
    prefix_rows: tuple[tuple[Polynomial, ...], ...]
    factors: tuple[PolyMatrix | None, ...]
    inverses: tuple[PolyMatrix | None, ...]

    def component(self, i: int) -> Polynomial:
        if not 1 <= i <= len(self.components):
            raise ValueError(f"component index {i} out of range")
        return self.components[i - 1]

    def first_half(self) -> tuple[Polynomial, ...]:
        return self.components[: self.n]

    def second_half(self) -> tuple[Polynomial, ...]:
        return self.components[self.n :]


def build_fibration(
    kind: str, n: int, levels: int, order: str = "degrevlex"
) -> FibrationPresentation:
    if kind not in ("sl", "sp"):
        raise ValueError(f"unknown fibration kind {kind!r}")
    if n < 2:
        raise ValueError("matrix size must be at least 2")
    if levels < 1:
        raise ValueError("need at least one level")
    if kind == "sl":
        return _build_sl(n, levels, order)
    return _build_sp(n, levels, order)


def _build_sl(n: int, levels: int, order: str) -> FibrationPresentation:
    context = sl_context(n, levels, order)
    factors: list[PolyMatrix] = []
    inverses: list[PolyMatrix] = []
    row = [
        Polynomial.constant(context, 1 if j == n - 1 else 0) for j in range(n)
    ]
    prefix_rows = [tuple(row)]
    for level in range(1, levels + 1):
        m = sl_factor(context, level, n)
        inv = unitriangular_inverse(m)
        factors.append(m)
        inverses.append(inv)
        row = inv.row_vector_product(list(prefix_rows[-1]))
        prefix_rows.append(tuple(row))
    components = prefix_rows[-1]
    for comp in components:
        for name in context.names:
            if comp.degree_in(name) > 1:
                raise CertificateError(
                    f"component degree in {name} exceeds 1; construction broken"
                )
    return FibrationPresentation(
        kind="sl",
        n=n,
        levels=levels,
        context=context,
        components=components,
        prefix_rows=tuple(prefix_rows),
        factors=tuple(factors),
        inverses=tuple(inverses),
    )


def _build_sp(n: int, levels: int, order: str) -> FibrationPresentation:
    context = sp_context(n, levels, order)
    zero = Polynomial.zero(context)
    one = Polynomial.constant(context, 1)
    start = [zero] * (2 * n)
    start[2 * n - 1] = one
    prefix_rows = [tuple(start)]
    # the first factor is block lower unitriangular; its product with
    # e_{2n} is (last row of the symmetric block, e_n)
    after_first = [
        Polynomial.variable(context, var_name(1, k, n)) for k in range(1, n + 1)
    ]
    after_first += [zero] * (n - 1) + [one]
    prefix_rows.append(tuple(after_first))
    factors: list[PolyMatrix | None] = [None]
    for level in range(2, levels + 1):
        m = sp_factor(context, level, n)
        factors.append(m)
        row = m.row_vector_product(list(prefix_rows[-1]))
        prefix_rows.append(tuple(row))
    prefix_rows = prefix_rows[: levels + 1]
    components = prefix_rows[-1]
    return FibrationPresentation(
        kind="sp",
        n=n,
        levels=levels,
        context=context,
        components=components,
        prefix_rows=tuple(prefix_rows),
        factors=tuple(factors),
        inverses=tuple([None] * levels),
    )


@dataclass
class GVVariety:
    """A fiber-type variety of the projected row family."""

    kind: str
    n: int
    levels: int
    index: int | None  # sl component index
    target: Fraction | tuple[Fraction, ...]
    fibration: FibrationPresentation
    variety: VarietyPresentation


def gv_variety(
    kind: str,
    n: int,
    levels: int,
    index: int | None = None,
    target=None,
    order: str = "degrevlex",
) -> GVVariety:
    """SL: one component pinned to a nonzero scalar.  Sp: the parity
    half of the components pinned to a nonzero rational vector."""
    if levels < 2:
        raise ValueError("fiber varieties start at level 2")
    fib = build_fibration(kind, n, levels, order)
    if kind == "sl":
        if index is None or not 1 <= index <= n:
            raise ValueError("sl variety needs a component index in 1..n")
        a = Fraction(target if target is not None else 1)
        if a == 0:
            raise ValueError("sl target must be nonzero")
        relation = fib.component(index) - Polynomial.constant(fib.context, a)
        variety = VarietyPresentation(fib.context, [relation])
        return GVVariety("sl", n, levels, index, a, fib, variety)
    if target is None:
        raise ValueError("sp variety needs a target vector")
    a = tuple(Fraction(v) for v in target)
    if len(a) != n:
        raise ValueError(f"sp target must have {n} entries")
    if all(v == 0 for v in a):
        raise ValueError("sp target must be nonzero")
    half = fib.second_half() if levels % 2 == 0 else fib.first_half()
    relations = [
        comp - Polynomial.constant(fib.context, v) for comp, v in zip(half, a)
    ]
    variety = VarietyPresentation(fib.context, relations)
    return GVVariety("sp", n, levels, None, a, fib, variety)


def partial_identity_check(
    fib: FibrationPresentation, level: int, k: int, l: int, i: int
) -> bool:
    """The derivative of a component in one level variable against its
    closed form: minus the prefix component at the row index times the
    tail column entry at the column index."""
    if fib.kind != "sl":
        raise ValueError("the partial-derivative identity is for the sl family")
    if (k, l) not in sl_level_pairs(level, fib.n):
        raise ValueError(f"({k},{l}) is not a level-{level} variable")
    if not 1 <= i <= fib.n:
        raise ValueError("component index out of range")
    lhs = fib.component(i).partial(var_name(level, k, l))
    column = [
        Polynomial.constant(fib.context, 1 if j == i - 1 else 0)
        for j in range(fib.n)
    ]
    for j in range(fib.levels, level - 1, -1):
        column = fib.inverses[j - 1].column_product(column)
    rhs = -fib.prefix_rows[level][k - 1] * column[l - 1]
    return lhs == rhs


@dataclass
class VanishingLine:
    k: int
    l: int
    expected_zero: bool
    passed: bool
    detail: str = ""


def top_level_vanishing_report(
    gv: GVVariety, seed: int = 0, samples: int = 5
) -> list[VanishingLine]:
    """Vanishing pattern of the component derivatives in the top-level
    variables: identically zero exactly when the level parity and the
    column index say so, and nonzero at sampled points otherwise.

    The pattern is a statement about the components as polynomials, so
    the nonzero side is witnessed at ambient sample points with nonzero
    coordinates; fiber points will not do, the fiber can contain whole
    components of a derivative's zero locus."""
    if gv.kind != "sl":
        raise ValueError("the vanishing pattern is for the sl family")
    fib = gv.fibration
    level = fib.levels
    i = gv.index
    assert i is not None
    rng = random.Random(seed)
    arity = fib.context.arity
    points = [
        tuple(
            Fraction(rng.randint(1, 9) * rng.choice((1, -1)))
            for _ in range(arity)
        )
        for _ in range(samples)
    ]
    lines: list[VanishingLine] = []
    for k, l in sl_level_pairs(level, fib.n):
        partial = fib.component(i).partial(var_name(level, k, l))
        expected_zero = (level % 2 == 1 and l < i) or (
            level % 2 == 0 and l > i
        )
        if expected_zero:
            ok = partial.is_zero()
            detail = "identically zero" if ok else "unexpectedly nonzero"
        else:
            values = [partial.evaluate(pt) for pt in points]
            ok = all(v != 0 for v in values)
            detail = f"nonzero at {sum(1 for v in values if v != 0)}/{len(values)} points"
        lines.append(VanishingLine(k, l, expected_zero, ok, detail))
    return lines


def det_vector_field(
    variety: VarietyPresentation, names: Sequence[str]
) -> VectorField:
    """The determinant field in the given variables.

    For l relations and l+1 chosen variables, the coefficient of each
    chosen variable is the signed maximal minor of the relation Jacobian
    restricted to the other chosen variables; applying the field to a
    relation reproduces a determinant with a repeated row, so tangency
    is exact and is asserted here.
    """
    names = list(names)
    relations = variety.relations.generators
    if len(names) != len(relations) + 1:
        raise ValueError(
            f"need {len(relations) + 1} variables for {len(relations)} relations"
        )
    context = variety.context
    for name in names:
        context.index(name)
    rows = [[rel.partial(name) for name in names] for rel in relations]
    coeffs: dict[str, Polynomial] = {}
    for j, name in enumerate(names):
        if relations:
            sub = [
                [row[c] for c in range(len(names)) if c != j] for row in rows
            ]
            minor = PolyMatrix(context, sub).determinant()
        else:
            minor = Polynomial.constant(context, 1)
        coeffs[name] = minor if j % 2 == 0 else -minor
    field = VectorField(variety, coeffs, det_vars=tuple(names))
    for rel in relations:
        if not field.apply(rel).is_zero():
            raise CertificateError(
                "determinant field failed exact tangency; construction broken"
            )
    return field


@dataclass
class FiberReduction:
    """Result of expressing top-level variables from a fiber equation.

    substitutions map solved variable names to polynomials in the
    remaining variables of the input context.  free_names lists the
    coordinates the fiber leaves unconstrained: unsolved top-level
    variables, and for the Sp family also the first-factor coordinates
    that the projection never sees (those are reported by name even
    though the working context omits them).
    """

    kind: str
    n: int
    level: int
    target: tuple[Fraction, ...]
    pivot: str
    substitutions: dict[str, Polynomial]
    residual: GVVariety
    residual_relations: tuple[Polynomial, ...]  # in the input context
    free_names: tuple[str, ...]
    fibration: FibrationPresentation


def fiber_reduce(
    kind: str,
    n: int,
    level: int,
    target: Sequence[Fraction],
    order: str = "degrevlex",
) -> FiberReduction:
    """Solve the top level of a fiber in terms of the lower levels.

    SL reduces the full fiber over a vector: odd top level solves the
    last-row variables using the last target entry as pivot, even top
    level solves the first-row variables using the first entry.  Sp
    splits the target per parity and solves the n top-level variables
    that pair with the pivot entry of the residual target.
    """
    if level < 3:
        raise ValueError("reduction needs a top level of at least 3")
    if kind == "sl":
        return _sl_reduce(n, level, target, order)
    if kind == "sp":
        return _sp_reduce(n, level, target, order)
    raise ValueError(f"unknown fibration kind {kind!r}")


def _sl_reduce(
    n: int, level: int, target: Sequence[Fraction], order: str
) -> FiberReduction:
    a = tuple(Fraction(v) for v in target)
    if len(a) != n:
        raise ValueError(f"sl reduction target must have {n} entries")
    fib = build_fibration("sl", n, level, order)
    context = fib.context
    prev = fib.prefix_rows[level - 1]  # components of the one-level-lower row
    odd = level % 2 == 1
    pivot_index = n if odd else 1
    if a[pivot_index - 1] == 0:
        raise CertificateError(
            f"reduction pivot entry {pivot_index} of the target is zero"
        )
    pivot_value = a[pivot_index - 1]
    substitutions: dict[str, Polynomial] = {}
    # row times the top factor: column j reads
    #   sum_k a_k M[k][j] = prev_j, with M the top factor
    if odd:
        solve_js = range(n - 1, 0, -1)  # j < n, inner sums only see k > j
    else:
        solve_js = range(2, n + 1)
    for j in solve_js:
        expr = prev[j - 1] - Polynomial.constant(context, a[j - 1])
        if odd:
            others = [k for k in range(j + 1, n + 1) if k != pivot_index]
        else:
            others = [k for k in range(1, j) if k != pivot_index]
        for k in others:
            expr = expr - Polynomial.variable(
                context, var_name(level, k, j)
            ) * a[k - 1]
        substitutions[var_name(level, pivot_index, j)] = expr * (
            1 / pivot_value
        )
    residual_index = pivot_index
    residual_relation = prev[residual_index - 1] - Polynomial.constant(
        context, pivot_value
    )
    residual = gv_variety(
        "sl", n, level - 1, index=residual_index, target=pivot_value, order=order
    )
    solved = set(substitutions)
    free_names = tuple(
        var_name(level, k, l)
        for k, l in sl_level_pairs(level, n)
        if var_name(level, k, l) not in solved
    )
    return FiberReduction(
        kind="sl",
        n=n,
        level=level,
        target=a,
        pivot=f"a_{pivot_index}",
        substitutions=substitutions,
        residual=residual,
        residual_relations=(residual_relation,),
        free_names=free_names,
        fibration=fib,
    )


def _sp_reduce(
    n: int, level: int, target: Sequence[Fraction], order: str
) -> FiberReduction:
    y = tuple(Fraction(v) for v in target)
    if len(y) != 2 * n:
        raise ValueError(f"sp reduction target must have {2 * n} entries")
    fib = build_fibration("sp", n, level, order)
    context = fib.context
    prev = fib.prefix_rows[level - 1]
    if level % 2 == 0:
        # even top factor moves the second half; the first half persists
        a, b = y[:n], y[n:]
        kept = prev[:n]
        moving = prev[n:]
    else:
        b, a = y[:n], y[n:]
        kept = prev[n:]
        moving = prev[:n]
    pivot_index = None
    for p in range(1, n + 1):
        if a[p - 1] != 0:
            pivot_index = p
            break
    if pivot_index is None:
        raise CertificateError(
            "reduction needs a nonzero persistent half of the target"
        )
    p = pivot_index

    def pair(k: int, j: int) -> str:
        return var_name(level, min(k, j), max(k, j))

    substitutions: dict[str, Polynomial] = {}
    order_js = [j for j in range(1, n + 1) if j != p] + [p]
    for j in order_js:
        expr = Polynomial.constant(context, b[j - 1]) - moving[j - 1]
        for k in range(1, n + 1):
            if k == p:
                continue
            term = Polynomial.variable(context, pair(k, j))
            solved = substitutions.get(pair(k, j))
            if solved is not None:
                term = solved
            expr = expr - term * a[k - 1]
        substitutions[pair(p, j)] = expr * (1 / a[p - 1])
    residual_relations = tuple(
        comp - Polynomial.constant(context, v) for comp, v in zip(kept, a)
    )
    residual = gv_variety("sp", n, level - 1, target=a, order=order)
    solved = set(substitutions)
    free_level = tuple(
        var_name(level, k, l)
        for k, l in sp_level_pairs(n)
        if var_name(level, k, l) not in solved
    )
    hidden_first = tuple(
        var_name(1, k, l) for k in range(1, n) for l in range(k, n)
    )
    return FiberReduction(
        kind="sp",
        n=n,
        level=level,
        target=y,
        pivot=f"a_{p}",
        substitutions=substitutions,
        residual=residual,
        residual_relations=residual_relations,
        free_names=free_level + hidden_first,
        fibration=fib,
    )


def fiber_roundtrip_check(
    reduction: FiberReduction, budget: int | None = None
) -> bool:
    """Substituting the solved variables back into the fiber equations
    must produce exact zeros modulo the residual relations."""
    fib = reduction.fibration
    context = fib.context
    ideal = IdealPresentation(context, reduction.residual_relations)
    for comp, value in zip(fib.components, reduction.target):
        substituted = comp.substitute(reduction.substitutions, context)
        delta = substituted - Polynomial.constant(context, value)
        if not ideal.normal_form(delta, budget).is_zero():
            return False
    return True


@dataclass
class SmoothnessVerdict:
    classifier: str  # "smooth" | "singular"
    groebner: str  # "smooth" | "singular" | "budget-exceeded"
    agree: bool | None

    def render(self) -> str:
        if self.agree is None:
            return (
                f"classifier: {self.classifier}; groebner: {self.groebner}"
            )
        word = "agree" if self.agree else "disagree"
        return (
            f"classifier: {self.classifier}; groebner: {self.groebner} ({word})"
        )


def smoothness_classifier(gv: GVVariety) -> str:
    if gv.kind == "sl":
        assert gv.index is not None
        if gv.index < gv.n:
            return "smooth"
        return "smooth" if gv.target != 1 else "singular"
    if gv.levels % 2 == 1:
        return "smooth"
    e_n = tuple(
        Fraction(1 if i == gv.n - 1 else 0) for i in range(gv.n)
    )
    return "smooth" if tuple(gv.target) != e_n else "singular"


def smoothness_check(gv: GVVariety, budget: int | None = None) -> SmoothnessVerdict:
    """Family classification versus the Jacobian-ideal computation.

    The Groebner route declares the variety smooth when the relations
    together with the maximal minors of their Jacobian generate the unit
    ideal.  A budget overrun leaves that route inconclusive; a decisive
    disagreement raises, since one of the two routes must then be wrong.
    """
    classifier = smoothness_classifier(gv)
    relations = list(gv.variety.relations.generators)
    jac = jacobian(relations, gv.variety.context)
    minors = jac.minors(len(relations))
    ideal = IdealPresentation(
        gv.variety.context, relations + minors
    )
    try:
        groebner = "smooth" if ideal.contains_one(budget) else "singular"
    except BudgetError:
        return SmoothnessVerdict(classifier, "budget-exceeded", None)
    agree = classifier == groebner
    if not agree:
        raise CertificateError(
            f"smoothness routes disagree: classifier {classifier}, "
            f"groebner {groebner}"
        )
    return SmoothnessVerdict(classifier, groebner, True)
