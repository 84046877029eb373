"""Affine varieties presented by complete intersections over the
rationals, plus deterministic exact point sampling."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import CertificateError
from .groebner import IdealPresentation
from .matrices import fraction_rank, jacobian, solve_exact
from .poly import Polynomial, VarContext


class VarietyPresentation:
    """An affine variety cut out by a list of relations.

    The recorded dimension is ambient arity minus relation count, which
    is the complete-intersection bookkeeping used throughout; it can be
    confirmed at a concrete point with verify_dimension.
    """

    __slots__ = ("context", "relations", "dim")

    def __init__(
        self, context: VarContext, relations: Iterable[Polynomial]
    ) -> None:
        ideal = IdealPresentation(context, relations)
        dim = context.arity - len(ideal.generators)
        if dim < 0:
            raise ValueError("more independent relations than variables")
        self.context = context
        self.relations = ideal
        self.dim = dim

    def is_proper(self, budget: int | None = None) -> bool:
        """True unless the relation ideal is the whole ring."""
        if not self.relations.generators:
            return True
        return self.relations.is_proper(budget)

    def normal_form(self, p: Polynomial, budget: int | None = None) -> Polynomial:
        return self.relations.normal_form(p, budget)

    def contains_point(self, point: Sequence[Fraction]) -> bool:
        return all(g.evaluate(point) == 0 for g in self.relations.generators)

    def verify_dimension(self, point: Sequence[Fraction]) -> bool:
        """Jacobian rank check at a point of the variety.

        Returns True when the point lies on the variety and the Jacobian
        of the relations has full rank there, so the local dimension
        agrees with the recorded one.
        """
        if not self.contains_point(point):
            raise ValueError("point does not lie on the variety")
        gens = self.relations.generators
        if not gens:
            return True
        jac = jacobian(list(gens), self.context)
        return fraction_rank(jac.evaluate(point)) == len(gens)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VarietyPresentation):
            return NotImplemented
        return (
            self.context == other.context
            and self.relations.generators == other.relations.generators
        )

    def __repr__(self) -> str:
        rels = ", ".join(str(g) for g in self.relations.generators)
        return f"VarietyPresentation([{rels}] in {' '.join(self.context.names)})"


def affine_space(context: VarContext) -> VarietyPresentation:
    return VarietyPresentation(context, [])


def sample_point(
    variety: VarietyPresentation,
    seed: int = 0,
    avoid: Sequence[Polynomial] = (),
    max_attempts: int = 64,
    spread: int = 5,
) -> tuple[Fraction, ...]:
    """Deterministic rational point on the variety.

    Strategy: pick one solve variable per relation (the first variable,
    in declaration order, that the relation is at most linear in and
    that no earlier relation claimed), randomize every other variable
    over small integers, and solve the resulting linear system exactly.
    Attempts where the system degenerates, or where some avoid
    polynomial vanishes, are retried with fresh random values.
    """
    context = variety.context
    relations = variety.relations.generators
    for p in avoid:
        if p.context != context:
            raise ValueError("avoid polynomial context mismatch")
    if not relations:
        rng = random.Random(seed)
        for _ in range(max_attempts):
            point = tuple(
                Fraction(rng.randint(-spread, spread)) for _ in context.names
            )
            if all(p.evaluate(point) != 0 for p in avoid):
                return point
        raise CertificateError("could not sample a point avoiding the given loci")

    solve_vars: list[str] = []
    for rel in relations:
        chosen = None
        for name in context.names:
            if name in solve_vars:
                continue
            if 0 < rel.degree_in(name) <= 1:
                chosen = name
                break
        if chosen is None:
            raise CertificateError(
                f"no linear solve variable available for relation {rel}"
            )
        solve_vars.append(chosen)

    solve_idx = [context.index(name) for name in solve_vars]
    free_idx = [i for i in range(context.arity) if i not in solve_idx]
    rng = random.Random(seed)

    for _ in range(max_attempts):
        assignment: dict[str, Polynomial] = {}
        values: dict[int, Fraction] = {}
        for i in free_idx:
            v = Fraction(rng.randint(-spread, spread))
            values[i] = v
            assignment[context.names[i]] = Polynomial.constant(context, v)
        substituted = [rel.substitute(assignment, context) for rel in relations]
        if any(s.total_degree() > 1 for s in substituted):
            continue  # solve variables interact nonlinearly this round
        rows = []
        rhs = []
        ok = True
        for s in substituted:
            row = []
            for name in solve_vars:
                row.append(s.partial(name).constant_value())
            linear_part = s
            for name, coeff in zip(solve_vars, row):
                linear_part = linear_part - Polynomial.variable(context, name) * coeff
            if not linear_part.is_constant():
                ok = False
                break
            rows.append(row)
            rhs.append(-linear_part.constant_value())
        if not ok:
            continue
        solution = solve_exact(rows, rhs)
        if solution is None:
            continue
        point = [Fraction(0)] * context.arity
        for i, v in values.items():
            point[i] = v
        for idx, v in zip(solve_idx, solution):
            point[idx] = v
        pt = tuple(point)
        if not variety.contains_point(pt):
            raise CertificateError("sampled point failed exact verification")
        if all(p.evaluate(pt) != 0 for p in avoid):
            return pt
    raise CertificateError(
        f"no usable sample point found in {max_attempts} attempts"
    )
