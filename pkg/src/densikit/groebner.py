"""Reduced Groebner bases over the rationals, with a hard step budget.

The engine is deliberately small: Buchberger with the normal selection
strategy, the coprime-leading-monomial criterion, the chain criterion,
and full autoreduction at the end.  Output bases are monic and sorted
with the largest leading monomial first, so repeated runs over the same
input produce the same basis.

Every single-term cancellation during division consumes one unit of the
step budget.  When the budget runs out a BudgetError escapes; callers
that can live with an inconclusive answer catch it.
"""

from __future__ import annotations

import os
import threading
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import BudgetError
from .poly import (
    Polynomial,
    VarContext,
    exp_divides,
    exp_lcm,
    exp_mul,
    exp_sub,
)

DEFAULT_STEP_BUDGET = 1_000_000
BUDGET_ENV_VAR = "DENSIKIT_STEP_BUDGET"

_ZERO = Fraction(0)


def step_budget_limit() -> int:
    """Default budget, overridable through the environment."""
    raw = os.environ.get(BUDGET_ENV_VAR)
    if raw is None:
        return DEFAULT_STEP_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(
            f"{BUDGET_ENV_VAR} must be an integer, got {raw!r}"
        ) from None
    if value <= 0:
        raise ValueError(f"{BUDGET_ENV_VAR} must be positive, got {value}")
    return value


class _Budget:
    __slots__ = ("remaining",)

    def __init__(self, limit: int) -> None:
        self.remaining = limit

    def consume(self) -> None:
        self.remaining -= 1
        if self.remaining < 0:
            raise BudgetError(
                "reduction step budget exhausted; raise "
                f"{BUDGET_ENV_VAR} or pass a larger budget"
            )


def _as_budget(budget: int | _Budget | None) -> _Budget:
    if isinstance(budget, _Budget):
        return budget
    return _Budget(step_budget_limit() if budget is None else budget)


# Division works on raw term dicts; Polynomial is immutable and rebuilding
# it once per cancellation would dominate the runtime.


def _divide_terms(
    context: VarContext,
    terms: dict,
    divisors: Sequence[tuple[tuple, Fraction, dict]],
    budget: _Budget,
    quotients: list[dict] | None = None,
) -> dict:
    key = context.sort_key
    work = dict(terms)
    remainder: dict = {}
    while work:
        lead = max(work, key=key)
        coeff = work[lead]
        for i, (dm, dc, dterms) in enumerate(divisors):
            if exp_divides(dm, lead):
                shift = exp_sub(lead, dm)
                factor = coeff / dc
                for exp, c in dterms.items():
                    tgt = exp_mul(exp, shift)
                    acc = work.get(tgt, _ZERO) - factor * c
                    if acc:
                        work[tgt] = acc
                    else:
                        work.pop(tgt, None)
                if quotients is not None:
                    q = quotients[i]
                    q[shift] = q.get(shift, _ZERO) + factor
                budget.consume()
                break
        else:
            remainder[lead] = coeff
            del work[lead]
    return remainder


def _divisor_triple(p: Polynomial) -> tuple[tuple, Fraction, dict]:
    exp, coeff = p.leading_term()
    return exp, coeff, p.terms


def poly_divmod(
    p: Polynomial,
    divisors: Sequence[Polynomial],
    budget: int | None = None,
) -> tuple[list[Polynomial], Polynomial]:
    """Multivariate division: p = sum(q_i * divisors_i) + remainder.

    No remainder term is divisible by any divisor's leading monomial.
    Divisors are tried in the order given, so the quotients are
    reproducible.
    """
    context = p.context
    live = [(i, d) for i, d in enumerate(divisors) if not d.is_zero()]
    for _, d in live:
        if d.context is not context and d.context != context:
            raise ValueError("division requires a common variable context")
    b = _as_budget(budget)
    triples = [_divisor_triple(d) for _, d in live]
    raw_quotients: list[dict] = [{} for _ in live]
    rem = _divide_terms(context, p.terms, triples, b, raw_quotients)
    quotients = [Polynomial.zero(context)] * len(divisors)
    for (i, _), q in zip(live, raw_quotients):
        quotients[i] = Polynomial(context, q)
    return quotients, Polynomial(context, rem)


def _nf(p: Polynomial, triples, budget: _Budget) -> Polynomial:
    if p.is_zero() or not triples:
        return p
    return Polynomial(p.context, _divide_terms(p.context, p.terms, triples, budget))


def s_polynomial(f: Polynomial, g: Polynomial) -> Polynomial:
    fe, fc = f.leading_term()
    ge, gc = g.leading_term()
    lcm = exp_lcm(fe, ge)
    mf = Polynomial.monomial(f.context, exp_sub(lcm, fe), 1 / fc)
    mg = Polynomial.monomial(g.context, exp_sub(lcm, ge), 1 / gc)
    return mf * f - mg * g


def _monic(p: Polynomial) -> Polynomial:
    _, coeff = p.leading_term()
    if coeff == 1:
        return p
    return p * (1 / coeff)


def _interreduce(
    context: VarContext, polys: list[Polynomial], budget: _Budget
) -> list[Polynomial]:
    current = [_monic(p) for p in polys]
    changed = True
    while changed:
        changed = False
        result: list[Polynomial] = []
        for i, p in enumerate(current):
            others = result + current[i + 1 :]
            triples = [_divisor_triple(q) for q in others]
            r = _nf(p, triples, budget)
            if r.is_zero():
                changed = True
                continue
            r = _monic(r)
            if r != p:
                changed = True
            result.append(r)
        current = result
    current.sort(key=lambda q: context.sort_key(q.leading_monomial()), reverse=True)
    return current


def buchberger(
    generators: Iterable[Polynomial],
    budget: int | None = None,
) -> list[Polynomial]:
    """Reduced Groebner basis of the given generators.

    The zero ideal yields []; an ideal containing a nonzero constant
    yields [1].
    """
    gens = [g for g in generators if not g.is_zero()]
    if not gens:
        return []
    context = gens[0].context
    for g in gens:
        if g.context != context:
            raise ValueError("generators must share a variable context")
    b = _as_budget(budget)

    basis = _interreduce(context, gens, b)
    if not basis:
        return []
    one = Polynomial.constant(context, 1)
    if any(g.is_constant() for g in basis):
        return [one]

    lms = [g.leading_monomial() for g in basis]
    pairs: set[tuple[int, int]] = {
        (i, j) for i in range(len(basis)) for j in range(i + 1, len(basis))
    }
    key = context.sort_key

    def pair_key(ij: tuple[int, int]):
        i, j = ij
        return (key(exp_lcm(lms[i], lms[j])), i, j)

    while pairs:
        i, j = min(pairs, key=pair_key)
        pairs.discard((i, j))
        lcm = exp_lcm(lms[i], lms[j])
        if lcm == exp_mul(lms[i], lms[j]):
            continue  # coprime leading monomials reduce to zero
        chain = False
        for k in range(len(basis)):
            if k in (i, j):
                continue
            if not exp_divides(lms[k], lcm):
                continue
            a = (min(i, k), max(i, k))
            c = (min(j, k), max(j, k))
            if a not in pairs and c not in pairs:
                chain = True
                break
        if chain:
            continue
        s = s_polynomial(basis[i], basis[j])
        triples = [_divisor_triple(g) for g in basis]
        r = _nf(s, triples, b)
        if r.is_zero():
            continue
        r = _monic(r)
        if r.is_constant():
            return [one]
        basis.append(r)
        lms.append(r.leading_monomial())
        new = len(basis) - 1
        for k in range(new):
            pairs.add((k, new))

    return _interreduce(context, basis, b)


class IdealPresentation:
    """Generators of an ideal, with a lazily computed reduced basis.

    The basis is computed at most once per presentation and cached;
    concurrent callers block on a lock rather than duplicating work.
    """

    __slots__ = ("context", "generators", "_basis", "_lock")

    def __init__(
        self, context: VarContext, generators: Iterable[Polynomial]
    ) -> None:
        gens = []
        for g in generators:
            if g.context != context:
                raise ValueError("generator context mismatch")
            if not g.is_zero():
                gens.append(g)
        self.context = context
        self.generators: tuple[Polynomial, ...] = tuple(gens)
        self._basis: tuple[Polynomial, ...] | None = None
        self._lock = threading.Lock()

    def groebner(self, budget: int | None = None) -> tuple[Polynomial, ...]:
        with self._lock:
            if self._basis is None:
                self._basis = tuple(buchberger(self.generators, budget))
            return self._basis

    def normal_form(self, p: Polynomial, budget: int | None = None) -> Polynomial:
        if p.context != self.context:
            raise ValueError("polynomial context mismatch")
        basis = self.groebner(budget)
        if p.is_zero() or not basis:
            return p
        b = _as_budget(budget)
        triples = [_divisor_triple(g) for g in basis]
        return _nf(p, triples, b)

    def contains(self, p: Polynomial, budget: int | None = None) -> bool:
        return self.normal_form(p, budget).is_zero()

    def contains_one(self, budget: int | None = None) -> bool:
        basis = self.groebner(budget)
        return len(basis) == 1 and basis[0].is_constant()

    def is_proper(self, budget: int | None = None) -> bool:
        return not self.contains_one(budget)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IdealPresentation):
            return NotImplemented
        return self.context == other.context and self.generators == other.generators

    def __repr__(self) -> str:
        gens = ", ".join(str(g) for g in self.generators)
        return f"IdealPresentation([{gens}])"


def normal_form(
    p: Polynomial, ideal: IdealPresentation, budget: int | None = None
) -> Polynomial:
    return ideal.normal_form(p, budget)


def contains_one(ideal: IdealPresentation, budget: int | None = None) -> bool:
    return ideal.contains_one(budget)
