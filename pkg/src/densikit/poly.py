"""Exact sparse multivariate polynomials over the rationals.

A polynomial is a mapping from exponent tuples to nonzero Fraction
coefficients, tied to a variable context that fixes variable names and
the monomial order.  The zero polynomial is the empty mapping, and every
operation returns canonical form, so structural equality is semantic
equality.  No floating point is used anywhere except the explicitly
named float evaluator, which exists only to feed numeric oracles.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .errors import ParseError

RationalLike = Union[int, Fraction]

_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

ORDERS = ("degrevlex", "lex")


@dataclass(frozen=True)
class VarContext:
    """Ordered variable names plus a monomial order tag."""

    names: tuple[str, ...]
    order: str = "degrevlex"

    def __post_init__(self):
        if not self.names:
            raise ValueError("a variable context needs at least one variable")
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")
        for name in self.names:
            if not _NAME_RE.match(name):
                raise ValueError(f"invalid variable name {name!r}")
        if self.order not in ORDERS:
            raise ValueError(f"unknown monomial order {self.order!r}")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(self.names)})

    @property
    def arity(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValueError(f"unknown variable {name!r}") from None

    def sort_key(self, exp: tuple[int, ...]):
        """Key that sorts exponent tuples ascending in the monomial order."""
        if self.order == "lex":
            return exp
        return (sum(exp), tuple(-e for e in reversed(exp)))

    def extend(self, extra: Iterable[str], order: str | None = None) -> "VarContext":
        return VarContext(self.names + tuple(extra), order or self.order)


def var_context(names: str | Sequence[str], order: str = "degrevlex") -> VarContext:
    """Build a context from 'x y z', 'x,y,z' or a sequence of names."""
    if isinstance(names, str):
        parts = tuple(n for n in re.split(r"[,\s]+", names.strip()) if n)
    else:
        parts = tuple(names)
    return VarContext(parts, order)


def exp_mul(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def exp_divides(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    """True when monomial a divides monomial b."""
    return all(x <= y for x, y in zip(a, b))


def exp_sub(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x - y for x, y in zip(a, b))


def exp_lcm(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(max(x, y) for x, y in zip(a, b))


class Polynomial:
    """Immutable sparse polynomial over Fraction coefficients."""

    __slots__ = ("context", "terms", "_hash")

    def __init__(self, context: VarContext, terms: Mapping[tuple[int, ...], RationalLike]):
        canonical: dict[tuple[int, ...], Fraction] = {}
        arity = context.arity
        for exp, coeff in terms.items():
            if len(exp) != arity:
                raise ValueError(f"exponent tuple {exp} does not match arity {arity}")
            c = coeff if isinstance(coeff, Fraction) else Fraction(coeff)
            if c:
                canonical[exp] = c
        object.__setattr__(self, "context", context)
        object.__setattr__(self, "terms", canonical)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # construction helpers

    @classmethod
    def zero(cls, context: VarContext) -> "Polynomial":
        return cls(context, {})

    @classmethod
    def constant(cls, context: VarContext, value: RationalLike) -> "Polynomial":
        return cls(context, {(0,) * context.arity: value})

    @classmethod
    def variable(cls, context: VarContext, name: str) -> "Polynomial":
        exp = [0] * context.arity
        exp[context.index(name)] = 1
        return cls(context, {tuple(exp): 1})

    @classmethod
    def monomial(cls, context: VarContext, exp: tuple[int, ...], coeff: RationalLike = 1) -> "Polynomial":
        return cls(context, {exp: coeff})

    # basic queries

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(exp) for exp in self.terms)

    def constant_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()))

    def total_degree(self) -> int:
        """Total degree; the zero polynomial reports -1."""
        if not self.terms:
            return -1
        return max(sum(exp) for exp in self.terms)

    def degree_in(self, name: str) -> int:
        i = self.context.index(name)
        if not self.terms:
            return -1
        return max(exp[i] for exp in self.terms)

    def variables(self) -> set[str]:
        used: set[str] = set()
        for exp in self.terms:
            for i, e in enumerate(exp):
                if e:
                    used.add(self.context.names[i])
        return used

    def sorted_terms(self, reverse: bool = True) -> list[tuple[tuple[int, ...], Fraction]]:
        key = self.context.sort_key
        return sorted(self.terms.items(), key=lambda item: key(item[0]), reverse=reverse)

    def leading_term(self) -> tuple[tuple[int, ...], Fraction]:
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        key = self.context.sort_key
        exp = max(self.terms, key=key)
        return exp, self.terms[exp]

    def leading_monomial(self) -> tuple[int, ...]:
        return self.leading_term()[0]

    def coefficient_of(self, name: str, power: int) -> "Polynomial":
        """Coefficient of name**power, as a polynomial in the same context."""
        i = self.context.index(name)
        out: dict[tuple[int, ...], Fraction] = {}
        for exp, coeff in self.terms.items():
            if exp[i] == power:
                reduced = list(exp)
                reduced[i] = 0
                out[tuple(reduced)] = coeff
        return Polynomial(self.context, out)

    # arithmetic

    def _check_context(self, other: "Polynomial") -> None:
        if self.context != other.context:
            raise ValueError("context mismatch between polynomials")

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        self._check_context(other)
        out = dict(self.terms)
        for exp, coeff in other.terms.items():
            acc = out.get(exp)
            if acc is None:
                out[exp] = coeff
            else:
                acc = acc + coeff
                if acc:
                    out[exp] = acc
                else:
                    del out[exp]
        return Polynomial(self.context, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.context, {exp: -c for exp, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            if not other:
                return Polynomial.zero(self.context)
            return Polynomial(self.context, {exp: c * other for exp, c in self.terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_context(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                exp = exp_mul(ea, eb)
                acc = out.get(exp)
                if acc is None:
                    out[exp] = ca * cb
                else:
                    acc = acc + ca * cb
                    if acc:
                        out[exp] = acc
                    else:
                        del out[exp]
        return Polynomial(self.context, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial exponent must be a non-negative integer")
        result = Polynomial.constant(self.context, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self.context, other)
        return NotImplemented

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.context, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.context == other.context and self.terms == other.terms

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash((self.context, frozenset(self.terms.items())))
            object.__setattr__(self, "_hash", h)
        return h

    # calculus and evaluation

    def partial(self, name: str) -> "Polynomial":
        """Partial derivative with respect to one variable."""
        i = self.context.index(name)
        out: dict[tuple[int, ...], Fraction] = {}
        for exp, coeff in self.terms.items():
            e = exp[i]
            if e:
                lowered = list(exp)
                lowered[i] = e - 1
                key = tuple(lowered)
                out[key] = out.get(key, Fraction(0)) + coeff * e
        return Polynomial(self.context, out)

    def evaluate(self, point: Sequence[RationalLike]) -> Fraction:
        """Exact evaluation at a rational point."""
        if len(point) != self.context.arity:
            raise ValueError(f"point arity {len(point)} does not match context arity {self.context.arity}")
        vals = [v if isinstance(v, Fraction) else Fraction(v) for v in point]
        total = Fraction(0)
        for exp, coeff in self.terms.items():
            term = coeff
            for v, e in zip(vals, exp):
                if e:
                    term *= v ** e
            total += term
        return total

    def eval_float(self, point: Sequence[float]) -> float:
        """Float evaluation, for numeric oracles only."""
        if len(point) != self.context.arity:
            raise ValueError("point arity does not match context arity")
        total = 0.0
        for exp, coeff in self.terms.items():
            term = float(coeff)
            for v, e in zip(point, exp):
                if e:
                    term *= v ** e
            total += term
        return total

    def substitute(self, images: Mapping[str, "Polynomial"], target: VarContext | None = None) -> "Polynomial":
        """Compose with a variable substitution.

        Variables absent from images map to the same-named variable of the
        target context, which defaults to the context of the image
        polynomials (or self's context when images is empty).
        """
        if target is None:
            target = next(iter(images.values())).context if images else self.context
        for name, img in images.items():
            self.context.index(name)
            if img.context != target:
                raise ValueError("substitution image context mismatch")
        images_by_index: dict[int, Polynomial] = {}
        for i, name in enumerate(self.context.names):
            if name in images:
                images_by_index[i] = images[name]
            else:
                images_by_index[i] = Polynomial.variable(target, name)
        power_cache: dict[tuple[int, int], Polynomial] = {}

        def cached_power(i: int, e: int) -> Polynomial:
            key = (i, e)
            got = power_cache.get(key)
            if got is None:
                got = images_by_index[i] ** e
                power_cache[key] = got
            return got

        total = Polynomial.zero(target)
        for exp, coeff in self.terms.items():
            term = Polynomial.constant(target, coeff)
            for i, e in enumerate(exp):
                if e:
                    term = term * cached_power(i, e)
            total = total + term
        return total

    def in_context(self, target: VarContext) -> "Polynomial":
        """Reinterpret the polynomial in a context containing the same names.

        Only variables that actually occur need to exist in the target,
        so coefficients extracted from an extended context can move back
        to the base context.
        """
        if target == self.context:
            return self
        return self.rename(target, {})

    def rename(self, target: VarContext, name_map: Mapping[str, str]) -> "Polynomial":
        """Move to a target context while renaming occurring variables."""
        names = self.context.names
        mapping: dict[int, int] = {}
        out: dict[tuple[int, ...], Fraction] = {}
        for exp, coeff in self.terms.items():
            new_exp = [0] * target.arity
            for i, e in enumerate(exp):
                if e:
                    j = mapping.get(i)
                    if j is None:
                        j = target.index(name_map.get(names[i], names[i]))
                        mapping[i] = j
                    new_exp[j] = e
            out[tuple(new_exp)] = coeff
        return Polynomial(target, out)

    # rendering

    def __str__(self) -> str:
        return render_poly(self)

    def __repr__(self) -> str:
        return f"Polynomial({render_poly(self)!r})"


def constant_ratio(p: Polynomial, q: Polynomial) -> Fraction | None:
    """Return c with p == c*q when such a nonzero constant exists."""
    if p.is_zero() or q.is_zero():
        return None
    if set(p.terms) != set(q.terms):
        return None
    ratio: Fraction | None = None
    for exp, coeff in p.terms.items():
        r = coeff / q.terms[exp]
        if ratio is None:
            ratio = r
        elif ratio != r:
            return None
    return ratio


# -- parsing ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*^()/]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if not match:
            if text[pos:].strip():
                raise ParseError(f"unexpected character {text[pos]!r}", pos)
            break
        if match.lastgroup == "num":
            tokens.append(("num", match.group("num"), match.start("num")))
        elif match.lastgroup == "name":
            tokens.append(("name", match.group("name"), match.start("name")))
        else:
            tokens.append(("op", match.group("op"), match.start("op")))
        pos = match.end()
    return tokens


class _Parser:
    """Recursive-descent parser for +, -, *, ^ expressions over one context.

    Rational literals are written num/den and bind tighter than ^; the
    caret takes a non-negative integer exponent.
    """

    def __init__(self, text: str, context: VarContext):
        self.tokens = _tokenize(text)
        self.context = context
        self.pos = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of expression")
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> None:
        tok = self.peek()
        if tok is None or tok[0] != "op" or tok[1] != op:
            where = tok[2] if tok else None
            raise ParseError(f"expected {op!r}", where)
        self.pos += 1

    def parse(self) -> Polynomial:
        value = self.expr()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected token {tok[1]!r}", tok[2])
        return value

    def expr(self) -> Polynomial:
        value = self.term()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in "+-":
                self.pos += 1
                rhs = self.term()
                value = value + rhs if tok[1] == "+" else value - rhs
            else:
                return value

    def term(self) -> Polynomial:
        value = self.unary()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] == "*":
                self.pos += 1
                value = value * self.unary()
            else:
                return value

    def unary(self) -> Polynomial:
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] == "-":
            self.pos += 1
            return -self.unary()
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] == "^":
            self.pos += 1
            exp_tok = self.peek()
            if exp_tok is None or exp_tok[0] != "num":
                where = exp_tok[2] if exp_tok else None
                raise ParseError("exponent must be a non-negative integer", where)
            self.pos += 1
            return base ** int(exp_tok[1])
        return base

    def atom(self) -> Polynomial:
        tok = self.take()
        kind, text, where = tok
        if kind == "num":
            value = Fraction(int(text))
            nxt = self.peek()
            if nxt and nxt[0] == "op" and nxt[1] == "/":
                self.pos += 1
                den_tok = self.peek()
                if den_tok is None or den_tok[0] != "num":
                    raise ParseError("rational literal needs an integer denominator",
                                     den_tok[2] if den_tok else None)
                self.pos += 1
                den = int(den_tok[1])
                if den == 0:
                    raise ParseError("zero denominator in rational literal", den_tok[2])
                value = Fraction(int(text), den)
            return Polynomial.constant(self.context, value)
        if kind == "name":
            try:
                return Polynomial.variable(self.context, text)
            except ValueError:
                raise ParseError(f"unknown variable {text!r}", where) from None
        if text == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        if text == "/":
            raise ParseError("'/' is only allowed inside rational literals", where)
        raise ParseError(f"unexpected token {text!r}", where)


def parse_poly(text: str, context: VarContext) -> Polynomial:
    """Parse an expression into a canonical polynomial."""
    return _Parser(text, context).parse()


def render_fraction(value: Fraction) -> str:
    return str(value)


def render_poly(p: Polynomial) -> str:
    """Deterministic rendering; parse_poly(render_poly(p)) == p."""
    if p.is_zero():
        return "0"
    names = p.context.names
    pieces: list[str] = []
    for position, (exp, coeff) in enumerate(p.sorted_terms()):
        factors = [
            name if e == 1 else f"{name}^{e}"
            for name, e in zip(names, exp)
            if e
        ]
        magnitude = abs(coeff)
        if not factors:
            body = str(magnitude)
        elif magnitude == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(magnitude)] + factors)
        if position == 0:
            pieces.append(body if coeff > 0 else f"-{body}")
        else:
            pieces.append(f" + {body}" if coeff > 0 else f" - {body}")
    return "".join(pieces)
