"""Polynomial vector fields on affine varieties: derivation calculus,
completeness certificates, and exact algebraic flows.

A vector field is stored through its coefficient functions, one per
ambient coordinate.  All kernel and nilpotency questions are decided in
the coordinate ring, i.e. modulo the variety's relation ideal via
Groebner normal forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from typing import ClassVar, Mapping, Sequence

from .errors import CertificateError
from .matrices import jacobian
from .poly import Polynomial, RationalLike, VarContext, constant_ratio, parse_poly
from .varieties import VarietyPresentation

DEFAULT_NILPOTENCY_BOUND = 64
DEFAULT_KERNEL_CAP = 32


class VectorField:
    """Derivation of the coordinate ring, given by ambient coefficients.

    shear provenance records that the field was built as factor * inner
    with the factor expected in the kernel of the inner field; det_vars
    records construction as a determinant field in those variables.
    Provenance never substitutes for a check, it only tells the
    certificate search which evidence to try first.
    """

    __slots__ = ("variety", "coeffs", "shear", "det_vars", "_tangent")

    def __init__(
        self,
        variety: VarietyPresentation,
        coeffs: Mapping[str, Polynomial],
        shear: tuple[Polynomial, "VectorField"] | None = None,
        det_vars: tuple[str, ...] | None = None,
    ) -> None:
        context = variety.context
        clean: dict[str, Polynomial] = {}
        for name, c in coeffs.items():
            context.index(name)
            if c.context != context:
                raise ValueError(f"coefficient context mismatch for {name}")
            if not c.is_zero():
                clean[name] = c
        ordered = {n: clean[n] for n in context.names if n in clean}
        self.variety = variety
        self.coeffs = ordered
        self.shear = shear
        self.det_vars = det_vars
        self._tangent: bool | None = None

    @classmethod
    def parse(
        cls, variety: VarietyPresentation, coeffs: Mapping[str, str]
    ) -> "VectorField":
        context = variety.context
        return cls(
            variety,
            {name: parse_poly(text, context) for name, text in coeffs.items()},
        )

    @classmethod
    def coordinate(cls, variety: VarietyPresentation, name: str) -> "VectorField":
        one = Polynomial.constant(variety.context, 1)
        return cls(variety, {name: one})

    def coefficient(self, name: str) -> Polynomial:
        self.variety.context.index(name)
        return self.coeffs.get(name, Polynomial.zero(self.variety.context))

    def coefficient_vector(self) -> list[Polynomial]:
        return [self.coefficient(name) for name in self.variety.context.names]

    def support(self) -> tuple[str, ...]:
        return tuple(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def apply(self, f: Polynomial) -> Polynomial:
        """The derivation applied to a ring element (ambient, not reduced)."""
        context = self.variety.context
        if f.context != context:
            raise ValueError("argument context mismatch")
        acc = Polynomial.zero(context)
        for name, c in self.coeffs.items():
            df = f.partial(name)
            if not df.is_zero():
                acc = acc + c * df
        return acc

    def evaluate(self, point: Sequence[Fraction]) -> tuple[Fraction, ...]:
        return tuple(
            self.coefficient(name).evaluate(point)
            for name in self.variety.context.names
        )

    def scale(self, factor: Polynomial | RationalLike) -> "VectorField":
        context = self.variety.context
        if isinstance(factor, (int, Fraction)):
            factor = Polynomial.constant(context, factor)
        if factor.context != context:
            raise ValueError("scale factor context mismatch")
        return VectorField(
            self.variety, {n: factor * c for n, c in self.coeffs.items()}
        )

    def __neg__(self) -> "VectorField":
        return VectorField(self.variety, {n: -c for n, c in self.coeffs.items()})

    def __add__(self, other: "VectorField") -> "VectorField":
        self._check_compatible(other)
        out: dict[str, Polynomial] = dict(self.coeffs)
        for name, c in other.coeffs.items():
            out[name] = out.get(name, Polynomial.zero(self.variety.context)) + c
        return VectorField(self.variety, out)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.variety == other.variety and self.coeffs == other.coeffs

    def _check_compatible(self, other: "VectorField") -> None:
        if self.variety != other.variety:
            raise ValueError("vector fields live on different varieties")

    def is_tangent(self, budget: int | None = None) -> bool:
        """Whether the field restricts to the variety (images of the
        relations lie in the relation ideal)."""
        if self._tangent is None:
            ok = all(
                self.variety.normal_form(self.apply(g), budget).is_zero()
                for g in self.variety.relations.generators
            )
            self._tangent = ok
        return self._tangent

    def __repr__(self) -> str:
        body = ", ".join(f"d{n}: {c}" for n, c in self.coeffs.items())
        return f"VectorField({body})"


def shear_multiple(factor: Polynomial, inner: VectorField) -> VectorField:
    """factor * inner, remembering the decomposition."""
    context = inner.variety.context
    if factor.context != context:
        raise ValueError("shear factor context mismatch")
    return VectorField(
        inner.variety,
        {n: factor * c for n, c in inner.coeffs.items()},
        shear=(factor, inner),
    )


def lie_bracket(a: VectorField, b: VectorField) -> VectorField:
    a._check_compatible(b)
    names = [
        n
        for n in a.variety.context.names
        if n in a.coeffs or n in b.coeffs
    ]
    out = {
        n: a.apply(b.coefficient(n)) - b.apply(a.coefficient(n)) for n in names
    }
    return VectorField(a.variety, out)


def kernel_degree(
    f: Polynomial,
    field: VectorField,
    cap: int = DEFAULT_KERNEL_CAP,
    budget: int | None = None,
) -> int | None:
    """Least d with field^d(f) = 0 in the coordinate ring, or None if
    the cap is reached first."""
    if not field.is_tangent(budget):
        raise CertificateError(
            "kernel degree is only defined for tangent fields"
        )
    variety = field.variety
    cur = variety.normal_form(f, budget)
    if cur.is_zero():
        return 0
    for d in range(1, cap + 1):
        cur = variety.normal_form(field.apply(cur), budget)
        if cur.is_zero():
            return d
    return None


@dataclass
class LndScan:
    """Outcome of the coordinate-chain nilpotency scan.

    status is 'lnd', 'not_lnd' or 'unknown'.  chains maps each
    coordinate to its reduced iterate chain c_0, ..., c_{d-1} (the last
    nonzero entries).  eigen witnesses non-nilpotency: the iterate of
    that coordinate reproduced itself scaled by the recorded constant.
    """

    status: str
    depths: dict[str, int] = dataclass_field(default_factory=dict)
    chains: dict[str, list[Polynomial]] = dataclass_field(default_factory=dict)
    eigen: tuple[str, Fraction, int] | None = None
    bound: int = DEFAULT_NILPOTENCY_BOUND


def lnd_certificate(
    field: VectorField,
    bound: int = DEFAULT_NILPOTENCY_BOUND,
    budget: int | None = None,
    growth_window: int = 8,
    term_cap: int = 300,
) -> LndScan:
    """Decide local nilpotency by iterating on the coordinates.

    Every ring element is a polynomial in the coordinates, so the
    derivation is locally nilpotent iff each coordinate dies under
    finitely many applications; the scan bounds that search and reports
    an eigenvector witness when an iterate reproduces itself up to a
    constant.  Two abort rules keep runaway chains cheap: a chain whose
    total degree rises growth_window times in a row, or whose iterate
    exceeds term_cap terms, is abandoned as unknown.  Aborting can only
    under-claim, never wrongly certify.
    """
    if not field.is_tangent(budget):
        raise CertificateError("nilpotency scan requires a tangent field")
    variety = field.variety
    depths: dict[str, int] = {}
    chains: dict[str, list[Polynomial]] = {}
    for name in variety.context.names:
        cur = variety.normal_form(
            Polynomial.variable(variety.context, name), budget
        )
        chain: list[Polynomial] = []
        depth: int | None = 0 if cur.is_zero() else None
        k = 0
        rising = 0
        while depth is None and k < bound:
            chain.append(cur)
            nxt = variety.normal_form(field.apply(cur), budget)
            k += 1
            if nxt.is_zero():
                depth = k
                break
            ratio = constant_ratio(nxt, cur)
            if ratio is not None:
                return LndScan(
                    status="not_lnd",
                    depths=depths,
                    chains=chains,
                    eigen=(name, ratio, k),
                    bound=bound,
                )
            rising = rising + 1 if nxt.total_degree() > cur.total_degree() else 0
            if rising >= growth_window or len(nxt.terms) > term_cap:
                return LndScan(
                    status="unknown", depths=depths, chains=chains, bound=bound
                )
            cur = nxt
        if depth is None:
            return LndScan(status="unknown", depths=depths, chains=chains, bound=bound)
        depths[name] = depth
        chains[name] = chain
    return LndScan(status="lnd", depths=depths, chains=chains, bound=bound)


# completeness certificates, strongest evidence first


@dataclass(frozen=True)
class LndCertificate:
    variant: ClassVar[str] = "LND"
    flow_capable: ClassVar[bool] = True
    depths: tuple[tuple[str, int], ...]


@dataclass(frozen=True, eq=False)
class KernelMultipleCertificate:
    variant: ClassVar[str] = "KernelMultipleOfLND"
    flow_capable: ClassVar[bool] = True
    factor: Polynomial
    inner: LndCertificate
    inner_field: VectorField


@dataclass(frozen=True)
class LinearCoefficientsCertificate:
    variant: ClassVar[str] = "LinearCoefficients"
    flow_capable: ClassVar[bool] = False


@dataclass(frozen=True)
class TriangularLinearCertificate:
    variant: ClassVar[str] = "TriangularLinear"
    flow_capable: ClassVar[bool] = False
    ordering: tuple[str, ...] = ()


@dataclass(frozen=True)
class UnknownCompleteness:
    variant: ClassVar[str] = "Unknown"
    flow_capable: ClassVar[bool] = False
    reason: str = ""


CompletenessCertificate = (
    LndCertificate
    | KernelMultipleCertificate
    | LinearCoefficientsCertificate
    | TriangularLinearCertificate
    | UnknownCompleteness
)


def _triangular_ordering(
    field: VectorField, budget: int | None
) -> tuple[str, ...] | None:
    """Greedy search for a coordinate ordering in which the field is
    triangular with linear diagonal."""
    variety = field.variety
    context = variety.context
    placed: list[str] = []
    remaining = list(context.names)
    images = {
        name: variety.normal_form(
            field.coefficient(name), budget
        )
        for name in remaining
    }
    while remaining:
        chosen = None
        for name in remaining:
            image = images[name]
            if image.degree_in(name) > 1:
                continue
            alpha = image.coefficient_of(name, 1)
            beta = image.coefficient_of(name, 0)
            used = alpha.variables() | beta.variables()
            if used <= set(placed):
                chosen = name
                break
        if chosen is None:
            return None
        placed.append(chosen)
        remaining.remove(chosen)
    return tuple(placed)


def completeness_certificate(
    field: VectorField,
    bound: int = DEFAULT_NILPOTENCY_BOUND,
    budget: int | None = None,
) -> CompletenessCertificate:
    """Strongest completeness evidence the syntactic criteria can find.

    Order of attempts: locally nilpotent; kernel multiple of a locally
    nilpotent field (from shear provenance); globally linear
    coefficients; triangular with linear diagonal.  Anything else is
    reported as Unknown, never as a refutation.
    """
    scan = lnd_certificate(field, bound, budget)
    if scan.status == "lnd":
        return LndCertificate(depths=tuple(sorted(scan.depths.items())))
    if field.shear is not None:
        factor, inner = field.shear
        in_kernel = field.variety.normal_form(inner.apply(factor), budget).is_zero()
        if in_kernel:
            inner_scan = lnd_certificate(inner, bound, budget)
            if inner_scan.status == "lnd":
                return KernelMultipleCertificate(
                    factor=factor,
                    inner=LndCertificate(
                        depths=tuple(sorted(inner_scan.depths.items()))
                    ),
                    inner_field=inner,
                )
    if all(c.total_degree() <= 1 for c in field.coeffs.values()):
        return LinearCoefficientsCertificate()
    ordering = _triangular_ordering(field, budget)
    if ordering is not None:
        return TriangularLinearCertificate(ordering=ordering)
    if scan.status == "not_lnd" and scan.eigen is not None:
        name, ratio, k = scan.eigen
        reason = (
            f"iterate {k} of {name} is the previous iterate scaled by {ratio}"
        )
    else:
        reason = f"no coordinate chain terminated within bound {scan.bound}"
    return UnknownCompleteness(reason=reason)


# algebraic flows


@dataclass
class FlowMap:
    """Polynomial flow in an extended context with one time variable.

    images maps each ambient coordinate to its flow image; variables
    outside the mapping are unmoved.
    """

    field: VectorField
    time: str
    context: VarContext
    images: dict[str, Polynomial]

    def image(self, name: str) -> Polynomial:
        self.field.variety.context.index(name)
        got = self.images.get(name)
        if got is not None:
            return got
        return Polynomial.variable(self.context, name)

    def image_vector(self) -> list[Polynomial]:
        return [self.image(n) for n in self.field.variety.context.names]


_TIME_CANDIDATES = ("t", "s", "r", "u")


def fresh_time_symbols(context: VarContext, count: int = 1) -> list[str]:
    taken = set(context.names)
    out: list[str] = []
    for cand in _TIME_CANDIDATES:
        if cand not in taken:
            out.append(cand)
            taken.add(cand)
            if len(out) == count:
                return out
    i = 0
    while len(out) < count:
        cand = f"t{i}"
        if cand not in taken:
            out.append(cand)
            taken.add(cand)
        i += 1
    return out


def _lnd_flow(field: VectorField, scan: LndScan) -> FlowMap:
    ambient = field.variety.context
    time = fresh_time_symbols(ambient, 1)[0]
    ext = ambient.extend([time])
    tvar = Polynomial.variable(ext, time)
    images: dict[str, Polynomial] = {}
    for name in ambient.names:
        chain = scan.chains.get(name, [])
        acc = Polynomial.zero(ext)
        tpow = Polynomial.constant(ext, 1)
        for k, c in enumerate(chain):
            if k:
                tpow = tpow * tvar
            acc = acc + c.in_context(ext) * tpow * Fraction(1, math.factorial(k))
        images[name] = acc
    return FlowMap(field=field, time=time, context=ext, images=images)


def algebraic_flow(
    field: VectorField,
    bound: int = DEFAULT_NILPOTENCY_BOUND,
    budget: int | None = None,
) -> FlowMap:
    """Exact polynomial flow of a field with flow-capable evidence.

    Locally nilpotent fields get the truncated exponential series of
    their coordinate chains.  A kernel multiple f * V flows like V with
    the time variable rescaled by f.
    """
    cert = completeness_certificate(field, bound, budget)
    if isinstance(cert, LndCertificate):
        scan = lnd_certificate(field, bound, budget)
        return _lnd_flow(field, scan)
    if isinstance(cert, KernelMultipleCertificate):
        inner_scan = lnd_certificate(cert.inner_field, bound, budget)
        base = _lnd_flow(cert.inner_field, inner_scan)
        ext = base.context
        scaled_time = cert.factor.in_context(ext) * Polynomial.variable(
            ext, base.time
        )
        images = {
            name: img.substitute({base.time: scaled_time}, ext)
            for name, img in base.images.items()
        }
        return FlowMap(field=field, time=base.time, context=ext, images=images)
    raise CertificateError(
        f"no algebraic flow for completeness variant {cert.variant}"
    )


def _time_coefficients(
    p: Polynomial, time: str, ambient: VarContext
) -> list[Polynomial]:
    top = p.degree_in(time)
    if top < 0:
        return []
    return [p.coefficient_of(time, k).in_context(ambient) for k in range(top + 1)]


def flow_identity_check(flow: FlowMap, budget: int | None = None) -> bool:
    """Flow at time zero is the identity in the coordinate ring."""
    variety = flow.field.variety
    ambient = variety.context
    for name in ambient.names:
        at_zero = flow.image(name).coefficient_of(flow.time, 0).in_context(ambient)
        delta = at_zero - Polynomial.variable(ambient, name)
        if not variety.normal_form(delta, budget).is_zero():
            return False
    return True


def flow_preserves_variety(flow: FlowMap, budget: int | None = None) -> bool:
    """Relations composed with the flow stay in the relation ideal,
    coefficient by coefficient in the time variable."""
    variety = flow.field.variety
    ambient = variety.context
    for g in variety.relations.generators:
        composed = g.substitute(flow.images, flow.context)
        delta = composed - g.in_context(flow.context)
        for c in _time_coefficients(delta, flow.time, ambient):
            if not variety.normal_form(c, budget).is_zero():
                return False
    return True


def flow_group_law_check(flow: FlowMap, budget: int | None = None) -> bool:
    """Composing the flow at two independent times equals the flow at
    their sum, in the coordinate ring."""
    variety = flow.field.variety
    ambient = variety.context
    second = fresh_time_symbols(flow.context, 1)[0]
    big = ambient.extend([flow.time, second])
    images_second = {
        name: img.rename(big, {flow.time: second})
        for name, img in flow.images.items()
    }
    tsum = Polynomial.variable(big, flow.time) + Polynomial.variable(big, second)
    for name in ambient.names:
        img = flow.image(name).in_context(big)
        composed = img.substitute(images_second, big)
        summed = img.substitute({flow.time: tsum}, big)
        delta = composed - summed
        for k in range(delta.degree_in(flow.time) + 1):
            slice_k = delta.coefficient_of(flow.time, k)
            for c in _time_coefficients(slice_k, second, ambient):
                if not variety.normal_form(c, budget).is_zero():
                    return False
    return True


def flow_field_consistency_check(flow: FlowMap, budget: int | None = None) -> bool:
    """d/dt of the flow images equals the field coefficients composed
    with the flow, in the coordinate ring."""
    variety = flow.field.variety
    ambient = variety.context
    for name in ambient.names:
        lhs = flow.image(name).partial(flow.time)
        rhs = flow.field.coefficient(name).substitute(flow.images, flow.context)
        delta = lhs - rhs
        for c in _time_coefficients(delta, flow.time, ambient):
            if not variety.normal_form(c, budget).is_zero():
                return False
    return True


def flow_differential_check(
    field: VectorField,
    factor: Polynomial,
    point: Sequence[Fraction],
    tangent: Sequence[Fraction],
    bound: int = DEFAULT_NILPOTENCY_BOUND,
    budget: int | None = None,
) -> bool:
    """Differential of the shear flow at one of its fixed points.

    With the factor vanishing at the point and lying in the kernel of
    the (locally nilpotent) field, the time-t differential applied to a
    tangent vector W must equal W + t * d_x(factor)(W) * field(x),
    exactly as polynomials in t.
    """
    variety = field.variety
    ambient = variety.context
    point = tuple(Fraction(v) for v in point)
    w = tuple(Fraction(v) for v in tangent)
    if len(w) != ambient.arity:
        raise ValueError("tangent vector arity mismatch")
    if not variety.contains_point(point):
        raise CertificateError("base point is not on the variety")
    gens = variety.relations.generators
    if gens:
        jac = jacobian(list(gens), ambient)
        for row in jac.evaluate(point):
            if sum(r * wv for r, wv in zip(row, w)) != 0:
                raise CertificateError("vector is not tangent at the base point")
    if not variety.normal_form(field.apply(factor), budget).is_zero():
        raise CertificateError("factor is not in the kernel of the field")
    if factor.evaluate(point) != 0:
        raise CertificateError("factor does not vanish at the base point")

    sheared = shear_multiple(factor, field)
    flow = algebraic_flow(sheared, bound, budget)
    ext = flow.context
    consts = {
        name: Polynomial.constant(ext, v) for name, v in zip(ambient.names, point)
    }

    pairing = sum(
        factor.partial(name).evaluate(point) * wv
        for name, wv in zip(ambient.names, w)
    )
    field_at = field.evaluate(point)
    tvar = Polynomial.variable(ext, flow.time)
    for i, name in enumerate(ambient.names):
        img = flow.image(name)
        pushed = Polynomial.zero(ext)
        for j, other in enumerate(ambient.names):
            if w[j] == 0:
                continue
            d = img.partial(other)
            if d.is_zero():
                continue
            pushed = pushed + d.substitute(consts, ext) * w[j]
        expected = (
            Polynomial.constant(ext, w[i]) + tvar * (pairing * field_at[i])
        )
        if pushed != expected:
            return False
    return True


def numeric_flow_check(
    flow: FlowMap,
    point: Sequence[Fraction],
    t_end: float = 1.0,
    steps: int = 1000,
    tol: float = 1e-8,
) -> tuple[bool, float]:
    """Runge-Kutta integration of the field against the exact flow.

    Floating point enters here only; the flow itself stays exact.  The
    base point should lie on the variety, where the reduced images agree
    with the true flow.
    """
    field = flow.field
    ambient = field.variety.context
    coeffs = [field.coefficient(name) for name in ambient.names]

    def rhs(state: list[float]) -> list[float]:
        return [c.eval_float(state) for c in coeffs]

    state = [float(v) for v in point]
    h = t_end / steps
    for _ in range(steps):
        k1 = rhs(state)
        k2 = rhs([s + 0.5 * h * k for s, k in zip(state, k1)])
        k3 = rhs([s + 0.5 * h * k for s, k in zip(state, k2)])
        k4 = rhs([s + h * k for s, k in zip(state, k3)])
        state = [
            s + (h / 6.0) * (a + 2 * b + 2 * c + d)
            for s, a, b, c, d in zip(state, k1, k2, k3, k4)
        ]
    extended = [float(v) for v in point] + [t_end]
    exact = [flow.image(name).eval_float(extended) for name in ambient.names]
    err = max(abs(a - b) for a, b in zip(state, exact))
    return err <= tol, err
