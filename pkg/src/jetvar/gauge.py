"""Gauge-natural lifts and the Noether/Bianchi machinery.

Infinitesimal principal automorphisms are described by parameter fields: the
base components ``xi[0] .. xi[n-1]`` and gauge components ``eps`` etc.  They
are adjoined to the bundle as auxiliary fields, so Euler operators in their
directions realize the backwards integration by parts that produces the
Bianchi morphism, the reduced current and the superpotential.

Sign conventions: ``£^i = y^i_s xi^s - Xi^i`` (so ``£ = -Xi_V``), the Noether
current is ``eps^mu = -p^mu(£) + xi^mu L`` and the off-shell identity reads
``D_mu eps^mu = £ ⌋ E + (invariance residual)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping

from .errors import BianchiNonzero, ExtractionIncomplete, MalformedLift, NotInvariantWarning, OrderOverflow
from .jets import (
    BundleSpec,
    CovectorDensity,
    DerivativeTable,
    ProjectableVectorField,
    SkewDensity2,
    VectorDensity,
    bracket,
    d_H,
    d_H2,
    prolong,
    vertical_part,
)
from .kernel import JET, PARAM, Expr, ExprLike, JetVar, MultiIndex, E, esum, linear_parts, partial_base
from .variational import (
    apply_jacobi,
    euler_lagrange,
    euler_operator,
    jacobi,
    lie_derivative_density,
    momentum,
    second_variation,
)


@dataclass(frozen=True)
class GaugeModel:
    """Parameter fields of an infinitesimal automorphism and their order caps.

    ``xi`` is the family name of the base components (``None`` for a pure gauge
    model with ``xi = 0``).  Gauge parameter jets are allowed up to order ``r``
    and base-component jets at orders ``1..k``.
    """

    n: int
    xi: str | None = None
    gauge: tuple[str, ...] = ()
    r: int = 1
    k: int = 1

    def __post_init__(self):
        object.__setattr__(self, "gauge", tuple(self.gauge))
        if self.r < 0 or self.k < 1:
            raise ValueError("need r >= 0 and k >= 1")
        if self.r > self.k:
            raise ValueError(f"gauge order r={self.r} exceeds base order k={self.k}")
        if len(set(self.params)) != len(self.params):
            raise ValueError("parameter names must be distinct")

    @property
    def xi_fields(self) -> tuple[str, ...]:
        return tuple(f"{self.xi}[{mu}]" for mu in range(self.n)) if self.xi else ()

    @property
    def params(self) -> tuple[str, ...]:
        return self.xi_fields + self.gauge

    def check(self, spec: BundleSpec) -> None:
        if spec.n != self.n:
            raise ValueError(f"model has base dimension {self.n}, bundle has {spec.n}")
        clash = set(self.params) & (set(spec.fields) | set(spec.constants) | set(spec.functions))
        if clash:
            raise ValueError(f"parameter names clash with bundle names: {sorted(clash)}")

    def xi_expr(self) -> tuple[Expr, ...]:
        """Symbolic base components (zero when the model has no ``xi``)."""
        if not self.xi:
            return tuple(Expr() for _ in range(self.n))
        zero = MultiIndex.zero(self.n)
        return tuple(Expr.of(JetVar(f, zero)) for f in self.xi_fields)


@dataclass(frozen=True)
class LiftSpec:
    """Coefficients ``Z[(field, param, alpha)]`` of ``Xi^i = sum Z D_alpha param``."""

    Z: Mapping[tuple[str, str, MultiIndex], Expr] = field(default_factory=dict)

    @classmethod
    def from_expressions(cls, model: GaugeModel, spec: BundleSpec,
                         components: Mapping[str, ExprLike]) -> "LiftSpec":
        """Read ``Z`` off symbolic lift components and validate them."""
        model.check(spec)
        params = set(model.params)
        xi_set = set(model.xi_fields)
        phys = set(spec.fields)
        Z = {}
        for i, comp in components.items():
            if i not in phys:
                raise MalformedLift(f"lift given for unknown field {i!r}")
            comp = E(comp)
            try:
                coeffs, rest = linear_parts(comp, lambda a: a.kind == JET and a.name in params)
            except ValueError:
                raise MalformedLift(f"lift of {i} is not linear in the parameters") from None
            if not rest.is_zero():
                raise MalformedLift(f"lift of {i} has a parameter-free part {rest!r}")
            for a, z in coeffs.items():
                order = a.index.order
                if a.name in xi_set and not 1 <= order <= model.k:
                    raise MalformedLift(
                        f"lift of {i} uses {a!r}; base-component jets must have order 1..{model.k}")
                if a.name not in xi_set and order > model.r:
                    raise MalformedLift(f"lift of {i} uses {a!r}; gauge jets must have order <= {model.r}")
                for b in z.atoms():
                    if b.kind == JET and (b.name not in phys or b.index.order > 0):
                        raise MalformedLift(f"coefficient of {a!r} in the lift of {i} depends on {b!r}")
                    if b.kind not in (JET, PARAM):
                        raise MalformedLift(f"coefficient of {a!r} in the lift of {i} depends on {b!r}")
                Z[(i, a.name, a.index)] = z
        return cls(Z)

    def fields(self) -> tuple[str, ...]:
        return tuple(sorted({i for i, _, _ in self.Z}))

    def max_param_order(self) -> int:
        return max((a.order for _, _, a in self.Z), default=0)

    def components(self, spec: BundleSpec, values: Mapping[str, ExprLike] | None = None) -> dict[str, Expr]:
        """``Xi^i`` with symbolic parameters, or with parameter fields replaced by ``values``."""
        out: dict[str, list] = {i: [] for i in spec.fields}
        tables = {p: DerivativeTable(E(v), spec) for p, v in (values or {}).items()}
        for (i, p, alpha), z in self.Z.items():
            if values is None:
                out[i].append(z * Expr.of(JetVar(p, alpha)))
            elif p in tables:
                out[i].append(z * tables[p][alpha])
        return {i: esum(t) for i, t in out.items()}


def _work_spec(spec: BundleSpec, model: GaugeModel) -> BundleSpec:
    # parameter jets ride along in total derivatives; give them headroom
    return spec.with_order(2 * spec.max_order + model.k + 2)


def _xi_values(model: GaugeModel, values: Mapping[str, ExprLike] | None) -> tuple[Expr, ...]:
    if values is None:
        return model.xi_expr()
    return tuple(E(values.get(f, 0)) for f in model.xi_fields) if model.xi else tuple(
        Expr() for _ in range(model.n))


def gauge_lift(model: GaugeModel, lift: LiftSpec, spec: BundleSpec,
               values: Mapping[str, ExprLike] | None = None) -> ProjectableVectorField:
    """The projectable field ``xi^mu d_mu + Xi^i d_i`` on the configuration bundle."""
    model.check(spec)
    return ProjectableVectorField(_xi_values(model, values), lift.components(spec, values))


def lie_derivative_section(model: GaugeModel, lift: LiftSpec, spec: BundleSpec,
                           values: Mapping[str, ExprLike] | None = None) -> dict[str, Expr]:
    """``£^i = y^i_s xi^s - Xi^i``."""
    vf = gauge_lift(model, lift, spec, values)
    return {i: -v for i, v in vertical_part(vf, spec).items()}


def lie_derivative_jet(model: GaugeModel, lift: LiftSpec, spec: BundleSpec, s: int) -> dict:
    """Order-``alpha`` components ``y^i_{alpha+s} xi^s - (j_s Xi)^i_alpha`` from the prolonged lift."""
    if s + 1 > spec.max_order:
        raise OrderOverflow(s + 1, spec.max_order, "Lie derivative prolongation")
    work = _work_spec(spec, model)
    vf = gauge_lift(model, lift, spec)
    jx = prolong(vf, s, work)
    out = {}
    for (i, alpha), comp in jx.components.items():
        transport = esum(vf.xi[t] * spec.jet(i, alpha.bump(t)) for t in range(spec.n))
        out[(i, alpha)] = transport - comp
    return out


def lift_bracket_residual(model: GaugeModel, lift: LiftSpec, spec: BundleSpec,
                          first: Mapping[str, ExprLike], second: Mapping[str, ExprLike]) -> dict[str, Expr]:
    """Components of ``G([P1, P2]) - [G(P1), G(P2)]`` for concrete parameter values.

    Parameter values are functions of the base point.  The bracket of
    parameters is the one of an abelian structure group: the base parts
    bracket as vector fields and the gauge parts as ``xi1(eps2) - xi2(eps1)``.
    """
    model.check(spec)
    for vals in (first, second):
        for p, v in vals.items():
            if p not in model.params:
                raise MalformedLift(f"unknown parameter {p!r}")
            if E(v).jets():
                raise MalformedLift(f"parameter value for {p} must not depend on jets")
    n = spec.n
    x1, x2 = _xi_values(model, first), _xi_values(model, second)

    def along(xi, f):
        f = E(f)
        return esum(xi[s] * partial_base(f, s) for s in range(n))

    combined: dict[str, Expr] = {}
    if model.xi:
        for mu, f in enumerate(model.xi_fields):
            combined[f] = along(x1, x2[mu]) - along(x2, x1[mu])
    for g in model.gauge:
        combined[g] = along(x1, second.get(g, 0)) - along(x2, first.get(g, 0))
    lhs = gauge_lift(model, lift, spec, combined)
    rhs = bracket(gauge_lift(model, lift, spec, first), gauge_lift(model, lift, spec, second))
    out = {f"xi^{s}": lhs.xi[s] - rhs.xi[s] for s in range(n)}
    for i in spec.fields:
        out[i] = lhs.vertical.get(i, Expr()) - rhs.vertical.get(i, Expr())
    return out


def invariance_residual(L, model: GaugeModel, lift: LiftSpec, spec: BundleSpec) -> Expr:
    """``j Xi (L) + L D_mu xi^mu`` with symbolic parameters; zero iff ``L`` is invariant."""
    euler_lagrange(L, spec)  # enforces the order cap on the physical fields
    vf = gauge_lift(model, lift, spec)
    return lie_derivative_density(L, vf, _work_spec(spec, model))


def noether_current(L, model: GaugeModel, lift: LiftSpec, spec: BundleSpec, *,
                    check: bool = True) -> VectorDensity:
    """``eps^mu = -p^mu(£) + xi^mu L``."""
    e = L.L if hasattr(L, "L") else E(L)
    if check and not invariance_residual(e, model, lift, spec).is_zero():
        warnings.warn("Lagrangian is not invariant under the lift; the current is not conserved",
                      NotInvariantWarning, stacklevel=2)
    euler_lagrange(e, spec)
    work = _work_spec(spec, model)
    lie = lie_derivative_section(model, lift, spec)
    bnd = momentum(e, work, spec.fields).boundary(lie, work)
    xi = model.xi_expr()
    return VectorDensity(tuple(-bnd[mu] + xi[mu] * e for mu in range(spec.n)))


def noether_identity_residual(L, model: GaugeModel, lift: LiftSpec, spec: BundleSpec) -> Expr:
    """``D_mu eps^mu - £ ⌋ E - (invariance residual)``; vanishes for every ``L``."""
    e = L.L if hasattr(L, "L") else E(L)
    work = _work_spec(spec, model)
    eps = noether_current(e, model, lift, spec, check=False)
    el = euler_lagrange(e, spec).E
    lie = lie_derivative_section(model, lift, spec)
    return d_H(eps, work).L - el.contract(lie) - invariance_residual(e, model, lift, spec)


@dataclass(frozen=True)
class BianchiResult:
    """``omega = sum_P P beta_P + D_mu reduced^mu`` with ``omega = £ ⌋ E``."""

    omega: Expr
    beta: Mapping[str, Expr]
    reduced: VectorDensity
    residual: Expr

    def beta_is_zero(self) -> bool:
        return all(b.is_zero() for b in self.beta.values())


def bianchi_decompose(L, model: GaugeModel, lift: LiftSpec, spec: BundleSpec) -> BianchiResult:
    e = L.L if hasattr(L, "L") else E(L)
    work = _work_spec(spec, model)
    el = euler_lagrange(e, spec).E
    omega = el.contract(lie_derivative_section(model, lift, spec))
    params = model.params
    beta = {p: euler_operator(omega, p, work) for p in params}
    zero = MultiIndex.zero(spec.n)
    own = {p: Expr.of(JetVar(p, zero)) for p in params}
    reduced = momentum(omega, work, params).boundary(own, work)
    residual = omega - esum(own[p] * beta[p] for p in params) - d_H(reduced, work).L
    return BianchiResult(omega, beta, reduced, residual)


def gauge_jacobi(L, model: GaugeModel, lift: LiftSpec, spec: BundleSpec) -> CovectorDensity:
    """Jacobi operator of ``L`` applied to ``Xi_V = -£``; its components are the
    gauge-natural Jacobi expressions, identically zero when every lifted
    direction lies in the kernel."""
    J = jacobi(L, spec)
    work = _work_spec(spec, model)
    u = {i: -v for i, v in lie_derivative_section(model, lift, spec).items()}
    return apply_jacobi(J, u, work)


def kernel_residual(L, model: GaugeModel, lift: LiftSpec, spec: BundleSpec) -> dict[str, Expr]:
    return {i: v for i, v in gauge_jacobi(L, model, lift, spec).comps.items() if not v.is_zero()}


def hessian_comparison_residual(L, model: GaugeModel, lift: LiftSpec, spec: BundleSpec) -> dict[str, Expr]:
    """Euler operators of ``Xi_V ⌋ J(Xi_V) - d^2 L[Xi_V]`` in every direction.

    The two densities differ by a total divergence, so all entries vanish.
    """
    e = L.L if hasattr(L, "L") else E(L)
    work = _work_spec(spec, model)
    u = {i: -v for i, v in lie_derivative_section(model, lift, spec).items()}
    jac = gauge_jacobi(e, model, lift, spec)
    diff = jac.contract(u) - second_variation(e, u, work)
    return {f: euler_operator(diff, f, work) for f in tuple(spec.fields) + model.params}


# ---------------------------------------------------------------- superpotential


def _param_coefficients(v: VectorDensity, params: Iterable[str]) -> dict:
    """``c[(mu, P, alpha)]`` with ``v^mu = sum c P_alpha``; raises if ``v`` is not linear."""
    params = set(params)
    out = {}
    for mu, comp in enumerate(v.comps):
        try:
            coeffs, rest = linear_parts(comp, lambda a: a.kind == JET and a.name in params)
        except ValueError:
            raise ExtractionIncomplete(f"component {mu} is not linear in the parameters") from None
        if not rest.is_zero():
            raise ExtractionIncomplete(f"component {mu} has a parameter-free part", rest)
        for a, c in coeffs.items():
            out[(mu, a.name, a.index)] = c
    return out


def extract_superpotential(delta: VectorDensity, params: Iterable[str], spec: BundleSpec) -> SkewDensity2:
    """Antisymmetric ``nu`` with ``D_nu nu^{nu mu} = delta^mu`` for a divergence-free ``delta``.

    Peels off the highest parameter derivatives one order at a time.  With
    ``C^{mu;a}`` the totally symmetric top-order coefficient tensor, the step is
    ``nu^{nu mu;a'} = k/(k+1) (C^{mu;nu a'} - C^{nu;mu a'})``.
    """
    params = tuple(params)
    n = spec.n
    nu = [[Expr() for _ in range(n)] for _ in range(n)]
    rest = delta
    while not rest.is_zero():
        coeffs = _param_coefficients(rest, params)
        top = {}
        for (mu, p, alpha), c in coeffs.items():
            top[p] = max(top.get(p, 0), alpha.order)
        if all(k == 0 for k in top.values()):
            raise ExtractionIncomplete("undifferentiated parameter terms remain; the current is not "
                                       "divergence free", rest)
        step = [[[] for _ in range(n)] for _ in range(n)]
        for (mu, p, alpha), c in coeffs.items():
            k = top[p]
            if k == 0 or alpha.order != k:
                continue
            # C^{mu;alpha} = c alpha!/k!; nu gets D_beta p with beta = alpha - e_s
            tensor = c.scale(Fraction(alpha.factorial, factorial(k)))
            for s in range(n):
                if not alpha[s]:
                    continue
                beta = alpha.bump(s, -1)
                w = Fraction(k, k + 1) * Fraction(factorial(k - 1), beta.factorial)
                term = tensor.scale(w) * Expr.of(JetVar(p, beta))
                if s == mu:
                    continue
                # contributes C^{mu; s beta} to nu^{s mu} and -C^{mu; s beta} to nu^{mu s}
                step[s][mu].append(term)
                step[mu][s].append(-term)
        piece = SkewDensity2(tuple(tuple(esum(step[a][b]) for b in range(n)) for a in range(n)))
        new_rest = rest - d_H2(piece, spec)
        for a in range(n):
            for b in range(n):
                nu[a][b] = nu[a][b] + piece.comps[a][b]
        if not new_rest.is_zero() and _max_order(new_rest, params) >= _max_order(rest, params):
            raise ExtractionIncomplete("top-order parameter terms are not exact", new_rest)
        rest = new_rest
    return SkewDensity2(tuple(tuple(row) for row in nu))


def _max_order(v: VectorDensity, params) -> int:
    return max((c.jet_order(params) for c in v.comps), default=-1)


def superpotential(L, model: GaugeModel, lift: LiftSpec, spec: BundleSpec) -> tuple[SkewDensity2, VectorDensity]:
    """Superpotential ``nu`` and the exactness residual ``(eps - reduced) - d_H nu``."""
    e = L.L if hasattr(L, "L") else E(L)
    bianchi = bianchi_decompose(e, model, lift, spec)
    if not bianchi.beta_is_zero():
        bad = sorted(p for p, b in bianchi.beta.items() if not b.is_zero())
        raise BianchiNonzero(f"Bianchi morphism does not vanish in {', '.join(bad)}")
    work = _work_spec(spec, model)
    eps = noether_current(e, model, lift, spec, check=False)
    delta = eps - bianchi.reduced
    nu = extract_superpotential(delta, model.params, work)
    return nu, delta - d_H2(nu, work)
