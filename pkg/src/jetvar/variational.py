"""Variational operators: Euler-Lagrange, interior Euler operators, canonical
momenta and the first-variation identity, the Helmholtz test, and the Jacobi
(linearized Euler-Lagrange) operator with its formal adjoint.

Sign convention: ``delta S = integral u^i E_i + boundary``, so
``E_i = sum_alpha (-1)^|alpha| D_alpha d^alpha_i L``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import OrderOverflow
from .jets import (
    BundleSpec,
    CovectorDensity,
    DerivativeTable,
    ProjectableVectorField,
    ScalarDensity,
    VectorDensity,
    prolong,
    total_derivative,
    total_derivative_multi,
    vertical_part,
)
from .kernel import Expr, ExprLike, MultiIndex, E, choose, esum, partial


def _sign(k: int) -> int:
    return -1 if k % 2 else 1


def _lagrangian(L) -> Expr:
    return L.L if isinstance(L, ScalarDensity) else E(L)


def euler_operator(e: ExprLike, field: str, spec: BundleSpec) -> Expr:
    """``sum_alpha (-1)^|alpha| D_alpha d^alpha_field e``, no order precondition."""
    e = E(e)
    return esum(
        _sign(a.index.order) * total_derivative_multi(partial(e, a), a.index, spec)
        for a in e.jets([field]))


def interior_euler(e: ExprLike, field: str, mu: Iterable[int], spec: BundleSpec) -> Expr:
    """Higher Euler operator ``sum_alpha (-1)^|alpha| C(mu+alpha, alpha) D_alpha d^{mu+alpha} e``.

    At ``mu = 0`` this is :func:`euler_operator`; at a first-order ``mu`` on a
    first-order Lagrangian it is the canonical momentum ``dL/dy_mu``.
    """
    e = E(e)
    mu = MultiIndex(mu)
    terms = []
    for a in e.jets([field]):
        if not a.index.dominates(mu):
            continue
        alpha = a.index.minus(mu)
        coeff = _sign(alpha.order) * choose(a.index, alpha)
        terms.append(coeff * total_derivative_multi(partial(e, a), alpha, spec))
    return esum(terms)


@dataclass(frozen=True)
class EulerLagrangeResult:
    E: CovectorDensity
    order: int


def lagrangian_order(L, fields: Iterable[str]) -> int:
    return max(_lagrangian(L).jet_order(fields), 0)


def euler_lagrange(L, spec: BundleSpec, fields: Iterable[str] | None = None) -> EulerLagrangeResult:
    e = _lagrangian(L)
    fields = tuple(spec.fields if fields is None else fields)
    q = lagrangian_order(e, fields)
    if 2 * q > spec.max_order:
        raise OrderOverflow(2 * q, spec.max_order, "Euler-Lagrange expressions")
    comps = {i: euler_operator(e, i, spec) for i in fields}
    order = max((c.jet_order(fields) for c in comps.values()), default=-1)
    return EulerLagrangeResult(CovectorDensity(comps), max(order, 0))


# ---------------------------------------------------------------- momenta


@dataclass(frozen=True)
class MomentumTable:
    """``p[(mu, i, delta)]``: boundary current ``B^mu = p^mu_{i,delta} D_delta u^i``."""

    coeffs: Mapping[tuple[int, str, MultiIndex], Expr]
    n: int

    def boundary(self, u: Mapping[str, ExprLike], spec: BundleSpec) -> VectorDensity:
        tables = {i: DerivativeTable(E(v), spec) for i, v in u.items()}
        comps = [[] for _ in range(self.n)]
        for (mu, i, delta), p in self.coeffs.items():
            if i in tables:
                comps[mu].append(p * tables[i][delta])
        return VectorDensity(tuple(esum(c) for c in comps))


def momentum(L, spec: BundleSpec, fields: Iterable[str] | None = None) -> MomentumTable:
    """Canonical momenta from higher Euler operators.

    Uses ``delta L = u^i E_i + sum_{gamma != 0} D_gamma(u^i E^gamma_i)`` and splits
    each ``D_gamma`` as ``sum_mu (gamma_mu/|gamma|) D_mu D_{gamma-mu}``, which needs
    no choice of preferred direction.
    """
    e = _lagrangian(L)
    fields = tuple(spec.fields if fields is None else fields)
    n = spec.n
    coeffs: dict = {}
    for i in fields:
        # a higher Euler operator E^gamma can be nonzero only below some present jet
        support = set()
        for a in e.jets([i]):
            support.update(a.index.sub_indices())
        for gamma in sorted(support, key=MultiIndex.sort_key):
            if gamma.order == 0:
                continue
            eg = interior_euler(e, i, gamma, spec)
            if eg.is_zero():
                continue
            deriv = DerivativeTable(eg, spec)
            for mu in range(n):
                if not gamma[mu]:
                    continue
                w = Fraction(gamma[mu], gamma.order)
                rest = gamma.bump(mu, -1)
                for delta in rest.sub_indices():
                    term = deriv[rest.minus(delta)].scale(w * choose(rest, delta))
                    key = (mu, i, delta)
                    coeffs[key] = coeffs.get(key, Expr()) + term
    return MomentumTable({k: v for k, v in coeffs.items() if not v.is_zero()}, n)


def lie_derivative_density(L, vf: ProjectableVectorField, spec: BundleSpec) -> Expr:
    """``L_{j Xi}(L omega)`` coefficient: ``j Xi (L) + L D_mu xi^mu``."""
    e = _lagrangian(L)
    phys = set(spec.fields) | set(vf.vertical)
    q = max(e.jet_order(phys), 0)
    jxi = prolong(vf, q, spec)
    div = esum(total_derivative(x, mu, spec) for mu, x in enumerate(vf.xi))
    return jxi.act(e) + e * div


def first_variation_check(L, vf: ProjectableVectorField, spec: BundleSpec) -> Expr:
    """Residual of ``L_{jXi} L = Xi_V ⌋ E + D_mu(p^mu(Xi_V) + xi^mu L)``; zero when consistent."""
    e = _lagrangian(L)
    fields = tuple(spec.fields)
    el = euler_lagrange(e, spec, fields).E
    xv = vertical_part(vf, spec)
    bnd = momentum(e, spec, fields).boundary(xv, spec)
    current = VectorDensity(tuple(bnd[mu] + vf.xi[mu] * e for mu in range(spec.n)))
    div = esum(total_derivative(c, mu, spec) for mu, c in enumerate(current.comps))
    return lie_derivative_density(e, vf, spec) - el.contract(xv) - div


# ---------------------------------------------------------------- linear operators


@dataclass(frozen=True)
class JacobiOperator:
    """Linear operator ``u -> (sum_{j,alpha} J[(i, j, alpha)] D_alpha u^j)_i``."""

    coeffs: Mapping[tuple[str, str, MultiIndex], Expr]
    rows: tuple[str, ...]
    cols: tuple[str, ...]

    def __sub__(self, other: "JacobiOperator") -> "JacobiOperator":
        keys = set(self.coeffs) | set(other.coeffs)
        zero = Expr()
        out = {k: self.coeffs.get(k, zero) - other.coeffs.get(k, zero) for k in keys}
        return JacobiOperator({k: v for k, v in out.items() if not v.is_zero()}, self.rows, self.cols)

    def is_zero(self) -> bool:
        return not self.coeffs


def linearization(source: CovectorDensity, spec: BundleSpec,
                  fields: Iterable[str] | None = None) -> JacobiOperator:
    """Frechet derivative: ``J[(i, j, alpha)] = dE_i / dy^j_alpha``."""
    cols = tuple(spec.fields if fields is None else fields)
    coeffs = {}
    for i, ei in source.comps.items():
        for a in ei.jets(cols):
            d = partial(ei, a)
            if not d.is_zero():
                coeffs[(i, a.name, a.index)] = d
    return JacobiOperator(coeffs, tuple(source.comps), cols)


def jacobi(L, spec: BundleSpec, fields: Iterable[str] | None = None) -> JacobiOperator:
    """Jacobi morphism of ``L``: the linearization of its Euler-Lagrange expressions."""
    return linearization(euler_lagrange(L, spec, fields).E, spec, fields)


def apply_jacobi(J: JacobiOperator, u: Mapping[str, ExprLike], spec: BundleSpec) -> CovectorDensity:
    tables = {j: DerivativeTable(E(v), spec) for j, v in u.items()}
    terms = {i: [] for i in J.rows}
    for (i, j, alpha), c in J.coeffs.items():
        if j in tables:
            terms[i].append(c * tables[j][alpha])
    return CovectorDensity({i: esum(t) for i, t in terms.items()})


def adjoint(J: JacobiOperator, spec: BundleSpec) -> JacobiOperator:
    """Formal adjoint: ``J*[(j, i, beta)] = sum_{alpha>=beta} (-1)^|alpha| C(alpha,beta) D_{alpha-beta} J[(i, j, alpha)]``."""
    acc: dict = {}
    for (i, j, alpha), c in J.coeffs.items():
        table = DerivativeTable(c, spec)
        for beta in alpha.sub_indices():
            term = (_sign(alpha.order) * choose(alpha, beta)) * table[alpha.minus(beta)]
            key = (j, i, beta)
            acc[key] = acc.get(key, Expr()) + term
    return JacobiOperator({k: v for k, v in acc.items() if not v.is_zero()}, J.cols, J.rows)


def self_adjointness_residual(L, spec: BundleSpec, fields: Iterable[str] | None = None) -> dict:
    """Nonzero coefficients of ``J - J*`` for the Jacobi operator of ``L`` (empty when symmetric)."""
    J = jacobi(L, spec, fields)
    return dict((J - adjoint(J, spec)).coeffs)


@dataclass(frozen=True)
class HelmholtzTensor:
    coeffs: Mapping[tuple[str, str, MultiIndex], Expr]

    def is_zero(self) -> bool:
        return not self.coeffs


def helmholtz(source: CovectorDensity, spec: BundleSpec,
              fields: Iterable[str] | None = None) -> HelmholtzTensor:
    """``H[(i, j, alpha)] = d^alpha_j E_i - sum_{beta>=alpha} (-1)^|beta| C(beta,alpha) D_{beta-alpha} d^beta_i E_j``.

    This is the coefficient table of ``D_E - D_E*``; it vanishes identically iff
    the source is locally variational.
    """
    J = linearization(source, spec, fields)
    return HelmholtzTensor(dict((J - adjoint(J, spec)).coeffs))


def is_locally_variational(source: CovectorDensity, spec: BundleSpec,
                           fields: Iterable[str] | None = None) -> bool:
    return helmholtz(source, spec, fields).is_zero()


def second_variation(L, u: Mapping[str, ExprLike], spec: BundleSpec,
                     fields: Iterable[str] | None = None) -> Expr:
    """Hessian density ``d^2/dt^2 L(y + t u)|_0 = sum H^{ab}_{ij} D_a u^i D_b u^j``."""
    e = _lagrangian(L)
    fields = tuple(spec.fields if fields is None else fields)
    tables = {i: DerivativeTable(E(v), spec) for i, v in u.items()}
    terms = []
    for a in e.jets(fields):
        if a.name not in tables:
            continue
        ea = partial(e, a)
        for b in ea.jets(fields):
            if b.name in tables:
                terms.append(partial(ea, b) * tables[a.name][a.index] * tables[b.name][b.index])
    return esum(terms)
