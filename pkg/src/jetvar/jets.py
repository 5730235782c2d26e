"""Jet-bundle layer: bundle declarations, formal derivatives, prolongation of
projectable vector fields, the horizontal/vertical split and horizontal
differentials on density coefficients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import OrderOverflow
from .kernel import (
    BASE,
    FUNC,
    JET,
    Expr,
    ExprLike,
    FormalFn,
    JetVar,
    MultiIndex,
    E,
    _acc_add,
    _mono_mul,
    _mono_replace,
    esum,
    partial,
    partial_base,
    partial_jet,
)


@dataclass(frozen=True)
class BundleSpec:
    """Chart data of ``Y -> X``: base coordinates, fiber fields, jet-order cap."""

    coords: tuple[str, ...]
    fields: tuple[str, ...]
    max_order: int
    functions: tuple[str, ...] = ()
    constants: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "fields", tuple(self.fields))
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "constants", tuple(self.constants))
        if len(self.coords) < 1:
            raise ValueError("base dimension must be at least 1")
        if len(self.fields) < 1:
            raise ValueError("fiber dimension must be at least 1")
        if self.max_order < 1:
            raise ValueError("jet order cap must be at least 1")
        names = self.coords + self.fields + self.functions + self.constants
        if len(set(names)) != len(names):
            raise ValueError(f"declared names are not pairwise distinct: {names}")

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def m(self) -> int:
        return len(self.fields)

    def with_fields(self, extra: Iterable[str]) -> "BundleSpec":
        """Fibered product with extra fields (parameters, variation fields)."""
        extra = tuple(f for f in extra if f not in self.fields)
        return BundleSpec(self.coords, self.fields + extra, self.max_order,
                          self.functions, self.constants)

    def with_order(self, max_order: int) -> "BundleSpec":
        return BundleSpec(self.coords, self.fields, max_order, self.functions, self.constants)

    def jet(self, field: str, alpha: Iterable[int] | None = None) -> Expr:
        alpha = MultiIndex.zero(self.n) if alpha is None else MultiIndex(alpha)
        return Expr.of(JetVar(field, alpha))

    def unit(self, sigma: int) -> MultiIndex:
        return MultiIndex.unit(self.n, sigma)

    def zero(self) -> MultiIndex:
        return MultiIndex.zero(self.n)


# ---------------------------------------------------------------- formal derivative


def total_derivative(e: ExprLike, sigma: int, spec: BundleSpec) -> Expr:
    """``D_sigma e = d_sigma e + y^j_{alpha+sigma} d^alpha_j e``."""
    e = E(e)
    cap = spec.max_order
    acc: dict = {}
    for m, c in e._t.items():
        for a, k in m:
            kind = a.kind
            if kind == JET:
                alpha = a.index.bump(sigma)
                if alpha.order > cap:
                    raise OrderOverflow(alpha.order, cap, "total derivative")
                rest = _mono_replace(m, a, k - 1)
                _acc_add(acc, _mono_mul(rest, ((JetVar(a.name, alpha), 1),)), c * k)
            elif kind == BASE:
                if a.index[0] == sigma:
                    _acc_add(acc, _mono_replace(m, a, k - 1), c * k)
            elif kind == FUNC:
                rest = _mono_replace(m, a, k - 1)
                bumped = FormalFn(a.name, a.index.bump(sigma))
                _acc_add(acc, _mono_mul(rest, ((bumped, 1),)), c * k)
    return Expr._raw(acc)


def total_derivative_multi(e: ExprLike, alpha: Iterable[int], spec: BundleSpec) -> Expr:
    """``D_alpha e``; the directions commute so the order of application is immaterial."""
    out = E(e)
    for sigma in MultiIndex(alpha).directions():
        if out.is_zero():
            break
        out = total_derivative(out, sigma, spec)
    return out


class DerivativeTable:
    """Memo of ``D_alpha f`` for one expression, built by adding one direction at a time."""

    def __init__(self, f: ExprLike, spec: BundleSpec):
        self.spec = spec
        self._memo = {MultiIndex.zero(spec.n): E(f)}

    def __getitem__(self, alpha: Iterable[int]) -> Expr:
        alpha = MultiIndex(alpha)
        hit = self._memo.get(alpha)
        if hit is not None:
            return hit
        sigma = max(s for s, c in enumerate(alpha) if c)
        prev = self[alpha.bump(sigma, -1)]
        out = self._memo[alpha] = total_derivative(prev, sigma, self.spec)
        return out


# ---------------------------------------------------------------- vector fields


@dataclass(frozen=True)
class ProjectableVectorField:
    """``Xi = xi^sigma d_sigma + Xi^i d_i`` on ``Y``.

    ``xi`` may depend on base coordinates, constants, formal functions and on
    jets of auxiliary (parameter) fields, which are functions of the base
    point.  ``vertical`` maps each fiber field to ``Xi^i``.
    """

    xi: tuple[Expr, ...]
    vertical: Mapping[str, Expr]

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(E(x) for x in self.xi))
        object.__setattr__(self, "vertical", {k: E(v) for k, v in self.vertical.items()})

    def check(self, spec: BundleSpec) -> None:
        phys = set(spec.fields) | set(self.vertical)
        if len(self.xi) != spec.n:
            raise ValueError(f"xi has {len(self.xi)} components, base dimension is {spec.n}")
        for s, x in enumerate(self.xi):
            if x.jets(phys):
                raise ValueError(f"xi^{s} depends on fiber coordinates; field is not projectable")
        for i, v in self.vertical.items():
            if v.jet_order(phys) > 0:
                raise ValueError(f"component {i} depends on jets of order > 0")

    def act(self, f: ExprLike) -> Expr:
        """Action on a function of ``(x, y)`` (order-0 jets only)."""
        f = E(f)
        n = len(self.xi)
        out = esum(self.xi[s] * partial_base(f, s) for s in range(n) if not self.xi[s].is_zero())
        zero = MultiIndex.zero(n)
        return out + esum(v * partial_jet(f, i, zero) for i, v in self.vertical.items())


@dataclass(frozen=True)
class ProlongedField:
    """``j_s Xi``: base part ``xi`` plus components ``Xi^i_alpha`` for ``|alpha| <= s``."""

    xi: tuple[Expr, ...]
    components: Mapping[tuple[str, MultiIndex], Expr]
    order: int

    def component(self, field: str, alpha: Iterable[int]) -> Expr:
        return self.components[(field, MultiIndex(alpha))]

    def act(self, f: ExprLike) -> Expr:
        """``j_s Xi (f) = xi^sigma d_sigma f + Xi^i_alpha d^alpha_i f``."""
        f = E(f)
        fields = {i for i, _ in self.components}
        if f.jet_order(fields) > self.order:
            raise ValueError(f"function needs jets of order {f.jet_order(fields)} > {self.order}")
        terms = [self.xi[s] * partial_base(f, s) for s in range(len(self.xi)) if not self.xi[s].is_zero()]
        for a in f.jets(fields):
            comp = self.components[(a.name, a.index)]
            if not comp.is_zero():
                terms.append(comp * partial(f, a))
        return esum(terms)


def prolong(vf: ProjectableVectorField, s: int, spec: BundleSpec) -> ProlongedField:
    """Jet prolongation by the explicit multinomial formula

    ``Xi^i_alpha = D_alpha Xi^i - sum_{beta+gamma=alpha, beta!=0} alpha!/(beta! gamma!) D_beta xi^mu y^i_{gamma+mu}``.
    """
    if s > spec.max_order:
        raise OrderOverflow(s, spec.max_order, "prolongation")
    vf.check(spec)
    n = spec.n
    dxi = [DerivativeTable(x, spec) for x in vf.xi]
    comps = {}
    for i, Xi in vf.vertical.items():
        dXi = DerivativeTable(Xi, spec)
        for alpha in MultiIndex.up_to(n, s):
            terms = [dXi[alpha]]
            afact = alpha.factorial
            for beta in alpha.sub_indices():
                if beta.order == 0:
                    continue
                gamma = alpha.minus(beta)
                coeff = afact // (beta.factorial * gamma.factorial)
                for mu in range(n):
                    d = dxi[mu][beta]
                    if not d.is_zero():
                        terms.append(-coeff * d * Expr.of(JetVar(i, gamma.bump(mu))))
            comps[(i, alpha)] = esum(terms)
    return ProlongedField(vf.xi, comps, s)


def vertical_part(vf: ProjectableVectorField, spec: BundleSpec) -> dict[str, Expr]:
    """``(Xi_V)^i = Xi^i - y^i_sigma xi^sigma``."""
    out = {}
    for i, Xi in vf.vertical.items():
        out[i] = Xi - esum(vf.xi[s] * spec.jet(i, spec.unit(s)) for s in range(spec.n))
    return out


def split_hv(vf: ProjectableVectorField, s: int, spec: BundleSpec):
    """Horizontal coefficients ``xi`` and vertical components ``D_alpha (Xi_V)^i``, ``|alpha| <= s``."""
    if s + 1 > spec.max_order:
        raise OrderOverflow(s + 1, spec.max_order, "vertical part")
    vf.check(spec)
    vert = {}
    for i, v in vertical_part(vf, spec).items():
        table = DerivativeTable(v, spec)
        for alpha in MultiIndex.up_to(spec.n, s):
            vert[(i, alpha)] = table[alpha]
    return vf.xi, vert


def bracket(X: ProjectableVectorField, Y: ProjectableVectorField) -> ProjectableVectorField:
    """Lie bracket of projectable fields on ``Y``."""
    n = len(X.xi)
    xi = tuple(X.act(Y.xi[s]) - Y.act(X.xi[s]) for s in range(n))
    fields = sorted(set(X.vertical) | set(Y.vertical))
    zero = Expr()
    vert = {i: X.act(Y.vertical.get(i, zero)) - Y.act(X.vertical.get(i, zero)) for i in fields}
    return ProjectableVectorField(xi, vert)


# ---------------------------------------------------------------- densities


@dataclass(frozen=True)
class ScalarDensity:
    """Coefficient ``L`` of ``L * omega``."""

    L: Expr

    def __post_init__(self):
        object.__setattr__(self, "L", E(self.L))

    def is_zero(self) -> bool:
        return self.L.is_zero()


@dataclass(frozen=True)
class VectorDensity:
    """Components ``eps^mu`` of an (n-1)-form density."""

    comps: tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "comps", tuple(E(c) for c in self.comps))

    def __getitem__(self, mu):
        return self.comps[mu]

    def __len__(self):
        return len(self.comps)

    def __sub__(self, other: "VectorDensity") -> "VectorDensity":
        return VectorDensity(tuple(a - b for a, b in zip(self.comps, other.comps)))

    def __add__(self, other: "VectorDensity") -> "VectorDensity":
        return VectorDensity(tuple(a + b for a, b in zip(self.comps, other.comps)))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.comps)


@dataclass(frozen=True)
class SkewDensity2:
    """Antisymmetric ``nu^{mu nu}``."""

    comps: tuple[tuple[Expr, ...], ...]

    def __post_init__(self):
        comps = tuple(tuple(E(c) for c in row) for row in self.comps)
        object.__setattr__(self, "comps", comps)
        n = len(comps)
        for a in range(n):
            if len(comps[a]) != n:
                raise ValueError("skew density must be square")
            for b in range(a, n):
                if not (comps[a][b] + comps[b][a]).is_zero():
                    raise ValueError(f"component ({a},{b}) is not antisymmetric")

    @classmethod
    def zeros(cls, n: int) -> "SkewDensity2":
        return cls(tuple(tuple(Expr() for _ in range(n)) for _ in range(n)))

    def __getitem__(self, ij):
        a, b = ij
        return self.comps[a][b]

    def is_zero(self) -> bool:
        return all(c.is_zero() for row in self.comps for c in row)


@dataclass(frozen=True)
class CovectorDensity:
    """Coefficients ``E_i`` of ``theta^i ^ omega``, keyed by field name."""

    comps: Mapping[str, Expr]

    def __post_init__(self):
        object.__setattr__(self, "comps", {k: E(v) for k, v in self.comps.items()})

    def __getitem__(self, i):
        return self.comps[i]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.comps.values())

    def contract(self, u: Mapping[str, ExprLike]) -> Expr:
        """``u ⌋ E = sum_i u^i E_i``."""
        return esum(E(u[i]) * e for i, e in self.comps.items() if i in u)


def d_H(v: VectorDensity, spec: BundleSpec) -> ScalarDensity:
    """Formal divergence ``D_mu eps^mu``."""
    return ScalarDensity(esum(total_derivative(c, mu, spec) for mu, c in enumerate(v.comps)))


def d_H2(w: SkewDensity2, spec: BundleSpec) -> VectorDensity:
    """``(d_H nu)^mu = D_nu nu^{nu mu}``."""
    n = len(w.comps)
    return VectorDensity(tuple(
        esum(total_derivative(w.comps[nu][mu], nu, spec) for nu in range(n))
        for mu in range(n)))
