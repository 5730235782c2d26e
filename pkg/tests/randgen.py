"""Random polynomial objects for identity tests.

Two flavours: seeded ``random.Random`` generators for the fixed-count
acceptance runs, and hypothesis strategies for property tests.
"""

from __future__ import annotations

import random
from fractions import Fraction

from hypothesis import strategies as st

from jetvar.jets import BundleSpec, ProjectableVectorField, VectorDensity
from jetvar.kernel import BaseCoord, Expr, JetVar, MultiIndex, Param, esum

COEFFS = [Fraction(c) for c in (1, -1, 2, -2, 3)] + [Fraction(1, 2), Fraction(-1, 3), Fraction(5, 4)]


def small_spec(n: int, m: int, cap: int) -> BundleSpec:
    coords = ("t", "x")[:n]
    fields = ("u", "v")[:m]
    return BundleSpec(coords, fields, cap, constants=("c",))


def random_monomial(rng: random.Random, spec: BundleSpec, order: int, degree: int = 3) -> Expr:
    atoms = [JetVar(f, a) for f in spec.fields for a in MultiIndex.up_to(spec.n, order)]
    atoms += [BaseCoord(s) for s in range(spec.n)] + [Param("c")]
    k = rng.randint(0, degree)
    out = Expr.const(rng.choice(COEFFS))
    for _ in range(k):
        out = out * Expr.of(rng.choice(atoms))
    return out


def random_expr(rng: random.Random, spec: BundleSpec, order: int, terms: int = 5, degree: int = 3) -> Expr:
    return esum(random_monomial(rng, spec, order, degree) for _ in range(rng.randint(1, terms)))


def random_lagrangian(rng: random.Random, spec: BundleSpec, order: int, terms: int = 5) -> Expr:
    """Nonzero polynomial Lagrangian that actually depends on the top-order jets."""
    while True:
        L = random_expr(rng, spec, order, terms)
        if L.jet_order(spec.fields) >= 1:
            return L


def random_vector_density(rng: random.Random, spec: BundleSpec, order: int, terms: int = 5) -> VectorDensity:
    return VectorDensity(tuple(random_expr(rng, spec, order, terms) for _ in range(spec.n)))


def random_base_poly(rng: random.Random, n: int, degree: int = 2, terms: int = 3) -> Expr:
    out = Expr()
    for _ in range(rng.randint(1, terms)):
        mono = Expr.const(rng.choice(COEFFS))
        for _ in range(rng.randint(0, degree)):
            mono = mono * Expr.of(BaseCoord(rng.randrange(n)))
        out = out + mono
    return out


def random_vector_field(rng: random.Random, spec: BundleSpec) -> ProjectableVectorField:
    xi = tuple(random_base_poly(rng, spec.n) for _ in range(spec.n))
    zero = MultiIndex.zero(spec.n)
    vert = {}
    for f in spec.fields:
        v = random_base_poly(rng, spec.n, 1, 2)
        for _ in range(rng.randint(0, 2)):
            v = v + rng.choice(COEFFS) * Expr.of(JetVar(rng.choice(spec.fields), zero)) ** rng.randint(1, 2)
        vert[f] = v
    return ProjectableVectorField(xi, vert)


# ---------------------------------------------------------------- hypothesis


def jet_atoms(spec: BundleSpec, order: int):
    return [JetVar(f, a) for f in spec.fields for a in MultiIndex.up_to(spec.n, order)]


@st.composite
def exprs(draw, spec: BundleSpec, order: int = 2, max_terms: int = 4, max_degree: int = 3,
          with_base: bool = True):
    atoms = jet_atoms(spec, order) + [Param(c) for c in spec.constants]
    if with_base:
        atoms += [BaseCoord(s) for s in range(spec.n)]
    monos = draw(st.lists(
        st.tuples(st.sampled_from(COEFFS), st.lists(st.sampled_from(atoms), max_size=max_degree)),
        max_size=max_terms))
    out = Expr()
    for c, factors in monos:
        term = Expr.const(c)
        for a in factors:
            term = term * Expr.of(a)
        out = out + term
    return out


def rationals():
    return st.fractions(min_value=-5, max_value=5, max_denominator=6)


# ---------------------------------------------------------------- documents


def random_document(rng: random.Random):
    """A random, fully expanded model document (what ``render_model`` emits)."""
    from jetvar.dsl import ModelDocument
    from jetvar.gauge import GaugeModel
    from jetvar.kernel import FormalFn

    n = rng.randint(1, 2)
    coords = ("t", "x")[:n]
    fields = ["u"]
    if rng.random() < 0.5:
        fields.append("v")
    if rng.random() < 0.5:
        fields += [f"A[{mu}]" for mu in range(n)]
    constants = tuple(rng.sample(["c", "omega", "lam"], rng.randint(0, 2)))
    functions = ("f",) if rng.random() < 0.5 else ()
    cap = rng.randint(2, 4)
    spec = BundleSpec(coords, tuple(fields), cap, functions, constants)

    def expr(order=2, with_params=()):
        atoms = [JetVar(f, a) for f in spec.fields for a in MultiIndex.up_to(n, min(order, cap))]
        atoms += [BaseCoord(s) for s in range(n)] + [Param(c) for c in constants]
        atoms += [FormalFn(f, a) for f in functions for a in MultiIndex.up_to(n, 1)]
        out = Expr()
        for _ in range(rng.randint(0, 4)):
            term = Expr.const(rng.choice(COEFFS))
            for _ in range(rng.randint(0, 3)):
                term = term * Expr.of(rng.choice(atoms))
            if rng.random() < 0.15:
                term = term * Expr.of(rng.choice(atoms)) ** -1
            out = out + term
        return out

    gauge, lift = None, {}
    if rng.random() < 0.5:
        xi = "xi" if rng.random() < 0.5 else None
        gauge = GaugeModel(n, xi, ("eps",), 1, 1)
        zero = MultiIndex.zero(n)
        for f in spec.fields:
            if rng.random() < 0.6:
                comp = rng.choice(COEFFS) * Expr.of(JetVar("eps", MultiIndex.unit(n, rng.randrange(n))))
                if xi:
                    comp = comp + Expr.of(JetVar(f, zero)) * Expr.of(
                        JetVar(f"xi[{rng.randrange(n)}]", MultiIndex.unit(n, rng.randrange(n))))
                lift[f] = comp
    defs = {}
    if rng.random() < 0.5:
        defs["K"] = {(): expr()}
    if rng.random() < 0.5:
        defs["G"] = {(mu,): expr() for mu in range(n)}
    lagrangians = {f"L{j}": expr() for j in range(rng.randint(0, 2))}
    sources = {}
    if rng.random() < 0.5:
        sources["S"] = {f: expr() for f in spec.fields if rng.random() < 0.7}
    return ModelDocument(spec, gauge, lift, defs, lagrangians, sources)
