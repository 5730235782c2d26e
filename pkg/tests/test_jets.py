import random

import pytest
from hypothesis import given, settings, strategies as st

from randgen import exprs, random_expr, random_vector_field, small_spec

from jetvar.errors import OrderOverflow
from jetvar.jets import (
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
    split_hv,
    total_derivative,
    total_derivative_multi,
    vertical_part,
)
from jetvar.kernel import BaseCoord, E, Expr, FormalFn, MultiIndex

MECH = BundleSpec(("t",), ("y",), 4, functions=("f",))
y, yt, ytt = (MECH.jet("y", (k,)) for k in range(3))
t = Expr.of(BaseCoord(0))
SPEC2 = small_spec(2, 2, 5)


def test_bundle_spec_validation():
    with pytest.raises(ValueError):
        BundleSpec((), ("y",), 2)
    with pytest.raises(ValueError):
        BundleSpec(("t",), ("t",), 2)
    with pytest.raises(ValueError):
        BundleSpec(("t",), ("y",), 0)
    assert MECH.with_order(7).max_order == 7
    assert MECH.with_fields(["p"]).fields == ("y", "p")


def test_total_derivative_oracles():
    assert total_derivative(y * yt, 0, MECH) == yt ** 2 + y * ytt
    assert total_derivative(t ** 2 * y, 0, MECH) == 2 * t * y + t ** 2 * yt
    assert total_derivative(Expr.of(FormalFn("f", (0,))), 0, MECH) == Expr.of(FormalFn("f", (1,)))
    assert total_derivative(3, 0, MECH) == 0


def test_total_derivative_respects_the_cap():
    spec = MECH.with_order(2)
    with pytest.raises(OrderOverflow) as info:
        total_derivative(ytt, 0, spec)
    assert info.value.needed == 3 and info.value.cap == 2


def test_derivative_table_matches_repeated_derivatives():
    e = random_expr(random.Random(3), SPEC2, 1)
    table = DerivativeTable(e, SPEC2)
    for alpha in MultiIndex.up_to(2, 3):
        assert table[alpha] == total_derivative_multi(e, alpha, SPEC2)


@settings(max_examples=40, deadline=None)
@given(exprs(SPEC2, order=2))
def test_total_derivatives_commute(e):
    assert total_derivative(total_derivative(e, 0, SPEC2), 1, SPEC2) == \
        total_derivative(total_derivative(e, 1, SPEC2), 0, SPEC2)


@settings(max_examples=40, deadline=None)
@given(exprs(SPEC2, order=2), exprs(SPEC2, order=2), st.integers(0, 1))
def test_total_derivative_leibniz(a, b, s):
    assert total_derivative(a * b, s, SPEC2) == total_derivative(a, s, SPEC2) * b + a * total_derivative(b, s, SPEC2)


# ---------------------------------------------------------------- vector fields


def test_first_prolongation_formula():
    # Xi = t^2 d_t + y d_y: Xi^y_t = D_t(y) - y_t D_t(t^2)
    vf = ProjectableVectorField((t ** 2,), {"y": y})
    j = prolong(vf, 2, MECH)
    assert j.component("y", (1,)) == yt - 2 * t * yt
    # second order: D_tt(y) - 2 D_t(xi) y_tt - D_tt(xi) y_t
    assert j.component("y", (2,)) == ytt - 4 * t * ytt - 2 * yt


def test_time_translation_prolongs_trivially():
    j = prolong(ProjectableVectorField((1,), {"y": 0}), 3, MECH)
    assert all(c.is_zero() for c in j.components.values())


def test_projectability_is_checked():
    with pytest.raises(ValueError):
        prolong(ProjectableVectorField((y,), {"y": 0}), 1, MECH)
    with pytest.raises(ValueError):
        prolong(ProjectableVectorField((1,), {"y": yt}), 1, MECH)
    with pytest.raises(OrderOverflow):
        prolong(ProjectableVectorField((1,), {"y": y}), 5, MECH)


def test_vertical_part_and_split():
    vf = ProjectableVectorField((t,), {"y": y ** 2})
    assert vertical_part(vf, MECH) == {"y": y ** 2 - t * yt}
    xi, vert = split_hv(vf, 1, MECH)
    assert xi == (t,)
    assert vert[("y", MultiIndex((1,)))] == total_derivative(y ** 2 - t * yt, 0, MECH)
    with pytest.raises(OrderOverflow):
        split_hv(vf, 4, MECH)


def test_bracket_of_projectable_fields():
    X = ProjectableVectorField((1,), {"y": 0})
    Y = ProjectableVectorField((t,), {"y": y})
    Z = bracket(X, Y)
    assert Z.xi == (E(1),)
    assert Z.vertical == {"y": E(0)}


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_prolongation_preserves_brackets(seed):
    rng = random.Random(seed)
    spec = small_spec(rng.randint(1, 2), rng.randint(1, 2), 4)
    X, Y = random_vector_field(rng, spec), random_vector_field(rng, spec)
    f = random_expr(rng, spec, 2, 3)
    s = 2
    jX, jY, jZ = prolong(X, s, spec), prolong(Y, s, spec), prolong(bracket(X, Y), s, spec)
    assert jX.act(jY.act(f)) - jY.act(jX.act(f)) == jZ.act(f)


# ---------------------------------------------------------------- densities


def test_densities():
    w = SkewDensity2(((0, y), (-y, 0)))
    assert not w.is_zero()
    assert SkewDensity2.zeros(3).is_zero()
    with pytest.raises(ValueError):
        SkewDensity2(((0, y), (y, 0)))
    v = VectorDensity((y, yt))
    assert (v - v).is_zero()
    assert CovectorDensity({"y": yt}).contract({"y": y}) == y * yt
    assert d_H(VectorDensity((y * yt,)), MECH).L == yt ** 2 + y * ytt


@settings(max_examples=30, deadline=None)
@given(exprs(SPEC2, order=2, max_terms=3))
def test_divergence_of_a_superpotential_vanishes(a):
    w = SkewDensity2(((0, a), (-a, 0)))
    assert d_H(d_H2(w, SPEC2), SPEC2).is_zero()
