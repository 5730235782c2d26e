import pickle
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from randgen import exprs, rationals, small_spec

from jetvar.kernel import (
    BaseCoord,
    E,
    Expr,
    FormalFn,
    JetVar,
    MultiIndex,
    Param,
    choose,
    evaluate,
    linear_parts,
    partial,
    partial_base,
    partial_jet,
    substitute,
)

SPEC = small_spec(2, 2, 4)
y = Expr.of(JetVar("u", (0, 0)))
yt = Expr.of(JetVar("u", (1, 0)))
x0 = Expr.of(BaseCoord(0))


# ---------------------------------------------------------------- multi-indices


def test_multiindex_enumeration_is_colex():
    assert MultiIndex.of_order(2, 2) == [MultiIndex((2, 0)), MultiIndex((1, 1)), MultiIndex((0, 2))]
    assert len(MultiIndex.up_to(3, 2)) == 10


def test_multiindex_arithmetic():
    a = MultiIndex((2, 1))
    assert a.order == 3
    assert a.factorial == 2
    assert a.plus((0, 1)) == (2, 2)
    assert a.minus((1, 1)) == (1, 0)
    assert a.bump(1) == (2, 2)
    assert a.directions() == [0, 0, 1]
    assert a.dominates((1, 1)) and not a.dominates((0, 2))
    with pytest.raises(ValueError):
        MultiIndex((-1, 0))


def test_sub_indices_and_binomials():
    a = MultiIndex((2, 1))
    subs = list(a.sub_indices())
    assert len(subs) == 6
    assert all(a.dominates(b) for b in subs)
    assert choose(a, (1, 0)) == 2
    assert choose(a, (1, 1)) == 2
    assert choose(a, a) == 1


@given(st.tuples(st.integers(0, 4), st.integers(0, 4)))
def test_binomial_sum_is_power_of_two(alpha):
    assert sum(choose(alpha, b) for b in MultiIndex(alpha).sub_indices()) == 2 ** sum(alpha)


# ---------------------------------------------------------------- atoms and expressions


def test_atoms_are_interned_and_pickle_to_the_same_object():
    a = JetVar("u", (1, 0))
    assert a is JetVar("u", [1, 0])
    assert pickle.loads(pickle.dumps(a)) is a
    assert BaseCoord(0) is not Param("x0")


def test_canonical_form():
    assert (y + x0) - (x0 + y) == 0
    assert ((y + x0) ** 2).terms() == ((x0 ** 2) + 2 * x0 * y + y ** 2).terms()
    assert E(3) == 3 and E(Fraction(4, 2)) == 2
    assert Expr.const(Fraction(1, 2)).constant_value() == Fraction(1, 2)
    assert (2 * y * x0).degree() == 2
    assert Expr().is_zero() and Expr.const(5).is_constant()


def test_division_and_negative_powers():
    assert (y * x0) / y == x0
    assert y ** -2 * y ** 2 == 1
    assert (3 * y) / 6 == Fraction(1, 2) * y
    with pytest.raises(ValueError):
        y / (y + x0)
    with pytest.raises(ValueError):
        (y + x0) ** -1
    with pytest.raises(ZeroDivisionError):
        y / 0
    with pytest.raises(ZeroDivisionError):
        y / Expr()


def test_jet_queries():
    e = y * yt + Expr.of(JetVar("v", (0, 2)))
    assert e.jet_order(["u"]) == 1
    assert e.jet_order() == 2
    assert x0.jet_order() == -1
    assert {a.name for a in e.jets(["v"])} == {"v"}


@settings(max_examples=60, deadline=None)
@given(exprs(SPEC), exprs(SPEC), exprs(SPEC))
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a - a).is_zero()
    assert a * 1 == a and a + 0 == a


@settings(max_examples=60, deadline=None)
@given(exprs(SPEC), exprs(SPEC), rationals())
def test_scaling_is_homogeneous(a, b, q):
    assert (a + b).scale(q) == a.scale(q) + b.scale(q)
    assert a.scale(q) == q * a


# ---------------------------------------------------------------- partial derivatives


def test_partial_oracles():
    e = Fraction(1, 2) * yt ** 2 - Fraction(1, 2) * Expr.of(Param("c")) ** 2 * y ** 2
    assert partial_jet(e, "u", (1, 0)) == yt
    assert partial_jet(e, "u", (0, 0)) == -Expr.of(Param("c")) ** 2 * y
    assert partial(e, Param("c")) == -Expr.of(Param("c")) * y ** 2
    f = Expr.of(FormalFn("f", (0, 0)))
    assert partial_base(f * x0 ** 2, 0) == 2 * x0 * f + x0 ** 2 * Expr.of(FormalFn("f", (1, 0)))


@settings(max_examples=60, deadline=None)
@given(exprs(SPEC), exprs(SPEC), st.sampled_from([JetVar("u", (1, 0)), JetVar("v", (0, 0)), Param("c")]))
def test_partial_leibniz(a, b, atom):
    assert partial(a * b, atom) == partial(a, atom) * b + a * partial(b, atom)


@settings(max_examples=60, deadline=None)
@given(exprs(SPEC))
def test_partials_commute(a):
    p, q = JetVar("u", (1, 0)), JetVar("v", (0, 1))
    assert partial(partial(a, p), q) == partial(partial(a, q), p)


# ---------------------------------------------------------------- substitution, linear parts, evaluation


def test_substitute():
    assert substitute(y * x0, {JetVar("u", (0, 0)): x0}) == x0 ** 2
    assert substitute(y ** 2, {JetVar("u", (0, 0)): y + 1}) == y ** 2 + 2 * y + 1
    with pytest.raises(ValueError):
        substitute(y, {BaseCoord(0): y})


@settings(max_examples=40, deadline=None)
@given(exprs(SPEC), exprs(SPEC), exprs(SPEC, order=0, with_base=True))
def test_substitution_is_a_ring_homomorphism(a, b, value):
    s = {JetVar("u", (0, 0)): value}
    assert substitute(a * b, s) == substitute(a, s) * substitute(b, s)
    assert substitute(a + b, s) == substitute(a, s) + substitute(b, s)


def test_linear_parts():
    coeffs, rest = linear_parts(y * x0 + 3 * x0, lambda a: a.kind == JetVar("u", (0, 0)).kind)
    assert coeffs == {JetVar("u", (0, 0)): x0}
    assert rest == 3 * x0
    with pytest.raises(ValueError):
        linear_parts(y * yt, lambda a: isinstance(a, JetVar))


def test_evaluate():
    e = Fraction(1, 2) * yt ** 2 + 3 * x0
    val = evaluate(e, lambda a: {JetVar("u", (1, 0)): 2.0, BaseCoord(0): 1.0}[a])
    assert val == pytest.approx(5.0)
