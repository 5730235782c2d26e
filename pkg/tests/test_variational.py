import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from randgen import exprs, random_expr, random_lagrangian, random_vector_density, random_vector_field, small_spec

from jetvar.errors import OrderOverflow
from jetvar.jets import BundleSpec, CovectorDensity, d_H
from jetvar.kernel import Expr, MultiIndex, Param
from jetvar.variational import (
    adjoint,
    apply_jacobi,
    euler_lagrange,
    euler_operator,
    first_variation_check,
    helmholtz,
    interior_euler,
    is_locally_variational,
    jacobi,
    linearization,
    lagrangian_order,
    momentum,
    second_variation,
    self_adjointness_residual,
)

MECH = BundleSpec(("t",), ("y",), 6, constants=("omega", "c"))
y, yt, ytt, yttt, ytttt = (MECH.jet("y", (k,)) for k in range(5))
omega, c = Expr.of(Param("omega")), Expr.of(Param("c"))
half = Fraction(1, 2)
SPEC = small_spec(2, 2, 6)


def test_oscillator_equation():
    L = half * yt ** 2 - half * omega ** 2 * y ** 2
    res = euler_lagrange(L, MECH)
    assert res.E["y"] == -(ytt + omega ** 2 * y)
    assert res.order == 2


def test_higher_order_equation():
    assert euler_operator(half * ytt ** 2, "y", MECH) == ytttt
    assert euler_operator(yt * ytt, "y", MECH) == 0


def test_interior_euler_oracle():
    assert interior_euler(half * yt ** 2, "y", (1,), MECH) == yt
    # binomial C(2,1) from the higher Euler operator
    assert interior_euler(half * ytt ** 2, "y", (1,), MECH) == -2 * yttt
    assert interior_euler(half * ytt ** 2, "y", (2,), MECH) == ytt


def test_momentum_of_second_order_lagrangian():
    p = momentum(half * ytt ** 2, MECH).coeffs
    assert p == {(0, "y", MultiIndex((0,))): -yttt, (0, "y", MultiIndex((1,))): ytt}


def test_euler_lagrange_needs_room():
    with pytest.raises(OrderOverflow) as info:
        euler_lagrange(yttt ** 2, MECH.with_order(5))
    assert info.value.needed == 6
    assert lagrangian_order(Expr.const(3), ["y"]) == 0


def test_damped_source_is_not_variational():
    damped = CovectorDensity({"y": ytt + c * yt + omega ** 2 * y})
    H = helmholtz(damped, MECH)
    assert not H.is_zero()
    assert H.coeffs[("y", "y", MultiIndex((1,)))] == 2 * c
    assert is_locally_variational(CovectorDensity({"y": ytt + omega ** 2 * y}), MECH)
    assert not is_locally_variational(CovectorDensity({"y": yttt}), MECH)


def test_second_variation_oracle():
    assert second_variation(half * yt ** 2 + y ** 3, {"y": c}, MECH) == 6 * y * c ** 2
    assert second_variation(half * yt ** 2, {"y": yt}, MECH) == ytt ** 2


def test_jacobi_of_oscillator():
    J = jacobi(half * yt ** 2 - half * omega ** 2 * y ** 2, MECH)
    assert apply_jacobi(J, {"y": y ** 2}, MECH)["y"] == -(2 * yt ** 2 + 2 * y * ytt) - omega ** 2 * y ** 2


# ---------------------------------------------------------------- properties


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_total_divergences_are_null_lagrangians(seed):
    rng = random.Random(seed)
    V = random_vector_density(rng, SPEC, 2, 3)
    el = euler_lagrange(d_H(V, SPEC).L, SPEC).E
    assert all(e.is_zero() for e in el.comps.values())


@settings(max_examples=30, deadline=None)
@given(exprs(SPEC, order=1), exprs(SPEC, order=1), st.sampled_from([Fraction(2), Fraction(-1, 3)]))
def test_euler_operator_is_linear(a, b, q):
    for f in SPEC.fields:
        assert euler_operator(a + q * b, f, SPEC) == euler_operator(a, f, SPEC) + q * euler_operator(b, f, SPEC)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_first_variation_formula(seed):
    rng = random.Random(seed)
    spec = small_spec(rng.randint(1, 2), rng.randint(1, 2), 6)
    L = random_lagrangian(rng, spec, rng.randint(1, 2), 4)
    assert first_variation_check(L, random_vector_field(rng, spec), spec).is_zero()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_jacobi_operators_are_self_adjoint(seed):
    rng = random.Random(seed)
    L = random_lagrangian(rng, SPEC, rng.randint(1, 2), 4)
    assert self_adjointness_residual(L, SPEC) == {}


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_adjoint_is_an_involution(seed):
    rng = random.Random(seed)
    source = CovectorDensity({f: random_expr(rng, SPEC, 2, 3) for f in SPEC.fields})
    J = linearization(source, SPEC.with_order(8))
    assert (adjoint(adjoint(J, SPEC.with_order(8)), SPEC.with_order(8)) - J).is_zero()
