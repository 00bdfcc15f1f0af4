import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import genfun as gf

EPS_VALUES = [2.0 ** -3, 2.0 ** -6, 2.0 ** -10]


def test_constant_embedding_evaluates_everywhere():
    one = gf.constant(1.0)
    for eps in EPS_VALUES:
        for x in (-3.0, 0.0, 0.7, 100.0):
            assert gf.evaluate(one, eps, x) == 1.0


def test_heaviside_midpoint_symmetric(bump):
    h = gf.embed_heaviside(bump)
    for eps in EPS_VALUES:
        assert gf.evaluate(h, eps, 0.0) == pytest.approx(0.5, abs=1e-12)


def test_heaviside_outside_mollifier_support(bump):
    h = gf.embed_heaviside(bump)
    r = bump.support_radius
    for eps in EPS_VALUES:
        assert gf.evaluate(h, eps, eps * r) == 1.0
        assert gf.evaluate(h, eps, 2.0) == 1.0
        assert gf.evaluate(h, eps, -eps * r) == 0.0


def test_mul_of_heavisides_at_zero(bump):
    h = gf.embed_heaviside(bump)
    hh = gf.combine("mul", h, h)
    assert gf.evaluate(hh, 0.125, 0.0) == pytest.approx(0.25, abs=1e-12)


def test_h_squared_minus_h_at_zero(bump):
    h = gf.embed_heaviside(bump)
    u = gf.combine("sub", gf.combine("mul", h, h), h)
    assert gf.evaluate(u, 0.125, 0.0) == pytest.approx(-0.25, abs=1e-12)


def test_add_is_linear(bump):
    h = gf.embed_heaviside(bump)
    doubled = gf.combine("add", h, h)
    for x in (-0.01, 0.0, 0.02):
        assert gf.evaluate(doubled, 0.125, x) == pytest.approx(
            2.0 * gf.evaluate(h, 0.125, x), abs=1e-14)


def test_scale(bump):
    h = gf.embed_heaviside(bump)
    assert gf.evaluate(gf.scale(0.0, h), 0.125, 0.37) == 0.0
    assert gf.evaluate(gf.scale(-1.0, h), 0.125, 5.0) == -1.0
    two_delta = gf.scale(2.0, gf.embed_delta(bump))
    res = gf.integrate_gf_at(two_delta, 0.01, -math.inf, math.inf, tol=1e-12)
    assert res.value == pytest.approx(2.0, abs=1e-11)


def test_scale_rejects_non_finite(bump):
    with pytest.raises(ValueError):
        gf.scale(math.inf, gf.embed_heaviside(bump))


def test_derivative_of_heaviside_is_delta(bump):
    dh = gf.derivative(gf.embed_heaviside(bump))
    d = gf.embed_delta(bump)
    xs = np.linspace(-0.3, 0.3, 1001)
    for eps in EPS_VALUES:
        np.testing.assert_allclose(
            gf.evaluate(dh, eps, xs), gf.evaluate(d, eps, xs), atol=1e-12)


def test_derivative_of_constant_is_zero():
    zero = gf.derivative(gf.constant(5.0))
    assert gf.evaluate(zero, 0.125, 1.23) == 0.0


def test_leibniz_rule_matches_manual_expansion(bump):
    u = gf.embed_heaviside(bump)
    v = gf.embed_delta(bump)
    product_deriv = gf.derivative(gf.combine("mul", u, v))
    manual = gf.combine(
        "add",
        gf.combine("mul", gf.derivative(u), v),
        gf.combine("mul", u, gf.derivative(v)),
    )
    rng = np.random.default_rng(7)
    xs = rng.uniform(-0.2, 0.2, size=1000)
    for eps in (0.125, 2.0 ** -5):
        np.testing.assert_allclose(
            gf.evaluate(product_deriv, eps, xs),
            gf.evaluate(manual, eps, xs),
            atol=1e-10, rtol=1e-10)


def test_compose_square_equals_self_product(bump):
    h = gf.embed_heaviside(bump)
    squared = gf.compose_polynomial([0.0, 0.0, 1.0], h)
    product = gf.combine("mul", h, h)
    xs = np.linspace(-0.5, 0.5, 101)
    for eps in EPS_VALUES:
        np.testing.assert_allclose(
            gf.evaluate(squared, eps, xs), gf.evaluate(product, eps, xs),
            atol=1e-14)


def test_compose_antiderivative_difference_is_minus_sixth(bump):
    # p(u) = u^3/3 - u^2/2 evaluated across the step: p(1) - p(0) = -1/6.
    h = gf.embed_heaviside(bump)
    p = gf.compose_polynomial([0.0, 0.0, -0.5, 1.0 / 3.0], h)
    r = bump.support_radius
    for eps in EPS_VALUES:
        jump = gf.evaluate(p, eps, eps * r) - gf.evaluate(p, eps, -eps * r)
        assert jump == pytest.approx(-1.0 / 6.0, abs=1e-14)


def test_compose_degree_zero_is_constant(bump):
    one = gf.compose_polynomial([1.0], gf.embed_heaviside(bump))
    assert gf.evaluate(one, 0.125, 0.0) == 1.0
    assert gf.evaluate(one, 0.125, 17.0) == 1.0


@pytest.fixture(scope="module")
def algebra_pool(bump):
    h = gf.embed_heaviside(bump)
    d = gf.embed_delta(bump)
    return [
        h,
        d,
        gf.constant(2.5),
        gf.identity(),
        gf.compose_polynomial([0.0, 0.0, 1.0], h),
    ]


@settings(max_examples=60, deadline=None)
@given(
    i=st.integers(0, 4), j=st.integers(0, 4), k=st.integers(0, 4),
    eps=st.sampled_from(EPS_VALUES),
    x=st.floats(-2.0, 2.0),
)
def test_ring_laws(algebra_pool, i, j, k, eps, x):
    u, v, w = algebra_pool[i], algebra_pool[j], algebra_pool[k]
    left = gf.combine("add", gf.combine("add", u, v), w)
    right = gf.combine("add", u, gf.combine("add", v, w))
    assert gf.evaluate(left, eps, x) == pytest.approx(
        gf.evaluate(right, eps, x), abs=1e-12)

    uv = gf.combine("mul", u, v)
    vu = gf.combine("mul", v, u)
    assert gf.evaluate(uv, eps, x) == pytest.approx(
        gf.evaluate(vu, eps, x), abs=1e-12)

    dist_left = gf.combine("mul", u, gf.combine("add", v, w))
    dist_right = gf.combine("add", gf.combine("mul", u, v),
                            gf.combine("mul", u, w))
    assert gf.evaluate(dist_left, eps, x) == pytest.approx(
        gf.evaluate(dist_right, eps, x), abs=1e-12)


@pytest.mark.parametrize("eps", [2.0 ** -3, 2.0 ** -6])
def test_finite_difference_matches_exact_derivative(bump, eps):
    h = gf.embed_heaviside(bump)
    d = gf.embed_delta(bump)
    composite = gf.combine(
        "mul", gf.combine("sub", gf.combine("mul", h, h), h), d)
    step = 1e-5 * eps
    for u in (h, d, composite):
        rep = u.at(eps)
        xs = np.linspace(-0.8 * eps, 0.8 * eps, 41)
        fd = (rep.eval(xs + step) - rep.eval(xs - step)) / (2.0 * step)
        exact = rep.deriv(xs)
        tol = np.maximum(1e-6, 1e-6 * np.abs(exact))
        assert np.all(np.abs(fd - exact) <= tol)


def test_evaluation_is_deterministic(bump):
    h = gf.embed_heaviside(bump)
    xs = np.linspace(-1, 1, 57)
    first = gf.evaluate(h, 2.0 ** -4, xs)
    second = gf.evaluate(h, 2.0 ** -4, xs)
    assert np.array_equal(first, second)


def test_overflow_raises_evaluation_error():
    sixth_power = gf.from_polynomial([0.0] * 6 + [1.0])
    with pytest.raises(gf.EvaluationError):
        gf.evaluate(sixth_power, 0.125, 1e60)


def test_gen_number_rejects_non_finite():
    bad = gf.GenNumber(lambda eps: math.nan, "bad")
    with pytest.raises(gf.EvaluationError):
        bad.at(0.125)


def test_gen_number_arithmetic():
    a = gf.GenNumber(lambda eps: 1.0 / eps, "1/eps")
    b = gf.GenNumber.constant(3.0)
    assert (a + b).at(0.25) == pytest.approx(7.0)
    assert (a - b).at(0.25) == pytest.approx(1.0)
    assert (a * b).at(0.25) == pytest.approx(12.0)
    assert (a ** 2).at(0.25) == pytest.approx(16.0)
    assert (-a).at(0.25) == pytest.approx(-4.0)


def test_epsilon_validation(bump):
    h = gf.embed_heaviside(bump)
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(ValueError):
            h.at(bad)


def test_operator_sugar_matches_combinators(bump):
    h = gf.embed_heaviside(bump)
    sugar = h * h - h
    explicit = gf.combine("sub", gf.combine("mul", h, h), h)
    xs = np.linspace(-0.2, 0.2, 11)
    np.testing.assert_array_equal(
        gf.evaluate(sugar, 0.125, xs), gf.evaluate(explicit, 0.125, xs))
