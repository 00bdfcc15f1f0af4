import math

import numpy as np
import pytest
from scipy.integrate import quad

import genfun as gf

GRID_EPS = [2.0 ** -3, 2.0 ** -6, 2.0 ** -9, 2.0 ** -12]


def test_polynomial_integral():
    res = gf.integrate(lambda x: x ** 2, 0.0, 1.0, tol=1e-12)
    assert res.value == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert res.error_estimate <= 1e-12
    assert res.subdivisions >= 1


def test_additivity():
    f = lambda x: np.exp(-x ** 2) * np.cos(3 * x)
    tol = 1e-11
    whole = gf.integrate(f, -2.0, 2.0, tol=tol).value
    parts = (gf.integrate(f, -2.0, 0.3, tol=tol).value
             + gf.integrate(f, 0.3, 2.0, tol=tol).value)
    assert parts == pytest.approx(whole, abs=3 * tol)


def test_bounds_validation():
    with pytest.raises(ValueError):
        gf.integrate(lambda x: x, 1.0, 0.0)
    with pytest.raises(ValueError):
        gf.integrate(lambda x: x, 0.0, math.inf)
    with pytest.raises(ValueError):
        gf.integrate(lambda x: x, 0.0, 1.0, tol=0.0)


def test_budget_exhaustion_carries_best_estimate():
    spiky = lambda x: np.sqrt(np.abs(x))
    with pytest.raises(gf.QuadratureError) as err:
        gf.integrate(spiky, -1.0, 1.0, tol=1e-15, max_intervals=8)
    assert math.isfinite(err.value.best_value)
    assert err.value.subdivisions > 8
    # The true value is 4/3; the carried estimate should be in the ballpark.
    assert err.value.best_value == pytest.approx(4.0 / 3.0, abs=1e-2)


def test_non_finite_integrand_raises():
    with pytest.raises(gf.QuadratureError):
        gf.integrate(lambda x: 1.0 / x, -1.0, 1.0, tol=1e-9)


def test_determinism(bump):
    d = gf.embed_delta(bump)
    rep = d.at(2.0 ** -7)
    a = gf.integrate(rep.eval, -1.0, 1.0, tol=1e-11, breakpoints=rep.support_hint)
    b = gf.integrate(rep.eval, -1.0, 1.0, tol=1e-11, breakpoints=rep.support_hint)
    assert a.value == b.value and a.error_estimate == b.error_estimate


def _eq2_integrand(m):
    h = gf.embed_heaviside(m)
    return gf.combine(
        "mul",
        gf.combine("sub", gf.compose_polynomial([0.0, 0.0, 1.0], h), h),
        gf.derivative(h),
    )


def test_step_cube_identity_every_kind_every_eps(mollifiers):
    for m in mollifiers.values():
        u = _eq2_integrand(m)
        for eps in GRID_EPS:
            res = gf.integrate_gf_at(u, eps, -math.inf, math.inf, tol=1e-11)
            assert res.value == pytest.approx(-1.0 / 6.0, abs=1e-10)


@pytest.mark.parametrize("n", range(1, 7))
def test_power_family_identity(mollifiers, n):
    # integral of H^n H' over the line telescopes to 1/(n+1).
    for m in mollifiers.values():
        h = gf.embed_heaviside(m)
        u = gf.combine("mul", gf.compose_polynomial([0.0] * n + [1.0], h),
                       gf.derivative(h))
        for eps in GRID_EPS:
            res = gf.integrate_gf_at(u, eps, -math.inf, math.inf, tol=1e-11)
            assert res.value == pytest.approx(1.0 / (n + 1), abs=1e-10)


def test_delta_normalization_via_integrate_gf(bump):
    gn = gf.integrate_gf(gf.embed_delta(bump), -math.inf, math.inf, tol=1e-12)
    for eps in GRID_EPS:
        assert gn.at(eps) == pytest.approx(1.0, abs=1e-11)


def test_delta_squared_oracle(bump):
    r = bump.support_radius
    rho_sq, _ = quad(lambda y: bump.kernel(0)(y) ** 2, -r, r, limit=200)
    dsq = gf.combine("mul", gf.embed_delta(bump), gf.embed_delta(bump))
    gn = gf.integrate_gf(dsq, -math.inf, math.inf, tol=1e-9)
    for eps in GRID_EPS:
        assert gn.at(eps) == pytest.approx(rho_sq / eps, rel=1e-9)


def test_h2_minus_h_on_fixed_interval_scales_linearly(bump):
    # Substituting x = eps*y: integral over [-1,1] equals eps * C with
    # C = integral of (P^2 - P); C comes from an independent integrator.
    r = bump.support_radius
    c_rho, _ = quad(lambda y: bump.cdf(y) ** 2 - bump.cdf(y), -r, r, limit=200)
    assert c_rho < 0.0
    h = gf.embed_heaviside(bump)
    u = gf.combine("sub", gf.compose_polynomial([0.0, 0.0, 1.0], h), h)
    gn = gf.integrate_gf(u, -1.0, 1.0, tol=1e-12)
    for eps in GRID_EPS:
        assert gn.at(eps) == pytest.approx(eps * c_rho, rel=1e-8)


def test_divergent_constant_tail_raises(bump):
    h = gf.embed_heaviside(bump)
    with pytest.raises(gf.QuadratureError):
        gf.integrate_gf_at(h, 0.125, -math.inf, math.inf)
    # Finite domains are fine even though H has a nonzero tail.
    res = gf.integrate_gf_at(h, 0.125, -1.0, 1.0, tol=1e-11)
    assert res.value == pytest.approx(1.0, abs=1e-9)


def test_unbounded_support_over_infinite_domain_raises():
    with pytest.raises(gf.QuadratureError):
        gf.integrate_gf_at(gf.identity(), 0.125, -math.inf, math.inf)


def test_pairing_of_h2_minus_h_is_negative_and_shrinks(bump, suite, grid):
    h = gf.embed_heaviside(bump)
    u = gf.combine("sub", gf.compose_polynomial([0.0, 0.0, 1.0], h), h)
    psi = gf.TestFunction(
        lambda x: np.maximum(0.0, 1.0 - np.asarray(x, dtype=float) ** 2) ** 3,
        (-1.0, 1.0), "nonnegative window", 1.0)
    values = [gf.pair(u, psi, eps) for eps in grid.values()]
    assert all(v < 0.0 for v in values)
    assert all(abs(b) < abs(a) for a, b in zip(values, values[1:]))


def test_pairing_of_smooth_function_matches_direct_quadrature(suite):
    f = gf.from_polynomial([1.0, 0.0, -0.5], "1 - x^2/2")
    psi = suite[1]
    oracle, _ = quad(lambda x: (1.0 - 0.5 * x ** 2) * psi.eval(x),
                     psi.support[0], psi.support[1], limit=200)
    for eps in (0.125, 2.0 ** -10):
        assert gf.pair(f, psi, eps) == pytest.approx(oracle, abs=1e-9)


def test_delta_pairing_limit(bump, suite, grid):
    d = gf.embed_delta(bump)
    psi = suite[2]
    g = gf.GenNumber(lambda e: gf.pair(d, psi, e), "delta pairing")
    limit, _ = gf.limit_estimate(g, grid)
    assert limit == pytest.approx(psi.value_at_zero, abs=1e-6)


def test_pairing_cost_does_not_grow_as_eps_shrinks(bump, suite):
    h = gf.embed_heaviside(bump)
    u = gf.combine("sub", gf.compose_polynomial([0.0, 0.0, 1.0], h), h)
    psi = suite[0]
    coarse = gf.pair_result(u, psi, 2.0 ** -3, tol=1e-11)
    fine = gf.pair_result(u, psi, 2.0 ** -12, tol=1e-11)
    assert fine.subdivisions <= coarse.subdivisions


def test_empty_intersection_is_zero(bump):
    d = gf.embed_delta(bump)
    far = gf.TestFunction(
        lambda x: np.exp(-np.asarray(x, dtype=float) ** 2),
        (5.0, 6.0), "window away from the origin", 0.0)
    res = gf.pair_result(d, far, 2.0 ** -4)
    assert res.value == 0.0 and res.subdivisions == 0
