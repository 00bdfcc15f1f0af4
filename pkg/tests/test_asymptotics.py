import math

import numpy as np
import pytest

import genfun as gf
from genfun.asymptotics import VERDICT_DECAYS, VERDICT_FINITE, VERDICT_INFINITE, \
    VERDICT_UNCLASSIFIABLE


def test_grid_is_geometric_and_validated():
    grid = gf.EpsilonGrid(0.125, 0.5, 10)
    eps = grid.values()
    assert np.allclose(eps[1:] / eps[:-1], 0.5)
    with pytest.raises(ValueError):
        gf.EpsilonGrid(0.125, 1.5, 10)
    with pytest.raises(ValueError):
        gf.EpsilonGrid(0.125, 0.5, 3)
    with pytest.raises(ValueError):
        gf.EpsilonGrid(0.125, 0.25, 12)  # leaves the working range


def test_fit_exact_power_law(grid):
    g = gf.GenNumber(lambda e: 1.0 / e, "1/eps")
    exponent, coefficient, r2 = gf.fit_power_law(g, grid)
    assert exponent == pytest.approx(-1.0, abs=1e-9)
    assert coefficient == pytest.approx(1.0, rel=1e-9)
    assert r2 > 0.9999


def test_fit_constant(grid):
    exponent, coefficient, r2 = gf.fit_power_law(gf.GenNumber.constant(7.0), grid)
    assert exponent == pytest.approx(0.0, abs=0.01)
    assert coefficient == pytest.approx(7.0)


def test_fit_restores_sign(grid):
    g = gf.GenNumber(lambda e: -2.0 * e, "-2eps")
    exponent, coefficient, _ = gf.fit_power_law(g, grid)
    assert exponent == pytest.approx(1.0, abs=1e-9)
    assert coefficient == pytest.approx(-2.0, rel=1e-9)


def test_fit_rejects_sign_changes_and_zeros(grid):
    flipping = gf.GenNumber(lambda e: math.copysign(1.0, math.sin(1.0 / e)), "flip")
    with pytest.raises(gf.PowerLawUnfitError):
        gf.fit_power_law(flipping, grid)
    with pytest.raises(gf.PowerLawUnfitError):
        gf.fit_power_law(gf.GenNumber.constant(0.0), grid)


def test_delta_squared_fit(bump, grid):
    from scipy.integrate import quad

    r = bump.support_radius
    rho_sq, _ = quad(lambda y: bump.kernel(0)(y) ** 2, -r, r, limit=200)
    dsq = gf.combine("mul", gf.embed_delta(bump), gf.embed_delta(bump))
    g = gf.integrate_gf(dsq, -math.inf, math.inf, tol=1e-9)
    exponent, coefficient, r2 = gf.fit_power_law(g, grid)
    assert exponent == pytest.approx(-1.0, abs=0.02)
    assert coefficient == pytest.approx(rho_sq, rel=0.01)
    assert r2 > 0.9999


def test_limit_estimate_linear_model(grid):
    limit, err = gf.limit_estimate(gf.GenNumber(lambda e: 3.0 + 2.0 * e, "lin"), grid)
    assert limit == pytest.approx(3.0, abs=1e-6)
    assert err < 1e-6


@pytest.mark.parametrize("p", [1, 2])
def test_limit_estimate_exact_power_models(grid, p):
    g = gf.GenNumber(lambda e: 1.25 - 0.8 * e ** p, f"L+c*eps^{p}")
    limit, _ = gf.limit_estimate(g, grid)
    assert limit == pytest.approx(1.25, abs=1e-8)


def test_limit_estimate_flags_divergence(grid):
    with pytest.raises(gf.NoLimitError):
        gf.limit_estimate(gf.GenNumber(lambda e: 1.0 / e, "1/eps"), grid)


def test_limit_estimate_constant_data(grid):
    limit, err = gf.limit_estimate(gf.GenNumber.constant(-1.0 / 6.0), grid)
    assert limit == -1.0 / 6.0
    assert err == 0.0


def test_classify_infinite(bump, grid):
    g = gf.GenNumber(lambda e: 2.0 / e, "2/eps")
    verdict = gf.classify(g, grid)
    assert verdict.verdict == VERDICT_INFINITE
    assert verdict.order == pytest.approx(1.0, abs=1e-6)
    assert verdict.coefficient == pytest.approx(2.0, rel=1e-6)
    assert len(verdict.samples) == grid.count


def test_classify_finite_limit(grid):
    verdict = gf.classify(gf.GenNumber(lambda e: -1.0 / 6.0 + 0.2 * e, "eq2ish"), grid)
    assert verdict.verdict == VERDICT_FINITE
    assert verdict.limit == pytest.approx(-1.0 / 6.0, abs=1e-8)


def test_classify_decay(grid):
    verdict = gf.classify(gf.GenNumber(lambda e: -0.3 * e, "linear decay"), grid)
    assert verdict.verdict == VERDICT_DECAYS
    assert verdict.order == pytest.approx(1.0, abs=1e-6)


def test_classify_unclassifiable(grid):
    # Alternating sign with growing magnitude: no fit, no limit.
    def wild(e):
        k = round(math.log2(0.125 / e))
        return (-1.0) ** k * 2.0 ** k

    verdict = gf.classify(gf.GenNumber(wild, "alternating growth"), grid)
    assert verdict.verdict == VERDICT_UNCLASSIFIABLE


def test_classify_zero_samples_is_finite_zero(grid):
    verdict = gf.classify(gf.GenNumber.constant(0.0), grid)
    assert verdict.verdict == VERDICT_FINITE
    assert verdict.limit == 0.0


@pytest.mark.parametrize("c", [2.0, -3.0])
def test_classify_scale_equivariance(grid, c):
    base = gf.GenNumber(lambda e: 0.7 / e, "0.7/eps")
    scaled = gf.GenNumber(lambda e: c * 0.7 / e, "scaled")
    v0 = gf.classify(base, grid)
    v1 = gf.classify(scaled, grid)
    assert v1.verdict == v0.verdict == VERDICT_INFINITE
    assert v1.order == pytest.approx(v0.order, abs=1e-9)
    assert v1.coefficient == pytest.approx(c * v0.coefficient, rel=1e-9)


def test_verdicts_robust_to_grid_choice(bump):
    # Same verdicts (not the fitted digits) across admissible grids.
    grids = [gf.EpsilonGrid(0.125, 0.5, 10), gf.EpsilonGrid(0.125, 0.5, 8),
             gf.EpsilonGrid(0.125, 0.5, 12), gf.EpsilonGrid(0.125, 0.25, 8)]
    dsq = gf.integrate_gf(
        gf.combine("mul", gf.embed_delta(bump), gf.embed_delta(bump)),
        -math.inf, math.inf, tol=1e-9)
    h = gf.embed_heaviside(bump)
    u = gf.combine("sub", gf.compose_polynomial([0.0, 0.0, 1.0], h), h)
    eq2 = gf.integrate_gf(gf.combine("mul", u, gf.derivative(h)),
                          -math.inf, math.inf, tol=1e-11)
    decaying = gf.integrate_gf(u, -1.0, 1.0, tol=1e-12)
    expectations = [(dsq, VERDICT_INFINITE), (eq2, VERDICT_FINITE),
                    (decaying, VERDICT_DECAYS)]
    for g, expected in expectations:
        for grid in grids:
            assert gf.classify(g, grid).verdict == expected


def test_association_of_step_square_with_step(bump, suite, grid):
    h = gf.embed_heaviside(bump)
    h2 = gf.compose_polynomial([0.0, 0.0, 1.0], h)
    report = gf.is_associated(h2, h, suite, grid)
    assert report.all_pairings_vanish
    for p in report.pairings:
        assert p.vanishes and abs(p.limit) <= 1e-8
    assert not report.negligible


def test_association_is_reflexive(bump, suite, grid):
    h2 = gf.compose_polynomial([0.0, 0.0, 1.0], gf.embed_heaviside(bump))
    report = gf.is_associated(h2, h2, suite, grid)
    assert report.all_pairings_vanish
    assert report.negligible
    assert all(s == 0.0 for _, s in report.supnorm_by_eps)


def test_delta_squared_not_associated_with_anything_finite(bump, suite, grid):
    dsq = gf.combine("mul", gf.embed_delta(bump), gf.embed_delta(bump))
    report = gf.is_associated(dsq, gf.constant(1.0), suite, grid)
    assert not report.all_pairings_vanish
    diverging = [p for p in report.pairings if p.note]
    assert diverging, "expected a no-limit note for probes with psi(0) != 0"


def test_is_negligible_zero_function(grid):
    flag, table = gf.is_negligible(gf.constant(0.0), (-1.0, 1.0), grid)
    assert flag
    assert all(s == 0.0 for _, s in table)


def test_is_negligible_h2_minus_h(bump, grid):
    h = gf.embed_heaviside(bump)
    u = gf.combine("sub", gf.compose_polynomial([0.0, 0.0, 1.0], h), h)
    flag, table = gf.is_negligible(u, (-1.0, 1.0), grid)
    assert not flag
    for _, s in table:
        assert s == pytest.approx(0.25, abs=1e-6)


def test_is_negligible_weighted_family(bump, grid):
    # A family scaled by eps^3 must be flagged negligible with order ~ 3.
    rho = bump.kernel(0)

    def rep_at(eps):
        return gf.SmoothRepresentative(
            lambda x, e=eps: e ** 3 * rho(np.asarray(x, dtype=float)),
            lambda x, e=eps: e ** 3 * bump.kernel(1)(np.asarray(x, dtype=float)),
            (-1.0, 1.0),
        )

    family = gf.GenFunction(rep_at, None, "eps^3-weighted kernel")
    flag, table = gf.is_negligible(family, (-1.0, 1.0), grid)
    assert flag
    sup = np.array([s for _, s in table])
    eps = np.array([e for e, _ in table])
    slope = np.polynomial.polynomial.polyfit(np.log(eps), np.log(sup), 1)[1]
    assert slope == pytest.approx(3.0, abs=0.05)


def test_paradox_as_single_property(bump, suite, grid):
    # Vanishing against every probe does NOT imply the family is zero: the
    # sup-norm sits at 1/4 at every eps while every pairing limit is 0.
    h = gf.embed_heaviside(bump)
    h2 = gf.compose_polynomial([0.0, 0.0, 1.0], h)
    report = gf.is_associated(h2, h, suite, grid)
    assert report.all_pairings_vanish
    assert not report.negligible
    sups = [s for _, s in report.supnorm_by_eps]
    assert max(sups) - min(sups) < 1e-6
    assert sups[0] == pytest.approx(0.25, abs=1e-6)


def test_association_requires_probes(bump, grid):
    h = gf.embed_heaviside(bump)
    with pytest.raises(ValueError):
        gf.is_associated(h, h, [], grid)
