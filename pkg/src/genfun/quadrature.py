"""Adaptive quadrature for representatives and pairings against test functions.

The integrator uses an embedded Gauss-Legendre pair (orders 10 and 21) on a
deterministic worklist: intervals whose rule difference exceeds their share of
the tolerance are bisected at the midpoint.  Evaluation is vectorized — the
integrand must accept ndarrays.
"""

import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from .core import GenfunError, GenNumber, check_epsilon

DEFAULT_TOL_IDENTITY = 1e-11
DEFAULT_TOL_SWEEP = 1e-9
MAX_INTERVALS = 1_000_000

_LOW_NODES, _LOW_WEIGHTS = leggauss(10)
_HIGH_NODES, _HIGH_WEIGHTS = leggauss(21)


class QuadratureResult:
    """Value, error bound and number of final subintervals of one integral."""

    __slots__ = ("value", "error_estimate", "subdivisions")

    def __init__(self, value, error_estimate, subdivisions):
        self.value = value
        self.error_estimate = error_estimate
        self.subdivisions = subdivisions

    def __repr__(self):
        return (
            f"QuadratureResult(value={self.value!r}, "
            f"error_estimate={self.error_estimate!r}, "
            f"subdivisions={self.subdivisions})"
        )


class QuadratureError(GenfunError):
    """Raised when the subdivision budget is exhausted or the integrand blows up.

    Carries the best available estimate so the caller can decide what to do.
    """

    def __init__(self, message, best_value=math.nan, error_estimate=math.inf,
                 subdivisions=0):
        super().__init__(message)
        self.best_value = best_value
        self.error_estimate = error_estimate
        self.subdivisions = subdivisions


def integrate(f, a, b, tol=DEFAULT_TOL_IDENTITY, breakpoints=(),
              max_intervals=MAX_INTERVALS, rtol=1e-14):
    """Integrate a vectorized function on the finite interval [a, b].

    Parameters
    ----------
    f : callable
        Maps an ndarray of points to an ndarray of values; must be finite
        on [a, b].
    a, b : float
        Finite bounds with a < b.
    tol : float
        Absolute tolerance; on success ``error_estimate <= tol`` whenever
        the integrand's magnitude keeps ``tol`` above the relative floor.
    breakpoints : sequence of float
        Interior points at which the initial worklist is pre-split (support
        edges of compactly supported factors); points outside (a, b) are
        ignored.
    max_intervals : int
        Subdivision budget; exhaustion raises :class:`QuadratureError`
        carrying the best estimate, never a silent degraded answer.
    rtol : float
        Per-segment relative floor: a segment is also accepted once its
        rule difference is below ``rtol`` times its own magnitude, which
        keeps very large integrands (families diverging as eps shrinks)
        integrable at the precision doubles can express.
    """
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValueError(f"need finite bounds a < b, got ({a}, {b})")
    if not tol > 0:
        raise ValueError("tol must be positive")

    edges = [a]
    for p in sorted(set(float(p) for p in breakpoints)):
        if a < p < b:
            edges.append(p)
    edges.append(b)
    segments = list(zip(edges[:-1], edges[1:]))
    total_width = b - a

    value = 0.0
    error = 0.0
    n_accepted = 0
    n_created = len(segments)

    while segments:
        los = np.array([s[0] for s in segments])
        his = np.array([s[1] for s in segments])
        mid = 0.5 * (los + his)
        half = 0.5 * (his - los)

        xs_low = mid[:, None] + half[:, None] * _LOW_NODES[None, :]
        xs_high = mid[:, None] + half[:, None] * _HIGH_NODES[None, :]
        f_low = np.asarray(f(xs_low.ravel()), dtype=float).reshape(xs_low.shape)
        f_high = np.asarray(f(xs_high.ravel()), dtype=float).reshape(xs_high.shape)
        if not (np.all(np.isfinite(f_low)) and np.all(np.isfinite(f_high))):
            raise QuadratureError(
                "non-finite integrand values encountered",
                best_value=value, error_estimate=math.inf,
                subdivisions=n_created,
            )
        est_low = (f_low * _LOW_WEIGHTS).sum(axis=1) * half
        est_high = (f_high * _HIGH_WEIGHTS).sum(axis=1) * half
        local_err = np.abs(est_high - est_low)

        next_segments = []
        pending_value = 0.0
        pending_err = 0.0
        for i, (lo, hi) in enumerate(segments):
            if (local_err[i] <= tol * (hi - lo) / total_width
                    or local_err[i] <= rtol * abs(est_high[i])):
                value += est_high[i]
                error += local_err[i]
                n_accepted += 1
            else:
                pending_value += est_high[i]
                pending_err += local_err[i]
                m = 0.5 * (lo + hi)
                next_segments.append((lo, m))
                next_segments.append((m, hi))
        n_created += len(next_segments)
        if n_created > max_intervals:
            raise QuadratureError(
                f"subdivision budget of {max_intervals} intervals exhausted "
                f"on [{a}, {b}]",
                best_value=value + pending_value,
                error_estimate=error + pending_err,
                subdivisions=n_created,
            )
        segments = next_segments

    return QuadratureResult(value, error, n_accepted)


def _clipped_domain(rep, a, b):
    """Resolve (possibly infinite) bounds for a representative's integral.

    Returns (lo, hi, breakpoints) or None when the integral is exactly zero.
    Raises :class:`QuadratureError` when a nonzero constant tail makes the
    integral divergent.
    """
    hint = rep.support_hint
    if hint is None:
        if math.isinf(a) or math.isinf(b):
            raise QuadratureError(
                "cannot integrate over an infinite domain without a support "
                "hint: no compact region outside which the integrand is "
                "constant is known"
            )
        return a, b, ()

    lo, hi = hint
    c_left, c_right = rep.outside_values()
    aa, bb = a, b
    if math.isinf(aa):
        if c_left != 0.0:
            raise QuadratureError(
                f"divergent integral: constant tail {c_left!r} on the left "
                "of an infinite domain"
            )
        aa = lo
    if math.isinf(bb):
        if c_right != 0.0:
            raise QuadratureError(
                f"divergent integral: constant tail {c_right!r} on the right "
                "of an infinite domain"
            )
        bb = hi

    if rep.vanishes_outside_hint():
        aa = max(aa, lo)
        bb = min(bb, hi)
        if aa >= bb:
            return None
        return aa, bb, ()
    if aa >= bb:
        return None
    return aa, bb, (lo, hi)


def integrate_gf_at(u, eps, a, b, tol=DEFAULT_TOL_SWEEP):
    """Integral of u's representative at one eps, with support-hint clipping.

    Infinite bounds are allowed when the representative is constant outside a
    compact set: a zero constant tail contributes nothing and is clipped
    away, a nonzero one raises (the integral diverges).
    """
    rep = u.at(eps)
    domain = _clipped_domain(rep, float(a), float(b))
    if domain is None:
        return QuadratureResult(0.0, 0.0, 0)
    aa, bb, brk = domain
    return integrate(rep.eval, aa, bb, tol=tol, breakpoints=brk)


def integrate_gf(u, a, b, tol=DEFAULT_TOL_SWEEP):
    """Lazy GenNumber mapping eps to the integral of u_eps over [a, b].

    Per-eps quadrature failures surface when that eps is sampled.
    """
    desc = f"int({u.description}, [{a}, {b}])"
    return GenNumber(lambda eps: integrate_gf_at(u, eps, a, b, tol).value, desc)


def pair_result(u, psi, eps, tol=DEFAULT_TOL_IDENTITY):
    """Pairing <u_eps, psi> = integral of u_eps * psi over psi's support.

    The domain is clipped to the representative's active region when it
    vanishes outside its support hint, so the cost does not grow as eps
    shrinks; otherwise the hint edges become breakpoints.
    """
    eps = check_epsilon(eps)
    rep = u.at(eps)
    a, b = psi.support
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValueError(f"test function support must be a finite interval, got {psi.support}")

    brk = ()
    if rep.support_hint is not None:
        lo, hi = rep.support_hint
        if rep.vanishes_outside_hint():
            a, b = max(a, lo), min(b, hi)
            if a >= b:
                return QuadratureResult(0.0, 0.0, 0)
        else:
            brk = (lo, hi)

    def integrand(x):
        return rep.eval(x) * psi.eval(x)

    return integrate(integrand, a, b, tol=tol, breakpoints=brk)


def pair(u, psi, eps, tol=DEFAULT_TOL_IDENTITY):
    """Value of the pairing <u_eps, psi>; see :func:`pair_result`."""
    return pair_result(u, psi, eps, tol).value
