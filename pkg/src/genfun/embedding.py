"""Mollifiers and embeddings of classical objects as generalized functions.

A mollifier is a normalized smooth kernel with compact support; rescaling it
by eps embeds the Heaviside step and the Dirac delta as epsilon-families of
smooth representatives.  Kernel derivatives of any order are generated
symbolically once per (kind, order) and evaluated with numpy; the step's
antiderivative is a high-accuracy Chebyshev interpolant built once per
mollifier and rescaled per eps.
"""

import math

import numpy as np
import sympy
from numpy.polynomial.chebyshev import Chebyshev
from numpy.polynomial import polynomial as npoly

from .core import GenFunction, SmoothRepresentative, from_polynomial
from .quadrature import integrate

MOLLIFIER_KINDS = ("bump", "cosine_power", "truncated_gaussian")

_NORMALIZATION_TOL = 1e-13
_CHEB_TARGET = 1e-13
_CHEB_DEGREES = (64, 128, 256, 512)
# Strict inner margin for kernels with essential boundary behaviour: keeps
# symbolic derivative denominators like (1-u^2)^{2n} well away from zero.
# The kernel itself underflows to exactly 0.0 long before the margin.
_BUMP_MARGIN = 1e-12


def _masked(fn, radius, margin=0.0):
    """Wrap a symbolic-kernel lambda so it is exactly 0 outside the support."""
    limit = radius * (1.0 - margin)

    def ev(x):
        xs = np.asarray(x, dtype=float)
        scalar = xs.ndim == 0
        xs = np.atleast_1d(xs)
        out = np.zeros_like(xs)
        inside = np.abs(xs) < limit
        if np.any(inside):
            vals = np.asarray(fn(xs[inside]), dtype=float)
            out[inside] = np.broadcast_to(vals, xs[inside].shape)
        return float(out[0]) if scalar else out

    return ev


class Mollifier:
    """A normalized smooth kernel profile with compact support.

    Attributes
    ----------
    kind : str
        One of ``bump``, ``cosine_power``, ``truncated_gaussian``.
    support_radius : float
        The profile vanishes for ``|x| >= support_radius``.
    is_symmetric : bool
        True when the profile is even (first moment vanishes).
    params : dict
        The construction parameters, normalization included.
    profile : SmoothRepresentative
        The normalized kernel rho with its exact first derivative.

    Use :func:`make_mollifier`; the constructor is internal.
    """

    def __init__(self, kind, support_radius, is_symmetric, params, sym_expr):
        self.kind = kind
        self.support_radius = float(support_radius)
        self.is_symmetric = bool(is_symmetric)
        self.params = dict(params)
        self._sym_expr = sym_expr  # unnormalized sympy expression in _X
        self._margin = _BUMP_MARGIN if kind == "bump" else 0.0
        self._kernels = {}

        raw = self._lambdify(0, normalization=1.0)
        mass = integrate(raw, -self.support_radius, self.support_radius,
                         tol=_NORMALIZATION_TOL).value
        if not (math.isfinite(mass) and mass > 0.0):
            raise ValueError(f"mollifier profile is not normalizable (mass={mass!r})")
        self.normalization = 1.0 / mass
        self.params["normalization"] = self.normalization

        self._cdf_cheb, self._cdf_total = self._build_cdf()
        self.profile = SmoothRepresentative(
            self.kernel(0), self.kernel(1),
            (-self.support_radius, self.support_radius),
        )

    _X = sympy.Symbol("x")

    def _lambdify(self, order, normalization=None):
        c = self.normalization if normalization is None else normalization
        expr = c * sympy.diff(self._sym_expr, self._X, order)
        fn = sympy.lambdify(self._X, expr, "numpy")
        return _masked(fn, self.support_radius, self._margin)

    def kernel(self, order=0):
        """The order-th derivative of the normalized profile (exact, cached)."""
        order = int(order)
        if order < 0:
            raise ValueError("derivative order must be >= 0")
        fn = self._kernels.get(order)
        if fn is None:
            fn = self._lambdify(order)
            self._kernels[order] = fn
        return fn

    def _build_cdf(self):
        """Chebyshev antiderivative of the profile, accurate to ~1e-13."""
        rho = self.kernel(0)
        R = self.support_radius
        grid = np.linspace(-R, R, 4097)
        target = rho(grid)
        scale = max(np.max(np.abs(target)), 1.0)
        cheb = None
        for deg in _CHEB_DEGREES:
            cheb = Chebyshev.interpolate(rho, deg, domain=[-R, R])
            if np.max(np.abs(cheb(grid) - target)) <= _CHEB_TARGET * scale:
                break
        antideriv = cheb.integ(lbnd=-R)
        total = float(antideriv(R))
        return antideriv, total

    def cdf(self, y):
        """Exact-branch antiderivative P with P(-R) = 0 and P(R) = 1."""
        ys = np.asarray(y, dtype=float)
        scalar = ys.ndim == 0
        ys = np.atleast_1d(ys)
        R = self.support_radius
        out = np.where(ys >= R, 1.0, 0.0)
        inside = (ys > -R) & (ys < R)
        if np.any(inside):
            out[inside] = self._cdf_cheb(ys[inside]) / self._cdf_total
        return float(out[0]) if scalar else out

    def __repr__(self):
        return f"Mollifier(kind={self.kind!r}, R={self.support_radius:g})"


def make_mollifier(kind, **params):
    """Construct a normalized mollifier.

    Parameters by kind (all have ``radius`` defaulting to 1.0):

    - ``bump``: ``skew`` in (-1, 1), default 0.  The smooth kernel
      ``exp(-1/(1-(x/R)^2)) * (1 + skew*(x/R))``; asymmetric when skew != 0.
    - ``cosine_power``: integer ``exponent >= 2``, default 4.
    - ``truncated_gaussian``: ``sigma`` > 0, default ``radius/4``.  The
      Gaussian is cut off at ``|x| = radius`` and renormalized; the cut
      leaves a jump of order ``exp(-R^2/(2 sigma^2))`` in the profile and
      its derivatives at the boundary, which bounds the smoothness there.
    """
    params = dict(params)
    radius = float(params.pop("radius", 1.0))
    if not (math.isfinite(radius) and radius > 0.0):
        raise ValueError(f"support radius must be positive, got {radius!r}")
    x = Mollifier._X
    u = x / radius

    if kind == "bump":
        skew = float(params.pop("skew", 0.0))
        if params:
            raise ValueError(f"unknown bump parameters: {sorted(params)}")
        if not abs(skew) < 1.0:
            raise ValueError("bump skew must satisfy |skew| < 1 to keep rho >= 0")
        expr = sympy.exp(-1 / (1 - u ** 2)) * (1 + skew * u)
        return Mollifier(kind, radius, skew == 0.0,
                         {"radius": radius, "skew": skew}, expr)

    if kind == "cosine_power":
        exponent = params.pop("exponent", 4)
        if params:
            raise ValueError(f"unknown cosine_power parameters: {sorted(params)}")
        if int(exponent) != exponent or int(exponent) < 2:
            raise ValueError("cosine_power exponent must be an integer >= 2")
        exponent = int(exponent)
        expr = sympy.cos(sympy.pi * u / 2) ** exponent
        return Mollifier(kind, radius, True,
                         {"radius": radius, "exponent": exponent}, expr)

    if kind == "truncated_gaussian":
        sigma = float(params.pop("sigma", radius / 4.0))
        if params:
            raise ValueError(f"unknown truncated_gaussian parameters: {sorted(params)}")
        if not (math.isfinite(sigma) and sigma > 0.0):
            raise ValueError("truncated_gaussian sigma must be positive")
        expr = sympy.exp(-(x ** 2) / (2 * sigma ** 2))
        return Mollifier(kind, radius, True,
                         {"radius": radius, "sigma": sigma}, expr)

    raise ValueError(f"unknown mollifier kind {kind!r}; expected one of {MOLLIFIER_KINDS}")


def _delta_family(m, order):
    R = m.support_radius
    if order == 0:
        desc = f"delta[{m.kind}]"
    else:
        desc = f"delta{'′' * order}[{m.kind}]"

    def rep_at(eps):
        k = m.kernel(order)
        k_next = m.kernel(order + 1)
        s = eps ** -(order + 1)

        def ev(x):
            return k(np.asarray(x, dtype=float) / eps) * s

        def dv(x):
            return k_next(np.asarray(x, dtype=float) / eps) * (s / eps)

        return SmoothRepresentative(ev, dv, (-eps * R, eps * R))

    return GenFunction(rep_at, lambda: _delta_family(m, order + 1), desc)


def embed_delta(m):
    """The Dirac delta as the family delta_eps(x) = rho(x/eps)/eps."""
    return _delta_family(m, 0)


def embed_heaviside(m):
    """The Heaviside step as H_eps(x) = P(x/eps), P the kernel antiderivative.

    H_eps is exactly 0 for x <= -eps*R and exactly 1 for x >= eps*R; its
    derivative field is the delta embedding's representative, so
    ``derivative(embed_heaviside(m))`` and ``embed_delta(m)`` agree pointwise.
    """
    R = m.support_radius

    def rep_at(eps):
        rho = m.kernel(0)

        def ev(x):
            return m.cdf(np.asarray(x, dtype=float) / eps)

        def dv(x):
            return rho(np.asarray(x, dtype=float) / eps) / eps

        return SmoothRepresentative(ev, dv, (-eps * R, eps * R))

    return GenFunction(rep_at, lambda: embed_delta(m), f"H[{m.kind}]")


def embed_smooth(f, description="smooth"):
    """Embed a classical smooth function as an eps-independent family.

    ``f`` is a :class:`SmoothRepresentative`; one derivative level is
    available (from ``f.deriv``).  Deeper towers need polynomial families
    (:func:`genfun.core.from_polynomial`), which differentiate indefinitely.
    """

    def first_derivative():
        def missing(_x):
            raise_msg = (
                f"second derivative of user-supplied smooth function "
                f"{description!r} is not available"
            )
            from .core import EvaluationError

            raise EvaluationError(raise_msg)

        rep = SmoothRepresentative(f.deriv, missing, f.support_hint)
        return GenFunction(lambda eps: rep, None, f"d/dx {description}")

    return GenFunction(lambda eps: f, first_derivative, description)


class TestFunction:
    """A compactly supported smooth probe for pairings <u_eps, psi>."""

    __slots__ = ("eval", "support", "description", "value_at_zero")

    def __init__(self, eval, support, description, value_at_zero):
        self.eval = eval
        self.support = (float(support[0]), float(support[1]))
        self.description = description
        self.value_at_zero = float(value_at_zero)

    def __repr__(self):
        return f"TestFunction({self.description!r}, support={self.support})"


def _bump_window(x, center, width):
    xs = np.asarray(x, dtype=float)
    scalar = xs.ndim == 0
    u = (np.atleast_1d(xs) - center) / width
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0 - 1e-12
    if np.any(inside):
        out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return float(out[0]) if scalar else out


def standard_test_suite(count, seed):
    """Deterministic suite of test functions: bump windows times polynomials.

    Every psi has 0 strictly inside its support.  For ``count >= 2`` the
    suite contains at least one psi with psi(0) != 0 (all but the last) and
    exactly one with psi(0) = 0 (the last, a polynomial with a root at 0).
    """
    count = int(count)
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(int(seed))
    suite = []
    for i in range(count):
        width = float(rng.uniform(0.5, 1.5))
        center = float(rng.uniform(-0.3, 0.3))
        degree = int(rng.integers(0, 3))
        coeffs = rng.uniform(-2.0, 2.0, size=degree + 1)
        while abs(coeffs[0]) < 0.25:
            coeffs[0] = rng.uniform(-2.0, 2.0)
        vanishes_at_zero = count >= 2 and i == count - 1
        if vanishes_at_zero:
            coeffs = np.concatenate(([0.0], coeffs))

        def ev(x, c=coeffs.copy(), ctr=center, w=width):
            xs = np.asarray(x, dtype=float)
            return npoly.polyval(xs, c) * _bump_window(xs, ctr, w)

        value_at_zero = 0.0 if vanishes_at_zero else float(ev(np.array(0.0)))
        suite.append(TestFunction(
            ev,
            (center - width, center + width),
            f"psi_{i}(deg {len(coeffs) - 1} poly, bump at {center:.3f}+-{width:.3f})",
            value_at_zero,
        ))
    return suite


# Re-export the purely algebraic constant/polynomial embeddings alongside the
# mollifier-based ones for a single import point.
embed_polynomial = from_polynomial
