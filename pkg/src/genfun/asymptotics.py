"""Classification of epsilon-families of numbers by their eps -> 0 behaviour.

"Infinite quantities" become families diverging like eps^-a; association and
negligibility are kept strictly separate: pairings against every test
function can vanish in the limit while the family's sup-norm stays bounded
away from zero, and both verdicts are always reported side by side.
"""

import math

import numpy as np

from .core import GenfunError, GenNumber
from .quadrature import pair, DEFAULT_TOL_IDENTITY

VERDICT_INFINITE = "infinite_of_order"
VERDICT_FINITE = "finite_limit"
VERDICT_DECAYS = "decays_with_order"
VERDICT_UNCLASSIFIABLE = "unclassifiable"

# Sample magnitudes below this are treated as exact zeros (quadrature floor).
ZERO_FLOOR = 1e-14


class PowerLawUnfitError(GenfunError):
    """Samples contain zeros or sign changes; a log-log fit is undefined."""


class NoLimitError(GenfunError):
    """Successive differences do not shrink; no limit on the tested grid."""


class EpsilonGrid:
    """Strictly decreasing geometric grid eps_k = eps0 * ratio^k.

    A finite proxy for eps -> 0; all members must lie in the package's
    working range.
    """

    __slots__ = ("eps0", "ratio", "count")

    def __init__(self, eps0=2.0 ** -3, ratio=0.5, count=10):
        from .core import EPS_WORKING_RANGE

        self.eps0 = float(eps0)
        self.ratio = float(ratio)
        self.count = int(count)
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"ratio must be in (0, 1), got {self.ratio}")
        if self.count < 4:
            raise ValueError(f"count must be >= 4, got {self.count}")
        lo, hi = EPS_WORKING_RANGE
        smallest = self.eps0 * self.ratio ** (self.count - 1)
        if not (lo <= smallest and self.eps0 <= hi):
            raise ValueError(
                f"grid [{smallest:g}, {self.eps0:g}] leaves the working "
                f"range [{lo:g}, {hi:g}]"
            )

    def values(self):
        return self.eps0 * self.ratio ** np.arange(self.count)

    def __repr__(self):
        return f"EpsilonGrid(eps0={self.eps0:g}, ratio={self.ratio:g}, count={self.count})"


DEFAULT_GRID = EpsilonGrid()


class Thresholds:
    """Decision thresholds for classification and negligibility."""

    __slots__ = ("exponent_tol", "r2_min", "negligible_order")

    def __init__(self, exponent_tol=0.1, r2_min=0.99, negligible_order=2.0):
        self.exponent_tol = float(exponent_tol)
        self.r2_min = float(r2_min)
        self.negligible_order = float(negligible_order)


DEFAULT_THRESHOLDS = Thresholds()


class AsymptoticClass:
    """Verdict on the eps -> 0 behaviour of a family of numbers.

    ``order`` is a > 0 for ``infinite_of_order`` (the family grows like
    eps^-a) and p > 0 for ``decays_with_order``; ``fit_quality`` is the R^2
    of the log-log regression when one was possible.  The sampled
    (eps, value) table is always recorded.
    """

    __slots__ = ("verdict", "order", "coefficient", "limit", "limit_error",
                 "fit_quality", "samples")

    def __init__(self, verdict, samples, order=None, coefficient=None,
                 limit=None, limit_error=None, fit_quality=None):
        self.verdict = verdict
        self.samples = tuple((float(e), float(v)) for e, v in samples)
        self.order = order
        self.coefficient = coefficient
        self.limit = limit
        self.limit_error = limit_error
        self.fit_quality = fit_quality

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "order": self.order,
            "coefficient": self.coefficient,
            "limit": self.limit,
            "limit_error": self.limit_error,
            "fit_quality": self.fit_quality,
            "samples": [[e, v] for e, v in self.samples],
        }

    def __repr__(self):
        extra = ""
        if self.verdict == VERDICT_INFINITE:
            extra = f", order={self.order:.4g}, coefficient={self.coefficient:.6g}"
        elif self.verdict == VERDICT_DECAYS:
            extra = f", order={self.order:.4g}"
        elif self.verdict == VERDICT_FINITE:
            extra = f", limit={self.limit:.10g}"
        return f"AsymptoticClass({self.verdict}{extra})"


def _sample(g, grid):
    eps = grid.values()
    return eps, np.array([g.at(e) for e in eps])


def fit_power_law(g, grid=DEFAULT_GRID):
    """Least-squares fit log|g(eps)| = log|c| + a*log(eps) over the grid.

    Returns ``(exponent, coefficient, r_squared)``; the coefficient carries
    the common sign of the samples.  Raises :class:`PowerLawUnfitError` when
    the samples contain zeros (below the quadrature floor) or change sign —
    callers fall back to :func:`limit_estimate`.
    """
    eps, vals = _sample(g, grid)
    if np.any(np.abs(vals) <= ZERO_FLOOR):
        raise PowerLawUnfitError(
            f"{g.description!r}: samples at or below the zero floor"
        )
    signs = np.sign(vals)
    if not np.all(signs == signs[0]):
        raise PowerLawUnfitError(f"{g.description!r}: samples change sign")

    lx = np.log(eps)
    ly = np.log(np.abs(vals))
    coeff = np.polynomial.polynomial.polyfit(lx, ly, 1)
    intercept, slope = coeff[0], coeff[1]
    fitted = intercept + slope * lx
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - np.mean(ly)) ** 2))
    if ss_tot <= 1e-28:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    coefficient = float(signs[0] * math.exp(intercept))
    return float(slope), coefficient, float(r2)


def limit_estimate(g, grid=DEFAULT_GRID):
    """Richardson extrapolation of g over the geometric grid.

    Fits the leading correction order p from successive differences, then
    eliminates eps^p, eps^(p+1), ... stages.  Returns ``(limit, error)``
    with the error taken from the spread of the last extrapolants.  Raises
    :class:`NoLimitError` when the difference tail grows instead of
    shrinking.
    """
    eps, vals = _sample(g, grid)
    scale = max(1.0, float(np.max(np.abs(vals))))
    diffs = np.diff(vals)
    mags = np.abs(diffs)

    if np.all(mags <= ZERO_FLOOR * scale):
        return float(vals[-1]), float(np.max(mags, initial=0.0))

    # Non-convergent tail: the last differences grow monotonically and end
    # well above the noise floor.
    tail = mags[-3:]
    if len(tail) >= 3 and tail[-1] > tail[-2] > tail[-3] and tail[-1] > 1e-10 * scale:
        raise NoLimitError(
            f"{g.description!r}: successive differences grow "
            f"({tail[-3]:.3g} -> {tail[-1]:.3g}); no limit on this grid"
        )

    # Leading order p from the decay of differences, ignoring pairs lost to
    # the noise floor.  Only the tail ratios are used: large-eps pairs carry
    # higher-order curvature that biases p and leaks into the extrapolants.
    usable = mags > ZERO_FLOOR * scale
    ps: list[float] = []
    for k in range(len(mags) - 1):
        if usable[k] and usable[k + 1] and mags[k + 1] < mags[k]:
            ps.append(math.log(mags[k] / mags[k + 1]) / math.log(1.0 / grid.ratio))
    if not ps:
        # Differences neither grow nor shrink usefully; treat the data as
        # converged to within its own spread.
        return float(vals[-1]), float(np.max(mags))
    p = float(np.median(ps[-3:]))
    if p <= 0.05:
        raise NoLimitError(
            f"{g.description!r}: fitted correction order {p:.3g} is not positive"
        )

    table = vals.astype(float)
    last_col_delta = float(np.max(mags))
    levels = min(3, len(table) - 1)
    for j in range(levels):
        f = grid.ratio ** (p + j)
        table = (table[1:] - f * table[:-1]) / (1.0 - f)
        if len(table) >= 2:
            last_col_delta = float(np.abs(table[-1] - table[-2]))
    limit = float(table[-1])
    error = max(last_col_delta, ZERO_FLOOR * scale)
    return limit, error


def classify(g, grid=DEFAULT_GRID, thresholds=DEFAULT_THRESHOLDS):
    """Decision tree mapping a family of numbers to an AsymptoticClass.

    Power-law fit first: exponents beyond the threshold decide divergence or
    decay by sign.  A flat exponent routes through :func:`limit_estimate`
    (curvature in the log-log data, e.g. a finite limit with an eps
    correction, spoils R^2 without spoiling the limit); only when no limit
    exists does the sign of the exponent break the tie.  Sign-changing
    samples skip the fit entirely.  Families with neither a usable fit nor a
    limit are reported ``unclassifiable``, never guessed.
    """
    eps, vals = _sample(g, grid)
    samples = list(zip(eps, vals))
    try:
        exponent, coefficient, r2 = fit_power_law(g, grid)
    except PowerLawUnfitError:
        try:
            limit, err = limit_estimate(g, grid)
        except NoLimitError:
            return AsymptoticClass(VERDICT_UNCLASSIFIABLE, samples)
        return AsymptoticClass(VERDICT_FINITE, samples, limit=limit,
                               limit_error=err)

    if abs(exponent) <= thresholds.exponent_tol:
        try:
            limit, err = limit_estimate(g, grid)
        except NoLimitError:
            if exponent < 0.0:
                return AsymptoticClass(VERDICT_INFINITE, samples,
                                       order=-exponent,
                                       coefficient=coefficient,
                                       fit_quality=r2)
            if exponent > 0.0:
                return AsymptoticClass(VERDICT_DECAYS, samples,
                                       order=exponent,
                                       coefficient=coefficient,
                                       fit_quality=r2)
            return AsymptoticClass(VERDICT_UNCLASSIFIABLE, samples,
                                   fit_quality=r2)
        return AsymptoticClass(VERDICT_FINITE, samples, limit=limit,
                               limit_error=err, fit_quality=r2)
    if exponent < -thresholds.exponent_tol:
        return AsymptoticClass(VERDICT_INFINITE, samples, order=-exponent,
                               coefficient=coefficient, fit_quality=r2)
    return AsymptoticClass(VERDICT_DECAYS, samples, order=exponent,
                           coefficient=coefficient, fit_quality=r2)


class PairingLimit:
    """Extrapolated limit of one pairing <(u-v)_eps, psi>."""

    __slots__ = ("psi_id", "limit", "error", "decay_order", "vanishes", "note")

    def __init__(self, psi_id, limit, error, decay_order, vanishes, note=""):
        self.psi_id = psi_id
        self.limit = limit
        self.error = error
        self.decay_order = decay_order
        self.vanishes = vanishes
        self.note = note

    def to_dict(self):
        return {
            "psi_id": self.psi_id,
            "limit": self.limit,
            "error": self.error,
            "decay_order": self.decay_order,
            "vanishes": self.vanishes,
            "note": self.note,
        }


class AssociationReport:
    """Association and negligibility verdicts, computed independently.

    The whole point of keeping both: ``all_pairings_vanish`` can be true
    while ``negligible`` is false, so "vanishing against every probe" does
    not imply "is zero" for these families.
    """

    __slots__ = ("pairings", "all_pairings_vanish", "supnorm_by_eps",
                 "negligible", "negligible_order")

    def __init__(self, pairings, all_pairings_vanish, supnorm_by_eps,
                 negligible, negligible_order):
        self.pairings = tuple(pairings)
        self.all_pairings_vanish = bool(all_pairings_vanish)
        self.supnorm_by_eps = tuple((float(e), float(s)) for e, s in supnorm_by_eps)
        self.negligible = bool(negligible)
        self.negligible_order = negligible_order

    def to_dict(self):
        return {
            "pairings": [p.to_dict() for p in self.pairings],
            "all_pairings_vanish": self.all_pairings_vanish,
            "supnorm_by_eps": [[e, s] for e, s in self.supnorm_by_eps],
            "negligible": self.negligible,
            "negligible_order": self.negligible_order,
        }


def _refine_maximum(f, lo, hi, iterations=80):
    """Golden-section maximization of |f| on a bracket from dense sampling."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = abs(float(f(c))), abs(float(f(d)))
    for _ in range(iterations):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = abs(float(f(c)))
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = abs(float(f(d)))
        if b - a < 1e-15 * max(1.0, abs(a), abs(b)):
            break
    return max(fc, fd)


def supnorm(u, region, eps, samples=1601):
    """Sup-norm of |u_eps| on a compact region, by dense sampling + refinement.

    The sample set is deterministic: a uniform grid over the region plus a
    denser grid across the representative's active window (where all the
    variation lives once eps is small).
    """
    rep = u.at(eps)
    a, b = float(region[0]), float(region[1])
    if not a < b:
        raise ValueError(f"region must be a nondegenerate interval, got {region}")
    xs = [np.linspace(a, b, samples)]
    if rep.support_hint is not None:
        lo, hi = rep.support_hint
        lo, hi = max(lo, a), min(hi, b)
        if lo < hi:
            xs.append(np.linspace(lo, hi, samples))
    grid_x = np.unique(np.concatenate(xs))
    vals = np.abs(np.asarray(rep.eval(grid_x), dtype=float))
    i = int(np.argmax(vals))
    coarse = float(vals[i])
    lo_b = grid_x[max(i - 1, 0)]
    hi_b = grid_x[min(i + 1, len(grid_x) - 1)]
    if lo_b >= hi_b:
        return coarse
    return max(coarse, _refine_maximum(rep.eval, lo_b, hi_b))


def is_negligible(u, region, grid=DEFAULT_GRID, thresholds=DEFAULT_THRESHOLDS):
    """Do the sup-norms of u over the region decay fast enough with eps?

    Returns ``(flag, supnorm_by_eps)``.  "Negligible" in the strict sense
    (faster than any power) is not decidable from finitely many scales; the
    flag is true when the fitted decay order over the grid is at least
    ``thresholds.negligible_order``, and the table is returned so callers can
    judge for themselves.
    """
    table = [(float(e), supnorm(u, region, float(e))) for e in grid.values()]
    flag = _negligible_flag(table, thresholds)
    return flag, table


def _decay_order(table):
    """Fitted log-log slope of a (eps, value) table; None if not fittable."""
    eps = np.array([e for e, _ in table])
    sup = np.array([s for _, s in table])
    if np.any(sup <= ZERO_FLOOR):
        return None
    coeff = np.polynomial.polynomial.polyfit(np.log(eps), np.log(sup), 1)
    return float(coeff[1])

def _negligible_flag(table, thresholds):
    sup = np.array([s for _, s in table])
    if np.all(sup <= ZERO_FLOOR):
        return True
    order = _decay_order(table)
    return order is not None and order >= thresholds.negligible_order


def is_associated(u, v, suite, grid=DEFAULT_GRID, tol=1e-8,
                  region=None, pair_tol=DEFAULT_TOL_IDENTITY,
                  thresholds=DEFAULT_THRESHOLDS):
    """Association report for u ~ v: do all pairings of u - v vanish?

    For each psi in the suite the pairing family eps -> <(u-v)_eps, psi> is
    extrapolated to eps -> 0; ``all_pairings_vanish`` holds when every limit
    is within ``tol`` of zero.  Any no-limit verdict makes the report
    non-associated with the reason recorded.  Sup-norms of u - v (over
    ``region``, defaulting to the hull of the suite's supports) are computed
    independently and attached.
    """
    if not suite:
        raise ValueError("test-function suite must be nonempty")
    from .core import combine

    diff = combine("sub", u, v)
    pairings = []
    all_vanish = True
    for i, psi in enumerate(suite):
        g = GenNumber(
            lambda e, p=psi: pair(diff, p, e, tol=pair_tol),
            f"<({diff.description}), psi_{i}>",
        )
        try:
            order, _, _ = fit_power_law(g, grid)
        except PowerLawUnfitError:
            order = None
        try:
            limit, err = limit_estimate(g, grid)
        except NoLimitError as exc:
            pairings.append(PairingLimit(i, None, None, order, False,
                                         note=f"no-limit: {exc}"))
            all_vanish = False
            continue
        vanishes = abs(limit) <= tol
        pairings.append(PairingLimit(i, limit, err, order, vanishes))
        all_vanish = all_vanish and vanishes

    if region is None:
        region = (min(p.support[0] for p in suite),
                  max(p.support[1] for p in suite))
    flag, table = is_negligible(diff, region, grid, thresholds)
    return AssociationReport(pairings, all_vanish, table, flag,
                             _decay_order(table))
