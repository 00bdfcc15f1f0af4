"""Value-semantic algebra of epsilon-indexed families of smooth functions.

A :class:`GenFunction` maps a regularization scale ``eps > 0`` to a
:class:`SmoothRepresentative` (a smooth function together with its exact
analytic derivative).  Families are closed under ring operations,
differentiation and polynomial composition; derivatives are always built
structurally (chain/Leibniz rules), never by finite differences.
"""

import math

import numpy as np
from numpy.polynomial import polynomial as npoly

# Scale range the numerics are tuned for; enforced by EpsilonGrid, advisory
# for single evaluations.
EPS_WORKING_RANGE = (2.0 ** -20, 2.0 ** -2)


class GenfunError(Exception):
    """Base class for errors raised by this package."""


class EvaluationError(GenfunError):
    """Evaluation produced a non-finite value or an unavailable derivative."""


def check_epsilon(eps):
    """Validate a regularization scale and return it as a float."""
    eps = float(eps)
    if not (math.isfinite(eps) and eps > 0.0):
        raise ValueError(f"epsilon must be a positive finite real, got {eps!r}")
    return eps


def _as_float_array(x):
    return np.asarray(x, dtype=float)


class SmoothRepresentative:
    """One member of an epsilon-family: a smooth function with exact derivative.

    ``eval`` and ``deriv`` accept scalars or ndarrays elementwise.
    ``support_hint`` is an interval outside which ``eval`` is constant on
    each side (and hence ``deriv`` vanishes); ``None`` means no such
    interval is known.
    """

    __slots__ = ("eval", "deriv", "support_hint")

    def __init__(self, eval, deriv, support_hint=None):
        self.eval = eval
        self.deriv = deriv
        self.support_hint = support_hint

    def outside_values(self):
        """Constants taken left/right of the support hint, or None."""
        if self.support_hint is None:
            return None
        lo, hi = self.support_hint
        return float(self.eval(lo)), float(self.eval(hi))

    def vanishes_outside_hint(self):
        out = self.outside_values()
        return out is not None and out == (0.0, 0.0)


def _hull(a, b):
    if a is None or b is None:
        return None
    return (min(a[0], b[0]), max(a[1], b[1]))


def _linear_hint(ru, rv):
    # Outside the hull both operands are constant, so is their sum/difference.
    return _hull(ru.support_hint, rv.support_hint)


def _product_hint(ru, rv):
    # A factor that is exactly zero outside its hint annihilates the other
    # factor there, so its hint bounds the product no matter what the other
    # operand does elsewhere.
    if ru.vanishes_outside_hint():
        return ru.support_hint
    if rv.vanishes_outside_hint():
        return rv.support_hint
    return _hull(ru.support_hint, rv.support_hint)


class GenFunction:
    """An epsilon-indexed family of smooth representatives on the real line.

    Immutable after construction; representatives are cached per epsilon and
    evaluation is pure, so instances may be shared freely across threads.
    """

    __slots__ = ("description", "_rep_at", "_derivative_thunk", "_reps", "_deriv")

    def __init__(self, rep_at, derivative=None, description="genfunction"):
        self.description = description
        self._rep_at = rep_at
        self._derivative_thunk = derivative
        self._reps = {}
        self._deriv = None

    def at(self, eps):
        """Smooth representative of this family at scale ``eps``."""
        eps = check_epsilon(eps)
        rep = self._reps.get(eps)
        if rep is None:
            rep = self._rep_at(eps)
            self._reps[eps] = rep
        return rep

    def derivative(self):
        """The family of exact derivatives, built structurally."""
        if self._deriv is None:
            if self._derivative_thunk is None:
                raise EvaluationError(
                    f"no exact derivative available for {self.description!r}; "
                    "build the family from package constructors or supply a tower"
                )
            self._deriv = self._derivative_thunk()
        return self._deriv

    def __repr__(self):
        return f"GenFunction({self.description!r})"

    # Operator sugar; `combine`/`scale` are the primitive operations.
    def __add__(self, other):
        return combine("add", self, _coerce(other))

    def __radd__(self, other):
        return combine("add", _coerce(other), self)

    def __sub__(self, other):
        return combine("sub", self, _coerce(other))

    def __rsub__(self, other):
        return combine("sub", _coerce(other), self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(other, self)
        return combine("mul", self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return scale(other, self)
        return combine("mul", other, self)

    def __neg__(self):
        return scale(-1.0, self)


def _coerce(value):
    if isinstance(value, GenFunction):
        return value
    if isinstance(value, (int, float)):
        return from_polynomial([float(value)])
    raise TypeError(f"cannot combine GenFunction with {type(value).__name__}")


class GenNumber:
    """An epsilon-indexed family of real values (integrals, probabilities...).

    The map ``eps -> value`` is deterministic and cached; non-finite values
    raise :class:`EvaluationError` instead of propagating silently.
    """

    __slots__ = ("description", "_at", "_cache")

    def __init__(self, at, description="gennumber"):
        self.description = description
        self._at = at
        self._cache = {}

    def at(self, eps):
        eps = check_epsilon(eps)
        if eps in self._cache:
            return self._cache[eps]
        value = float(self._at(eps))
        if not math.isfinite(value):
            raise EvaluationError(
                f"non-finite value {value!r} from {self.description!r} at eps={eps}"
            )
        self._cache[eps] = value
        return value

    __call__ = at

    @classmethod
    def constant(cls, value, description=None):
        value = float(value)
        if description is None:
            description = f"const {value:g}"
        return cls(lambda eps: value, description)

    def __repr__(self):
        return f"GenNumber({self.description!r})"

    def _binary(self, other, op, symbol):
        if isinstance(other, (int, float)):
            other = GenNumber.constant(other)
        if not isinstance(other, GenNumber):
            return NotImplemented
        desc = f"({self.description} {symbol} {other.description})"
        return GenNumber(lambda eps: op(self.at(eps), other.at(eps)), desc)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b, "+")

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b, "-")

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a, "-")

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b, "*")

    __rmul__ = __mul__

    def __pow__(self, k):
        k = int(k)
        return GenNumber(lambda eps: self.at(eps) ** k, f"({self.description})^{k}")

    def __neg__(self):
        return GenNumber(lambda eps: -self.at(eps), f"-({self.description})")


def evaluate(u, eps, x):
    """Evaluate ``u``'s representative at ``eps`` at point(s) ``x``.

    Returns a float for scalar ``x`` and an ndarray for array input.
    Raises :class:`EvaluationError` on any non-finite result — overflow in
    user-composed expressions never yields a silent NaN.
    """
    rep = u.at(eps)
    value = rep.eval(x)
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise EvaluationError(
            f"non-finite evaluation of {u.description!r} at eps={eps}"
        )
    if np.ndim(x) == 0:
        return float(arr)
    return arr


def combine(op, u, v):
    """Pointwise ring operation (``'add' | 'sub' | 'mul'``) of two families.

    The result's representative at each eps is the pointwise operation of the
    operands' representatives at the same eps; derivative fields are built
    exactly by the sum/Leibniz rule.
    """
    if op not in ("add", "sub", "mul"):
        raise ValueError(f"unknown operation {op!r}")
    symbol = {"add": "+", "sub": "-", "mul": "*"}[op]
    desc = f"({u.description} {symbol} {v.description})"

    if op == "mul":

        def rep_at(eps):
            ru, rv = u.at(eps), v.at(eps)

            def ev(x):
                return ru.eval(x) * rv.eval(x)

            def dv(x):
                return ru.deriv(x) * rv.eval(x) + ru.eval(x) * rv.deriv(x)

            return SmoothRepresentative(ev, dv, _product_hint(ru, rv))

        def deriv():
            return combine(
                "add",
                combine("mul", u.derivative(), v),
                combine("mul", u, v.derivative()),
            )

    else:
        sign = 1.0 if op == "add" else -1.0

        def rep_at(eps):
            ru, rv = u.at(eps), v.at(eps)

            def ev(x):
                return ru.eval(x) + sign * rv.eval(x)

            def dv(x):
                return ru.deriv(x) + sign * rv.deriv(x)

            return SmoothRepresentative(ev, dv, _linear_hint(ru, rv))

        def deriv():
            return combine(op, u.derivative(), v.derivative())

    return GenFunction(rep_at, deriv, desc)


def scale(c, u):
    """Pointwise scaling of representatives and derivatives by a finite real."""
    c = float(c)
    if not math.isfinite(c):
        raise ValueError(f"scale factor must be finite, got {c!r}")
    desc = f"({c:g} * {u.description})"

    def rep_at(eps):
        ru = u.at(eps)
        return SmoothRepresentative(
            lambda x: c * ru.eval(x),
            lambda x: c * ru.deriv(x),
            ru.support_hint,
        )

    return GenFunction(rep_at, lambda: scale(c, u.derivative()), desc)


def derivative(u):
    """Exact derivative family of ``u`` (delegates to the structural tower)."""
    return u.derivative()


def compose_polynomial(coeffs, u):
    """Compose a polynomial (ascending coefficients) with a family: ``p(u)``.

    The representative at eps is ``p(u_eps)``; its derivative is
    ``p'(u_eps) * u_eps'`` by the chain rule.
    """
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if c.ndim != 1 or c.size == 0 or not np.all(np.isfinite(c)):
        raise ValueError("polynomial coefficients must be a finite 1-d sequence")
    dc = npoly.polyder(c)
    desc = f"p{list(c)}({u.description})"

    if c.size == 1:
        return from_polynomial(c, description=f"const {c[0]:g}")

    def rep_at(eps):
        ru = u.at(eps)

        def ev(x):
            return npoly.polyval(ru.eval(x), c)

        def dv(x):
            return npoly.polyval(ru.eval(x), dc) * ru.deriv(x)

        # Outside u's hint u is constant, hence so is p(u).
        return SmoothRepresentative(ev, dv, ru.support_hint)

    def deriv():
        return combine("mul", compose_polynomial(dc, u), u.derivative())

    return GenFunction(rep_at, deriv, desc)


def from_polynomial(coeffs, description=None):
    """Epsilon-independent family for a polynomial in x (full derivative tower)."""
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if c.ndim != 1 or c.size == 0 or not np.all(np.isfinite(c)):
        raise ValueError("polynomial coefficients must be a finite 1-d sequence")
    if description is None:
        description = f"const {c[0]:g}" if c.size == 1 else f"poly{list(c)}"
    dc = npoly.polyder(c)
    # A constant is constant everywhere; a degenerate hint records that.
    hint = (0.0, 0.0) if c.size == 1 else None

    def ev(x):
        return npoly.polyval(_as_float_array(x), c)

    def dv(x):
        return npoly.polyval(_as_float_array(x), dc)

    rep = SmoothRepresentative(ev, dv, hint)
    return GenFunction(
        lambda eps: rep,
        lambda: from_polynomial(dc, f"d/dx {description}"),
        description,
    )


def constant(value, description=None):
    """Family that is the constant ``value`` at every (eps, x)."""
    return from_polynomial([float(value)], description=description)


def identity(description="x"):
    """The family x -> x at every eps."""
    return from_polynomial([0.0, 1.0], description=description)
