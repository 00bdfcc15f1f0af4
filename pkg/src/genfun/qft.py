"""Desk-scale transition-probability experiments on truncated Fock spaces.

Exact (spectral) unitary evolution gives probabilities that are honest
numbers in [0, 1] even when couplings grow as eps shrinks; interaction-
picture Dyson partial sums of the same problems are computed alongside so
their divergence can be exhibited against the exact oracle.
"""

import math

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .core import GenfunError, GenNumber
from .asymptotics import DEFAULT_GRID, DEFAULT_THRESHOLDS, classify

HERMITICITY_TOL = 1e-12
PROBABILITY_SLACK = 1e-12
MAX_DYSON_ORDER = 16
MIN_TIME_STEPS = 1000


class DysonDivergenceError(GenfunError):
    """A Dyson iterate became non-finite; names the order reached."""

    def __init__(self, order):
        super().__init__(f"non-finite Dyson iterate at order {order}")
        self.order = order


class FockSpec:
    """Number-basis truncation: dimension N >= 2 and mode frequency omega.

    omega = 0 is allowed (it turns off the free part entirely, which the
    exactly solvable two-level problems rely on).
    """

    __slots__ = ("dimension", "omega")

    def __init__(self, dimension, omega=1.0):
        self.dimension = int(dimension)
        self.omega = float(omega)
        if self.dimension < 2:
            raise ValueError(f"Fock dimension must be >= 2, got {self.dimension}")
        if not (math.isfinite(self.omega) and self.omega >= 0.0):
            raise ValueError(f"omega must be a finite nonnegative real, got {self.omega}")

    def __repr__(self):
        return f"FockSpec(dimension={self.dimension}, omega={self.omega:g})"


def _as_gen_number(value, what):
    if value is None:
        return None
    if isinstance(value, GenNumber):
        return value
    if isinstance(value, (int, float)):
        return GenNumber.constant(float(value), f"{what} {float(value):g}")
    raise TypeError(f"{what} must be a real number or GenNumber, got {type(value).__name__}")


class InteractionSpec:
    """Polynomial potential in (a + a†) with a possibly eps-dependent coupling.

    ``potential`` holds ascending coefficients, degree <= 6.  ``coupling``
    and the optional diagonal ``counterterm`` are GenNumbers (plain floats
    are wrapped as constants).
    """

    __slots__ = ("potential", "coupling", "counterterm")

    def __init__(self, potential, coupling, counterterm=None):
        self.potential = tuple(float(c) for c in potential)
        if not self.potential or len(self.potential) - 1 > 6:
            raise ValueError("potential must have degree between 0 and 6")
        if not all(math.isfinite(c) for c in self.potential):
            raise ValueError("potential coefficients must be finite")
        self.coupling = _as_gen_number(coupling, "coupling")
        self.counterterm = _as_gen_number(counterterm, "counterterm")

    def __repr__(self):
        return (f"InteractionSpec(potential={self.potential}, "
                f"coupling={self.coupling.description!r})")


class StateVector:
    """Normalized state in the number basis."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes):
        amp = np.asarray(amplitudes, dtype=complex)
        if amp.ndim != 1 or amp.size < 2:
            raise ValueError("amplitudes must be a 1-d sequence of length >= 2")
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm {norm!r} deviates from 1 by more than 1e-12")
        self.amplitudes = amp

    @classmethod
    def basis(cls, n, dimension):
        amp = np.zeros(int(dimension), dtype=complex)
        amp[int(n)] = 1.0
        return cls(amp)

    @classmethod
    def normalized(cls, amplitudes):
        amp = np.asarray(amplitudes, dtype=complex)
        return cls(amp / np.linalg.norm(amp))

    def padded(self, dimension):
        """Same state embedded in a larger truncation (zero padding)."""
        dimension = int(dimension)
        if dimension < self.amplitudes.size:
            raise ValueError(
                f"cannot shrink a state of length {self.amplitudes.size} to {dimension}"
            )
        amp = np.zeros(dimension, dtype=complex)
        amp[: self.amplitudes.size] = self.amplitudes
        return StateVector(amp)

    def __repr__(self):
        return f"StateVector(dim={self.amplitudes.size})"


class TransitionProblem:
    """Initial/final states, Hamiltonian data and an evolution time."""

    __slots__ = ("fock", "interaction", "initial", "final", "time")

    def __init__(self, fock, interaction, initial, final, time):
        self.fock = fock
        self.interaction = interaction
        self.initial = initial
        self.final = final
        self.time = float(time)
        n = fock.dimension
        if initial.amplitudes.size != n or final.amplitudes.size != n:
            raise ValueError("state dimensions do not match the Fock truncation")

    def with_dimension(self, dimension):
        """The same problem in a larger truncation (states zero-padded)."""
        fock = FockSpec(dimension, self.fock.omega)
        return TransitionProblem(
            fock, self.interaction,
            self.initial.padded(dimension), self.final.padded(dimension),
            self.time,
        )


def ladder_matrices(n):
    """Truncated lowering/raising operators: lowering maps |k> to sqrt(k)|k-1>."""
    n = int(n)
    if n < 2:
        raise ValueError("need dimension >= 2")
    lowering = np.zeros((n, n))
    ks = np.arange(1, n)
    lowering[ks - 1, ks] = np.sqrt(ks)
    return lowering, lowering.T.copy()


def potential_matrix(coeffs, n):
    """Polynomial of (a + a†) in the truncated basis, by Horner's rule."""
    a, adag = ladder_matrices(n)
    x = a + adag
    eye = np.eye(n)
    v = coeffs[-1] * eye
    for c in reversed(coeffs[:-1]):
        v = v @ x + c * eye
    return v


def build_hamiltonian(fock, interaction, eps):
    """H = omega*(n + 1/2) + coupling(eps)*V(a+a†) + counterterm(eps)*I.

    Exactly Hermitian by construction: the assembled matrix is symmetrized
    against its conjugate transpose to cancel floating-point asymmetry.
    """
    n = fock.dimension
    number = np.diag(np.arange(n, dtype=float))
    h = fock.omega * (number + 0.5 * np.eye(n))
    g = interaction.coupling.at(eps)
    h = h + g * potential_matrix(interaction.potential, n)
    if interaction.counterterm is not None:
        h = h + interaction.counterterm.at(eps) * np.eye(n)
    h = 0.5 * (h + h.conj().T)
    if not np.all(np.isfinite(h)):
        raise GenfunError(f"non-finite Hamiltonian entries at eps={eps}")
    return h


def evolve(h, t, psi0):
    """psi_t = exp(-iHt) psi0 via eigendecomposition of the Hermitian matrix."""
    h = np.asarray(h)
    defect = float(np.max(np.abs(h - h.conj().T), initial=0.0))
    if defect > HERMITICITY_TOL * max(1.0, float(np.max(np.abs(h)))):
        raise ValueError(f"matrix is not Hermitian (defect {defect:g})")
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise GenfunError(f"eigendecomposition failed: {exc}") from exc
    psi0 = np.asarray(psi0, dtype=complex)
    phases = np.exp(-1j * w * float(t))
    return v @ (phases * (v.conj().T @ psi0))


def transition_probability(problem, eps):
    """|<final| exp(-iHt) |initial>|^2, asserted into [0, 1].

    The value is mathematically in [0, 1]; anything outside a 1e-12 slack is
    an error, never silently clamped.
    """
    h = build_hamiltonian(problem.fock, problem.interaction, eps)
    psi_t = evolve(h, problem.time, problem.initial.amplitudes)
    p = float(abs(np.vdot(problem.final.amplitudes, psi_t)) ** 2)
    if p > 1.0 + PROBABILITY_SLACK or p < -PROBABILITY_SLACK:
        raise GenfunError(f"transition probability {p!r} outside [0, 1] beyond slack")
    return min(max(p, 0.0), 1.0)


class TransitionResult:
    """Probability plus the unitarity defect of the evolution that produced it."""

    __slots__ = ("probability", "unitarity_defect")

    def __init__(self, probability, unitarity_defect):
        self.probability = probability
        self.unitarity_defect = unitarity_defect


def transition_report(problem, eps):
    """Like :func:`transition_probability` but also reports |‖psi_t‖ - 1|."""
    h = build_hamiltonian(problem.fock, problem.interaction, eps)
    psi_t = evolve(h, problem.time, problem.initial.amplitudes)
    defect = abs(float(np.linalg.norm(psi_t)) - 1.0)
    p = float(abs(np.vdot(problem.final.amplitudes, psi_t)) ** 2)
    if p > 1.0 + PROBABILITY_SLACK or p < -PROBABILITY_SLACK:
        raise GenfunError(f"transition probability {p!r} outside [0, 1] beyond slack")
    return TransitionResult(min(max(p, 0.0), 1.0), defect)


def dyson_partial_sums(problem, eps, max_order, time_steps):
    """Interaction-picture partial-sum amplitudes of orders 0..max_order.

    The iterates follow psi_k(t) = -i * integral_0^t V~(s) psi_{k-1}(s) ds on
    a uniform grid with trapezoidal accumulation (error O(dt^2) per level),
    V~(s) = exp(iH0 s) V exp(-iH0 s) with H0 the diagonal free part.  The
    returned amplitude at order k is <final| exp(-iH0 t) sum_{j<=k} g^j
    psi_j(t)>, which converges (when it converges) to the exact
    Schrodinger-picture amplitude.
    """
    max_order = int(max_order)
    time_steps = int(time_steps)
    if not 0 <= max_order <= MAX_DYSON_ORDER:
        raise ValueError(f"max_order must be in [0, {MAX_DYSON_ORDER}]")
    if time_steps < MIN_TIME_STEPS:
        raise ValueError(f"time_steps must be >= {MIN_TIME_STEPS}")

    n = problem.fock.dimension
    g = problem.interaction.coupling.at(eps)
    c0 = 0.0
    if problem.interaction.counterterm is not None:
        c0 = problem.interaction.counterterm.at(eps)
    theta = problem.fock.omega * (np.arange(n) + 0.5) + c0
    v = potential_matrix(problem.interaction.potential, n)

    ts = np.linspace(0.0, problem.time, time_steps + 1)
    phase = np.exp(1j * np.outer(ts, theta))
    final_rotated = problem.final.amplitudes.conj() * np.exp(-1j * theta * problem.time)

    psi = np.broadcast_to(problem.initial.amplitudes, (len(ts), n)).copy()
    accumulated = problem.initial.amplitudes.astype(complex).copy()
    sums = np.empty(max_order + 1, dtype=complex)
    sums[0] = np.sum(final_rotated * accumulated)
    for k in range(1, max_order + 1):
        w = phase * ((psi * np.conj(phase)) @ v.T)
        psi = -1j * cumulative_trapezoid(w, x=ts, axis=0, initial=0.0)
        if not np.all(np.isfinite(psi)):
            raise DysonDivergenceError(k)
        accumulated = accumulated + g ** k * psi[-1]
        sums[k] = np.sum(final_rotated * accumulated)
    return sums


def exact_amplitude(problem, eps):
    """<final| exp(-iHt) |initial> from the spectral evolution (the oracle)."""
    h = build_hamiltonian(problem.fock, problem.interaction, eps)
    psi_t = evolve(h, problem.time, problem.initial.amplitudes)
    return complex(np.vdot(problem.final.amplitudes, psi_t))


def first_divergence_order(partial_sums, exact):
    """Smallest order whose partial sum exceeds 10x the exact amplitude or
    yields probability > 1; None when the sequence stays tame."""
    threshold = 10.0 * abs(exact)
    for k, s in enumerate(partial_sums):
        if abs(s) > threshold or abs(s) ** 2 > 1.0:
            return k
    return None


class SweepResult:
    """Probabilities per eps plus their asymptotic classification."""

    __slots__ = ("probabilities", "classification", "table")

    def __init__(self, probabilities, classification, table):
        self.probabilities = probabilities
        self.classification = classification
        self.table = table


def sweep_epsilon(problem, grid=DEFAULT_GRID, thresholds=DEFAULT_THRESHOLDS):
    """Probability per grid eps (each asserted into [0, 1]) + classification.

    No limit is asserted a priori; the classification verdict reports
    whatever the grid shows.
    """
    gn = GenNumber(
        lambda e: transition_probability(problem, e),
        f"P[{problem.interaction.coupling.description}]",
    )
    table = [(float(e), gn.at(float(e))) for e in grid.values()]
    return SweepResult(gn, classify(gn, grid, thresholds), table)


def truncation_study(problem, dims, eps):
    """Probability as a function of the truncation dimension.

    Returns rows ``(N, probability, diff_from_previous)``; the first row's
    difference is None.  ``eps`` is explicit because couplings may depend
    on it.
    """
    dims = [int(d) for d in dims]
    if any(b <= a for a, b in zip(dims, dims[1:])):
        raise ValueError("dims must be strictly increasing")
    rows = []
    previous = None
    for d in dims:
        p = transition_probability(problem.with_dimension(d), eps)
        rows.append((d, p, None if previous is None else abs(p - previous)))
        previous = p
    return rows
