"""Numerical algebra of generalized functions.

Epsilon-parameterized smooth representatives built by mollifier embedding,
closed under ring operations and exact differentiation; adaptive quadrature
and pairings; asymptotic classification of epsilon-families ("infinite
quantities", limits, negligibility); and desk-scale nonperturbative
transition probabilities on truncated Fock spaces.
"""

from .core import (
    EPS_WORKING_RANGE,
    EvaluationError,
    GenFunction,
    GenNumber,
    GenfunError,
    SmoothRepresentative,
    combine,
    compose_polynomial,
    constant,
    derivative,
    evaluate,
    from_polynomial,
    identity,
    scale,
)
from .embedding import (
    MOLLIFIER_KINDS,
    Mollifier,
    TestFunction,
    embed_delta,
    embed_heaviside,
    embed_polynomial,
    embed_smooth,
    make_mollifier,
    standard_test_suite,
)
from .quadrature import (
    QuadratureError,
    QuadratureResult,
    integrate,
    integrate_gf,
    integrate_gf_at,
    pair,
    pair_result,
)
from .asymptotics import (
    AssociationReport,
    AsymptoticClass,
    EpsilonGrid,
    NoLimitError,
    PowerLawUnfitError,
    Thresholds,
    VERDICT_DECAYS,
    VERDICT_FINITE,
    VERDICT_INFINITE,
    VERDICT_UNCLASSIFIABLE,
    classify,
    fit_power_law,
    is_associated,
    is_negligible,
    limit_estimate,
    supnorm,
)
from .qft import (
    DysonDivergenceError,
    FockSpec,
    InteractionSpec,
    StateVector,
    TransitionProblem,
    build_hamiltonian,
    dyson_partial_sums,
    evolve,
    exact_amplitude,
    first_divergence_order,
    ladder_matrices,
    potential_matrix,
    sweep_epsilon,
    transition_probability,
    transition_report,
    truncation_study,
)
from .expr import (
    ExprEvalError,
    ExprSyntaxError,
    ExprTypeError,
    eval_genexpr,
    parse_genexpr,
    pretty,
)

__version__ = "0.1.0"
