"""Rule formats, metrics, and denotations for probabilistic process algebras.

The package is organised around three activities:

* describing a process algebra by structural operational rules and checking
  that every rule fits the guarded probabilistic format
  (:mod:`pgsos.frontend`, :mod:`pgsos.terms`),
* running the resulting transition system and measuring behavioural
  distances between closed processes (:mod:`pgsos.semantics`,
  :mod:`pgsos.metric`),
* summarising how each operator propagates behavioural distance, by
  computing multiplicity-valued denotations of open terms and deriving
  moduli of continuity (:mod:`pgsos.denotation`, :mod:`pgsos.continuity`).

All arithmetic is exact: probabilities are :class:`fractions.Fraction`,
multiplicities are rationals extended with the infinity sentinel
:data:`pgsos.multiplicity.INF`.
"""

from .errors import (
    AllSamplesSkipped,
    AnalysisRefusal,
    ArityMismatch,
    DepthLimitExceeded,
    EmptyGenSet,
    ExplorationLimit,
    InputError,
    IterationLimitExceeded,
    KindMismatch,
    NoConvergence,
    OpenTermError,
    OracleViolation,
    PairLimitExceeded,
    PgsosError,
    RuleFormatError,
    SpecSyntaxError,
    StateLimitExceeded,
    TruncatedFragment,
    UndeclaredSymbol,
    UnindexedState,
    UnsupportedModulusShape,
    UntrackedSubterm,
)
from .terms import (
    Apply,
    ConvexSum,
    DistApply,
    DistVariable,
    FiniteDistribution,
    InstDirac,
    Signature,
    Var,
    Variable,
    convex_sum,
    dist_var,
    eval_closed_dist,
    format_rational,
    format_term,
    free_vars,
    is_closed,
    state_var,
    substitute,
    term_key,
)
from .frontend import (
    NegPremise,
    PosPremise,
    Rule,
    SpecDocument,
    parse_spec,
    parse_term,
    print_rule,
    print_spec,
    validate_rule,
)
from .semantics import (
    DEFAULT_MAX_STATES,
    ReachableFragment,
    Transition,
    derive_transitions,
    enabled_actions,
    explore_fragment,
)
from .multiplicity import (
    D_ZERO,
    E_ZERO,
    INF,
    M_ZERO,
    P_ZERO,
    GenSet,
    Multiplicity,
    ProbMultiplicity,
    ProcessDistance,
    Weighting,
    da,
    dda,
    ext_leq,
    format_count,
    genset_equiv,
    genset_leq,
    genset_normalize,
    m_sum,
    mult,
    p_leq,
    pda,
    process_distance,
    sup_approx,
    unit,
    weighting_of,
)
from .metric import (
    PseudometricTable,
    bisim_distance,
    bisim_metric_lfp,
    bisim_step,
    hausdorff,
    kantorovich,
)
from .denotation import (
    Denotations,
    FixpointConfig,
    bound_distance,
    denote,
    denote_rule_step,
    denote_term_step,
    lfp_denotations,
)
from .continuity import (
    VERDICT_CONTINUOUS,
    VERDICT_NOT_SHOWN,
    ContinuityReport,
    ModulusSpec,
    check_modulus,
    derive_modulus,
    is_uniformly_continuous,
    parse_modulus,
    weighted_sup,
)
from .oracle import (
    OracleConfig,
    OracleSummary,
    SampleResult,
    evaluate_sample,
    oracle_compare,
    oracle_suite,
)

__version__ = "0.1.0"

__all__ = [
    # errors
    "PgsosError",
    "InputError",
    "SpecSyntaxError",
    "UndeclaredSymbol",
    "ArityMismatch",
    "KindMismatch",
    "RuleFormatError",
    "OpenTermError",
    "UnindexedState",
    "EmptyGenSet",
    "UnsupportedModulusShape",
    "AnalysisRefusal",
    "ExplorationLimit",
    "StateLimitExceeded",
    "DepthLimitExceeded",
    "TruncatedFragment",
    "PairLimitExceeded",
    "NoConvergence",
    "IterationLimitExceeded",
    "AllSamplesSkipped",
    "UntrackedSubterm",
    "OracleViolation",
    # terms
    "Var",
    "state_var",
    "dist_var",
    "Signature",
    "Variable",
    "Apply",
    "DistVariable",
    "InstDirac",
    "ConvexSum",
    "DistApply",
    "convex_sum",
    "FiniteDistribution",
    "eval_closed_dist",
    "format_term",
    "format_rational",
    "term_key",
    "free_vars",
    "is_closed",
    "substitute",
    # frontend
    "PosPremise",
    "NegPremise",
    "Rule",
    "SpecDocument",
    "parse_spec",
    "parse_term",
    "print_rule",
    "print_spec",
    "validate_rule",
    # semantics
    "Transition",
    "derive_transitions",
    "enabled_actions",
    "ReachableFragment",
    "explore_fragment",
    "DEFAULT_MAX_STATES",
    # multiplicity
    "INF",
    "ext_leq",
    "format_count",
    "Multiplicity",
    "mult",
    "unit",
    "M_ZERO",
    "m_sum",
    "ProbMultiplicity",
    "P_ZERO",
    "Weighting",
    "weighting_of",
    "ProcessDistance",
    "process_distance",
    "E_ZERO",
    "p_leq",
    "GenSet",
    "D_ZERO",
    "genset_normalize",
    "genset_leq",
    "genset_equiv",
    "sup_approx",
    "dda",
    "pda",
    "da",
    # metric
    "PseudometricTable",
    "kantorovich",
    "hausdorff",
    "bisim_step",
    "bisim_metric_lfp",
    "bisim_distance",
    # denotation
    "FixpointConfig",
    "Denotations",
    "lfp_denotations",
    "denote",
    "denote_term_step",
    "denote_rule_step",
    "bound_distance",
    # continuity
    "VERDICT_CONTINUOUS",
    "VERDICT_NOT_SHOWN",
    "ModulusSpec",
    "ContinuityReport",
    "weighted_sup",
    "derive_modulus",
    "is_uniformly_continuous",
    "check_modulus",
    "parse_modulus",
    # oracle
    "OracleConfig",
    "SampleResult",
    "OracleSummary",
    "evaluate_sample",
    "oracle_compare",
    "oracle_suite",
]
