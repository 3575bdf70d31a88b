"""Exception hierarchy shared by all pgsos modules.

Two families matter for the CLI exit-code contract:

* ``InputError`` — the user gave us something malformed (bad spec text,
  unknown operator, open term where a closed one is required, ...).
  The CLI maps these to exit code 2.
* ``AnalysisRefusal`` — the inputs were fine but the requested analysis
  cannot be completed honestly (truncated state space, non-stabilising
  iteration, every oracle sample skipped, ...).  Exit code 1.

Everything else propagating out of the library is a plain bug.
"""

from __future__ import annotations


class PgsosError(Exception):
    """Base class for all errors raised by this package."""


# ---------------------------------------------------------------------------
# Input / usage errors (CLI exit code 2)
# ---------------------------------------------------------------------------

class InputError(PgsosError):
    """The given spec, term, or option is malformed or inconsistent."""


class SpecSyntaxError(InputError):
    """Unparseable spec or term text.  Carries a line/column position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UndeclaredSymbol(InputError):
    """A rule or term mentions an operator, action or set never declared."""


class ArityMismatch(InputError):
    """An operator was applied to the wrong number of arguments."""


class KindMismatch(InputError):
    """A substitution maps a state variable to a distribution term or vice versa."""


class RuleFormatError(InputError):
    """A rule violates the well-formedness constraints on rules.

    ``violations`` holds the individual findings (see
    :func:`pgsos.frontend.validate_rule`).
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(v.message for v in self.violations))


class OpenTermError(InputError):
    """A closed term was required but the given one has free variables."""


class UnindexedState(InputError):
    """A distance was requested for a state not present in the table."""


class EmptyGenSet(InputError):
    """Attempt to build a generator set from no generators."""


class UnsupportedModulusShape(InputError):
    """Only linear capped moduli ``min(sum c_i * e_i, 1)`` are supported."""


# ---------------------------------------------------------------------------
# Analysis refusals (CLI exit code 1)
# ---------------------------------------------------------------------------

class AnalysisRefusal(PgsosError):
    """The analysis cannot produce a trustworthy result for these inputs."""


class ExplorationLimit(AnalysisRefusal):
    """Base for exploration cut-offs; carries the partial fragment."""

    def __init__(self, message: str, fragment):
        self.fragment = fragment
        super().__init__(message)


class StateLimitExceeded(ExplorationLimit):
    """Reachable-state closure exceeded the configured state budget."""


class DepthLimitExceeded(ExplorationLimit):
    """Reachable-state closure exceeded the configured depth budget."""


class TruncatedFragment(AnalysisRefusal):
    """An exact computation was asked to run on an incomplete fragment."""


class PairLimitExceeded(AnalysisRefusal):
    """The distance computation depends on more state pairs than budgeted."""


class NoConvergence(AnalysisRefusal):
    """Exact fixed-point iteration did not stabilise within the step budget."""

    def __init__(self, message: str, iterations: int):
        self.iterations = iterations
        super().__init__(message)


class IterationLimitExceeded(AnalysisRefusal):
    """Denotation iteration still growing at the configured limit."""


class AllSamplesSkipped(AnalysisRefusal):
    """Every oracle sample was discarded before comparison."""


class UntrackedSubterm(PgsosError):
    """A one-step denotation was asked for a term whose sub-term is unknown."""


class OracleViolation(PgsosError):
    """A sampled exact distance exceeded its denotational bound.

    This never indicates bad input: either the metric engine or the
    denotation engine is computing the wrong answer.
    """
