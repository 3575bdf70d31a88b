"""Per-operator compositionality analysis.

An operator's denotation bounds how many copies of each argument a context
built from it can spawn; the expected copy-counts become the coefficients
of a capped linear modulus ``z(e) = min(sum c_i * e_i, 1)`` bounding the
distance between applications of the operator in terms of the pairwise
argument distances.  All-finite coefficients certify uniform continuity
(with ``n`` = the ceiling of the largest coefficient as a uniform copy
bound); an infinite coefficient means no such certificate exists — the
sufficient condition fails, so the verdict is "not-shown" rather than a
non-continuity claim, except that genuinely unbounded spawning is
annotated as such.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .denotation import Denotations, FixpointConfig, lfp_denotations
from .errors import ArityMismatch, UndeclaredSymbol, UnsupportedModulusShape
from .frontend import SpecDocument
from .multiplicity import (INF, Weighting, ext_leq, ext_mul, format_count,
                           sup_approx, weighting_of)
from .terms import Var, state_var

ExtRational = Union[Fraction, object]

VERDICT_CONTINUOUS = "uniformly-continuous"
VERDICT_NOT_SHOWN = "not-shown"


@dataclass(frozen=True)
class ModulusSpec:
    """A capped linear modulus ``z(e1, ..., en) = min(sum c_i e_i, 1)``.

    Coefficients are nonnegative rationals or ``INF``; the form vanishes
    at the origin, and is continuous there exactly when every coefficient
    is finite.
    """

    arity: int
    coefficients: tuple[ExtRational, ...]

    def __post_init__(self) -> None:
        if len(self.coefficients) != self.arity:
            raise ValueError("one coefficient per argument required")
        for c in self.coefficients:
            if c is not INF and c < 0:
                raise ValueError(f"negative coefficient {c}")

    def is_finite(self) -> bool:
        return all(c is not INF for c in self.coefficients)

    def evaluate(self, eps: Sequence[Fraction]) -> Fraction:
        if len(eps) != self.arity:
            raise ArityMismatch(
                f"modulus of arity {self.arity} applied to {len(eps)} values")
        total: ExtRational = Fraction(0)
        for c, e in zip(self.coefficients, eps):
            term = ext_mul(c, Fraction(e))
            total = INF if (total is INF or term is INF) else total + term
        if total is INF:
            return Fraction(1)
        return min(total, Fraction(1))

    def __str__(self) -> str:
        terms = []
        for i, c in enumerate(self.coefficients, start=1):
            if c == 0:
                continue
            if c == 1:
                terms.append(f"e{i}")
            else:
                terms.append(f"{format_count(c)}*e{i}")
        if not terms:
            return "0"
        return "min(" + " + ".join(terms) + ", 1)"


@dataclass(frozen=True)
class ContinuityReport:
    """Verdict and evidence for one operator."""

    operator: str
    verdict: str
    modulus: ModulusSpec
    copies_bound: int | None
    reasons: tuple[str, ...]
    over_approximated: bool
    widened: bool
    annotation: str | None


def _source_vars(doc: SpecDocument, op: str) -> tuple[Var, ...]:
    if not doc.signature.has_operator(op):
        raise UndeclaredSymbol(f"unknown operator '{op}'")
    n = doc.signature.arity(op)
    return tuple(state_var(f"x{i + 1}") for i in range(n))


def _denotations(doc: SpecDocument, denotations: Denotations | None,
                 config: FixpointConfig) -> Denotations:
    if denotations is not None:
        return denotations
    return lfp_denotations(doc, config)


def weighted_sup(doc: SpecDocument, op: str, *,
                 denotations: Denotations | None = None,
                 config: FixpointConfig = FixpointConfig()) -> Weighting:
    """Expected copy-counts of the least generator dominating the
    operator's denotation, restricted to the argument positions.

    A single generator is its own supremum; several Dirac generators join
    exactly at the pointwise maximum; otherwise the join is approximated
    from above (see :func:`weighted_sup_flagged` for the flag).
    """
    return weighted_sup_flagged(doc, op, denotations=denotations,
                                config=config)[0]


def weighted_sup_flagged(doc: SpecDocument, op: str, *,
                         denotations: Denotations | None = None,
                         config: FixpointConfig = FixpointConfig(),
                         ) -> tuple[Weighting, bool]:
    """``weighted_sup`` plus a flag: True when the supremum had to be
    over-approximated (several generators, not all Dirac)."""
    den = _denotations(doc, denotations, config)
    sources = _source_vars(doc, op)
    gens = tuple(den.genset(_generic(doc, op)))
    if len(gens) == 1:
        w = weighting_of(gens[0])
        approx = False
    elif all(p.is_dirac() for p in gens):
        w = weighting_of(sup_approx(gens))
        approx = False
    else:
        w = weighting_of(sup_approx(gens))
        approx = True
    return w.restrict(sources), approx


def _generic(doc: SpecDocument, op: str):
    from .terms import Apply, Variable
    return Apply(op, tuple(Variable(x) for x in _source_vars(doc, op)))


def derive_modulus(doc: SpecDocument, op: str, *,
                   denotations: Denotations | None = None,
                   config: FixpointConfig = FixpointConfig()) -> ModulusSpec:
    """The capped linear modulus with the operator's expected copy-counts
    as coefficients."""
    sources = _source_vars(doc, op)
    w = weighted_sup(doc, op, denotations=denotations, config=config)
    return ModulusSpec(len(sources), tuple(w.get(x) for x in sources))


def is_uniformly_continuous(doc: SpecDocument, op: str, *,
                            denotations: Denotations | None = None,
                            config: FixpointConfig = FixpointConfig(),
                            ) -> ContinuityReport:
    """Decide the sufficient condition: the operator's denotation lies
    below a single uniform copy bound ``n`` on its arguments.

    Because a Dirac upper bound reduces the generator order to a pointwise
    condition on expectations, the check is per generator: every expected
    copy-count finite on the argument positions and zero elsewhere.  The
    verdict is per-generator exact even when the reported modulus
    coefficients had to be over-approximated.
    """
    den = _denotations(doc, denotations, config)
    sources = _source_vars(doc, op)
    source_set = set(sources)
    gens = tuple(den.genset(_generic(doc, op)))

    reasons: list[str] = []
    worst = Fraction(0)
    infinite_vars: list[Var] = []
    for p in gens:
        w = weighting_of(p)
        for x, v in w.entries:
            if x not in source_set:
                reasons.append(
                    f"copies of non-argument variable {x.name} can appear")
            elif v is INF:
                if x not in infinite_vars:
                    infinite_vars.append(x)
            elif not ext_leq(v, worst):
                worst = v

    for x in sorted(infinite_vars, key=lambda v: v.name):
        reasons.append(f"infinite coefficient at {x.name}")
    widened_relevant = bool(set(infinite_vars) & set(den.widened_vars))
    if widened_relevant:
        reasons.append("denotation required widening of an unbounded "
                       "growth chain")

    modulus = derive_modulus(doc, op, denotations=den, config=config)
    _, over_approx = weighted_sup_flagged(doc, op, denotations=den,
                                          config=config)
    if over_approx:
        reasons.append("modulus coefficients over-approximate a "
                       "non-Dirac supremum")

    if not infinite_vars and all(r.startswith("modulus") for r in reasons):
        verdict = VERDICT_CONTINUOUS
        copies = math.ceil(worst) if sources else 0
        annotation = None
    else:
        verdict = VERDICT_NOT_SHOWN
        copies = None
        annotation = None
        if infinite_vars:
            annotation = ("contexts can spawn unboundedly many copies of "
                          "the argument, so no modulus of continuity exists "
                          "and the operator is not uniformly continuous")
    return ContinuityReport(op, verdict, modulus, copies, tuple(reasons),
                            over_approx, den.widened, annotation)


def check_modulus(doc: SpecDocument, op: str, z: ModulusSpec, *,
                  denotations: Denotations | None = None,
                  config: FixpointConfig = FixpointConfig()) -> bool:
    """Does ``z`` bound the operator's spawning behaviour?

    For capped linear moduli the per-argument copy budget is exactly the
    coefficient, so the check is coefficient-wise: satisfied when every
    expected copy-count is at most the corresponding coefficient.
    """
    sources = _source_vars(doc, op)
    if z.arity != len(sources):
        raise ArityMismatch(
            f"operator '{op}' has arity {len(sources)}, "
            f"modulus has arity {z.arity}")
    w = weighted_sup(doc, op, denotations=denotations, config=config)
    return all(ext_leq(w.get(x), c) for x, c in zip(sources, z.coefficients))


# ---------------------------------------------------------------------------
# Parsing user-supplied moduli
# ---------------------------------------------------------------------------

_TERM_RE = re.compile(
    r"^(?:(?P<coef>inf|\d+/\d+|\d+\.\d+|\d+)\s*\*\s*)?e(?P<idx>\d+)$"
    r"|^(?P<const>inf|\d+/\d+|\d+\.\d+|\d+)$")


def parse_modulus(text: str, arity: int) -> ModulusSpec:
    """Parse a capped linear modulus like ``1/2*e1 + e2``.

    An optional ``min( ..., 1)`` wrapper is accepted; anything that is not
    a nonnegative linear combination of the argument distances (products
    of arguments, subtraction, nonzero constants, out-of-range indices)
    raises :class:`UnsupportedModulusShape`.
    """
    body = text.strip()
    wrapper = re.fullmatch(r"min\s*\((.*),\s*1\s*\)", body, re.DOTALL)
    if wrapper:
        body = wrapper.group(1).strip()
    if not body:
        raise UnsupportedModulusShape("empty modulus expression")
    coeffs: list[ExtRational] = [Fraction(0)] * arity
    for raw in body.split("+"):
        m = _TERM_RE.match(raw.strip())
        if not m:
            raise UnsupportedModulusShape(
                f"unsupported modulus term '{raw.strip()}': only capped "
                f"linear forms c1*e1 + ... + cn*en are accepted")
        if m.group("const") is not None:
            if m.group("const") == "inf" or Fraction(m.group("const")) != 0:
                raise UnsupportedModulusShape(
                    "nonzero constant term: the modulus must vanish when "
                    "all argument distances are zero")
            continue
        idx = int(m.group("idx"))
        if not 1 <= idx <= arity:
            raise UnsupportedModulusShape(
                f"argument index e{idx} out of range for arity {arity}")
        coef_text = m.group("coef")
        coef: ExtRational
        if coef_text is None:
            coef = Fraction(1)
        elif coef_text == "inf":
            coef = INF
        else:
            coef = Fraction(coef_text)
        prev = coeffs[idx - 1]
        if prev is INF or coef is INF:
            coeffs[idx - 1] = INF
        else:
            coeffs[idx - 1] = prev + coef
    return ModulusSpec(arity, tuple(coeffs))
