"""Canonical denotations of open terms in the multiplicity domain.

Every term gets a generator set describing how many copies of each free
variable (and, for rule analysis, each premise derivative) a context built
from the specification can spawn.  Denotations of terms and rules are
mutually recursive — a rule's denotation folds the denotation of its
target, which applies operators whose denotations come from their rules —
so both are computed together as the least fixed point of a joint step
function, iterating upward from the zero denotation.

Operators applied to distribution terms are coarsened to a single
generator: the least probabilistic multiplicity covering every rule of the
operator, further raised by one copy of each source variable the rule
tests, because testing a distribution's states discriminates them as
effectively as running one copy (toggle ``reactive_testing`` to reproduce
the unsound bound without that correction).

Unbounded recursion (replication-style operators) makes the chain grow
forever; a per-entry widening promotes a variable's count to ``INF`` after
its expected value has strictly increased ``widening_window`` times, after
which the chain stabilises or the iteration cap reports failure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import IterationLimitExceeded, UntrackedSubterm
from .frontend import Rule, SpecDocument
from .multiplicity import (D_ZERO, GenSet, INF, M_ZERO, Multiplicity,
                           P_ZERO, ProbMultiplicity, ProcessDistance,
                           ext_leq, genset_equiv, genset_normalize, m_scale,
                           m_sum, mult, p_lift_op, sup_approx, sup_is_exact,
                           unit, weighting_of, da)
from .terms import (Apply, ConvexSum, DistApply, DistTerm, DistVariable,
                    InstDirac, StateTerm, Term, Var, Variable, dist_var,
                    format_term, state_var, substitute)

ExtRational = Union[Fraction, int, object]


@dataclass(frozen=True)
class FixpointConfig:
    max_iterations: int = 64
    widening_window: int = 8


# ---------------------------------------------------------------------------
# Probabilistic-multiplicity composition
# ---------------------------------------------------------------------------

def power_sum(p: ProbMultiplicity, k) -> ProbMultiplicity:
    """``k`` independent copies of ``p`` added together.

    Infinitely many copies concentrate on ``INF`` at every variable the
    support can touch: any coordinate with positive single-copy probability
    of being spawned is spawned infinitely often almost surely.
    """
    if k == 0:
        return P_ZERO
    if k is INF:
        touched = {x for m in p.support() for x in m.vars()}
        return ProbMultiplicity.dirac(mult({x: INF for x in touched}))
    out = P_ZERO
    for _ in range(k):
        out = p_lift_op("sum", out, p)
    return out


def branch_compose(p_f: ProbMultiplicity, sources: tuple[Var, ...],
                   args: tuple[ProbMultiplicity, ...]) -> ProbMultiplicity:
    """Compose an operator generator with per-argument generators.

    One multiplicity ``m_f`` is drawn from ``p_f``; position ``i`` then
    contributes ``m_f(x_i)`` independent copies of its argument generator,
    all added together.  Coordinates of ``m_f`` outside the source
    variables (premise derivatives) are consumed by the draw and do not
    reach the result.
    """
    pairs: list[tuple[Multiplicity, Fraction]] = []
    for m_f, q in p_f:
        conv = P_ZERO
        for x_i, p_i in zip(sources, args):
            k = m_f.get(x_i)
            if k == 0:
                continue
            conv = p_lift_op("sum", conv, power_sum(p_i, k))
        pairs.extend((m, q * r) for m, r in conv)
    return ProbMultiplicity.from_pairs(pairs)


def compose_operator(rho_f: GenSet, sources: tuple[Var, ...],
                     arg_gensets: tuple[GenSet, ...]) -> GenSet:
    """All combinations of operator generators with argument generators."""
    if not sources:
        return D_ZERO
    gens = []
    for p_f in rho_f:
        for combo in itertools.product(*arg_gensets):
            gens.append(branch_compose(p_f, sources, combo))
    return genset_normalize(gens)


def convex_combine(weights: tuple[Fraction, ...],
                   gensets: tuple[GenSet, ...]) -> GenSet:
    """Convex combination lifted to generator sets: one generator choice
    per summand, mixed with the given weights, over all combinations."""
    gens = []
    for combo in itertools.product(*gensets):
        pairs: list[tuple[Multiplicity, Fraction]] = []
        for q, p in zip(weights, combo):
            pairs.extend((m, q * r) for m, r in p)
        gens.append(ProbMultiplicity.from_pairs(pairs))
    return genset_normalize(gens)


def fold_rule(p: ProbMultiplicity, rule: Rule) -> ProbMultiplicity:
    """Push a target generator through the rule view: every copy of a
    derivative also stands for one copy of the source it came from, so
    each draw ``m`` is raised by ``m(mu) * 1_{x_i}`` per positive premise
    ``x_i --a--> mu``."""
    def raise_one(m: Multiplicity) -> Multiplicity:
        acc = m
        for prem in rule.pos:
            k = m.get(prem.derivative)
            if k != 0:
                acc = m_sum(acc, m_scale(k, unit(prem.source)))
        return acc

    return ProbMultiplicity.from_pairs((raise_one(m), q) for m, q in p)


# ---------------------------------------------------------------------------
# Canonical rule form
# ---------------------------------------------------------------------------

def canonical_rule(rule: Rule) -> Rule:
    """Rename sources to x1..xn and derivatives to d1..dk (premise order)
    so that rules of the same operator share coordinates."""
    mapping: dict[Var, Term] = {}
    new_sources = []
    for i, s in enumerate(rule.sources):
        v = state_var(f"x{i + 1}")
        mapping[s] = Variable(v)
        new_sources.append(v)
    new_pos = []
    for k, p in enumerate(rule.pos):
        v = dist_var(f"d{k + 1}")
        mapping[p.derivative] = DistVariable(v)
        new_pos.append(type(p)(mapping[p.source].var, p.action, v))
    new_neg = [type(n)(mapping[n.source].var, n.action) for n in rule.neg]
    target = substitute(rule.target, mapping)
    return Rule(rule.op, tuple(new_sources), tuple(new_pos), tuple(new_neg),
                rule.action, target)


def subterms(t: Term) -> list[Term]:
    """The term and all its subterms, innermost first."""
    out: list[Term] = []

    def walk(u: Term) -> None:
        if isinstance(u, (Apply, DistApply)):
            for a in u.args:
                walk(a)
        elif isinstance(u, InstDirac):
            walk(u.term)
        elif isinstance(u, ConvexSum):
            for _, theta in u.parts:
                walk(theta)
        out.append(u)

    walk(t)
    return out


# ---------------------------------------------------------------------------
# The joint step function
# ---------------------------------------------------------------------------

class _StepContext:
    """Evaluates the step function clauses against given tau/rho tables."""

    def __init__(self, doc: SpecDocument, rules: tuple[Rule, ...],
                 tau: Mapping[Term, GenSet], rho: Mapping[Rule, GenSet],
                 reactive_testing: bool):
        self.doc = doc
        self.rules = rules
        self.tau = tau
        self.rho = rho
        self.reactive_testing = reactive_testing
        self.over_approximated = False
        self._dist_cache: dict[str, GenSet] = {}

    def rules_for(self, op: str) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if r.op == op)

    def lookup(self, t: Term) -> GenSet:
        try:
            return self.tau[t]
        except KeyError:
            raise UntrackedSubterm(
                f"no tracked denotation for {format_term(t)}") from None

    def sources_of(self, op: str) -> tuple[Var, ...]:
        n = self.doc.signature.arity(op)
        return tuple(state_var(f"x{i + 1}") for i in range(n))

    def rho_state(self, op: str) -> GenSet:
        rules = self.rules_for(op)
        if not rules:
            return D_ZERO
        return genset_normalize(p for r in rules for p in self.rho[r])

    def rho_dist(self, op: str) -> GenSet:
        cached = self._dist_cache.get(op)
        if cached is not None:
            return cached
        rules = self.rules_for(op)
        if not rules:
            result = D_ZERO
        else:
            per_rule = []
            for r in rules:
                gens = tuple(self.rho[r])
                if not sup_is_exact(gens):
                    self.over_approximated = True
                s_r = sup_approx(gens)
                if self.reactive_testing:
                    tested = ProbMultiplicity.dirac(unit(*sorted(
                        r.tested_sources(), key=lambda v: v.name)))
                    s_r = sup_approx((s_r, tested))
                per_rule.append(s_r)
            result = GenSet((sup_approx(per_rule),))
        self._dist_cache[op] = result
        return result

    def term_step(self, t: Term) -> GenSet:
        if isinstance(t, Variable):
            return GenSet((ProbMultiplicity.dirac(unit(t.var)),))
        if isinstance(t, DistVariable):
            return GenSet((ProbMultiplicity.dirac(unit(t.var)),))
        if isinstance(t, InstDirac):
            return self.lookup(t.term)
        if isinstance(t, ConvexSum):
            weights = tuple(q for q, _ in t.parts)
            gensets = tuple(self.lookup(theta) for _, theta in t.parts)
            return convex_combine(weights, gensets)
        if isinstance(t, Apply):
            return compose_operator(self.rho_state(t.op), self.sources_of(t.op),
                                    tuple(self.lookup(a) for a in t.args))
        if isinstance(t, DistApply):
            return compose_operator(self.rho_dist(t.op), self.sources_of(t.op),
                                    tuple(self.lookup(a) for a in t.args))
        raise TypeError(f"not a term: {t!r}")

    def rule_step(self, rule: Rule) -> GenSet:
        target_gs = self.lookup(rule.target)
        return genset_normalize(fold_rule(p, rule) for p in target_gs)


def denote_term_step(doc: SpecDocument, tau: Mapping[Term, GenSet],
                     rho: Mapping[Rule, GenSet], t: Term, *,
                     reactive_testing: bool = True) -> GenSet:
    """One application of the term clause of the step function."""
    rules = tuple(canonical_rule(r) for r in doc.rules)
    ctx = _StepContext(doc, rules, tau, rho, reactive_testing)
    return ctx.term_step(t)


def denote_rule_step(doc: SpecDocument, tau: Mapping[Term, GenSet],
                     rule: Rule, *, reactive_testing: bool = True) -> GenSet:
    """One application of the rule clause of the step function."""
    rules = tuple(canonical_rule(r) for r in doc.rules)
    ctx = _StepContext(doc, rules, tau, {}, reactive_testing)
    return ctx.rule_step(rule)


# ---------------------------------------------------------------------------
# Least fixed point with widening
# ---------------------------------------------------------------------------

@dataclass
class Denotations:
    """Result of the joint fixpoint: tracked denotations plus per-operator
    summaries, and honesty flags when the result is an upper bound rather
    than the exact least fixed point."""

    doc: SpecDocument
    config: FixpointConfig
    reactive_testing: bool
    tau: dict[Term, GenSet]
    rho: dict[Rule, GenSet]
    rho_by_doc_rule: dict[Rule, GenSet]
    iterations: int
    widened_vars: frozenset[Var]
    over_approximated: bool
    _memo: dict[Term, GenSet] = field(default_factory=dict)

    @property
    def widened(self) -> bool:
        return bool(self.widened_vars)

    def _context(self) -> _StepContext:
        rules = tuple(self.rho)
        ctx = _StepContext(self.doc, rules, self.tau, self.rho,
                           self.reactive_testing)
        return ctx

    def genset(self, t: Term) -> GenSet:
        """Denotation of an arbitrary term, evaluated bottom-up against the
        fixed point (the step clauses are compositional, so no iteration is
        needed for query terms)."""
        hit = self._memo.get(t)
        if hit is not None:
            return hit
        ctx = self._context()

        def ev(u: Term) -> GenSet:
            if u in self._memo:
                return self._memo[u]
            if isinstance(u, (Variable, DistVariable)):
                out = GenSet((ProbMultiplicity.dirac(unit(u.var)),))
            elif isinstance(u, InstDirac):
                out = ev(u.term)
            elif isinstance(u, ConvexSum):
                out = convex_combine(tuple(q for q, _ in u.parts),
                                     tuple(ev(theta) for _, theta in u.parts))
            elif isinstance(u, Apply):
                out = compose_operator(ctx.rho_state(u.op),
                                       ctx.sources_of(u.op),
                                       tuple(ev(a) for a in u.args))
            elif isinstance(u, DistApply):
                out = compose_operator(ctx.rho_dist(u.op),
                                       ctx.sources_of(u.op),
                                       tuple(ev(a) for a in u.args))
            else:
                raise TypeError(f"not a term: {u!r}")
            self._memo[u] = out
            return out

        result = ev(t)
        if ctx.over_approximated:
            self.over_approximated = True
        return result

    def operator_genset(self, op: str) -> GenSet:
        """Denotation of the generic application ``f(x1, ..., xn)``."""
        xs = tuple(state_var(f"x{i + 1}")
                   for i in range(self.doc.signature.arity(op)))
        return self.genset(Apply(op, tuple(Variable(x) for x in xs)))


def _measure(gs: GenSet) -> dict[Var, object]:
    out: dict[Var, object] = {}
    for p in gs:
        for x, v in weighting_of(p).entries:
            prev = out.get(x, Fraction(0))
            out[x] = v if not ext_leq(v, prev) else prev
    return out


def _widen(gs: GenSet, x: Var) -> GenSet:
    def promote(m: Multiplicity) -> Multiplicity:
        if m.get(x) == 0:
            return m
        return mult({**dict(m.entries), x: INF})

    return genset_normalize(
        ProbMultiplicity.from_pairs((promote(m), q) for m, q in p) for p in gs)


def lfp_denotations(doc: SpecDocument,
                    config: FixpointConfig = FixpointConfig(), *,
                    reactive_testing: bool = True) -> Denotations:
    """Compute the joint least fixed point of the term and rule clauses.

    Tracked entries are the canonical rules, their targets with all
    subterms, and the generic application of every operator.  Iteration
    starts from the zero denotation everywhere and stops when one more
    step leaves every entry equal; a per-entry, per-variable widening to
    ``INF`` fires once the variable's largest expected count has strictly
    grown ``widening_window`` times, keeping unbounded-recursion chains
    finite.  Exceeding ``max_iterations`` raises
    :class:`IterationLimitExceeded`.
    """
    key = (doc, config, reactive_testing)
    cached = _LFP_CACHE.get(key)
    if cached is not None:
        return cached

    rules = tuple(canonical_rule(r) for r in doc.rules)
    tracked: list[Term] = []
    seen: set[Term] = set()

    def track(t: Term) -> None:
        for sub in subterms(t):
            if sub not in seen:
                seen.add(sub)
                tracked.append(sub)

    for r in rules:
        track(r.target)
    for op, arity in doc.signature.operators:
        xs = tuple(Variable(state_var(f"x{i + 1}")) for i in range(arity))
        track(Apply(op, xs))

    tau: dict[Term, GenSet] = {t: D_ZERO for t in tracked}
    rho: dict[Rule, GenSet] = {r: D_ZERO for r in rules}
    growth: dict[tuple[object, Var], int] = {}
    measures: dict[object, dict[Var, object]] = {}
    forced: dict[object, set[Var]] = {}
    over_approx = False
    widened_vars: set[Var] = set()

    def apply_widening(key_: object, gs: GenSet) -> GenSet:
        prev = measures.get(key_, {})
        for x, v in _measure(gs).items():
            if not ext_leq(v, prev.get(x, Fraction(0))):
                count = growth.get((key_, x), 0) + 1
                growth[(key_, x)] = count
                if count >= config.widening_window:
                    forced.setdefault(key_, set()).add(x)
                    widened_vars.add(x)
        # A tripped entry stays widened in every later iteration; otherwise
        # recomputation from not-yet-widened inputs would undo the promotion
        # and the chain would resume growing.
        for x in forced.get(key_, ()):
            gs = _widen(gs, x)
        measures[key_] = _measure(gs)
        return gs

    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        ctx = _StepContext(doc, rules, tau, rho, reactive_testing)
        tau2 = {t: apply_widening(t, ctx.term_step(t)) for t in tracked}
        rho2 = {r: apply_widening(r, ctx.rule_step(r)) for r in rules}
        over_approx = over_approx or ctx.over_approximated
        if tau2 == tau and rho2 == rho:
            break
        if (all(genset_equiv(tau2[t], tau[t]) for t in tracked)
                and all(genset_equiv(rho2[r], rho[r]) for r in rules)):
            tau, rho = tau2, rho2
            break
        tau, rho = tau2, rho2
    else:
        raise IterationLimitExceeded(
            f"denotations still changing after {config.max_iterations} "
            f"iterations (widening window {config.widening_window})")

    by_doc_rule = dict(zip(doc.rules, (rho[r] for r in rules)))
    result = Denotations(doc, config, reactive_testing, tau, rho, by_doc_rule,
                         iterations, frozenset(widened_vars), over_approx)
    _LFP_CACHE[key] = result
    return result


_LFP_CACHE: dict[object, Denotations] = {}


def denote(doc: SpecDocument, t: Term, *,
           config: FixpointConfig = FixpointConfig(),
           reactive_testing: bool = True) -> GenSet:
    """Denotation of ``t`` under the document's least fixed point."""
    return lfp_denotations(doc, config,
                           reactive_testing=reactive_testing).genset(t)


def bound_distance(doc: SpecDocument, t: StateTerm, e: ProcessDistance, *,
                   config: FixpointConfig = FixpointConfig()) -> Fraction:
    """Upper bound on the distance between any two closed instances of
    ``t`` whose per-variable distances are below ``e``."""
    return da(denote(doc, t, config=config), e)
