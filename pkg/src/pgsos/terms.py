"""Terms, variables, substitutions and finite-support distributions.

Two syntactic categories are defined over a signature of ranked operators:

* *state terms* — variables and operator applications, describing processes;
* *distribution terms* — distribution variables, instantiable point masses
  ``delta(t)``, convex combinations ``q1*th1 + ... + qn*thn`` and operator
  applications lifted to distributions.

All probabilities are exact :class:`fractions.Fraction` values and equality
of terms and distributions is structural, so every comparison in the rest of
the package is tolerance-free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

from .errors import ArityMismatch, KindMismatch, UndeclaredSymbol

STATE = "state"
DIST = "dist"


def format_rational(q: Fraction) -> str:
    """Render a rational bit-exactly as ``p/q`` (or ``p`` for integers)."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Var:
    """A named variable of state or distribution kind.

    The two kinds live in disjoint namespaces: the same name never denotes
    both a state and a distribution variable within one document.
    """

    name: str
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in (STATE, DIST):
            raise ValueError(f"unknown variable kind {self.kind!r}")

    def __repr__(self) -> str:
        return f"Var({self.name!r}, {self.kind})"


def state_var(name: str) -> Var:
    return Var(name, STATE)


def dist_var(name: str) -> Var:
    return Var(name, DIST)


@dataclass(frozen=True)
class Signature:
    """Ranked operator alphabet plus the (finite) action alphabet."""

    operators: tuple[tuple[str, int], ...]
    actions: tuple[str, ...]

    def __post_init__(self) -> None:
        seen = set()
        for sym, arity in self.operators:
            if sym in seen:
                raise ValueError(f"operator {sym!r} declared twice")
            if arity < 0:
                raise ValueError(f"operator {sym!r} has negative arity")
            seen.add(sym)

    def arity(self, symbol: str) -> int:
        for sym, arity in self.operators:
            if sym == symbol:
                return arity
        raise UndeclaredSymbol(f"operator {symbol!r} is not declared")

    def has_operator(self, symbol: str) -> bool:
        return any(sym == symbol for sym, _ in self.operators)


# ---------------------------------------------------------------------------
# State terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Variable:
    var: Var

    def __post_init__(self) -> None:
        if self.var.kind != STATE:
            raise KindMismatch(f"{self.var.name} is not a state variable")


@dataclass(frozen=True)
class Apply:
    op: str
    args: tuple["StateTerm", ...] = ()


StateTerm = Union[Variable, Apply]


# ---------------------------------------------------------------------------
# Distribution terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DistVariable:
    var: Var

    def __post_init__(self) -> None:
        if self.var.kind != DIST:
            raise KindMismatch(f"{self.var.name} is not a distribution variable")


@dataclass(frozen=True)
class InstDirac:
    """``delta(t)`` — becomes the point mass at ``sigma(t)`` once closed."""

    term: StateTerm


@dataclass(frozen=True)
class ConvexSum:
    """``q1*th1 + ... + qn*thn`` with every ``q_i`` in (0,1] summing to 1.

    Use :func:`convex_sum` to build one; it flattens nested sums, merges
    syntactically equal summands and collapses the trivial single-summand
    case, giving a unique representation per distribution expression.
    """

    parts: tuple[tuple[Fraction, "DistTerm"], ...]

    def __post_init__(self) -> None:
        if len(self.parts) < 2:
            raise ValueError("use convex_sum() to construct convex combinations")
        total = Fraction(0)
        for q, _ in self.parts:
            if not 0 < q <= 1:
                raise ValueError(f"convex weight {q} outside (0,1]")
            total += q
        if total != 1:
            raise ValueError(f"convex weights sum to {total}, expected 1")


@dataclass(frozen=True)
class DistApply:
    op: str
    args: tuple["DistTerm", ...] = ()


DistTerm = Union[DistVariable, InstDirac, ConvexSum, DistApply]
Term = Union[StateTerm, DistTerm]


def convex_sum(parts: Iterable[tuple[Fraction, DistTerm]]) -> DistTerm:
    """Build a canonical convex combination of distribution terms."""
    flat: list[tuple[Fraction, DistTerm]] = []
    for q, theta in parts:
        q = Fraction(q)
        if isinstance(theta, ConvexSum):
            flat.extend((q * r, inner) for r, inner in theta.parts)
        else:
            flat.append((q, theta))
    merged: dict[DistTerm, Fraction] = {}
    for q, theta in flat:
        merged[theta] = merged.get(theta, Fraction(0)) + q
    items = sorted(merged.items(), key=lambda it: term_key(it[0]))
    if len(items) == 1:
        [(theta, q)] = items
        if q != 1:
            raise ValueError(f"convex weights sum to {q}, expected 1")
        return theta
    return ConvexSum(tuple((q, theta) for theta, q in items))


# ---------------------------------------------------------------------------
# Rendering (the concrete syntax shared with the CLI) and term ordering
# ---------------------------------------------------------------------------

def format_term(t: Term) -> str:
    if isinstance(t, Variable):
        return t.var.name
    if isinstance(t, Apply) or isinstance(t, DistApply):
        if not t.args:
            return t.op
        return f"{t.op}({', '.join(format_term(a) for a in t.args)})"
    if isinstance(t, DistVariable):
        return t.var.name
    if isinstance(t, InstDirac):
        return f"delta({format_term(t.term)})"
    if isinstance(t, ConvexSum):
        return " + ".join(f"{format_rational(q)}*{_format_factor(theta)}"
                          for q, theta in t.parts)
    raise TypeError(f"not a term: {t!r}")


def _format_factor(theta: DistTerm) -> str:
    text = format_term(theta)
    if isinstance(theta, ConvexSum):
        return f"({text})"
    return text


def term_key(t: Term) -> str:
    """A total order on terms: the rendered text (rendering is injective)."""
    return format_term(t)


# ---------------------------------------------------------------------------
# Variables and substitution
# ---------------------------------------------------------------------------

def free_vars(t: Term) -> frozenset[Var]:
    """The set of all state and distribution variables occurring in ``t``."""
    out: set[Var] = set()
    _collect_vars(t, out)
    return frozenset(out)


def _collect_vars(t: Term, out: set[Var]) -> None:
    if isinstance(t, (Variable, DistVariable)):
        out.add(t.var)
    elif isinstance(t, (Apply, DistApply)):
        for a in t.args:
            _collect_vars(a, out)
    elif isinstance(t, InstDirac):
        _collect_vars(t.term, out)
    elif isinstance(t, ConvexSum):
        for _, theta in t.parts:
            _collect_vars(theta, out)
    else:
        raise TypeError(f"not a term: {t!r}")


def is_closed(t: Term) -> bool:
    return not free_vars(t)


Substitution = Mapping[Var, Term]


def substitute(t: Term, sigma: Substitution) -> Term:
    """Apply ``sigma`` homomorphically; unknown variables map to themselves.

    Raises :class:`KindMismatch` if a state variable is sent to a
    distribution term or a distribution variable to a state term.
    """
    if isinstance(t, Variable):
        image = sigma.get(t.var)
        if image is None:
            return t
        if not isinstance(image, (Variable, Apply)):
            raise KindMismatch(
                f"state variable {t.var.name} mapped to distribution term")
        return image
    if isinstance(t, DistVariable):
        image = sigma.get(t.var)
        if image is None:
            return t
        if isinstance(image, (Variable, Apply)):
            raise KindMismatch(
                f"distribution variable {t.var.name} mapped to state term")
        return image
    if isinstance(t, Apply):
        return Apply(t.op, tuple(substitute(a, sigma) for a in t.args))
    if isinstance(t, DistApply):
        return DistApply(t.op, tuple(substitute(a, sigma) for a in t.args))
    if isinstance(t, InstDirac):
        return InstDirac(substitute(t.term, sigma))
    if isinstance(t, ConvexSum):
        return convex_sum((q, substitute(theta, sigma)) for q, theta in t.parts)
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Finite-support distributions over closed state terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteDistribution:
    """A probability distribution with finite support over closed state terms.

    Only the support is stored (all masses strictly positive) and masses sum
    to exactly 1; entries are kept sorted in canonical term order so equality
    and hashing are structural.
    """

    _items: tuple[tuple[StateTerm, Fraction], ...]

    def __post_init__(self) -> None:
        total = Fraction(0)
        for t, q in self._items:
            if q <= 0:
                raise ValueError(f"non-positive mass {q} on {format_term(t)}")
            total += q
        if total != 1:
            raise ValueError(f"masses sum to {total}, expected 1")

    @staticmethod
    def from_pairs(pairs: Iterable[tuple[StateTerm, Fraction]]) -> "FiniteDistribution":
        merged: dict[StateTerm, Fraction] = {}
        for t, q in pairs:
            merged[t] = merged.get(t, Fraction(0)) + Fraction(q)
        items = tuple(sorted(((t, q) for t, q in merged.items() if q != 0),
                             key=lambda it: term_key(it[0])))
        return FiniteDistribution(items)

    @staticmethod
    def dirac(t: StateTerm) -> "FiniteDistribution":
        return FiniteDistribution(((t, Fraction(1)),))

    def items(self) -> tuple[tuple[StateTerm, Fraction], ...]:
        return self._items

    def support(self) -> tuple[StateTerm, ...]:
        return tuple(t for t, _ in self._items)

    def mass(self, t: StateTerm) -> Fraction:
        for s, q in self._items:
            if s == t:
                return q
        return Fraction(0)

    def is_dirac(self) -> bool:
        return len(self._items) == 1

    def __iter__(self) -> Iterator[tuple[StateTerm, Fraction]]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __str__(self) -> str:
        return " + ".join(f"{format_rational(q)}*{format_term(t)}"
                          for t, q in self._items)


def eval_closed_dist(theta: DistTerm) -> FiniteDistribution:
    """Evaluate a closed distribution term to its finite distribution.

    ``delta(t)`` is the point mass at ``t``; convex combinations mix
    pointwise; an operator application distributes as the product lifting,
    placing mass ``prod_i pi_i(t_i)`` on ``f(t_1, ..., t_n)``.
    """
    if isinstance(theta, DistVariable):
        raise ValueError(f"distribution term is not closed: {theta.var.name}")
    if isinstance(theta, InstDirac):
        return FiniteDistribution.dirac(theta.term)
    if isinstance(theta, ConvexSum):
        pairs: list[tuple[StateTerm, Fraction]] = []
        for q, part in theta.parts:
            for t, r in eval_closed_dist(part):
                pairs.append((t, q * r))
        return FiniteDistribution.from_pairs(pairs)
    if isinstance(theta, DistApply):
        arg_dists = [eval_closed_dist(a) for a in theta.args]
        combos: list[tuple[tuple[StateTerm, ...], Fraction]] = [((), Fraction(1))]
        for dist in arg_dists:
            combos = [(prefix + (t,), q * r)
                      for prefix, q in combos for t, r in dist]
        return FiniteDistribution.from_pairs(
            (Apply(theta.op, prefix), q) for prefix, q in combos)
    raise TypeError(f"not a distribution term: {theta!r}")


def embed_distribution(pi: FiniteDistribution) -> DistTerm:
    """The distribution term denoting exactly ``pi``."""
    if pi.is_dirac():
        return InstDirac(pi.support()[0])
    return convex_sum((q, InstDirac(t)) for t, q in pi)


def check_arities(t: Term, sig: Signature) -> None:
    """Verify every operator in ``t`` is declared with the arity used."""
    if isinstance(t, (Apply, DistApply)):
        expected = sig.arity(t.op)
        if expected != len(t.args):
            raise ArityMismatch(
                f"{t.op} expects {expected} argument(s), got {len(t.args)}")
        for a in t.args:
            check_arities(a, sig)
    elif isinstance(t, InstDirac):
        check_arities(t.term, sig)
    elif isinstance(t, ConvexSum):
        for _, theta in t.parts:
            check_arities(theta, sig)
