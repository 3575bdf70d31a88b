"""Reader, validator and printer for rule-format process specifications.

The textual format declares a finite action alphabet, named action sets,
ranked operators, closed term abbreviations and inference rules::

    actions a, b;
    set B = {a};
    op par : 2;

    rule forall c in B:
      x1 --c--> m1
      x2 --c--> m2
      ---
      par(x1, x2) --c--> par(m1, m2)

    term aa0 = pref_a(pref_a(zero));

A rule lists positive premises ``xi --a--> mi`` and negative premises
``xi -/a->`` above a ``---`` separator; below it the conclusion names the
operator, its (distinct) source variables, the action and a distribution
term over the source variables and premise derivatives.  ``forall``
templates quantify the action label over a finite set expression built
from named sets, literals ``{a, b}``, the full alphabet ``ACT`` and the
operators ``|`` (union), ``&`` (intersection) and ``\\`` (difference).

Rationals are written ``9/10`` or as exact decimals ``0.9``.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

from .errors import (ArityMismatch, KindMismatch, RuleFormatError,
                     SpecSyntaxError, UndeclaredSymbol)
from .terms import (Apply, ConvexSum, DistApply, DistTerm, DistVariable,
                    InstDirac, Signature, StateTerm, Var, Variable,
                    convex_sum, dist_var, format_rational, format_term,
                    free_vars, state_var, substitute)


class EmptyExpansion(UserWarning):
    """A rule template ranged over an empty action set and produced no rules."""


# ---------------------------------------------------------------------------
# Rules and documents
# ---------------------------------------------------------------------------

class PosPremise(NamedTuple):
    source: Var
    action: str
    derivative: Var


class NegPremise(NamedTuple):
    source: Var
    action: str


@dataclass(frozen=True)
class Rule:
    """One concrete inference rule (templates already instantiated)."""

    op: str
    sources: tuple[Var, ...]
    pos: tuple[PosPremise, ...]
    neg: tuple[NegPremise, ...]
    action: str
    target: DistTerm

    def derivatives(self) -> tuple[Var, ...]:
        return tuple(p.derivative for p in self.pos)

    def tested_sources(self) -> frozenset[Var]:
        """Sources with at least one (positive or negative) premise."""
        return frozenset(p.source for p in self.pos) | frozenset(
            n.source for n in self.neg)


class Violation(NamedTuple):
    kind: str
    message: str


def validate_rule(rule: Rule, sig: Signature | None = None) -> list[Violation]:
    """Check the well-formedness constraints of a rule; an empty list
    means the rule is admissible.

    The constraints: derivative variables pairwise distinct, source
    variables pairwise distinct, premises only test source variables, and
    every free variable of the target is a source or a derivative.
    """
    out: list[Violation] = []
    if len(set(rule.sources)) != len(rule.sources):
        out.append(Violation("DuplicateSource",
                             f"rule for {rule.op}: source variables repeat"))
    derivs = rule.derivatives()
    if len(set(derivs)) != len(derivs):
        out.append(Violation("DuplicateDerivative",
                             f"rule for {rule.op}: derivative variables repeat"))
    sources = set(rule.sources)
    for prem_source in [p.source for p in rule.pos] + [n.source for n in rule.neg]:
        if prem_source not in sources:
            out.append(Violation(
                "ForeignPremiseSource",
                f"rule for {rule.op}: premise tests {prem_source.name}, "
                f"not a source variable"))
    allowed = sources | set(derivs)
    foreign = sorted(x.name for x in free_vars(rule.target) if x not in allowed)
    if foreign:
        out.append(Violation(
            "ForeignTargetVariable",
            f"rule for {rule.op}: target mentions {', '.join(foreign)}"))
    if sig is not None and sig.has_operator(rule.op):
        if sig.arity(rule.op) != len(rule.sources):
            out.append(Violation(
                "ArityMismatch",
                f"rule for {rule.op}: {len(rule.sources)} sources but arity "
                f"{sig.arity(rule.op)}"))
    return out


@dataclass(frozen=True)
class SpecDocument:
    """A validated specification: signature, expanded rules, named action
    sets and closed term abbreviations.  Hashable, so downstream analyses
    can memoise per-document results."""

    signature: Signature
    rules: tuple[Rule, ...]
    sets: tuple[tuple[str, tuple[str, ...]], ...] = ()
    abbreviations: tuple[tuple[str, StateTerm], ...] = ()
    source_digest: str = field(default="", compare=False)

    @cached_property
    def rules_by_op(self) -> dict[str, tuple[Rule, ...]]:
        grouped: dict[str, list[Rule]] = {}
        for r in self.rules:
            grouped.setdefault(r.op, []).append(r)
        return {op: tuple(rs) for op, rs in grouped.items()}

    def rules_for(self, op: str) -> tuple[Rule, ...]:
        return self.rules_by_op.get(op, ())

    @cached_property
    def set_map(self) -> dict[str, frozenset[str]]:
        return {name: frozenset(acts) for name, acts in self.sets}

    @cached_property
    def abbrev_map(self) -> dict[str, StateTerm]:
        return dict(self.abbreviations)

    @property
    def actions(self) -> tuple[str, ...]:
        return self.signature.actions


# ---------------------------------------------------------------------------
# Set expressions
# ---------------------------------------------------------------------------

class SetName(NamedTuple):
    name: str


class SetLiteral(NamedTuple):
    members: tuple[str, ...]


class SetAll(NamedTuple):
    pass


class SetOp(NamedTuple):
    op: str  # '|', '&', '\\'
    left: "SetExpr"
    right: "SetExpr"


SetExpr = Union[SetName, SetLiteral, SetAll, SetOp]


def eval_setexpr(expr: SetExpr, named: Mapping[str, frozenset[str]],
                 actions: Sequence[str]) -> frozenset[str]:
    if isinstance(expr, SetAll):
        return frozenset(actions)
    if isinstance(expr, SetName):
        if expr.name not in named:
            raise UndeclaredSymbol(f"action set {expr.name!r} is not declared")
        return named[expr.name]
    if isinstance(expr, SetLiteral):
        for a in expr.members:
            if a not in actions:
                raise UndeclaredSymbol(f"action {a!r} is not declared")
        return frozenset(expr.members)
    left = eval_setexpr(expr.left, named, actions)
    right = eval_setexpr(expr.right, named, actions)
    if expr.op == "|":
        return left | right
    if expr.op == "&":
        return left & right
    return left - right


# ---------------------------------------------------------------------------
# Raw (pre-expansion) documents
# ---------------------------------------------------------------------------

class RawPremise(NamedTuple):
    positive: bool
    source: str
    label: str
    derivative: str | None
    line: int


@dataclass(frozen=True)
class RawRule:
    op: str
    sources: tuple[Var, ...]
    premises: tuple[RawPremise, ...]
    label: str
    target: DistTerm
    template: tuple[str, SetExpr] | None
    line: int


@dataclass(frozen=True)
class RawDocument:
    """Parsed but not yet template-expanded specification."""

    signature: Signature
    raw_rules: tuple[RawRule, ...]
    sets: tuple[tuple[str, tuple[str, ...]], ...]
    abbreviations: tuple[tuple[str, StateTerm], ...]
    source_digest: str = field(default="", compare=False)


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

class Token(NamedTuple):
    kind: str
    text: str
    line: int
    col: int


_PUNCT = ";,(){}=:|&\\+*"


def _tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch == "-":
            dashes = 0
            while i < n and text[i] == "-":
                dashes += 1
                i += 1
                col += 1
            if dashes >= 3:
                toks.append(Token("sep", "-" * dashes, line, start_col))
            elif dashes == 2:
                if i < n and text[i] == ">":
                    i += 1
                    col += 1
                    toks.append(Token("arrow", "-->", line, start_col))
                else:
                    toks.append(Token("dash2", "--", line, start_col))
            else:
                if i < n and text[i] == "/":
                    i += 1
                    col += 1
                    toks.append(Token("negdash", "-/", line, start_col))
                elif i < n and text[i] == ">":
                    i += 1
                    col += 1
                    toks.append(Token("rarrow", "->", line, start_col))
                else:
                    raise SpecSyntaxError("stray '-'", line, start_col)
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            toks.append(Token("number", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Token("ident", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch == "/":
            toks.append(Token("slash", "/", line, start_col))
            i += 1
            col += 1
            continue
        if ch in _PUNCT:
            toks.append(Token(ch, ch, line, start_col))
            i += 1
            col += 1
            continue
        raise SpecSyntaxError(f"unexpected character {ch!r}", line, start_col)
    toks.append(Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

@dataclass
class _TermEnv:
    sig: Signature
    abbrevs: Mapping[str, StateTerm]
    state_vars: Mapping[str, Var]
    dist_vars: Mapping[str, Var]
    free_ok: bool


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None) -> SpecSyntaxError:
        tok = tok or self.peek()
        return SpecSyntaxError(message, tok.line, tok.col)

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.next()
        if tok.kind != kind:
            raise self.error(f"expected {what or kind}, found {tok.text!r}", tok)
        return tok

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "ident" and tok.text == word

    # -- document -----------------------------------------------------------

    def parse_document(self, digest: str) -> RawDocument:
        actions: list[str] = []
        ops: list[tuple[str, int]] = []
        sets: list[tuple[str, tuple[str, ...]]] = []
        set_map: dict[str, frozenset[str]] = {}
        abbrevs: list[tuple[str, StateTerm]] = []
        raw_rules: list[RawRule] = []
        saw_any = False
        while self.peek().kind != "eof":
            saw_any = True
            if self.at_keyword("actions"):
                self.next()
                actions.extend(self._ident_list())
                self.expect(";")
            elif self.at_keyword("set"):
                self.next()
                name = self.expect("ident", "set name").text
                if name in set_map:
                    raise self.error(f"action set {name!r} declared twice")
                self.expect("=")
                expr = self._setexpr()
                self.expect(";")
                members = eval_setexpr(expr, set_map, tuple(actions))
                set_map[name] = members
                sets.append((name, tuple(sorted(members))))
            elif self.at_keyword("op"):
                self.next()
                name = self.expect("ident", "operator name").text
                if any(o == name for o, _ in ops):
                    raise self.error(f"operator {name!r} declared twice")
                self.expect(":")
                arity_tok = self.expect("number", "arity")
                if not arity_tok.text.isdigit():
                    raise self.error("arity must be a natural number", arity_tok)
                self.expect(";")
                ops.append((name, int(arity_tok.text)))
            elif self.at_keyword("term"):
                self.next()
                name = self.expect("ident", "abbreviation name").text
                if name in dict(abbrevs) or any(o == name for o, _ in ops):
                    raise self.error(f"name {name!r} already in use")
                self.expect("=")
                sig = Signature(tuple(ops), tuple(actions))
                env = _TermEnv(sig, dict(abbrevs), {}, {}, free_ok=False)
                term = self._state_term(env)
                self.expect(";")
                if free_vars(term):
                    raise self.error(f"abbreviation {name!r} is not closed")
                abbrevs.append((name, term))
            elif self.at_keyword("rule"):
                sig = Signature(tuple(ops), tuple(actions))
                raw_rules.append(self._rule_block(sig, dict(abbrevs)))
            else:
                raise self.error(f"expected a declaration, found {self.peek().text!r}")
        if not saw_any:
            raise SpecSyntaxError("empty specification", 1, 1)
        sig = Signature(tuple(ops), tuple(actions))
        return RawDocument(sig, tuple(raw_rules), tuple(sets), tuple(abbrevs),
                           source_digest=digest)

    def _ident_list(self) -> list[str]:
        names = [self.expect("ident").text]
        while self.peek().kind == ",":
            self.next()
            names.append(self.expect("ident").text)
        return names

    # -- set expressions ----------------------------------------------------

    def _setexpr(self) -> SetExpr:
        left = self._set_primary()
        while self.peek().kind in ("|", "&", "\\"):
            op = self.next().kind
            right = self._set_primary()
            left = SetOp(op, left, right)
        return left

    def _set_primary(self) -> SetExpr:
        tok = self.peek()
        if tok.kind == "(":
            self.next()
            inner = self._setexpr()
            self.expect(")")
            return inner
        if tok.kind == "{":
            self.next()
            members: list[str] = []
            if self.peek().kind != "}":
                members = self._ident_list()
            self.expect("}")
            return SetLiteral(tuple(members))
        if tok.kind == "ident":
            self.next()
            if tok.text == "ACT":
                return SetAll()
            return SetName(tok.text)
        raise self.error("expected a set expression")

    # -- rules --------------------------------------------------------------

    def _rule_block(self, sig: Signature,
                    abbrevs: Mapping[str, StateTerm]) -> RawRule:
        rule_tok = self.expect("ident")  # 'rule'
        template: tuple[str, SetExpr] | None = None
        if self.at_keyword("forall"):
            self.next()
            var = self.expect("ident", "template action variable").text
            if not self.at_keyword("in"):
                raise self.error("expected 'in'")
            self.next()
            template = (var, self._setexpr())
        self.expect(":")

        premises: list[RawPremise] = []
        while self.peek().kind != "sep":
            tok = self.expect("ident", "a premise or '---'")
            shape = self.next()
            if shape.kind == "dash2":
                label = self.expect("ident", "action label").text
                self.expect("arrow", "'-->'")
                deriv = self.expect("ident", "derivative variable").text
                premises.append(RawPremise(True, tok.text, label, deriv, tok.line))
            elif shape.kind == "negdash":
                label = self.expect("ident", "action label").text
                self.expect("rarrow", "'->'")
                premises.append(RawPremise(False, tok.text, label, None, tok.line))
            else:
                raise self.error("expected '--' or '-/' in premise", shape)
            if self.peek().kind == ",":
                self.next()
        self.expect("sep")

        op_tok = self.expect("ident", "operator symbol")
        if not sig.has_operator(op_tok.text):
            raise UndeclaredSymbol(
                f"operator {op_tok.text!r} is not declared (line {op_tok.line})")
        source_names: list[str] = []
        if self.peek().kind == "(":
            self.next()
            if self.peek().kind != ")":
                source_names = self._ident_list()
            self.expect(")")
        arity = sig.arity(op_tok.text)
        if arity != len(source_names):
            raise ArityMismatch(
                f"{op_tok.text} expects {arity} source variable(s), got "
                f"{len(source_names)} (line {op_tok.line})")
        self.expect("dash2", "'--'")
        label = self.expect("ident", "action label").text
        self.expect("arrow", "'-->'")

        sources = tuple(state_var(s) for s in source_names)
        dist_vars = {p.derivative: dist_var(p.derivative)
                     for p in premises if p.positive and p.derivative}
        env = _TermEnv(sig, abbrevs,
                       {s: state_var(s) for s in source_names},
                       dist_vars, free_ok=True)
        target = self._dist_term(env)
        return RawRule(op_tok.text, sources, tuple(premises), label, target,
                       template, rule_tok.line)

    # -- terms --------------------------------------------------------------

    def _state_term(self, env: _TermEnv) -> StateTerm:
        tok = self.expect("ident", "a process term")
        if self.peek().kind == "(":
            return self._application(tok, env, state_context=True)
        return self._resolve_state_ident(tok, env)

    def _resolve_state_ident(self, tok: Token, env: _TermEnv) -> StateTerm:
        name = tok.text
        if name in env.state_vars:
            return Variable(env.state_vars[name])
        if env.sig.has_operator(name):
            if env.sig.arity(name) != 0:
                raise ArityMismatch(
                    f"{name} expects {env.sig.arity(name)} argument(s), got 0 "
                    f"(line {tok.line})")
            return Apply(name)
        if name in env.abbrevs:
            return env.abbrevs[name]
        if env.free_ok:
            return Variable(state_var(name))
        raise UndeclaredSymbol(f"unknown name {name!r} (line {tok.line})")

    def _application(self, tok: Token, env: _TermEnv,
                     state_context: bool) -> StateTerm | DistTerm:
        name = tok.text
        if not env.sig.has_operator(name):
            raise UndeclaredSymbol(f"operator {name!r} is not declared "
                                   f"(line {tok.line})")
        self.expect("(")
        args: list = []
        if self.peek().kind != ")":
            while True:
                args.append(self._state_term(env) if state_context
                            else self._dist_term(env))
                if self.peek().kind != ",":
                    break
                self.next()
        self.expect(")")
        arity = env.sig.arity(name)
        if arity != len(args):
            raise ArityMismatch(f"{name} expects {arity} argument(s), got "
                                f"{len(args)} (line {tok.line})")
        if state_context:
            return Apply(name, tuple(args))
        return DistApply(name, tuple(args))

    def _dist_term(self, env: _TermEnv) -> DistTerm:
        first = self._dist_summand(env)
        if first[0] is None:
            if self.peek().kind == "+":
                raise self.error("summands of a convex combination need "
                                 "explicit weights like 1/2*...")
            return first[1]
        parts = [first]
        while self.peek().kind == "+":
            self.next()
            parts.append(self._dist_summand(env))
        weighted = []
        for q, theta in parts:
            if q is None:
                raise self.error("summands of a convex combination need "
                                 "explicit weights like 1/2*...")
            weighted.append((q, theta))
        if len(weighted) == 1:
            [(q, theta)] = weighted
            if q != 1:
                raise self.error(f"convex weights sum to {q}, expected 1")
            return theta
        try:
            return convex_sum(weighted)
        except ValueError as exc:
            raise self.error(str(exc))

    def _dist_summand(self, env: _TermEnv) -> tuple[Fraction | None, DistTerm]:
        if self.peek().kind == "number":
            q = self._rational()
            self.expect("*", "'*' after a weight")
            return q, self._dist_factor(env)
        return None, self._dist_factor(env)

    def _dist_factor(self, env: _TermEnv) -> DistTerm:
        tok = self.peek()
        if tok.kind == "(":
            self.next()
            inner = self._dist_term(env)
            self.expect(")")
            return inner
        tok = self.expect("ident", "a distribution term")
        if tok.text == "delta":
            self.expect("(")
            inner = self._state_term(env)
            self.expect(")")
            return InstDirac(inner)
        if self.peek().kind == "(":
            result = self._application(tok, env, state_context=False)
            assert isinstance(result, DistApply)
            return result
        name = tok.text
        if name in env.dist_vars:
            return DistVariable(env.dist_vars[name])
        if name in env.state_vars:
            raise KindMismatch(
                f"{name} is a state variable; write delta({name}) for its "
                f"point mass (line {tok.line})")
        if env.sig.has_operator(name) and env.sig.arity(name) == 0:
            return DistApply(name)
        if env.free_ok:
            return DistVariable(dist_var(name))
        raise UndeclaredSymbol(f"unknown name {name!r} (line {tok.line})")

    def _rational(self) -> Fraction:
        tok = self.expect("number")
        if self.peek().kind == "slash":
            self.next()
            denom = self.expect("number", "denominator")
            if "." in tok.text or "." in denom.text:
                raise self.error("mixed decimal/fraction notation", denom)
            return Fraction(int(tok.text), int(denom.text))
        return Fraction(tok.text)


# ---------------------------------------------------------------------------
# Template expansion and the public entry points
# ---------------------------------------------------------------------------

def expand_templates(raw: RawDocument) -> SpecDocument:
    """Instantiate every ``forall`` template and validate all rules."""
    sig = raw.signature
    named = {name: frozenset(acts) for name, acts in raw.sets}
    rules: list[Rule] = []
    for rr in raw.raw_rules:
        if rr.template is None:
            rules.append(_instantiate(rr, None, None, sig))
            continue
        var, expr = rr.template
        members = eval_setexpr(expr, named, sig.actions)
        if not members:
            warnings.warn(
                f"rule template for {rr.op} (line {rr.line}) ranges over an "
                f"empty action set", EmptyExpansion, stacklevel=2)
        for action in sorted(members):
            rules.append(_instantiate(rr, var, action, sig))
    doc = SpecDocument(sig, tuple(rules), raw.sets, raw.abbreviations,
                       source_digest=raw.source_digest)
    problems: list[Violation] = []
    for rule in doc.rules:
        problems.extend(validate_rule(rule, sig))
    if problems:
        raise RuleFormatError(problems)
    return doc


def _instantiate(rr: RawRule, tvar: str | None, action: str | None,
                 sig: Signature) -> Rule:
    def resolve(label: str, line: int) -> str:
        if tvar is not None and label == tvar:
            assert action is not None
            return action
        if label not in sig.actions:
            raise UndeclaredSymbol(
                f"action {label!r} is not declared (line {line})")
        return label

    pos: list[PosPremise] = []
    neg: list[NegPremise] = []
    for p in rr.premises:
        if p.positive:
            assert p.derivative is not None
            pos.append(PosPremise(state_var(p.source),
                                  resolve(p.label, p.line),
                                  dist_var(p.derivative)))
        else:
            neg.append(NegPremise(state_var(p.source), resolve(p.label, p.line)))
    return Rule(rr.op, rr.sources, tuple(pos), tuple(neg),
                resolve(rr.label, rr.line), rr.target)


def parse_spec(data: bytes | str) -> SpecDocument:
    """Parse, expand and validate a complete specification."""
    return expand_templates(parse_spec_raw(data))


def parse_spec_raw(data: bytes | str) -> RawDocument:
    if isinstance(data, bytes):
        digest = hashlib.sha256(data).hexdigest()
        text = data.decode("utf-8")
    else:
        digest = hashlib.sha256(data.encode("utf-8")).hexdigest()
        text = data
    return _Parser(text).parse_document(digest)


def parse_term(text: str, doc: SpecDocument, *, free_ok: bool = True,
               kind: str = "state") -> StateTerm | DistTerm:
    """Parse a single term against a document's signature.

    Unknown identifiers become free variables when ``free_ok`` is set;
    otherwise they are reported as undeclared.
    """
    parser = _Parser(text)
    env = _TermEnv(doc.signature, doc.abbrev_map, {}, {}, free_ok=free_ok)
    term = (parser._state_term(env) if kind == "state"
            else parser._dist_term(env))
    trailing = parser.peek()
    if trailing.kind != "eof":
        raise parser.error(f"unexpected trailing input {trailing.text!r}",
                           trailing)
    return term


# ---------------------------------------------------------------------------
# Canonical printer
# ---------------------------------------------------------------------------

def print_rule(rule: Rule) -> str:
    lines = ["rule:"]
    for p in rule.pos:
        lines.append(f"  {p.source.name} --{p.action}--> {p.derivative.name}")
    for np in rule.neg:
        lines.append(f"  {np.source.name} -/{np.action}->")
    lines.append("  ---")
    head = rule.op
    if rule.sources:
        head += "(" + ", ".join(x.name for x in rule.sources) + ")"
    lines.append(f"  {head} --{rule.action}--> {format_term(rule.target)}")
    return "\n".join(lines)


def print_spec(doc: SpecDocument) -> str:
    """Render a document in the concrete syntax so that parsing the output
    reproduces an equal document (templates are already expanded)."""
    chunks: list[str] = []
    if doc.signature.actions:
        chunks.append("actions " + ", ".join(doc.signature.actions) + ";")
    for name, acts in doc.sets:
        chunks.append(f"set {name} = {{{', '.join(acts)}}};")
    for op, arity in doc.signature.operators:
        chunks.append(f"op {op} : {arity};")
    parts = ["\n".join(chunks)] if chunks else []
    for rule in doc.rules:
        parts.append(print_rule(rule))
    tail = [f"term {name} = {format_term(term)};"
            for name, term in doc.abbreviations]
    if tail:
        parts.append("\n".join(tail))
    return "\n\n".join(parts) + "\n"
