"""Knowledge bases and their consequence relations.

Classical entailment is decided by brute-force model enumeration; defaults
are forward-chained with a consistency guard; probabilistic support comes
from Bayes' rule and an explicit threshold.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .semantics import (DEFAULT_BOUND, DEFAULT_BUDGET_CAP, BudgetExceeded,
                        find_countermodel)
from .syntax import (And, Atom, Const, Eq, Exists, Formula, FormulaError,
                     Implies, Not, Or, Term, Var, constants, free_variables,
                     parse_formula, render, substitute_vars)

DEFAULT_EPSILON = 0.01
DEFAULT_CLOSURE_CAP = 100_000


class KnowledgeBaseError(ValueError):
    pass


class InconsistentKnowledgeBase(KnowledgeBaseError):
    def __init__(self, witness: Sequence[str]):
        self.witness = tuple(witness)
        super().__init__("knowledge base is classically inconsistent; "
                         "unsatisfiable core: " + "; ".join(self.witness))


class ProbabilityError(ValueError):
    pass


class UndefinedPosterior(ProbabilityError):
    pass


class InconsistentProbabilities(ProbabilityError):
    pass


# ---------------------------------------------------------------------------
# Knowledge base
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StrictRule:
    antecedent: Formula
    consequent: Formula

    @property
    def formula(self) -> Formula:
        return Implies(self.antecedent, self.consequent)

    def __str__(self) -> str:
        return f"{render(self.antecedent)} -> {render(self.consequent)}"


@dataclass(frozen=True)
class DefeasibleConditional:
    antecedent: Formula
    consequent: Formula
    probability: float | None = None

    def __post_init__(self):
        if self.probability is not None and not 0.0 <= self.probability <= 1.0:
            raise KnowledgeBaseError(f"default probability {self.probability} not in [0, 1]")
        slots = free_variables(self.antecedent) | free_variables(self.consequent)
        if len(slots) > 1:
            raise KnowledgeBaseError(
                f"default {self} has more than one free slot: {sorted(slots)}")

    @property
    def slot(self) -> str | None:
        slots = free_variables(self.antecedent) | free_variables(self.consequent)
        return next(iter(slots), None)

    def __str__(self) -> str:
        text = f"{render(self.antecedent)} ~> {render(self.consequent)}"
        if self.probability is not None:
            text += f" [{self.probability:g}]"
        return text


@dataclass(frozen=True)
class ThresholdConfig:
    """Infer when a conditional probability is at least ``1 - epsilon``."""

    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie strictly between 0 and 1, got {self.epsilon}")

    @property
    def threshold(self) -> float:
        return 1.0 - self.epsilon


@dataclass(frozen=True)
class KnowledgeBase:
    """Facts, exceptionless rules, defaults and predicate-pair statistics.

    Free variables in rules are read universally. Construction fails with
    InconsistentKnowledgeBase when facts and rules have no model within
    ``bound``.
    """

    facts: tuple[Formula, ...] = ()
    strict_rules: tuple[StrictRule, ...] = ()
    defaults: tuple[DefeasibleConditional, ...] = ()
    stats: Mapping[tuple[str, str], float] = field(default_factory=dict)
    bound: int = field(default=DEFAULT_BOUND, compare=False)
    cap: int = field(default=DEFAULT_BUDGET_CAP, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "facts", tuple(dict.fromkeys(self.facts)))
        object.__setattr__(self, "strict_rules", tuple(self.strict_rules))
        object.__setattr__(self, "defaults", tuple(self.defaults))
        object.__setattr__(self, "stats", dict(self.stats))
        for f in self.facts:
            if free_variables(f):
                raise KnowledgeBaseError(f"fact {render(f)} is not closed")
        for key, p in self.stats.items():
            if not 0.0 <= p <= 1.0:
                raise KnowledgeBaseError(f"statistic {key[0]}|{key[1]} = {p} not in [0, 1]")
        members = self.theory()
        if members and find_countermodel(members, None, self.bound, self.cap) is None:
            raise InconsistentKnowledgeBase(_unsat_core(self, members))

    def __hash__(self):
        return hash((self.facts, self.strict_rules, self.defaults,
                     tuple(sorted(self.stats.items()))))

    def theory(self, extra: Iterable[Formula] = ()) -> list[Formula]:
        """Facts, rules as universally read implications, then ``extra``."""
        return [*self.facts, *(r.formula for r in self.strict_rules), *extra]

    def with_facts(self, *facts: Formula) -> "KnowledgeBase":
        return KnowledgeBase(self.facts + tuple(facts), self.strict_rules,
                             self.defaults, self.stats, self.bound, self.cap)

    def with_rules(self, *rules: StrictRule) -> "KnowledgeBase":
        return KnowledgeBase(self.facts, self.strict_rules + tuple(rules),
                             self.defaults, self.stats, self.bound, self.cap)

    def constants(self) -> set[str]:
        out: set[str] = set()
        for f in self.theory():
            out |= constants(f)
        for d in self.defaults:
            out |= constants(d.antecedent) | constants(d.consequent)
        return out


def _unsat_core(kb: KnowledgeBase, members: list[Formula]) -> list[str]:
    core = list(members)
    i = 0
    while i < len(core):
        trial = core[:i] + core[i + 1:]
        if trial and find_countermodel(trial, None, kb.bound, kb.cap) is None:
            core = trial
        else:
            i += 1
    return [render(f) for f in core]


class KBSyntaxError(KnowledgeBaseError):
    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


_DEFAULT_PROB = re.compile(r"^(?P<body>.*?)\s*\[\s*(?P<p>[0-9.eE+-]+)\s*\]$", re.S)
_STAT = re.compile(r"^(?P<x>[a-z0-9][A-Za-z0-9_]*)\s*\|\s*(?P<a>[a-z0-9][A-Za-z0-9_]*)"
                   r"\s*=\s*(?P<p>[0-9.eE+-]+)$")


def parse_kb(text: str, bound: int = DEFAULT_BOUND,
             cap: int = DEFAULT_BUDGET_CAP) -> KnowledgeBase:
    """Read the line-oriented KB format::

        fact <formula>.
        rule <formula> -> <formula>.
        default <formula> ~> <formula> [<prob>].
        stat <pred>|<pred> = <prob>.
    """
    facts, rules, defaults, stats = [], [], [], {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.endswith("."):
            raise KBSyntaxError(lineno, "statement must end with '.'")
        keyword, _, body = line[:-1].partition(" ")
        body = body.strip()
        try:
            if keyword == "fact":
                facts.append(parse_formula(body))
            elif keyword == "rule":
                f = parse_formula(body, allow_free=True)
                if not isinstance(f, Implies):
                    raise KBSyntaxError(lineno, "rule needs the form <formula> -> <formula>")
                rules.append(StrictRule(f.left, f.right))
            elif keyword == "default":
                prob = None
                m = _DEFAULT_PROB.match(body)
                if m:
                    body, prob = m.group("body"), float(m.group("p"))
                left, sep, right = body.partition("~>")
                if not sep:
                    raise KBSyntaxError(lineno, "default needs the form <formula> ~> <formula>")
                defaults.append(DefeasibleConditional(
                    parse_formula(left, allow_free=True),
                    parse_formula(right, allow_free=True), prob))
            elif keyword == "stat":
                m = _STAT.match(body)
                if not m:
                    raise KBSyntaxError(lineno, "stat needs the form <pred>|<pred> = <prob>")
                stats[(m.group("x"), m.group("a"))] = float(m.group("p"))
            else:
                raise KBSyntaxError(lineno, f"unknown statement {keyword!r}")
        except (FormulaError, ValueError) as exc:
            if isinstance(exc, KBSyntaxError):
                raise
            raise KBSyntaxError(lineno, str(exc)) from exc
    return KnowledgeBase(tuple(facts), tuple(rules), tuple(defaults), stats, bound, cap)


# ---------------------------------------------------------------------------
# Classical entailment
# ---------------------------------------------------------------------------


def classical_entails(kb: KnowledgeBase, goal: Formula, extra: Iterable[Formula] = (),
                      *, bound: int | None = None, cap: int | None = None) -> bool:
    """True iff ``goal`` holds in every model of the KB's facts and rules
    (plus ``extra``). Complete for propositional input, bounded otherwise."""
    counter = find_countermodel(kb.theory(extra), goal,
                                kb.bound if bound is None else bound,
                                kb.cap if cap is None else cap)
    return counter is None


# ---------------------------------------------------------------------------
# Defeasible entailment
# ---------------------------------------------------------------------------


class DefeasibleStatus(enum.Enum):
    HOLDS_SYNTACTIC = "holds-syntactic"
    HOLDS_STATISTICAL = "holds-statistical"
    FAILS = "fails"


@dataclass(frozen=True)
class DefeasibleResult:
    status: DefeasibleStatus
    provenance: str = ""

    @property
    def holds(self) -> bool:
        return self.status is not DefeasibleStatus.FAILS


def match_pattern(pattern: Formula, target: Formula,
                  binding: dict[str, Term] | None = None) -> dict[str, Term] | None:
    """Bind the free variables of ``pattern`` so that it equals ``target``."""
    binding = dict(binding or {})

    def term(p: Term, t: Term, shadow: frozenset[str]) -> bool:
        if isinstance(p, Var) and p.name not in shadow:
            if isinstance(t, Var):
                return False
            prior = binding.setdefault(p.name, t)
            return prior == t
        return p == t

    def walk(p: Formula, t: Formula, shadow: frozenset[str]) -> bool:
        if type(p) is not type(t):
            return False
        if isinstance(p, Atom):
            return (p.pred == t.pred and p.arity == t.arity
                    and all(term(a, b, shadow) for a, b in zip(p.args, t.args)))
        if isinstance(p, Eq):
            return term(p.left, t.left, shadow) and term(p.right, t.right, shadow)
        if isinstance(p, Not):
            return walk(p.body, t.body, shadow)
        if isinstance(p, Exists):
            return p.var == t.var and walk(p.body, t.body, shadow | {p.var.name})
        if isinstance(p, Implies):
            return walk(p.left, t.left, shadow) and walk(p.right, t.right, shadow)
        return len(p.items) == len(t.items) and all(
            walk(a, b, shadow) for a, b in zip(p.items, t.items))

    return binding if walk(pattern, target, frozenset()) else None


def threshold_infer(conditional_probability: float, cfg: ThresholdConfig = ThresholdConfig()) -> bool:
    """Infer iff the probability is within epsilon of 1."""
    if not 0.0 <= conditional_probability <= 1.0:
        raise ProbabilityError(f"probability {conditional_probability} not in [0, 1]")
    return conditional_probability >= cfg.threshold


def statistic_for(kb: KnowledgeBase, a: Formula, x: Formula) -> tuple[tuple[str, str], float] | None:
    """Look up P(x-predicate | a-predicate) when both are atoms over the same terms."""
    if isinstance(a, Atom) and isinstance(x, Atom) and a.args == x.args:
        key = (x.pred, a.pred)
        if key in kb.stats:
            return key, kb.stats[key]
    return None


def defeasible_entails(kb: KnowledgeBase, a: Formula, x: Formula,
                       cfg: ThresholdConfig = ThresholdConfig()) -> DefeasibleResult:
    """Whether ``a |~ x`` is licensed, and by what.

    A listed default wins over statistics; a statistic licenses only when it
    clears the threshold.
    """
    for i, d in enumerate(kb.defaults, 1):
        binding = match_pattern(d.antecedent, a)
        if binding is not None and match_pattern(d.consequent, x, binding) is not None:
            return DefeasibleResult(DefeasibleStatus.HOLDS_SYNTACTIC, f"default {i}: {d}")
    stat = statistic_for(kb, a, x)
    if stat is not None:
        (xp, ap), p = stat
        if threshold_infer(p, cfg):
            return DefeasibleResult(
                DefeasibleStatus.HOLDS_STATISTICAL,
                f"stat {xp}|{ap} = {p:g} >= {cfg.threshold:g}")
        return DefeasibleResult(DefeasibleStatus.FAILS,
                                f"stat {xp}|{ap} = {p:g} < {cfg.threshold:g}")
    return DefeasibleResult(DefeasibleStatus.FAILS, "no default or statistic applies")


@dataclass(frozen=True)
class AuditEntry:
    default_index: int
    antecedent: Formula
    consequent: Formula
    fired: bool
    reason: str

    def __str__(self) -> str:
        verb = "fired" if self.fired else "blocked"
        return (f"default {self.default_index} {verb}: {render(self.antecedent)} ~> "
                f"{render(self.consequent)} ({self.reason})")


@dataclass(frozen=True)
class Derivation:
    derived: frozenset[Formula]
    audit: tuple[AuditEntry, ...]
    passes: int
    """Number of passes over the defaults that added at least one consequent."""
    proven: frozenset[Formula] = frozenset()

    def replay(self) -> frozenset[Formula]:
        """Recompute ``derived`` from the audit trail alone."""
        return frozenset(e.consequent for e in self.audit if e.fired) - self.proven


def _instances(d: DefeasibleConditional, names: Sequence[str]):
    slot = d.slot
    if slot is None:
        yield d.antecedent, d.consequent
        return
    for name in names:
        b = {slot: Const(name)}
        yield substitute_vars(d.antecedent, b), substitute_vars(d.consequent, b)


def forward_chain(kb: KnowledgeBase, proven: Iterable[Formula]) -> Derivation:
    """Fire defaults in list order until nothing new is added.

    A default instance fires when its antecedent follows from the KB, the
    proven set and what has been derived so far, and the negation of its
    consequent does not. Every decision is logged in the audit trail.
    """
    proven = tuple(dict.fromkeys(proven))
    derived: list[Formula] = []
    audit: list[AuditEntry] = []
    decided: set[tuple[int, Formula]] = set()
    passes = 0
    while True:
        added = False
        for i, d in enumerate(kb.defaults, 1):
            names = sorted(kb.constants().union(*(constants(f) for f in (*proven, *derived))))
            for ante, cons in _instances(d, names):
                if (i, cons) in decided:
                    continue
                known = (*proven, *derived)
                if ante not in known and not classical_entails(kb, ante, known):
                    continue
                decided.add((i, cons))
                if classical_entails(kb, Not(cons), known):
                    audit.append(AuditEntry(i, ante, cons, False,
                                            f"~{render(cons)} is classically entailed"))
                    continue
                audit.append(AuditEntry(i, ante, cons, True, "antecedent proven, no exception"))
                if cons not in derived and cons not in proven:
                    derived.append(cons)
                    added = True
        if not added:
            break
        passes += 1
    return Derivation(frozenset(derived), tuple(audit), passes, frozenset(proven))


def defeasible_infer(kb: KnowledgeBase, proven: Iterable[Formula]) -> frozenset[Formula]:
    """Consequents added by forward-chaining the KB's defaults."""
    return forward_chain(kb, proven).derived


# ---------------------------------------------------------------------------
# Probability
# ---------------------------------------------------------------------------

_PROB_TOL = 1e-12


def bayes(prior: float, likelihood: float, marginal: float) -> float:
    """Posterior P(x|A) = P(A|x) * P(x) / P(A)."""
    for name, v in (("prior", prior), ("likelihood", likelihood), ("marginal", marginal)):
        if not 0.0 <= v <= 1.0:
            raise ProbabilityError(f"{name} {v} not in [0, 1]")
    if marginal == 0.0:
        raise UndefinedPosterior("posterior undefined when P(A) = 0")
    joint = likelihood * prior
    if joint > marginal + _PROB_TOL:
        raise InconsistentProbabilities(
            f"P(A|x) * P(x) = {joint:g} exceeds P(A) = {marginal:g}")
    return min(joint / marginal, 1.0)


# ---------------------------------------------------------------------------
# Trivial closure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosureResult:
    formulas: frozenset[Formula]
    sizes: tuple[int, ...]
    """Cardinality after each depth, starting with depth 0."""

    @property
    def cardinality(self) -> int:
        return len(self.formulas)

    def sorted(self) -> list[Formula]:
        return sorted(self.formulas, key=lambda f: (len(render(f)), render(f)))


def permitted_closure(facts: Iterable[Formula], vocabulary: Iterable[Formula], depth: int,
                      cap: int = DEFAULT_CLOSURE_CAP) -> ClosureResult:
    """Grow ``facts`` by idempotent conjunction ``f & f`` and disjunction
    introduction ``f | B`` for every vocabulary atom ``B``, ``depth`` times."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    current = set(facts)
    vocab = list(dict.fromkeys(vocabulary))
    sizes = [len(current)]
    if len(current) > cap:
        raise BudgetExceeded(len(current), cap, "formulas")
    for _ in range(depth):
        nxt = set(current)
        for f in current:
            for g in (And((f, f)), *(Or((f, b)) for b in vocab)):
                nxt.add(g)
                if len(nxt) > cap:
                    raise BudgetExceeded(len(nxt), cap, "formulas")
        current = nxt
        sizes.append(len(current))
    return ClosureResult(frozenset(current), tuple(sizes))
