"""Deontic layer over belief states.

Covers the 18 bridge-principle forms (scope C/B/W, modality o/p/r,
polarity +/-), the transparency-gated verdict for valid schemas, the
NonMR+/NonMR- verdicts for defeasible entailment, and an external rule
system that maps tagged evidence to inference actions.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .entailment import (KnowledgeBase, ThresholdConfig, classical_entails,
                         defeasible_entails, match_pattern)
from .matching import MatchResult, ValidityReport
from .syntax import (Atom, Formula, FormulaError, Not, parse_formula, render,
                     substitute_vars)


class Attitude(enum.Enum):
    BELIEVE = "believe"
    DISBELIEVE = "disbelieve"
    SUSPEND = "suspend"


@dataclass(frozen=True)
class BeliefState:
    """Attitude per closed formula; anything unlisted is suspended."""

    attitudes: Mapping[Formula, Attitude] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "attitudes", dict(self.attitudes))

    def __hash__(self):
        return hash(frozenset(self.attitudes.items()))

    def attitude(self, f: Formula) -> Attitude:
        return self.attitudes.get(f, Attitude.SUSPEND)

    def believes(self, f: Formula) -> bool:
        return self.attitude(f) is Attitude.BELIEVE

    def disbelieves(self, f: Formula) -> bool:
        return self.attitude(f) is Attitude.DISBELIEVE

    @classmethod
    def of(cls, believe: Iterable[Formula] = (), disbelieve: Iterable[Formula] = (),
           suspend: Iterable[Formula] = ()) -> "BeliefState":
        pairs = [(f, Attitude.BELIEVE) for f in believe]
        pairs += [(f, Attitude.DISBELIEVE) for f in disbelieve]
        pairs += [(f, Attitude.SUSPEND) for f in suspend]
        return cls(_unique_attitudes(pairs))


class BeliefStateError(ValueError):
    pass


def _unique_attitudes(pairs: Iterable[tuple[Formula, Attitude]]) -> dict[Formula, Attitude]:
    out: dict[Formula, Attitude] = {}
    for f, att in pairs:
        if out.setdefault(f, att) is not att:
            raise BeliefStateError(
                f"{render(f)} assigned both {out[f].value} and {att.value}")
    return out


def parse_beliefs(text: str) -> BeliefState:
    """Lines ``believe <formula>.``, ``disbelieve <formula>.``, ``suspend <formula>.``"""
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, _, body = line.partition(" ")
        if not body.rstrip().endswith("."):
            raise BeliefStateError(f"line {lineno}: statement must end with '.'")
        try:
            att = Attitude(word)
        except ValueError:
            raise BeliefStateError(f"line {lineno}: unknown attitude {word!r}") from None
        try:
            pairs.append((parse_formula(body.rstrip()[:-1]), att))
        except FormulaError as exc:
            raise BeliefStateError(f"line {lineno}: {exc}") from exc
    return BeliefState(_unique_attitudes(pairs))


# ---------------------------------------------------------------------------
# Bridge principles
# ---------------------------------------------------------------------------


class Scope(enum.Enum):
    C = "C"  # operator on the consequent only
    B = "B"  # operator on antecedent and consequent
    W = "W"  # operator over the whole conditional


class Modality(enum.Enum):
    O = "o"
    P = "p"
    R = "r"


class Polarity(enum.Enum):
    POS = "+"
    NEG = "-"


@dataclass(frozen=True)
class BridgeForm:
    scope: Scope
    modality: Modality
    polarity: Polarity

    @property
    def name(self) -> str:
        return f"{self.scope.value}{self.modality.value}{self.polarity.value}"

    def __str__(self) -> str:
        return self.name

    @classmethod
    def parse(cls, name: str) -> "BridgeForm":
        m = re.fullmatch(r"([CBW])([opr])([+\-−])", name.strip())
        if not m:
            raise ValueError(f"not a bridge form: {name!r}")
        pol = "-" if m.group(3) == "−" else m.group(3)
        return cls(Scope(m.group(1)), Modality(m.group(2)), Polarity(pol))


def enumerate_bridge_forms() -> list[BridgeForm]:
    """All 18 forms, ordered C<B<W, o<p<r, +<-."""
    return [BridgeForm(s, m, p) for s, m, p in itertools.product(Scope, Modality, Polarity)]


class Compliance(enum.Enum):
    SATISFIED = "Satisfied"
    VIOLATED = "Violated"
    NOT_APPLICABLE = "NotApplicable"
    PERMISSION_GRANTED = "PermissionGranted"
    REASON_GENERATED = "ReasonGenerated"


@dataclass(frozen=True)
class ComplianceReport:
    form: BridgeForm
    status: Compliance
    witness: tuple[tuple[Formula, Attitude], ...]

    def describe_witness(self) -> str:
        return ", ".join(f"{render(f)}:{a.value}" for f, a in self.witness)


def polarity_met(att: Attitude, polarity: Polarity) -> bool:
    """``+`` needs belief; ``-`` only needs the absence of disbelief."""
    if polarity is Polarity.POS:
        return att is Attitude.BELIEVE
    return att is not Attitude.DISBELIEVE


def evaluate_bridge(form: BridgeForm, premises: Sequence[Formula], conclusion: Formula,
                    bs: BeliefState, obligations: Iterable[Formula] = (),
                    defeaters: Iterable[Formula] = ()) -> ComplianceReport:
    obligations = set(obligations)
    defeated = conclusion in set(defeaters)
    witness = tuple((f, bs.attitude(f)) for f in (*premises, conclusion))
    met = polarity_met(bs.attitude(conclusion), form.polarity)

    def report(status: Compliance) -> ComplianceReport:
        return ComplianceReport(form, status, witness)

    if form.scope is Scope.W:
        triggered = all(bs.believes(p) for p in premises)
        if form.modality is Modality.O:
            return report(Compliance.VIOLATED if triggered and not met else Compliance.SATISFIED)
        if form.modality is Modality.P:
            return report(Compliance.PERMISSION_GRANTED)
        return report(Compliance.NOT_APPLICABLE if defeated else Compliance.REASON_GENERATED)

    if form.scope is Scope.C:
        triggered = all(bs.believes(p) for p in premises)
    else:
        # obligations on the premises are supplied by the caller
        triggered = all(p in obligations for p in premises)
    if not triggered:
        return report(Compliance.NOT_APPLICABLE)
    if form.modality is Modality.O:
        return report(Compliance.SATISFIED if met else Compliance.VIOLATED)
    if form.modality is Modality.P:
        return report(Compliance.PERMISSION_GRANTED)
    return report(Compliance.NOT_APPLICABLE if defeated else Compliance.REASON_GENERATED)


def bridge_table(premises: Sequence[Formula], conclusion: Formula, bs: BeliefState,
                 obligations: Iterable[Formula] = (),
                 defeaters: Iterable[Formula] = ()) -> list[ComplianceReport]:
    obligations, defeaters = tuple(obligations), tuple(defeaters)
    return [evaluate_bridge(f, premises, conclusion, bs, obligations, defeaters)
            for f in enumerate_bridge_forms()]


def all_belief_states(formulas: Sequence[Formula]) -> Iterator[BeliefState]:
    """Every assignment of the three attitudes to ``formulas`` (3**n states)."""
    for atts in itertools.product(Attitude, repeat=len(formulas)):
        yield BeliefState(dict(zip(formulas, atts)))


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


class VerdictKind(enum.Enum):
    OBLIGED_TO_BELIEVE = "ObligedToBelieve"
    PROHIBITED_COMBINATION = "ProhibitedCombination"
    INFER = "Infer"
    PROHIBIT = "Prohibit"
    NO_VERDICT = "NoVerdict"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    formula: Formula | None = None
    antecedent: Formula | None = None
    rule: str = ""
    conditions: tuple[str, ...] = ()
    active: bool = False
    """The conditional norm is triggered by the current belief state."""
    breached: bool = False
    """The current belief state already violates the norm."""

    @property
    def is_obligation(self) -> bool:
        return self.kind is VerdictKind.OBLIGED_TO_BELIEVE

    def __str__(self) -> str:
        if self.kind is VerdictKind.NO_VERDICT:
            return "NoVerdict"
        if self.kind is VerdictKind.PROHIBITED_COMBINATION:
            return (f"ProhibitedCombination(believe {render(self.antecedent)} "
                    f"without {render(self.formula)})")
        return f"{self.kind.value}({render(self.formula)})"


def extended_bridge_verdict(validity: ValidityReport, apprehension: MatchResult,
                            premises: Sequence[Formula], conclusion: Formula,
                            bs: BeliefState) -> Verdict:
    """Obligation to believe the conclusion of a transparent instance of a
    valid schema whose premises are all believed."""
    rule = "extended-bridge"
    if not validity.valid:
        return Verdict(VerdictKind.NO_VERDICT, rule=rule,
                       conditions=(f"schema not valid: {validity}",))
    if not apprehension.matched:
        return Verdict(VerdictKind.NO_VERDICT, rule=rule,
                       conditions=(f"not transparent: {apprehension.failure}",))
    unbelieved = [render(p) for p in premises if not bs.believes(p)]
    if unbelieved:
        return Verdict(VerdictKind.NO_VERDICT, rule=rule,
                       conditions=("premises not all believed: " + ", ".join(unbelieved),))
    conds = (f"schema {validity}", f"apprehended via {apprehension.substitution}",
             "all premises believed")
    return Verdict(VerdictKind.OBLIGED_TO_BELIEVE, conclusion, rule=rule, conditions=conds,
                   active=True, breached=not bs.believes(conclusion))


def nonmr_verdict(kb: KnowledgeBase, a: Formula, x: Formula, bs: BeliefState,
                  available_info: Iterable[Formula] = (), variant: str = "+",
                  cfg: ThresholdConfig = ThresholdConfig()) -> Verdict:
    """NonMR+ (obliged to believe x when believing a) or NonMR- (prohibited
    from believing a without x), when ``a |~ x`` is licensed and the
    available information, read with the KB, does not entail ``~x``."""
    if variant not in ("+", "-"):
        raise ValueError(f"variant must be '+' or '-', got {variant!r}")
    rule = f"NonMR{variant}"
    info = tuple(available_info)
    licence = defeasible_entails(kb, a, x, cfg)
    if not licence.holds:
        return Verdict(VerdictKind.NO_VERDICT, rule=rule,
                       conditions=(f"{render(a)} |~ {render(x)} not licensed: {licence.provenance}",))
    if not licence.provenance:
        return Verdict(VerdictKind.NO_VERDICT, rule=rule,
                       conditions=("entailment is not transparent: no named default or statistic",))
    if classical_entails(kb, Not(x), info):
        shown = ", ".join(render(f) for f in info) or "knowledge base"
        return Verdict(VerdictKind.NO_VERDICT, rule=rule,
                       conditions=(f"available information ({shown}) entails ~{render(x)}",))
    conds = (f"{render(a)} |~ {render(x)} by {licence.provenance}",
             f"no available information entails ~{render(x)}")
    believes_a = bs.believes(a)
    if variant == "+":
        return Verdict(VerdictKind.OBLIGED_TO_BELIEVE, x, a, rule, conds,
                       active=believes_a, breached=believes_a and not bs.believes(x))
    return Verdict(VerdictKind.PROHIBITED_COMBINATION, x, a, rule, conds,
                   active=believes_a, breached=believes_a and not bs.believes(x))


def candidate_conclusions(kb: KnowledgeBase, a: Formula) -> list[Formula]:
    """Conclusions some default or statistic could license from ``a``."""
    out: list[Formula] = []
    for d in kb.defaults:
        binding = match_pattern(d.antecedent, a)
        if binding is not None:
            out.append(substitute_vars(d.consequent, binding))
    if isinstance(a, Atom):
        for (xp, ap) in sorted(kb.stats):
            if ap == a.pred:
                out.append(Atom(xp, a.args))
    return list(dict.fromkeys(out))


# ---------------------------------------------------------------------------
# Rule system over tagged evidence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Evidence:
    tag: str
    args: tuple[Formula, ...]

    def __str__(self) -> str:
        return f"{self.tag}({', '.join(render(a) for a in self.args)})"


class Action(enum.Enum):
    INFER = "infer"
    OBLIGE = "oblige"
    PROHIBIT = "prohibit"


_ACTION_KIND = {Action.INFER: VerdictKind.INFER,
                Action.OBLIGE: VerdictKind.OBLIGED_TO_BELIEVE,
                Action.PROHIBIT: VerdictKind.PROHIBIT}


@dataclass(frozen=True)
class Rule:
    """``when`` conditions ``then`` action. Uppercase bare arguments are
    pattern variables that bind whole evidence arguments."""

    name: str
    conditions: tuple[Evidence, ...]
    action: Action
    target: Formula

    def __str__(self) -> str:
        conds = " & ".join(str(c) for c in self.conditions)
        return f"when {conds} then {self.action.value} {render(self.target)}"


def _is_pattern_var(f: Formula) -> bool:
    return isinstance(f, Atom) and not f.args and f.pred[:1].isupper()


@dataclass(frozen=True)
class RuleSystem:
    rules: tuple[Rule, ...] = ()

    def __post_init__(self):
        names = [r.name for r in self.rules]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise ValueError(f"duplicate rule names: {sorted(dupes)}")


@dataclass(frozen=True)
class RuleOutcome:
    verdicts: tuple[Verdict, ...]
    conflicts: tuple[str, ...] = ()


def _bindings(conds: Sequence[Evidence], evidence: Sequence[Evidence],
              binding: dict[str, Formula]) -> Iterator[dict[str, Formula]]:
    if not conds:
        yield binding
        return
    head, rest = conds[0], conds[1:]
    for ev in evidence:
        if ev.tag != head.tag or len(ev.args) != len(head.args):
            continue
        b = dict(binding)
        ok = True
        for pat, val in zip(head.args, ev.args):
            if _is_pattern_var(pat):
                if b.setdefault(pat.pred, val) != val:
                    ok = False
                    break
            elif pat != val:
                ok = False
                break
        if ok:
            yield from _bindings(rest, evidence, b)


def apply_rule_system(rs: RuleSystem, evidence: Iterable[Evidence]) -> RuleOutcome:
    """Fire every satisfied rule. Inferring both x and ~x suppresses both and
    records the conflict."""
    evidence = sorted(set(evidence), key=str)
    fired: list[Verdict] = []
    for rule in rs.rules:
        for b in _bindings(rule.conditions, evidence, {}):
            target = b.get(rule.target.pred, rule.target) if _is_pattern_var(rule.target) else rule.target
            if _is_pattern_var(target):
                continue
            conds = tuple(str(Evidence(c.tag, tuple(b.get(a.pred, a) if _is_pattern_var(a) else a
                                                     for a in c.args)))
                          for c in rule.conditions)
            v = Verdict(_ACTION_KIND[rule.action], target, rule=rule.name, conditions=conds,
                        active=True)
            if v not in fired:
                fired.append(v)
    inferred = {v.formula for v in fired if v.kind is VerdictKind.INFER}
    clashes = sorted((f for f in inferred if Not(f) in inferred), key=render)
    suppressed = {g for f in clashes for g in (f, Not(f))}
    conflicts = []
    for f in clashes:
        sources = sorted({v.rule for v in fired if v.formula in (f, Not(f))})
        conflicts.append(f"conflict: {render(f)} and {render(Not(f))} both inferred "
                         f"(rules {', '.join(sources)}); both suppressed")
    kept = tuple(v for v in fired
                 if not (v.kind is VerdictKind.INFER and v.formula in suppressed))
    return RuleOutcome(kept, tuple(conflicts))


class RuleSyntaxError(ValueError):
    pass


_RULE_RE = re.compile(r"^when\s+(?P<conds>.+?)\s+then\s+(?P<act>infer|oblige|prohibit)\s+"
                      r"(?P<target>.+)$", re.S)
_TAG_RE = re.compile(r"\s*(?P<tag>[a-z][A-Za-z0-9_-]*)\s*\(")


def _split_args(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def parse_evidence_list(text: str) -> list[Evidence]:
    """Parse ``tag(arg, ...) & tag(arg)``; arguments are formulas."""
    items, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TAG_RE.match(text, pos)
        if not m:
            raise RuleSyntaxError(f"expected tag(argument) at {text[pos:]!r}")
        depth, i = 1, m.end()
        while i < len(text) and depth:
            depth += {"(": 1, ")": -1}.get(text[i], 0)
            i += 1
        if depth:
            raise RuleSyntaxError(f"unbalanced parentheses in {text!r}")
        args = _split_args(text[m.end():i - 1])
        try:
            items.append(Evidence(m.group("tag"), tuple(parse_formula(a) for a in args)))
        except FormulaError as exc:
            raise RuleSyntaxError(str(exc)) from exc
        rest = text[i:].lstrip()
        if rest.startswith("&"):
            rest = rest[1:]
        elif rest:
            raise RuleSyntaxError(f"expected '&' before {rest!r}")
        pos = len(text) - len(rest)
    return items


def parse_rules(text: str) -> RuleSystem:
    """Lines ``when tag(arg) [& tag(arg)]* then infer|oblige|prohibit <formula>.``
    An optional ``name:`` prefix names the rule; otherwise ``rule<N>``."""
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name = f"rule{len(rules) + 1}"
        head, sep, tail = line.partition(":")
        if sep and re.fullmatch(r"[A-Za-z][A-Za-z0-9_-]*", head.strip()):
            name, line = head.strip(), tail.strip()
        if not line.endswith("."):
            raise RuleSyntaxError(f"line {lineno}: rule must end with '.'")
        m = _RULE_RE.match(line[:-1])
        if not m:
            raise RuleSyntaxError(f"line {lineno}: expected 'when ... then <action> <formula>'")
        try:
            conds = parse_evidence_list(m.group("conds"))
            target = parse_formula(m.group("target"))
        except (RuleSyntaxError, FormulaError) as exc:
            raise RuleSyntaxError(f"line {lineno}: {exc}") from exc
        rules.append(Rule(name, tuple(conds), Action(m.group("act")), target))
    return RuleSystem(tuple(rules))
