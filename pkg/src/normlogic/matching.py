"""Transparency as schema matching, plus bounded validation of schemas.

An inference is *apprehended* as an instance of a schema when a functional
substitution of concrete symbols for the schema's metavariables turns the
schema into exactly that inference. Matching is purely syntactic: no
commutativity, no rewriting with identities, bound variable names must agree.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .semantics import (DEFAULT_BOUND, DEFAULT_BUDGET_CAP, Interpretation,
                        find_countermodel, signature_of)
from .syntax import (And, Atom, Const, Eq, Exists, Formula, Implies, Inference,
                     Not, Or, Schema, Substitution, Term, Var, apply_substitution,
                     is_meta, parse_schema, render)

MAX_PERMUTED_PREMISES = 6


@dataclass(frozen=True)
class MatchFailure:
    """First blocking mismatch between schema and inference."""

    location: str
    expected: str
    found: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


@dataclass(frozen=True)
class MatchResult:
    substitution: Substitution | None = None
    failure: MatchFailure | None = None

    @property
    def matched(self) -> bool:
        return self.substitution is not None

    def __bool__(self) -> bool:
        return self.matched

    def __str__(self) -> str:
        if self.matched:
            return f"Matched({self.substitution})"
        return f"Failed({self.failure})"


class _Mismatch(Exception):
    def __init__(self, failure: MatchFailure):
        self.failure = failure


class _Matcher:
    def __init__(self, injective: bool):
        self.injective = injective
        self.preds: dict[str, str] = {}
        self.consts: dict[str, str] = {}

    def fail(self, where: str, expected: str, found: str, message: str):
        raise _Mismatch(MatchFailure(where, expected, found, message))

    def bind(self, table: dict[str, str], meta: str, target: str, where: str):
        bound = table.get(meta)
        if bound is not None:
            if bound != target:
                self.fail(where, bound, target,
                          f"{meta} must equal both {bound} and {target}")
            return
        if self.injective:
            for other, value in table.items():
                if value == target:
                    self.fail(where, f"a symbol other than {target}", target,
                              f"{meta} and {other} would both map to {target} "
                              "(injective mode)")
        table[meta] = target

    def term(self, s: Term, t: Term, where: str):
        if isinstance(s, Var) or isinstance(t, Var):
            if s != t:
                self.fail(where, str(s), str(t), f"expected {s}, found {t}")
            return
        if is_meta(s.name):
            self.bind(self.consts, s.name, t.name, where)
        elif s.name != t.name:
            self.fail(where, s.name, t.name, f"expected constant {s.name}, found {t.name}")

    def formula(self, s: Formula, t: Formula, where: str):
        if type(s) is not type(t):
            self.fail(where, render(s), render(t),
                      f"expected {_kind(s)} {render(s)}, found {_kind(t)} {render(t)}")
        if isinstance(s, Atom):
            if s.arity != t.arity:
                self.fail(where, f"arity {s.arity}", f"arity {t.arity}",
                          f"{s.pred} has arity {s.arity} but {t.pred} has arity {t.arity}")
            if is_meta(s.pred):
                self.bind(self.preds, s.pred, t.pred, where)
            elif s.pred != t.pred:
                self.fail(where, s.pred, t.pred, f"expected predicate {s.pred}, found {t.pred}")
            for i, (a, b) in enumerate(zip(s.args, t.args), 1):
                self.term(a, b, f"{where}, argument {i}")
        elif isinstance(s, Eq):
            self.term(s.left, t.left, f"{where}, left of =")
            self.term(s.right, t.right, f"{where}, right of =")
        elif isinstance(s, Not):
            self.formula(s.body, t.body, f"{where}, under ~")
        elif isinstance(s, Exists):
            if s.var != t.var:
                self.fail(where, str(s.var), str(t.var),
                          f"bound variable {s.var} does not match {t.var}")
            self.formula(s.body, t.body, f"{where}, under exists {s.var}")
        elif isinstance(s, Implies):
            self.formula(s.left, t.left, f"{where}, antecedent")
            self.formula(s.right, t.right, f"{where}, consequent")
        else:
            if len(s.items) != len(t.items):
                self.fail(where, f"{len(s.items)} {_kind(s)}s", f"{len(t.items)}",
                          f"expected {len(s.items)} items, found {len(t.items)}")
            for i, (a, b) in enumerate(zip(s.items, t.items), 1):
                self.formula(a, b, f"{where}, item {i}")


def _kind(f: Formula) -> str:
    return {Atom: "atom", Eq: "identity", Not: "negation", And: "conjunction",
            Or: "disjunction", Implies: "implication",
            Exists: "existential"}[type(f)]


def match_inference(inf: Inference, s: Schema, *, injective: bool = False) -> MatchResult:
    """Match premise-by-premise (order significant) and conclusion-to-conclusion."""
    if len(inf.premises) != len(s.premises):
        return MatchResult(failure=MatchFailure(
            "premises", str(len(s.premises)), str(len(inf.premises)),
            f"schema has {len(s.premises)} premises, inference has {len(inf.premises)}"))
    m = _Matcher(injective)
    try:
        for i, (sp, ip) in enumerate(zip(s.premises, inf.premises), 1):
            m.formula(sp, ip, f"premise {i}")
        m.formula(s.conclusion, inf.conclusion, "conclusion")
    except _Mismatch as exc:
        return MatchResult(failure=exc.failure)
    sigma = Substitution(m.preds, m.consts)
    # soundness is cheap to check and guards the transparency gate downstream
    assert apply_substitution(s, sigma) == inf
    return MatchResult(substitution=sigma)


# ---------------------------------------------------------------------------
# Validity
# ---------------------------------------------------------------------------


class ValidityStatus(enum.Enum):
    VALID = "valid"
    VALID_UP_TO_BOUND = "valid-up-to-bound"
    INVALID = "invalid"


@dataclass(frozen=True)
class ValidityReport:
    status: ValidityStatus
    method: str  # "truth-table" or "small-model"
    bound: int | None = None
    countermodel: Interpretation | None = None

    @property
    def valid(self) -> bool:
        return self.status is not ValidityStatus.INVALID

    def __str__(self) -> str:
        if self.status is ValidityStatus.VALID:
            return f"Valid ({self.method})"
        if self.status is ValidityStatus.VALID_UP_TO_BOUND:
            return f"ValidUpToBound({self.bound}) ({self.method})"
        return f"Invalid ({self.method}; countermodel: {self.countermodel.describe()})"


def validate_schema(s: Schema, bound: int = DEFAULT_BOUND,
                    cap: int = DEFAULT_BUDGET_CAP) -> ValidityReport:
    """Truth tables for propositional schemas, else every interpretation over
    domains of size 1..bound. Raises BudgetExceeded past ``cap``."""
    if bound < 1:
        raise ValueError("bound must be at least 1")
    sig = signature_of((*s.premises, s.conclusion))
    method = "truth-table" if sig.propositional else "small-model"
    counter = find_countermodel(s.premises, s.conclusion, bound, cap)
    if counter is not None:
        return ValidityReport(ValidityStatus.INVALID, method, None, counter)
    if sig.propositional:
        return ValidityReport(ValidityStatus.VALID, method)
    return ValidityReport(ValidityStatus.VALID_UP_TO_BOUND, method, bound)


# ---------------------------------------------------------------------------
# Library and apprehension
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LibraryEntry:
    id: str
    schema: Schema
    validity: ValidityReport


@dataclass(frozen=True)
class SchemaLibrary:
    entries: tuple[LibraryEntry, ...] = ()

    def __post_init__(self):
        seen: set[str] = set()
        for e in self.entries:
            if e.id in seen:
                raise ValueError(f"duplicate schema id {e.id!r}")
            seen.add(e.id)

    def __iter__(self) -> Iterator[LibraryEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, schema_id: str) -> LibraryEntry:
        for e in self.entries:
            if e.id == schema_id:
                return e
        raise KeyError(schema_id)

    @classmethod
    def build(cls, schemas: Iterable[tuple[str, Schema]], bound: int = DEFAULT_BOUND,
              cap: int = DEFAULT_BUDGET_CAP) -> "SchemaLibrary":
        return cls(tuple(LibraryEntry(i, s, validate_schema(s, bound, cap))
                         for i, s in schemas))

    @classmethod
    def from_text(cls, text: str, bound: int = DEFAULT_BOUND,
                  cap: int = DEFAULT_BUDGET_CAP) -> "SchemaLibrary":
        """Parse ``id : schema`` lines; blanks and ``#`` comments are skipped."""
        return cls.build(parse_library(text), bound, cap)


def parse_library(text: str) -> list[tuple[str, Schema]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        schema_id, sep, body = line.partition(":")
        if not sep or not schema_id.strip():
            raise ValueError(f"line {lineno}: expected 'id : schema'")
        out.append((schema_id.strip(), parse_schema(body)))
    return out


@dataclass(frozen=True)
class Apprehension:
    schema_id: str
    substitution: Substitution
    premise_order: tuple[int, ...]
    """Index into the inference's premises for each schema premise."""


def _orders(n: int) -> Iterator[tuple[int, ...]]:
    identity = tuple(range(n))
    yield identity
    if n <= MAX_PERMUTED_PREMISES:
        for perm in itertools.permutations(identity):
            if perm != identity:
                yield perm


def apprehend(inf: Inference, lib: SchemaLibrary | Sequence[LibraryEntry], *,
              injective: bool = False) -> list[Apprehension]:
    """Every library schema the inference instantiates, in library order.

    The given premise order is tried first; other orders are tried when there
    are at most six premises. An empty list means the inference is opaque.
    """
    found = []
    for entry in lib:
        if len(entry.schema.premises) != len(inf.premises):
            continue
        for order in _orders(len(inf.premises)):
            candidate = Inference(tuple(inf.premises[i] for i in order), inf.conclusion)
            result = match_inference(candidate, entry.schema, injective=injective)
            if result.matched:
                found.append(Apprehension(entry.id, result.substitution, order))
                break
    return found


def explain_failures(inf: Inference, lib: SchemaLibrary, *,
                     injective: bool = False) -> list[tuple[str, MatchResult]]:
    """Failure reasons against each schema, using the given premise order."""
    return [(e.id, match_inference(inf, e.schema, injective=injective)) for e in lib]
