"""Formulas, schemas and inferences: abstract syntax, parser and printer.

Concrete syntax (ASCII only)::

    formula := impl
    impl    := disj ("->" disj)?
    disj    := conj ("|" conj)*
    conj    := unary ("&" unary)*
    unary   := "~" unary | "exists" VAR "." unary | atom
    atom    := pred "(" term ("," term)* ")" | term "=" term
             | IDENT | "(" formula ")"
    schema  := formula ("," formula)* "/" formula

Lowercase identifiers are concrete predicates and constants, ``?name`` marks
a metavariable, and uppercase identifiers are variables bound by ``exists``.
A bare identifier that is neither applied nor compared (``p``, ``A``) is a
nullary atom. ``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

__all__ = [
    "Const", "Var", "Term", "Atom", "Eq", "Not", "And", "Or", "Implies",
    "Exists", "Formula", "Schema", "Inference", "Substitution",
    "FormulaError", "ParseError", "UnboundVariableError", "SchemaError",
    "SubstitutionError", "parse_formula", "parse_formula_list",
    "parse_schema", "parse_inference", "render", "apply_substitution",
    "is_meta", "free_variables", "constants", "predicates", "iter_subformulas",
    "substitute_vars",
]

META_SIGIL = "?"
KEYWORDS = frozenset({"exists"})


def is_meta(symbol: str) -> bool:
    return symbol.startswith(META_SIGIL)


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class FormulaError(ValueError):
    """Base class for every syntax-level failure."""


class ParseError(FormulaError):
    def __init__(self, message: str, text: str, offset: int,
                 expected: Iterable[str] = ()):
        self.text = text
        self.offset = offset
        self.line, self.column = _line_col(text, offset)
        self.expected = tuple(sorted(set(expected)))
        detail = f"{message} at line {self.line}, column {self.column}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class UnboundVariableError(ParseError):
    pass


class SchemaError(FormulaError):
    pass


class SubstitutionError(FormulaError):
    pass


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    start = text.rfind("\n", 0, offset) + 1
    return line, offset - start + 1


# ---------------------------------------------------------------------------
# Abstract syntax
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    """An individual constant, or a constant metavariable when sigiled."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


Term = Union[Const, Var]


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    items: tuple["Formula", ...]

    def __post_init__(self):
        if len(self.items) < 2:
            raise FormulaError("a conjunction needs at least two conjuncts")


@dataclass(frozen=True)
class Or:
    items: tuple["Formula", ...]

    def __post_init__(self):
        if len(self.items) < 2:
            raise FormulaError("a disjunction needs at least two disjuncts")


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: Var
    body: "Formula"


Formula = Union[Atom, Eq, Not, And, Or, Implies, Exists]


def iter_subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (Not, Exists)):
        yield from iter_subformulas(f.body)
    elif isinstance(f, (And, Or)):
        for item in f.items:
            yield from iter_subformulas(item)
    elif isinstance(f, Implies):
        yield from iter_subformulas(f.left)
        yield from iter_subformulas(f.right)


def _terms(f: Formula) -> Iterator[Term]:
    for sub in iter_subformulas(f):
        if isinstance(sub, Atom):
            yield from sub.args
        elif isinstance(sub, Eq):
            yield sub.left
            yield sub.right


def constants(f: Formula) -> set[str]:
    return {t.name for t in _terms(f) if isinstance(t, Const)}


def predicates(f: Formula) -> dict[str, int]:
    """Predicate symbol -> arity. Conflicting arities raise SchemaError."""
    out: dict[str, int] = {}
    for sub in iter_subformulas(f):
        if isinstance(sub, Atom):
            if out.setdefault(sub.pred, sub.arity) != sub.arity:
                raise SchemaError(
                    f"predicate {sub.pred} used with arities "
                    f"{out[sub.pred]} and {sub.arity}")
    return out


def free_variables(f: Formula, bound: frozenset[str] = frozenset()) -> set[str]:
    if isinstance(f, Atom):
        return {t.name for t in f.args if isinstance(t, Var) and t.name not in bound}
    if isinstance(f, Eq):
        return {t.name for t in (f.left, f.right)
                if isinstance(t, Var) and t.name not in bound}
    if isinstance(f, Not):
        return free_variables(f.body, bound)
    if isinstance(f, Exists):
        return free_variables(f.body, bound | {f.var.name})
    if isinstance(f, Implies):
        return free_variables(f.left, bound) | free_variables(f.right, bound)
    return set().union(*(free_variables(i, bound) for i in f.items))


def substitute_vars(f: Formula, binding: Mapping[str, Term]) -> Formula:
    """Replace free variables by terms (bound occurrences are left alone)."""

    def term(t: Term, shadow: frozenset[str]) -> Term:
        if isinstance(t, Var) and t.name not in shadow and t.name in binding:
            return binding[t.name]
        return t

    def walk(g: Formula, shadow: frozenset[str]) -> Formula:
        if isinstance(g, Atom):
            return Atom(g.pred, tuple(term(t, shadow) for t in g.args))
        if isinstance(g, Eq):
            return Eq(term(g.left, shadow), term(g.right, shadow))
        if isinstance(g, Not):
            return Not(walk(g.body, shadow))
        if isinstance(g, Exists):
            return Exists(g.var, walk(g.body, shadow | {g.var.name}))
        if isinstance(g, Implies):
            return Implies(walk(g.left, shadow), walk(g.right, shadow))
        return type(g)(tuple(walk(i, shadow) for i in g.items))

    return walk(f, frozenset())


# ---------------------------------------------------------------------------
# Schemas, inferences, substitutions
# ---------------------------------------------------------------------------


def _meta_inventory(formulas: Iterable[Formula]) -> tuple[dict[str, int], frozenset[str]]:
    preds: dict[str, int] = {}
    consts: set[str] = set()
    for f in formulas:
        for sub in iter_subformulas(f):
            if isinstance(sub, Atom) and is_meta(sub.pred):
                if preds.setdefault(sub.pred, sub.arity) != sub.arity:
                    raise SchemaError(
                        f"metavariable {sub.pred} applied with arities "
                        f"{preds[sub.pred]} and {sub.arity}")
        consts.update(c for c in constants(f) if is_meta(c))
    clash = consts & preds.keys()
    if clash:
        raise SchemaError(
            f"metavariable {sorted(clash)[0]} used both as predicate and constant")
    return preds, frozenset(consts)


@dataclass(frozen=True)
class Schema:
    """An inference pattern; predicates and constants may be metavariables."""

    premises: tuple[Formula, ...]
    conclusion: Formula
    predicate_metavars: Mapping[str, int] = field(init=False, compare=False, repr=False)
    constant_metavars: frozenset[str] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        preds, consts = _meta_inventory((*self.premises, self.conclusion))
        object.__setattr__(self, "predicate_metavars", preds)
        object.__setattr__(self, "constant_metavars", consts)

    @property
    def metavariables(self) -> frozenset[str]:
        return frozenset(self.predicate_metavars) | self.constant_metavars

    @property
    def is_degenerate(self) -> bool:
        return not self.metavariables

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Inference:
    premises: tuple[Formula, ...]
    conclusion: Formula

    def __post_init__(self):
        for f in (*self.premises, self.conclusion):
            if free_variables(f):
                raise FormulaError(f"inference member {render(f)} is not closed")
            metas = {p for p in predicates(f) if is_meta(p)}
            metas |= {c for c in constants(f) if is_meta(c)}
            if metas:
                raise FormulaError(
                    f"inference member {render(f)} contains metavariables "
                    f"{', '.join(sorted(metas))}")

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Substitution:
    predicates: Mapping[str, str] = field(default_factory=dict)
    constants: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "predicates", dict(self.predicates))
        object.__setattr__(self, "constants", dict(self.constants))

    def __hash__(self):
        return hash((tuple(sorted(self.predicates.items())),
                     tuple(sorted(self.constants.items()))))

    def items(self) -> list[tuple[str, str]]:
        return sorted({**self.predicates, **self.constants}.items())

    def __str__(self) -> str:
        return "{" + ", ".join(f"{k} -> {v}" for k, v in self.items()) + "}"


_LOWER = re.compile(r"[a-z0-9][A-Za-z0-9_]*\Z")


def apply_substitution(s: Schema, sigma: Substitution) -> Inference:
    """Instantiate every metavariable of ``s`` according to ``sigma``."""
    missing = sorted(m for m in s.metavariables
                     if m not in sigma.predicates and m not in sigma.constants)
    if missing:
        raise SubstitutionError(
            f"substitution does not cover {', '.join(missing)}")
    for meta, target in (*sigma.predicates.items(), *sigma.constants.items()):
        if not _LOWER.match(target) or target in KEYWORDS:
            raise SubstitutionError(f"{meta} mapped to non-concrete symbol {target!r}")
    for meta in sigma.predicates:
        if meta in s.constant_metavars:
            raise SubstitutionError(f"{meta} is a constant metavariable")
    for meta in sigma.constants:
        if meta in s.predicate_metavars:
            raise SubstitutionError(f"{meta} is a predicate metavariable")

    def term(t: Term) -> Term:
        if isinstance(t, Const) and is_meta(t.name):
            return Const(sigma.constants[t.name])
        return t

    def walk(f: Formula) -> Formula:
        if isinstance(f, Atom):
            pred = sigma.predicates[f.pred] if is_meta(f.pred) else f.pred
            return Atom(pred, tuple(term(t) for t in f.args))
        if isinstance(f, Eq):
            return Eq(term(f.left), term(f.right))
        if isinstance(f, Not):
            return Not(walk(f.body))
        if isinstance(f, Exists):
            return Exists(f.var, walk(f.body))
        if isinstance(f, Implies):
            return Implies(walk(f.left), walk(f.right))
        return type(f)(tuple(walk(i) for i in f.items))

    premises = tuple(walk(p) for p in s.premises)
    conclusion = walk(s.conclusion)
    arities: dict[str, int] = {}
    for f in (*premises, conclusion):
        for sub in iter_subformulas(f):
            if isinstance(sub, Atom) and arities.setdefault(sub.pred, sub.arity) != sub.arity:
                raise SubstitutionError(
                    f"arity mismatch: {sub.pred} would be used with arities "
                    f"{arities[sub.pred]} and {sub.arity}")
    return Inference(premises, conclusion)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<arrow>->)
  | (?P<meta>\?[A-Za-z][A-Za-z0-9_]*)
  | (?P<upper>[A-Z][A-Za-z0-9_]*)
  | (?P<lower>[a-z0-9][A-Za-z0-9_]*)
  | (?P<punct>[()&|~=,./])
""", re.VERBOSE)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group()
            if kind == "lower" and value in KEYWORDS:
                kind = value
            elif kind in ("punct", "arrow"):
                kind = value
            tokens.append(Token(kind, value, m.start()))
        pos = m.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_UNARY_START = ("~", "exists", "(", "identifier")


class _Parser:
    def __init__(self, text: str, allow_free: bool = False):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0
        self.bound: list[str] = []
        self.allow_free = allow_free

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def error(self, expected: Iterable[str], tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        if tok.kind == "eof":
            msg = "unexpected end of input"
            offset = max(len(self.text.rstrip()) - 1, 0)
        else:
            msg = f"unexpected token {tok.text!r}"
            offset = tok.offset
        return ParseError(msg, self.text, offset, expected)

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            raise self.error([kind])
        return self.advance()

    def formula(self) -> Formula:
        left = self.disj()
        if self.tok.kind == "->":
            self.advance()
            return Implies(left, self.disj())
        return left

    def disj(self) -> Formula:
        items = [self.conj()]
        while self.tok.kind == "|":
            self.advance()
            items.append(self.conj())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def conj(self) -> Formula:
        items = [self.unary()]
        while self.tok.kind == "&":
            self.advance()
            items.append(self.unary())
        return items[0] if len(items) == 1 else And(tuple(items))

    def unary(self) -> Formula:
        kind = self.tok.kind
        if kind == "~":
            self.advance()
            return Not(self.unary())
        if kind == "exists":
            self.advance()
            var = self.expect("upper")
            self.expect(".")
            self.bound.append(var.text)
            try:
                body = self.unary()
            finally:
                self.bound.pop()
            return Exists(Var(var.text), body)
        return self.atom()

    def term(self) -> Term:
        t = self.tok
        if t.kind in ("lower", "meta"):
            self.advance()
            return Const(t.text)
        if t.kind == "upper":
            self.advance()
            if t.text not in self.bound and not self.allow_free:
                raise UnboundVariableError(
                    f"variable {t.text} is not bound by an enclosing 'exists'",
                    self.text, t.offset)
            return Var(t.text)
        raise self.error(["identifier"])

    def atom(self) -> Formula:
        t = self.tok
        if t.kind == "(":
            self.advance()
            inner = self.formula()
            if self.tok.kind != ")":
                raise self.error([")", "&", "|", "->"])
            self.advance()
            return inner
        if t.kind not in ("lower", "meta", "upper"):
            raise self.error(_UNARY_START)
        nxt = self.peek()
        if nxt.kind == "(":
            if t.kind == "upper":
                raise ParseError(
                    f"predicate {t.text} must start with a lowercase letter",
                    self.text, t.offset)
            self.advance()
            self.advance()
            args = [self.term()]
            while self.tok.kind == ",":
                self.advance()
                args.append(self.term())
            if self.tok.kind != ")":
                raise self.error([")", ","])
            self.advance()
            return Atom(t.text, tuple(args))
        if nxt.kind == "=":
            left = self.term()
            self.advance()
            return Eq(left, self.term())
        if t.kind == "upper" and t.text in self.bound:
            raise ParseError(
                f"bound variable {t.text} cannot stand alone as a formula",
                self.text, t.offset, ["=", "("])
        self.advance()
        return Atom(t.text)

    def finish(self):
        if self.tok.kind != "eof":
            raise self.error(["end of input", "&", "|", "->"])


def parse_formula(text: str, *, allow_free: bool = False) -> Formula:
    """Parse one formula.

    ``allow_free`` admits uppercase variables without an enclosing
    quantifier; knowledge-base rules use it for their implicit universal slot.
    """
    p = _Parser(text, allow_free)
    f = p.formula()
    p.finish()
    return f


def parse_formula_list(text: str, *, allow_free: bool = False) -> list[Formula]:
    """Parse a comma separated list of formulas (e.g. ``"A, B"``)."""
    p = _Parser(text, allow_free)
    items = [p.formula()]
    while p.tok.kind == ",":
        p.advance()
        items.append(p.formula())
    p.finish()
    return items


def _parse_sequent(text: str) -> tuple[tuple[Formula, ...], Formula]:
    p = _Parser(text)
    premises = [] if p.tok.kind == "/" else [p.formula()]
    while premises and p.tok.kind == ",":
        p.advance()
        premises.append(p.formula())
    if p.tok.kind != "/":
        raise p.error(["/", ",", "&", "|", "->"])
    p.advance()
    conclusion = p.formula()
    p.finish()
    return tuple(premises), conclusion


def parse_schema(text: str) -> Schema:
    """Parse ``premise, ... / conclusion`` with ``?``-sigiled metavariables."""
    premises, conclusion = _parse_sequent(text)
    return Schema(premises, conclusion)


def parse_inference(text: str) -> Inference:
    premises, conclusion = _parse_sequent(text)
    return Inference(premises, conclusion)


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_ASCII = {"and": " & ", "or": " | ", "not": "~", "imp": " -> ", "ex": "exists "}
_PRETTY = {"and": " ∧ ", "or": " ∨ ", "not": "¬", "imp": " → ", "ex": "∃"}


def _level(f: Formula) -> int:
    if isinstance(f, Implies):
        return 1
    if isinstance(f, Or):
        return 2
    if isinstance(f, And):
        return 3
    if isinstance(f, (Not, Exists)):
        return 4
    return 5


def _render_formula(f: Formula, ops: dict[str, str]) -> str:
    def sub(g: Formula, min_level: int) -> str:
        s = _render_formula(g, ops)
        return f"({s})" if _level(g) < min_level else s

    if isinstance(f, Atom):
        if not f.args:
            return f.pred
        return f"{f.pred}({', '.join(str(t) for t in f.args)})"
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, Not):
        return ops["not"] + sub(f.body, 4)
    if isinstance(f, Exists):
        return f"{ops['ex']}{f.var}. {sub(f.body, 4)}"
    if isinstance(f, Implies):
        return sub(f.left, 2) + ops["imp"] + sub(f.right, 2)
    if isinstance(f, Or):
        return ops["or"].join(sub(i, 3) for i in f.items)
    return ops["and"].join(sub(i, 4) for i in f.items)


def render(x: Formula | Schema | Inference, *, pretty: bool = False) -> str:
    """Canonical text for a formula, schema or inference.

    The ASCII form parses back to a structurally equal value. ``pretty``
    uses logical glyphs and is for display only.
    """
    ops = _PRETTY if pretty else _ASCII
    if isinstance(x, (Schema, Inference)):
        premises = ", ".join(_render_formula(p, ops) for p in x.premises)
        return f"{premises} / {_render_formula(x.conclusion, ops)}".lstrip()
    return _render_formula(x, ops)
