"""Finite interpretations and brute-force model enumeration.

Nullary atoms are predicates of arity 0, so a truth-table row is just an
interpretation over a one-element domain. Metavariables are interpreted like
any other symbol, which is what schema validation needs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .syntax import (And, Atom, Eq, Exists, Formula, Implies, Not, Or,
                     Term, Var, constants, free_variables, iter_subformulas)

DEFAULT_BOUND = 3
DEFAULT_BUDGET_CAP = 2_000_000


class BudgetExceeded(RuntimeError):
    """Raised before enumeration when the interpretation count is over the cap."""

    def __init__(self, needed: int, cap: int, what: str = "interpretations"):
        self.needed = needed
        self.cap = cap
        super().__init__(f"{needed} {what} exceed the budget cap of {cap}")


@dataclass(frozen=True)
class Signature:
    predicates: Mapping[str, int]
    constants: tuple[str, ...]
    needs_domain: bool = False

    @property
    def propositional(self) -> bool:
        return (not self.needs_domain and not self.constants
                and all(a == 0 for a in self.predicates.values()))

    def count(self, bound: int) -> int:
        """Number of interpretations ``iter_interpretations`` would yield."""
        if self.propositional:
            return 2 ** len(self.predicates)
        total = 0
        for n in range(1, bound + 1):
            k = n ** len(self.constants)
            for arity in self.predicates.values():
                k *= 2 ** (n ** arity)
            total += k
        return total


def signature_of(formulas: Iterable[Formula]) -> Signature:
    preds: dict[str, int] = {}
    consts: set[str] = set()
    needs_domain = False
    for f in formulas:
        for sub in iter_subformulas(f):
            if isinstance(sub, Atom):
                if preds.setdefault(sub.pred, sub.arity) != sub.arity:
                    raise ValueError(
                        f"predicate {sub.pred} used with arities "
                        f"{preds[sub.pred]} and {sub.arity}")
            elif isinstance(sub, (Eq, Exists)):
                needs_domain = True
        consts |= constants(f)
    return Signature(dict(sorted(preds.items())), tuple(sorted(consts)), needs_domain)


@dataclass(frozen=True)
class Interpretation:
    size: int
    constants: Mapping[str, int]
    extensions: Mapping[str, frozenset[tuple[int, ...]]]
    arities: Mapping[str, int] = field(default_factory=dict, compare=False, repr=False)
    propositional: bool = field(default=False, compare=False, repr=False)

    def describe(self) -> str:
        """Readable listing; ``p=true, q=false`` for a truth-table row."""
        if self.propositional:
            return ", ".join(f"{p}={'true' if e else 'false'}"
                             for p, e in self.extensions.items())
        parts = [f"domain={{{', '.join(str(i) for i in range(self.size))}}}"]
        parts += [f"{c}->{d}" for c, d in self.constants.items()]
        for p, ext in self.extensions.items():
            if self.arities.get(p) == 0:
                parts.append(f"{p}={'true' if ext else 'false'}")
            else:
                shown = ", ".join(str(t[0]) if len(t) == 1 else str(t)
                                  for t in sorted(ext))
                parts.append(f"{p}={{{shown}}}")
        return "; ".join(parts)


def iter_interpretations(sig: Signature, bound: int) -> Iterator[Interpretation]:
    """All interpretations over domains {0..n-1}, n = 1..bound.

    Propositional signatures get a single one-element domain, i.e. plain
    truth-table rows.
    """
    sizes = [1] if sig.propositional else range(1, bound + 1)
    names = list(sig.predicates)
    for n in sizes:
        domain = range(n)
        cells = {p: list(itertools.product(domain, repeat=a))
                 for p, a in sig.predicates.items()}
        masks = [range(2 ** len(cells[p])) for p in names]
        for denot in itertools.product(domain, repeat=len(sig.constants)):
            consts = dict(zip(sig.constants, denot))
            for combo in itertools.product(*masks):
                ext = {p: frozenset(c for i, c in enumerate(cells[p]) if m >> i & 1)
                       for p, m in zip(names, combo)}
                yield Interpretation(n, consts, ext, sig.predicates, sig.propositional)


def _denote(t: Term, interp: Interpretation, env: Mapping[str, int]) -> int:
    if isinstance(t, Var):
        return env[t.name]
    return interp.constants[t.name]


def evaluate(f: Formula, interp: Interpretation, env: Mapping[str, int] | None = None) -> bool:
    env = env or {}
    if isinstance(f, Atom):
        return tuple(_denote(t, interp, env) for t in f.args) in interp.extensions[f.pred]
    if isinstance(f, Eq):
        return _denote(f.left, interp, env) == _denote(f.right, interp, env)
    if isinstance(f, Not):
        return not evaluate(f.body, interp, env)
    if isinstance(f, And):
        return all(evaluate(i, interp, env) for i in f.items)
    if isinstance(f, Or):
        return any(evaluate(i, interp, env) for i in f.items)
    if isinstance(f, Implies):
        return not evaluate(f.left, interp, env) or evaluate(f.right, interp, env)
    if isinstance(f, Exists):
        return any(evaluate(f.body, interp, {**env, f.var.name: d})
                   for d in range(interp.size))
    raise TypeError(f"not a formula: {f!r}")


def holds_universally(f: Formula, interp: Interpretation) -> bool:
    """Truth of ``f`` with its free variables read universally."""
    free = sorted(free_variables(f))
    if not free:
        return evaluate(f, interp)
    return all(evaluate(f, interp, dict(zip(free, vals)))
               for vals in itertools.product(range(interp.size), repeat=len(free)))


def find_countermodel(premises: Sequence[Formula], conclusion: Formula | None,
                      bound: int = DEFAULT_BOUND,
                      cap: int = DEFAULT_BUDGET_CAP) -> Interpretation | None:
    """First interpretation making every premise true and the conclusion false.

    Premises may carry free variables (read universally). With ``conclusion``
    None this searches for a plain model of the premises.
    """
    members = list(premises) + ([conclusion] if conclusion is not None else [])
    sig = signature_of(members)
    needed = sig.count(bound)
    if needed > cap:
        raise BudgetExceeded(needed, cap)
    for interp in iter_interpretations(sig, bound):
        if conclusion is not None and holds_universally(conclusion, interp):
            continue
        if all(holds_universally(p, interp) for p in premises):
            return interp
    return None
