"""Seeded random syntax trees and schema instantiations."""

from __future__ import annotations

import random

from normlogic.syntax import (And, Atom, Const, Eq, Exists, Implies, Not, Or, Schema,
                              Substitution, Var)

PREDS = ("swan", "talked", "walked", "white", "r2")
CONSTS = ("cicero", "tully", "s", "a1")
VARS = ("X", "Y", "Z")


def random_tree(rng: random.Random, depth: int = 5, scope: tuple[str, ...] = ()):
    """A closed formula of nesting depth at most ``depth``."""
    def term():
        if scope and rng.random() < 0.6:
            return Var(rng.choice(scope))
        return Const(rng.choice(CONSTS))

    if depth == 0 or rng.random() < 0.2:
        kind = rng.random()
        if kind < 0.2:
            return Atom(rng.choice(("p", "q")))
        if kind < 0.35:
            return Eq(term(), term())
        pred = rng.choice(PREDS)
        arity = 2 if pred == "r2" else 1
        return Atom(pred, tuple(term() for _ in range(arity)))
    op = rng.choice(("not", "and", "or", "imp", "ex"))
    sub = lambda: random_tree(rng, depth - 1, scope)  # noqa: E731
    if op == "not":
        return Not(sub())
    if op == "and":
        return And(tuple(sub() for _ in range(rng.randint(2, 3))))
    if op == "or":
        return Or(tuple(sub() for _ in range(rng.randint(2, 3))))
    if op == "imp":
        return Implies(sub(), sub())
    v = rng.choice(VARS)
    return Exists(Var(v), random_tree(rng, depth - 1, scope + (v,)))


def random_schema_instance(rng: random.Random):
    """Return (schema, total substitution) over unary metapredicates."""
    metapreds = ["?F", "?G", "?H"][: rng.randint(1, 3)]
    metaconsts = ["?a", "?b", "?c"][: rng.randint(1, 3)]

    def atom(scope=()):
        arg = Var(rng.choice(scope)) if scope and rng.random() < 0.5 else Const(rng.choice(metaconsts))
        return Atom(rng.choice(metapreds), (arg,))

    def formula(depth, scope=()):
        if depth == 0 or rng.random() < 0.35:
            if rng.random() < 0.15:
                return Eq(Const(rng.choice(metaconsts)), Const(rng.choice(metaconsts)))
            return atom(scope)
        op = rng.choice(("not", "and", "or", "imp", "ex"))
        if op == "not":
            return Not(formula(depth - 1, scope))
        if op == "and":
            return And((formula(depth - 1, scope), formula(depth - 1, scope)))
        if op == "or":
            return Or((formula(depth - 1, scope), formula(depth - 1, scope)))
        if op == "imp":
            return Implies(formula(depth - 1, scope), formula(depth - 1, scope))
        return Exists(Var("X"), formula(depth - 1, ("X",)))

    # every metavariable must occur somewhere; seed the first premise with all of them
    seed = [Atom(f, (Const(c),)) for f in metapreds for c in metaconsts[:1]]
    seed += [Atom(metapreds[0], (Const(c),)) for c in metaconsts[1:]]
    first = seed[0] if len(seed) == 1 else And(tuple(seed))
    premises = (first,) + tuple(formula(2) for _ in range(rng.randint(0, 2)))
    schema = Schema(premises, formula(3))
    preds = {m: rng.choice(("talked", "walked", "white", "swan")) for m in metapreds}
    consts = {m: rng.choice(("cicero", "tully", "s")) for m in metaconsts}
    return schema, Substitution(preds, consts)
