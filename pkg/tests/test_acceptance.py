"""Acceptance gate: one test per criterion.

Each test carries a ``criterion`` label; conftest prints a PASS/FAIL line per
label at the end of the run. Tolerances and counts are pinned here.
"""

import math
import random
from pathlib import Path

from generators import random_schema_instance, random_tree
from oracles import closure_strings, monadic_countermodels
from normlogic.entailment import (InconsistentKnowledgeBase, KnowledgeBase, StrictRule,
                                  ThresholdConfig, bayes, classical_entails,
                                  defeasible_entails, defeasible_infer, parse_kb,
                                  permitted_closure, threshold_infer)
from normlogic.game import AgentSpec, GameConfig, Logic, build_world, run_game
from normlogic.matching import (SchemaLibrary, ValidityStatus, apprehend, match_inference,
                                validate_schema)
from normlogic.norms import (Attitude, BeliefState, Compliance, Modality, Polarity, Scope,
                             VerdictKind, all_belief_states, enumerate_bridge_forms,
                             evaluate_bridge, nonmr_verdict)
from normlogic.syntax import (Not, apply_substitution, parse_formula, parse_inference,
                              parse_schema, render)

DATA = Path(__file__).resolve().parent.parent / "data"
F = parse_formula

BAYES_TOL = 1e-12
EPSILON = 0.01
GAME_EPSILON = 0.02
MONOTONICITY_KBS = 1000
EPSILON_PAIRS = 1000
ROUND_TRIP_TREES = 1000
ROUND_TRIP_DEPTH = 5
MATCH_INSTANCES = 500


def criterion(label):
    def mark(fn):
        fn.criterion = label
        return fn
    return mark


@criterion("01 bayes(0.9, 1, 1) = 0.9 within 1e-12")
def test_criterion_01_bayes():
    assert math.isclose(bayes(0.9, 1, 1), 0.9, rel_tol=0, abs_tol=BAYES_TOL)


@criterion("02 identity inferences: (1) opaque, (2) base, (3) enriched")
def test_criterion_02_cicero_tully():
    base = parse_schema("?F(?a), ?G(?a) / exists X. (?F(X) & ?G(X))")
    enriched = parse_schema("?F(?a), ?G(?b), ?a = ?b / exists X. (?F(X) & ?G(X))")
    inf = {n: parse_inference(_inference_line(n)) for n in (1, 2, 3)}
    failed = match_inference(inf[1], base)
    assert not failed.matched
    assert "?a must equal both cicero and tully" in failed.failure.message
    assert match_inference(inf[2], base).matched
    assert match_inference(inf[3], enriched).matched
    lib = SchemaLibrary.from_text((DATA / "schemas.lib").read_text())
    assert [[a.schema_id for a in apprehend(inf[n], lib)] for n in (1, 2, 3)] == [
        [], ["base"], ["enriched"]]


def _inference_line(n):
    lines = (DATA / f"inference{n}.txt").read_text().splitlines()
    return next(line for line in lines if line.strip() and not line.startswith("#"))


@criterion("03 (p & ~~p) -> p is a tautology by truth table")
def test_criterion_03_tautology():
    report = validate_schema(parse_schema("/ (p & ~~p) -> p"))
    assert report.status is ValidityStatus.VALID and report.method == "truth-table"
    assert classical_entails(KnowledgeBase(), F("(p & ~~p) -> p"))


@criterion("04 NonMR+ obliges white(s); black(s) withdraws the verdict")
def test_criterion_04_nonmr_swan():
    kb = parse_kb((DATA / "swans.kb").read_text())
    bs = BeliefState.of(believe=[F("swan(s)")])
    v = nonmr_verdict(kb, F("swan(s)"), F("white(s)"), bs, (), "+", ThresholdConfig(EPSILON))
    assert v.kind is VerdictKind.OBLIGED_TO_BELIEVE and v.formula == F("white(s)")
    v = nonmr_verdict(kb, F("swan(s)"), F("white(s)"), bs, [F("black(s)")], "+",
                      ThresholdConfig(EPSILON))
    assert v.kind is VerdictKind.NO_VERDICT


@criterion("05 threshold_infer(0.9, eps=0.01) is false")
def test_criterion_05_threshold():
    assert threshold_infer(0.9, ThresholdConfig(EPSILON)) is False


def _experts():
    kb = parse_kb((DATA / "swans.kb").read_text())
    return (AgentSpec("expert_1", Logic.CLASSICAL, kb, 0),
            AgentSpec("expert_2", Logic.NONMONOTONIC, kb, 0, ThresholdConfig(GAME_EPSILON)))


@criterion("06 base world 99-1: nonmonotonic agent wins 98 vs 0")
def test_criterion_06_base_game():
    phase = run_game(GameConfig(build_world(99, 1, "white"), _experts())).base
    assert phase.winner == "expert_2"
    assert phase.outcome("expert_2").score.net == 98
    assert phase.outcome("expert_1").score.net == 0


@criterion("07 flipped world 1-99: nonmonotonic agent nets -98 < 0")
def test_criterion_07_flipped_game():
    phase = run_game(GameConfig(build_world(1, 99, "white"), _experts())).base
    assert phase.outcome("expert_2").score.net == -98
    assert phase.outcome("expert_1").score.net == 0
    assert phase.winner == "expert_1"


@criterion("08 bridge matrix: 18 forms, exhaustive over 27 attitude states")
def test_criterion_08_bridge_matrix():
    forms = enumerate_bridge_forms()
    assert len(forms) == len(set(forms)) == 18
    A, B, C = F("A"), F("B"), F("C")
    states = list(all_belief_states([A, B, C]))
    assert len(states) == 27
    by_name = {f.name: f for f in forms}
    violated = {name: set() for name in ("Wo+", "Wo-")}
    for i, bs in enumerate(states):
        for f in forms:
            for defeaters in ((), (C,)):
                status = evaluate_bridge(f, [A, B], C, bs, (), defeaters).status
                if f.modality is not Modality.O:
                    assert status is not Compliance.VIOLATED
        for name in violated:
            if evaluate_bridge(by_name[name], [A, B], C, bs).status is Compliance.VIOLATED:
                violated[name].add(i)
        believed = bs.attitude(A) is Attitude.BELIEVE and bs.attitude(B) is Attitude.BELIEVE
        for pol in Polarity:
            c = bs.attitude(C)
            consequent = c is Attitude.BELIEVE if pol is Polarity.POS else c is not Attitude.DISBELIEVE
            expected = Compliance.VIOLATED if believed and not consequent else Compliance.SATISFIED
            form = next(f for f in forms if (f.scope, f.modality, f.polarity) == (Scope.W, Modality.O, pol))
            assert evaluate_bridge(form, [A, B], C, bs).status is expected
    assert violated["Wo-"] < violated["Wo+"]


def _monotonicity_case(rng):
    atoms = ["p", "q", "r", "~p", "~q", "p | q", "q -> r", "p & r"]
    facts = [F(a) for a in rng.sample(atoms, rng.randint(0, 3))]
    extra = [F(a) for a in rng.sample(atoms, rng.randint(1, 2))]
    goal = F(rng.choice(atoms + ["r | ~r", "p -> q"]))
    rules = []
    if rng.random() < 0.2:
        rules = [StrictRule(F("b(X)", allow_free=True), F("~w(X)", allow_free=True))]
        facts.append(F(rng.choice(["b(c)", "w(c)"])))
        goal = F(rng.choice(["~w(c)", "w(c)", "b(c)"]))
    small = KnowledgeBase(tuple(facts), tuple(rules))
    large = KnowledgeBase(tuple(facts + extra), tuple(rules))
    return small, large, goal


@criterion("09 property suites: monotonicity, witness, eps, round-trip, match soundness")
def test_criterion_09_property_suites():
    rng = random.Random(20240901)

    checked = 0
    while checked < MONOTONICITY_KBS:
        try:
            small, large, goal = _monotonicity_case(rng)
        except InconsistentKnowledgeBase:
            continue
        if classical_entails(small, goal):
            assert classical_entails(large, goal)
        checked += 1

    swans = parse_kb((DATA / "swans.kb").read_text())
    only_default = parse_kb("default swan(X) ~> white(X) [0.99].")
    assert F("white(s)") in defeasible_infer(only_default, {F("swan(s)")})
    assert F("white(s)") not in defeasible_infer(swans, {F("swan(s)"), F("black(s)")})

    for _ in range(EPSILON_PAIRS):
        p = rng.random()
        e1, e2 = sorted(rng.uniform(1e-9, 1 - 1e-9) for _ in range(2))
        if threshold_infer(p, ThresholdConfig(e1)):
            assert threshold_infer(p, ThresholdConfig(e2))
        kb = KnowledgeBase(stats={("white", "swan"): p})
        if defeasible_entails(kb, F("swan(s)"), F("white(s)"), ThresholdConfig(e1)).holds:
            assert defeasible_entails(kb, F("swan(s)"), F("white(s)"), ThresholdConfig(e2)).holds

    for _ in range(ROUND_TRIP_TREES):
        tree = random_tree(rng, ROUND_TRIP_DEPTH)
        assert parse_formula(render(tree)) == tree

    for _ in range(MATCH_INSTANCES):
        schema, sigma = random_schema_instance(rng)
        inf = apply_substitution(schema, sigma)
        result = match_inference(inf, schema)
        assert result.matched and apply_substitution(schema, result.substitution) == inf


@criterion("10 permitted closure depth 1 exact; depth 2 matches brute force")
def test_criterion_10_closure():
    facts, vocab = [F("A")], [F("B"), F("C")]
    depth1 = permitted_closure(facts, vocab, 1)
    assert depth1.formulas == {F("A"), F("A & A"), F("A | B"), F("A | C")}
    expected = len(closure_strings(["A"], ["B", "C"], 2))
    assert expected == 13
    assert permitted_closure(facts, vocab, 2).cardinality == expected


def test_base_schema_bounded_validity_oracle():
    # supporting check for criterion 2: the base schema is ValidUpToBound(3)
    assert monadic_countermodels("base", 3) == (228, 0)
    report = validate_schema(parse_schema("?F(?a), ?G(?a) / exists X. (?F(X) & ?G(X))"), 3)
    assert report.status is ValidityStatus.VALID_UP_TO_BOUND


def test_negated_goal_is_not_entailed_by_swan_kb():
    # supporting check for criterion 4: the KB alone does not refute white(s)
    kb = parse_kb((DATA / "swans.kb").read_text())
    assert not classical_entails(kb, Not(F("white(s)")))
