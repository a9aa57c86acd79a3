import itertools
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from generators import random_schema_instance
from normlogic.entailment import ThresholdConfig, parse_kb
from normlogic.matching import (MatchFailure, MatchResult, ValidityReport, ValidityStatus,
                                match_inference, validate_schema)
from normlogic.norms import (Attitude, BeliefState, BeliefStateError, BridgeForm,
                             Compliance, Modality, Polarity, Scope, VerdictKind,
                             all_belief_states, apply_rule_system, bridge_table,
                             candidate_conclusions, enumerate_bridge_forms, evaluate_bridge,
                             extended_bridge_verdict, nonmr_verdict, parse_beliefs,
                             parse_evidence_list, parse_rules)
from normlogic.syntax import apply_substitution, parse_formula, parse_inference, parse_schema

DATA = Path(__file__).resolve().parent.parent / "data"
F = parse_formula
A, B, C = F("A"), F("B"), F("C")
ALL_STATES = list(all_belief_states([A, B, C]))


def form(name):
    return BridgeForm.parse(name)


# --- bridge forms ------------------------------------------------------------


def test_eighteen_forms_in_order():
    forms = enumerate_bridge_forms()
    assert len(forms) == 18 == len(set(forms))
    assert forms[0].name == "Co+"
    assert forms[-1].name == "Wr-"
    names = [f.name for f in forms]
    assert "Wo-" in names and "Wr+" in names
    assert names[:6] == ["Co+", "Co-", "Cp+", "Cp-", "Cr+", "Cr-"]


def test_parse_accepts_unicode_minus():
    assert form("Wo−") == form("Wo-") == BridgeForm(Scope.W, Modality.O, Polarity.NEG)


@pytest.mark.parametrize("name,att_c,defeaters,expected", [
    ("Wo-", Attitude.DISBELIEVE, (), Compliance.VIOLATED),
    ("Wo-", Attitude.SUSPEND, (), Compliance.SATISFIED),
    ("Co+", Attitude.SUSPEND, (), Compliance.VIOLATED),
    ("Wr+", Attitude.SUSPEND, (C,), Compliance.NOT_APPLICABLE),
    ("Wr+", Attitude.SUSPEND, (), Compliance.REASON_GENERATED),
    ("Cp+", Attitude.DISBELIEVE, (), Compliance.PERMISSION_GRANTED),
])
def test_bridge_examples(name, att_c, defeaters, expected):
    bs = BeliefState({A: Attitude.BELIEVE, B: Attitude.BELIEVE, C: att_c})
    assert evaluate_bridge(form(name), [A, B], C, bs, defeaters=defeaters).status is expected


def test_c_scope_not_applicable_without_premise_beliefs():
    bs = BeliefState({A: Attitude.BELIEVE, C: Attitude.DISBELIEVE})
    assert evaluate_bridge(form("Co+"), [A, B], C, bs).status is Compliance.NOT_APPLICABLE


def test_b_scope_uses_obligation_set():
    bs = BeliefState({C: Attitude.SUSPEND})
    assert evaluate_bridge(form("Bo+"), [A, B], C, bs).status is Compliance.NOT_APPLICABLE
    assert evaluate_bridge(form("Bo+"), [A, B], C, bs,
                           obligations={A, B}).status is Compliance.VIOLATED
    assert evaluate_bridge(form("Bo-"), [A, B], C, bs,
                           obligations={A, B}).status is Compliance.SATISFIED


def test_witness_records_attitudes():
    bs = parse_beliefs((DATA / "bridge.txt").read_text())
    r = evaluate_bridge(form("Wo-"), [A, B], C, bs)
    assert r.witness == ((A, Attitude.BELIEVE), (B, Attitude.BELIEVE), (C, Attitude.DISBELIEVE))


def test_permissions_and_reasons_never_violated_exhaustive():
    forms = [f for f in enumerate_bridge_forms() if f.modality is not Modality.O]
    for bs, f, defeat, obl in itertools.product(ALL_STATES, forms, ((), (C,)), ((), (A, B))):
        assert evaluate_bridge(f, [A, B], C, bs, obl, defeat).status is not Compliance.VIOLATED


def test_wo_minus_strictly_weaker_than_wo_plus():
    def violated(name):
        return {i for i, bs in enumerate(ALL_STATES)
                if evaluate_bridge(form(name), [A, B], C, bs).status is Compliance.VIOLATED}
    weak, strong = violated("Wo-"), violated("Wo+")
    assert weak < strong
    suspend_c = BeliefState({A: Attitude.BELIEVE, B: Attitude.BELIEVE})
    assert evaluate_bridge(form("Wo+"), [A, B], C, suspend_c).status is Compliance.VIOLATED
    assert evaluate_bridge(form("Wo-"), [A, B], C, suspend_c).status is Compliance.SATISFIED


def test_wide_scope_obligation_is_material_conditional():
    for bs in ALL_STATES:
        a, b, c = (bs.attitude(x) for x in (A, B, C))
        antecedent = a is Attitude.BELIEVE and b is Attitude.BELIEVE
        for pol, consequent in ((Polarity.POS, c is Attitude.BELIEVE),
                                (Polarity.NEG, c is not Attitude.DISBELIEVE)):
            expected = Compliance.SATISFIED if (not antecedent or consequent) else Compliance.VIOLATED
            got = evaluate_bridge(BridgeForm(Scope.W, Modality.O, pol), [A, B], C, bs).status
            assert got is expected


def test_bridge_table_rows():
    bs = parse_beliefs((DATA / "bridge.txt").read_text())
    table = {r.form.name: r.status for r in bridge_table([A, B], C, bs, defeaters=[C])}
    assert len(table) == 18
    assert table["Wo-"] is Compliance.VIOLATED
    assert table["Wr+"] is Compliance.NOT_APPLICABLE


# --- belief states -----------------------------------------------------------


def test_belief_state_default_is_suspend():
    assert BeliefState().attitude(A) is Attitude.SUSPEND


def test_belief_state_rejects_double_attitude():
    with pytest.raises(BeliefStateError):
        BeliefState.of(believe=[A], disbelieve=[A])
    with pytest.raises(BeliefStateError):
        parse_beliefs("believe p.\nsuspend p.\n")


def test_parse_beliefs():
    bs = parse_beliefs((DATA / "beliefs3.txt").read_text())
    assert bs.believes(F("cicero = tully"))


# --- extended bridge ---------------------------------------------------------


ENRICHED = parse_schema("?F(?a), ?G(?b), ?a = ?b / exists X. (?F(X) & ?G(X))")
BASE = parse_schema("?F(?a), ?G(?a) / exists X. (?F(X) & ?G(X))")
INF1 = parse_inference("talked(cicero), walked(tully) / exists X. (talked(X) & walked(X))")
INF3 = parse_inference(
    "talked(cicero), walked(tully), cicero = tully / exists X. (talked(X) & walked(X))")


def test_extended_bridge_obliges_for_inference_three():
    bs = parse_beliefs((DATA / "beliefs3.txt").read_text())
    v = extended_bridge_verdict(validate_schema(ENRICHED), match_inference(INF3, ENRICHED),
                                INF3.premises, INF3.conclusion, bs)
    assert v.kind is VerdictKind.OBLIGED_TO_BELIEVE
    assert v.formula == F("exists X. (talked(X) & walked(X))")


def test_extended_bridge_opaque_inference_one():
    bs = BeliefState.of(believe=INF1.premises)
    v = extended_bridge_verdict(validate_schema(BASE), match_inference(INF1, BASE),
                                INF1.premises, INF1.conclusion, bs)
    assert v.kind is VerdictKind.NO_VERDICT
    assert "not transparent" in v.conditions[0]


def test_extended_bridge_suspended_premise():
    bs = BeliefState.of(believe=INF3.premises[:2])
    v = extended_bridge_verdict(validate_schema(ENRICHED), match_inference(INF3, ENRICHED),
                                INF3.premises, INF3.conclusion, bs)
    assert v.kind is VerdictKind.NO_VERDICT


def test_extended_bridge_invalid_schema():
    s = parse_schema("?F(?a) / ?G(?a)")
    inf = parse_inference("p(c) / q(c)")
    v = extended_bridge_verdict(validate_schema(s), match_inference(inf, s), inf.premises,
                                inf.conclusion, BeliefState.of(believe=inf.premises))
    assert v.kind is VerdictKind.NO_VERDICT


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(list(Attitude)))
def test_transparency_gate(seed, att):
    schema, sigma = random_schema_instance(random.Random(seed))
    inf = apply_substitution(schema, sigma)
    failed = MatchResult(failure=MatchFailure("premise 1", "x", "y", "forced failure"))
    bs = BeliefState({p: att for p in inf.premises})
    for validity in (ValidityReport(ValidityStatus.VALID, "truth-table"),
                     ValidityReport(ValidityStatus.VALID_UP_TO_BOUND, "small-model", 3)):
        v = extended_bridge_verdict(validity, failed, inf.premises, inf.conclusion, bs)
        assert not v.is_obligation


# --- NonMR -------------------------------------------------------------------


@pytest.fixture(scope="module")
def swans():
    return parse_kb((DATA / "swans.kb").read_text())


def test_nonmr_plus(swans):
    bs = BeliefState.of(believe=[F("swan(s)")])
    v = nonmr_verdict(swans, F("swan(s)"), F("white(s)"), bs, (), "+")
    assert v.kind is VerdictKind.OBLIGED_TO_BELIEVE and v.formula == F("white(s)")
    assert v.active and v.breached
    assert str(v) == "ObligedToBelieve(white(s))"


def test_nonmr_plus_defeated(swans):
    bs = BeliefState.of(believe=[F("swan(s)")])
    v = nonmr_verdict(swans, F("swan(s)"), F("white(s)"), bs, [F("black(s)")], "+")
    assert v.kind is VerdictKind.NO_VERDICT


def test_nonmr_minus_breached(swans):
    bs = BeliefState.of(believe=[F("swan(s)")], disbelieve=[F("white(s)")])
    v = nonmr_verdict(swans, F("swan(s)"), F("white(s)"), bs, (), "-")
    assert v.kind is VerdictKind.PROHIBITED_COMBINATION and v.breached


def test_nonmr_minus_respected(swans):
    bs = BeliefState.of(believe=[F("swan(s)"), F("white(s)")])
    v = nonmr_verdict(swans, F("swan(s)"), F("white(s)"), bs, (), "-")
    assert v.kind is VerdictKind.PROHIBITED_COMBINATION and not v.breached


def test_nonmr_statistical_below_threshold():
    kb = parse_kb("stat white|swan = 0.9.")
    v = nonmr_verdict(kb, F("swan(s)"), F("white(s)"), BeliefState(), (), "+", ThresholdConfig(0.01))
    assert v.kind is VerdictKind.NO_VERDICT


def test_candidate_conclusions(swans):
    assert candidate_conclusions(swans, F("swan(s)")) == [F("white(s)")]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(["black(s)", "swan(s)", "white(t)", "black(t)"]), max_size=3),
       st.sampled_from(["+", "-"]))
def test_defeaters_never_create_obligations(info, variant):
    kb = parse_kb((DATA / "swans.kb").read_text())
    bs = BeliefState.of(believe=[F("swan(s)")])
    base = [F(t) for t in info]
    before = nonmr_verdict(kb, F("swan(s)"), F("white(s)"), bs, base, variant)
    after = nonmr_verdict(kb, F("swan(s)"), F("white(s)"), bs, [*base, F("black(s)")], variant)
    assert not (after.is_obligation and not before.is_obligation)
    assert after.kind is VerdictKind.NO_VERDICT


# --- rule system -------------------------------------------------------------


@pytest.fixture(scope="module")
def experts():
    return parse_rules((DATA / "experts.rules").read_text())


def test_expert_rule_fires(experts):
    out = apply_rule_system(experts, parse_evidence_list(
        "expert-testimony(white(s)) & reliable(expert)"))
    assert [(v.kind, v.formula) for v in out.verdicts] == [(VerdictKind.INFER, F("white(s)"))]
    assert out.verdicts[0].rule == "expert-rule"


def test_expert_rule_needs_reliability(experts):
    out = apply_rule_system(experts, parse_evidence_list("expert-testimony(white(s))"))
    assert out.verdicts == () and out.conflicts == ()


def test_conflicting_experts_suppressed(experts):
    ev = parse_evidence_list("testimony(e1, white(s)) & reliable(e1) & "
                             "testimony(e2, ~white(s)) & reliable(e2)")
    out = apply_rule_system(experts, ev)
    assert out.verdicts == ()
    assert len(out.conflicts) == 1 and "white(s)" in out.conflicts[0]


def test_rule_names_unique():
    with pytest.raises(ValueError):
        parse_rules("r: when a(p) then infer p.\nr: when b(p) then infer q.\n")


def test_oblige_and_prohibit_actions():
    rs = parse_rules("when a(p) then oblige q.\nwhen a(p) then prohibit r.")
    kinds = [v.kind for v in apply_rule_system(rs, parse_evidence_list("a(p)")).verdicts]
    assert kinds == [VerdictKind.OBLIGED_TO_BELIEVE, VerdictKind.PROHIBIT]
