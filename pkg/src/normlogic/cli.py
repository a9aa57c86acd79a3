"""Command-line entry point.

Every report starts with a ``#`` manifest header (tool version, input files
with SHA-256 digests, option echo), then the human-readable body, then a
``---`` line followed by machine-readable ``key=value`` lines.

Exit codes: 0 success, 1 negative logical answer, 2 input or syntax error,
3 enumeration budget exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .entailment import (DEFAULT_CLOSURE_CAP, DEFAULT_EPSILON, KnowledgeBase,
                         KnowledgeBaseError, ProbabilityError, ThresholdConfig,
                         bayes, classical_entails, defeasible_entails,
                         forward_chain, parse_kb, permitted_closure,
                         threshold_infer)
from .game import GameConfigError, format_result, parse_game_config, run_game
from .matching import (MatchResult, SchemaLibrary, apprehend, explain_failures,
                       parse_library, validate_schema)
from .norms import (BeliefState, BeliefStateError, RuleSyntaxError, VerdictKind,
                    apply_rule_system, bridge_table, candidate_conclusions,
                    extended_bridge_verdict, nonmr_verdict, parse_beliefs,
                    parse_evidence_list, parse_rules)
from .semantics import DEFAULT_BOUND, DEFAULT_BUDGET_CAP, BudgetExceeded
from .syntax import (FormulaError, parse_formula, parse_formula_list,
                     parse_inference, parse_schema, render)

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class InputError(Exception):
    pass


@dataclass
class Report:
    command: str
    options: dict[str, object]
    inputs: list[tuple[str, str]] = field(default_factory=list)
    body: list[str] = field(default_factory=list)
    pairs: list[tuple[str, str]] = field(default_factory=list)

    def read(self, path: str) -> str:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from exc
        self.inputs.append((path, hashlib.sha256(data).hexdigest()))
        return data.decode("utf-8")

    def add_input(self, path: Path, shown: str):
        self.inputs.append((shown, hashlib.sha256(path.read_bytes()).hexdigest()))

    def line(self, text: str = ""):
        self.body.append(text)

    def kv(self, key: str, value: object):
        if isinstance(value, bool):
            value = "true" if value else "false"
        self.pairs.append((key, str(value)))

    def text(self) -> str:
        out = [f"# normlogic {__version__}", f"# command: {self.command}"]
        out += [f"# input: {p} sha256={d}" for p, d in self.inputs]
        echo = " ".join(f"{k}={_echo(v)}" for k, v in sorted(self.options.items()))
        out.append(f"# options: {echo}")
        out += self.body
        out.append("---")
        out += [f"{k}={v}" for k, v in self.pairs]
        return "\n".join(out) + "\n"


def _echo(v: object) -> str:
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(repr(x) for x in v) + "]"
    return repr(v) if isinstance(v, str) else str(v)


def _formulas(items: Sequence[str] | None) -> list:
    out = []
    for item in items or ():
        out.extend(parse_formula_list(item))
    return out


def _bound(args) -> int:
    return args.bound if args.bound is not None else DEFAULT_BOUND


def _cap(args, default: int = DEFAULT_BUDGET_CAP) -> int:
    return args.budget_cap if args.budget_cap is not None else default


def _threshold(args) -> ThresholdConfig:
    return ThresholdConfig(args.epsilon if args.epsilon is not None else DEFAULT_EPSILON)


def _load_kb(report: Report, args, path: str | None) -> KnowledgeBase:
    if path is None:
        return KnowledgeBase(bound=_bound(args), cap=_cap(args))
    return parse_kb(report.read(path), _bound(args), _cap(args))


def _beliefs(report: Report, args) -> BeliefState:
    attitudes = {}
    if getattr(args, "beliefs", None):
        attitudes.update(parse_beliefs(report.read(args.beliefs)).attitudes)
    extra = BeliefState.of(_formulas(getattr(args, "believe", None)),
                           _formulas(getattr(args, "disbelieve", None)))
    for f, a in extra.attitudes.items():
        if attitudes.setdefault(f, a) is not a:
            raise BeliefStateError(f"{render(f)} assigned both {attitudes[f].value} and {a.value}")
    return BeliefState(attitudes)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_parse(args, report: Report) -> int:
    text = report.read(args.file) if args.file else args.text
    if text is None:
        raise InputError("give a formula or --file")
    value = parse_schema(text) if args.schema else parse_formula(text)
    shown = render(value, pretty=args.pretty)
    report.line(shown)
    report.kv("kind", "schema" if args.schema else "formula")
    report.kv("canonical", render(value))
    return EXIT_OK


def cmd_match(args, report: Report) -> int:
    inf = parse_inference(report.read(args.inference))
    lib = SchemaLibrary.from_text(report.read(args.library), _bound(args), _cap(args))
    report.line(f"inference: {render(inf)}")
    found = apprehend(inf, lib, injective=args.injective)
    for a in found:
        order = ",".join(str(i + 1) for i in a.premise_order)
        report.line(f"matched {a.schema_id}: {a.substitution} (premise order {order}; "
                    f"{lib[a.schema_id].validity})")
    if not found:
        report.line("not transparent: no library schema matches")
        for schema_id, result in explain_failures(inf, lib, injective=args.injective):
            report.line(f"  {schema_id}: {result.failure}")
            report.kv(f"failure.{schema_id}", result.failure)
    report.kv("transparent", bool(found))
    report.kv("matched", ",".join(a.schema_id for a in found))
    for a in found:
        report.kv(f"substitution.{a.schema_id}", a.substitution)
    return EXIT_OK if found else EXIT_NO


def cmd_validate(args, report: Report) -> int:
    schemas = []
    if args.library:
        schemas = parse_library(report.read(args.library))
    if args.schema:
        schemas.append(("schema", parse_schema(args.schema)))
    if not schemas:
        raise InputError("give a schema or --library")
    ok = True
    for schema_id, s in schemas:
        v = validate_schema(s, _bound(args), _cap(args))
        ok &= v.valid
        report.line(f"{schema_id}: {render(s)}")
        report.line(f"  {v}")
        report.kv(f"{schema_id}.status", v.status.value)
        report.kv(f"{schema_id}.method", v.method)
        if v.countermodel is not None:
            report.kv(f"{schema_id}.countermodel", v.countermodel.describe())
    return EXIT_OK if ok else EXIT_NO


def cmd_entail(args, report: Report) -> int:
    kb = _load_kb(report, args, args.kb)
    goal = parse_formula(args.goal)
    assumed = _formulas(args.assume)
    result = classical_entails(kb, goal, assumed)
    report.line(f"goal: {render(goal)}")
    if assumed:
        report.line("assuming: " + ", ".join(render(f) for f in assumed))
    report.line(f"classically entailed: {'yes' if result else 'no'}")
    report.kv("entailed", result)
    return EXIT_OK if result else EXIT_NO


def cmd_defeasible(args, report: Report) -> int:
    kb = _load_kb(report, args, args.kb)
    if args.antecedent or args.consequent:
        if not (args.antecedent and args.consequent):
            raise InputError("--antecedent and --consequent go together")
        a, x = parse_formula(args.antecedent), parse_formula(args.consequent)
        res = defeasible_entails(kb, a, x, _threshold(args))
        report.line(f"{render(a)} |~ {render(x)}: {res.status.value} ({res.provenance})")
        report.kv("status", res.status.value)
        report.kv("provenance", res.provenance)
        return EXIT_OK if res.holds else EXIT_NO
    proven = _formulas(args.proven)
    d = forward_chain(kb, proven)
    report.line("proven: " + (", ".join(render(f) for f in proven) or "(none)"))
    for entry in d.audit:
        report.line(f"  {entry}")
    derived = sorted(render(f) for f in d.derived)
    report.line("derived: " + (", ".join(derived) or "(none)"))
    report.kv("derived", ";".join(derived))
    report.kv("passes", d.passes)
    return EXIT_OK


def cmd_bayes(args, report: Report) -> int:
    posterior = bayes(args.prior, args.likelihood, args.marginal)
    report.line(f"P(x|A) = ({args.likelihood:g} * {args.prior:g}) / {args.marginal:g} "
                f"= {posterior:.12g}")
    report.kv("posterior", repr(posterior))
    if args.infer:
        cfg = _threshold(args)
        inferred = threshold_infer(posterior, cfg)
        report.line(f"threshold {cfg.threshold:g}: {'infer' if inferred else 'do not infer'}")
        report.kv("infer", inferred)
        return EXIT_OK if inferred else EXIT_NO
    return EXIT_OK


def cmd_closure(args, report: Report) -> int:
    facts = _formulas(args.facts)
    vocab = _formulas(args.vocab)
    result = permitted_closure(facts, vocab, args.depth, _cap(args, DEFAULT_CLOSURE_CAP))
    report.line(f"depth {args.depth}: {result.cardinality} formulas "
                f"(per depth: {', '.join(map(str, result.sizes))})")
    if not args.count_only:
        for f in result.sorted():
            report.line(f"  {render(f)}")
    report.kv("cardinality", result.cardinality)
    report.kv("sizes", ",".join(map(str, result.sizes)))
    if args.figure:
        from .plotting import plot_closure_growth
        report.kv("figure", plot_closure_growth(result.sizes, args.figure))
    return EXIT_OK


def cmd_verdict(args, report: Report) -> int:
    if args.rules:
        rs = parse_rules(report.read(args.rules))
        evidence = parse_evidence_list(" & ".join(args.evidence or []))
        outcome = apply_rule_system(rs, evidence)
        for v in outcome.verdicts:
            report.line(f"{v} by {v.rule} [{'; '.join(v.conditions)}]")
        for c in outcome.conflicts:
            report.line(c)
        if not outcome.verdicts and not outcome.conflicts:
            report.line("no rule fired")
        report.kv("verdicts", ";".join(str(v) for v in outcome.verdicts))
        report.kv("conflicts", len(outcome.conflicts))
        return EXIT_OK if outcome.verdicts else EXIT_NO

    bs = _beliefs(report, args)
    if args.library:
        inf = parse_inference(report.read(args.inference))
        lib = SchemaLibrary.from_text(report.read(args.library), _bound(args), _cap(args))
        report.line(f"inference: {render(inf)}")
        verdicts = []
        found = apprehend(inf, lib, injective=args.injective)
        for a in found:
            verdicts.append((a.schema_id, extended_bridge_verdict(
                lib[a.schema_id].validity, MatchResult(substitution=a.substitution),
                inf.premises, inf.conclusion, bs)))
        if not found:
            for schema_id, m in explain_failures(inf, lib, injective=args.injective):
                verdicts.append((schema_id, extended_bridge_verdict(
                    lib[schema_id].validity, m, inf.premises, inf.conclusion, bs)))
        obliged = False
        for schema_id, v in verdicts:
            report.line(f"{schema_id}: {v} [{'; '.join(v.conditions)}]")
            report.kv(f"verdict.{schema_id}", v)
            obliged |= v.is_obligation
        return EXIT_OK if obliged else EXIT_NO

    if not args.kb:
        raise InputError("verdict needs --kb, --library with --inference, or --rules")
    kb = _load_kb(report, args, args.kb)
    info = _formulas(args.info)
    cfg = _threshold(args)
    if args.antecedent:
        antecedents = [parse_formula(args.antecedent)]
    else:
        antecedents = sorted((f for f, a in bs.attitudes.items() if bs.believes(f)), key=render)
    variants = ["+", "-"] if args.variant == "both" else [args.variant]
    any_norm = False
    n = 0
    for a in antecedents:
        conclusions = [parse_formula(args.conclusion)] if args.conclusion else \
            candidate_conclusions(kb, a)
        for x in conclusions:
            for variant in variants:
                n += 1
                v = nonmr_verdict(kb, a, x, bs, info, variant, cfg)
                status = ""
                if v.kind is not VerdictKind.NO_VERDICT:
                    any_norm = True
                    status = " (breached)" if v.breached else (
                        " (in force)" if v.active else " (conditional)")
                report.line(f"NonMR{variant} {render(a)} |~ {render(x)}: {v}{status}")
                for c in v.conditions:
                    report.line(f"  {c}")
                report.kv(f"verdict.{n}", v)
                report.kv(f"verdict.{n}.breached", v.breached)
    if n == 0:
        report.line("no candidate conclusions for the believed formulas")
    return EXIT_OK if any_norm else EXIT_NO


def cmd_bridge_table(args, report: Report) -> int:
    bs = _beliefs(report, args)
    premises = parse_formula_list(args.premises)
    conclusion = parse_formula(args.conclusion)
    rows = bridge_table(premises, conclusion, bs, _formulas(args.obligations),
                        _formulas(args.defeaters))
    report.line(f"premises: {', '.join(render(p) for p in premises)}; "
                f"conclusion: {render(conclusion)}")
    report.line(f"{'form':<6}{'status':<20}witness")
    for r in rows:
        report.line(f"{r.form.name:<6}{r.status.value:<20}{r.describe_witness()}")
        report.kv(r.form.name, r.status.value)
    if args.figure:
        from .plotting import plot_bridge_matrix
        report.kv("figure", plot_bridge_matrix(rows, args.figure))
    return EXIT_OK


def cmd_simulate(args, report: Report) -> int:
    path = Path(args.config)
    text = report.read(args.config)
    try:
        loaded = parse_game_config(text, path.parent, args.epsilon)
    except KnowledgeBaseError as exc:
        raise InputError(str(exc)) from exc
    for kb_path in loaded.inputs:
        report.add_input(kb_path, _display(kb_path))
    result = run_game(loaded.config)
    lines, pairs = format_result(result)
    for line in lines:
        report.line(line)
    for k, v in pairs:
        report.kv(k, v)
    if args.figure:
        from .plotting import plot_game
        report.kv("figure", plot_game(result, args.figure))
    return EXIT_OK


def _display(path: Path) -> str:
    try:
        return str(path.relative_to(Path.cwd().resolve()))
    except ValueError:
        return str(path)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _global_flags(parser: argparse.ArgumentParser, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--bound", type=int, default=default,
                        help=f"model-checking domain bound (default {DEFAULT_BOUND})")
    parser.add_argument("--epsilon", type=float, default=default,
                        help=f"threshold slack; infer at >= 1 - epsilon (default {DEFAULT_EPSILON})")
    parser.add_argument("--budget-cap", type=int, default=default,
                        help="enumeration guard: maximum interpretations or closure size")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="normlogic", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"normlogic {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func: Callable, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, description=help_text)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("parse", cmd_parse, "parse and print a formula or schema in canonical form")
    p.add_argument("text", nargs="?")
    p.add_argument("--file")
    p.add_argument("--schema", action="store_true")
    p.add_argument("--pretty", action="store_true", help="print with logical glyphs")

    p = add("match", cmd_match, "match an inference against a schema library")
    p.add_argument("inference", help="file holding 'premise, ... / conclusion'")
    p.add_argument("library", help="file of 'id : schema' lines")
    p.add_argument("--injective", action="store_true")

    p = add("validate-schema", cmd_validate, "check schema validity by truth tables or small models")
    p.add_argument("schema", nargs="?")
    p.add_argument("--library")

    p = add("entail", cmd_entail, "classical entailment from a knowledge base")
    p.add_argument("goal")
    p.add_argument("--kb")
    p.add_argument("--assume", action="append", help="extra premise (repeatable)")

    p = add("defeasible", cmd_defeasible, "forward-chain defaults or query a |~ x")
    p.add_argument("--kb", required=True)
    p.add_argument("--proven", action="append")
    p.add_argument("--antecedent")
    p.add_argument("--consequent")

    p = add("bayes", cmd_bayes, "posterior P(x|A) from prior, likelihood and marginal")
    p.add_argument("prior", type=float)
    p.add_argument("likelihood", type=float)
    p.add_argument("marginal", type=float)
    p.add_argument("--infer", action="store_true", help="also apply the threshold rule")

    p = add("closure", cmd_closure, "trivially permitted inferences up to a depth")
    p.add_argument("--facts", action="append", required=True)
    p.add_argument("--vocab", action="append", default=[])
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--figure")

    p = add("verdict", cmd_verdict, "NonMR+/- verdicts, extended bridge verdicts, or rule-system output")
    p.add_argument("--kb")
    p.add_argument("--beliefs")
    p.add_argument("--believe", action="append")
    p.add_argument("--disbelieve", action="append")
    p.add_argument("--info", action="append", help="available information (repeatable)")
    p.add_argument("--antecedent")
    p.add_argument("--conclusion")
    p.add_argument("--variant", choices=["+", "-", "both"], default="+")
    p.add_argument("--library")
    p.add_argument("--inference")
    p.add_argument("--injective", action="store_true")
    p.add_argument("--rules")
    p.add_argument("--evidence", action="append")

    p = add("bridge-table", cmd_bridge_table, "evaluate all 18 bridge-principle forms")
    p.add_argument("--beliefs")
    p.add_argument("--believe", action="append")
    p.add_argument("--disbelieve", action="append")
    p.add_argument("--premises", required=True)
    p.add_argument("--conclusion", required=True)
    p.add_argument("--obligations", action="append")
    p.add_argument("--defeaters", action="append")
    p.add_argument("--figure")

    p = add("simulate", cmd_simulate, "run the knowledge game")
    p.add_argument("--config", required=True)
    p.add_argument("--figure")
    p.add_argument("--seedless", action="store_true",
                   help="accepted for scripts; the simulation never samples")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    options = {k: v for k, v in vars(args).items()
               if k not in ("func", "command") and v not in (None, False, [])}
    report = Report(args.command, options)
    try:
        code = args.func(args, report)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, FormulaError, KnowledgeBaseError, BeliefStateError, RuleSyntaxError,
            GameConfigError, ProbabilityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(report.text())
    return code


if __name__ == "__main__":
    sys.exit(main())
