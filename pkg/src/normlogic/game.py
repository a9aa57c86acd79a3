"""The swan knowledge game.

A world holds an exact number of individuals with and without some
attribute. Agents share (or not) a knowledge base, may observe a limited
number of individuals, and must guess the attribute of everyone else.
Classical agents abstain when they cannot observe; nonmonotonic agents
guess positive when their statistics clear the threshold. Scoring is net:
right answers minus wrong ones, abstentions count zero.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .entailment import KnowledgeBase, ThresholdConfig, parse_kb, threshold_infer

DRAW = "draw"


class Guess(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    ABSTAIN = "abstain"


class Logic(enum.Enum):
    CLASSICAL = "classical"
    NONMONOTONIC = "nonmonotonic"


class GameConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DomainWorld:
    positive: int
    negative: int
    attribute: str = "white"
    kind: str = "swan"

    def __post_init__(self):
        if self.positive < 0 or self.negative < 0:
            raise GameConfigError("world counts must be non-negative")

    @property
    def population(self) -> int:
        return self.positive + self.negative

    def individuals(self) -> list[bool]:
        """Canonical ordering: positives first."""
        return [True] * self.positive + [False] * self.negative


def build_world(positive_count: int, negative_count: int, attribute: str = "white",
                kind: str = "swan") -> DomainWorld:
    return DomainWorld(positive_count, negative_count, attribute, kind)


@dataclass(frozen=True)
class AgentSpec:
    name: str
    logic: Logic
    kb: KnowledgeBase
    budget: int = 0
    threshold: ThresholdConfig = ThresholdConfig()
    hedge: int = 0
    """Unobserved individuals a nonmonotonic agent deliberately abstains on."""

    def __post_init__(self):
        if self.budget < 0 or self.hedge < 0:
            raise GameConfigError(f"agent {self.name}: budget and hedge must be >= 0")


@dataclass(frozen=True)
class GuessVector:
    guesses: tuple[Guess, ...]
    notes: tuple[str, ...] = ()

    def count(self, g: Guess) -> int:
        return self.guesses.count(g)


def agent_guess(spec: AgentSpec, world: DomainWorld) -> GuessVector:
    """One guess per individual in canonical order.

    The first ``budget`` individuals are observed. The rest are guessed from
    the KB alone: the agent never sees the world's counts.
    """
    truth = world.individuals()
    observed = min(spec.budget, world.population)
    guesses = [Guess.POSITIVE if t else Guess.NEGATIVE for t in truth[:observed]]
    remaining = world.population - observed
    notes: list[str] = []
    if spec.logic is Logic.CLASSICAL:
        fill = Guess.ABSTAIN
    else:
        key = (world.attribute, world.kind)
        p = spec.kb.stats.get(key)
        if p is None:
            notes.append(f"no statistic {key[0]}|{key[1]} in knowledge base; abstaining")
            fill = Guess.ABSTAIN
        elif threshold_infer(p, spec.threshold):
            fill = Guess.POSITIVE
        else:
            notes.append(f"{key[0]}|{key[1]} = {p:g} below threshold "
                         f"{spec.threshold.threshold:g}; abstaining")
            fill = Guess.ABSTAIN
    hedged = min(spec.hedge, remaining) if fill is Guess.POSITIVE else 0
    guesses += [Guess.ABSTAIN] * hedged + [fill] * (remaining - hedged)
    return GuessVector(tuple(guesses), tuple(notes))


@dataclass(frozen=True)
class Score:
    correct: int
    errors: int
    abstained: int

    @property
    def net(self) -> int:
        return self.correct - self.errors


def score(guesses: GuessVector | Sequence[Guess], world: DomainWorld) -> Score:
    """Net scoring; guesses align with the world's canonical ordering."""
    gs = guesses.guesses if isinstance(guesses, GuessVector) else tuple(guesses)
    if len(gs) != world.population:
        raise ValueError(f"{len(gs)} guesses for a population of {world.population}")
    correct = errors = abstained = 0
    for g, truth in zip(gs, world.individuals()):
        if g is Guess.ABSTAIN:
            abstained += 1
        elif (g is Guess.POSITIVE) == truth:
            correct += 1
        else:
            errors += 1
    return Score(correct, errors, abstained)


@dataclass(frozen=True)
class GameConfig:
    world: DomainWorld
    agents: tuple[AgentSpec, ...]
    shift: DomainWorld | None = None
    knowledge_invariance: bool = True

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        if not self.agents:
            raise GameConfigError("a game needs at least one agent")
        names = [a.name for a in self.agents]
        if len(set(names)) != len(names):
            raise GameConfigError(f"agent names must be unique: {names}")
        if self.knowledge_invariance and any(a.kb != self.agents[0].kb for a in self.agents):
            raise GameConfigError("knowledge invariance requires identical knowledge bases")
        for w in filter(None, (self.world, self.shift)):
            for a in self.agents:
                if a.budget > w.population:
                    raise GameConfigError(
                        f"agent {a.name}: budget {a.budget} exceeds population {w.population}")


@dataclass(frozen=True)
class AgentOutcome:
    name: str
    logic: Logic
    positive: int
    negative: int
    abstained: int
    score: Score
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class PhaseResult:
    label: str
    world: DomainWorld
    outcomes: tuple[AgentOutcome, ...]
    winner: str

    def outcome(self, name: str) -> AgentOutcome:
        return next(o for o in self.outcomes if o.name == name)


@dataclass(frozen=True)
class GameResult:
    phases: tuple[PhaseResult, ...]

    @property
    def base(self) -> PhaseResult:
        return self.phases[0]

    @property
    def shifted(self) -> PhaseResult | None:
        return self.phases[1] if len(self.phases) > 1 else None


def _winner(outcomes: Sequence[AgentOutcome]) -> str:
    best = max(o.score.net for o in outcomes)
    leaders = [o.name for o in outcomes if o.score.net == best]
    return leaders[0] if len(leaders) == 1 else DRAW


def play(agents: Sequence[AgentSpec], world: DomainWorld, label: str = "base") -> PhaseResult:
    outcomes = []
    for a in agents:
        gv = agent_guess(a, world)
        outcomes.append(AgentOutcome(a.name, a.logic, gv.count(Guess.POSITIVE),
                                     gv.count(Guess.NEGATIVE), gv.count(Guess.ABSTAIN),
                                     score(gv, world), gv.notes))
    return PhaseResult(label, world, tuple(outcomes), _winner(outcomes))


def run_game(cfg: GameConfig) -> GameResult:
    phases = [play(cfg.agents, cfg.world, "base")]
    if cfg.shift is not None:
        phases.append(play(cfg.agents, cfg.shift, "shift"))
    return GameResult(tuple(phases))


# ---------------------------------------------------------------------------
# Config file and report
# ---------------------------------------------------------------------------


def _parse_bool(value: str) -> bool:
    if value.lower() in ("true", "yes", "1"):
        return True
    if value.lower() in ("false", "no", "0"):
        return False
    raise GameConfigError(f"expected true or false, got {value!r}")


def _int(values: dict[str, str], key: str, default: int | None = None) -> int:
    if key not in values:
        if default is None:
            raise GameConfigError(f"missing key {key}")
        return default
    try:
        return int(values[key])
    except ValueError:
        raise GameConfigError(f"{key} must be an integer, got {values[key]!r}") from None


@dataclass(frozen=True)
class LoadedConfig:
    config: GameConfig
    inputs: tuple[Path, ...] = field(default=())
    """Files read while loading (the config itself and any KB files)."""


def parse_game_config(text: str, base_dir: Path = Path("."),
                      epsilon: float | None = None) -> LoadedConfig:
    """Read flat ``key=value`` lines.

    Keys: world.positive, world.negative, world.attribute, world.kind,
    shift.positive, shift.negative, agent.N.logic, agent.N.epsilon,
    agent.N.budget, agent.N.hedge, agent.N.name, agent.N.kb,
    knowledge_invariance, kb. Relative KB paths resolve against ``base_dir``.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise GameConfigError(f"line {lineno}: expected key=value")
        values[key.strip()] = value.strip()

    attribute = values.get("world.attribute", "white")
    kind = values.get("world.kind", "swan")
    world = DomainWorld(_int(values, "world.positive"), _int(values, "world.negative"),
                        attribute, kind)
    shift = None
    if "shift.positive" in values or "shift.negative" in values:
        shift = DomainWorld(_int(values, "shift.positive"), _int(values, "shift.negative"),
                            values.get("shift.attribute", attribute),
                            values.get("shift.kind", kind))
    invariance = _parse_bool(values.get("knowledge_invariance", "true"))

    inputs: list[Path] = []
    kbs: dict[Path, KnowledgeBase] = {}

    def load_kb(path_text: str) -> KnowledgeBase:
        path = (base_dir / path_text).resolve()
        if path not in kbs:
            try:
                kbs[path] = parse_kb(path.read_text())
            except OSError as exc:
                raise GameConfigError(f"cannot read knowledge base {path_text}: {exc}") from exc
            inputs.append(path)
        return kbs[path]

    shared = load_kb(values["kb"]) if "kb" in values else None
    ids = sorted({k.split(".")[1] for k in values if k.startswith("agent.")},
                 key=lambda s: (not s.isdigit(), int(s) if s.isdigit() else 0, s))
    if not ids:
        raise GameConfigError("no agents configured")
    agents = []
    for i in ids:
        prefix = f"agent.{i}."
        try:
            logic = Logic(values.get(prefix + "logic", ""))
        except ValueError:
            raise GameConfigError(f"{prefix}logic must be classical or nonmonotonic") from None
        if invariance or prefix + "kb" not in values:
            if shared is None:
                raise GameConfigError(f"agent {i} has no knowledge base (set kb=...)")
            kb = shared
        else:
            kb = load_kb(values[prefix + "kb"])
        eps = float(values.get(prefix + "epsilon", epsilon if epsilon is not None else 0.01))
        agents.append(AgentSpec(values.get(prefix + "name", f"{logic.value}{i}"), logic, kb,
                                _int(values, prefix + "budget", 0), ThresholdConfig(eps),
                                _int(values, prefix + "hedge", 0)))
    return LoadedConfig(GameConfig(world, tuple(agents), shift, invariance), tuple(inputs))


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def format_result(result: GameResult) -> tuple[list[str], list[tuple[str, str]]]:
    """Plain-text table lines plus machine-readable key/value pairs."""
    lines: list[str] = []
    pairs: list[tuple[str, str]] = []
    header = f"{'agent':<16}{'logic':<14}{'pos':>5}{'neg':>5}{'abst':>6}" \
             f"{'correct':>9}{'errors':>8}{'net':>6}"
    for phase in result.phases:
        w = phase.world
        lines.append(f"phase {phase.label}: {w.population} {w.kind}s, "
                     f"{w.attribute} {w.positive} / not {w.attribute} {w.negative}")
        lines.append(header)
        lines.append("-" * len(header))
        for o in phase.outcomes:
            lines.append(f"{o.name:<16}{o.logic.value:<14}{o.positive:>5}{o.negative:>5}"
                         f"{o.abstained:>6}{o.score.correct:>9}{o.score.errors:>8}"
                         f"{o.score.net:>6}")
            for note in o.notes:
                lines.append(f"  note: {note}")
            p = f"{phase.label}.{o.name}"
            pairs += [(f"{p}.logic", o.logic.value), (f"{p}.positive", str(o.positive)),
                      (f"{p}.negative", str(o.negative)), (f"{p}.abstained", str(o.abstained)),
                      (f"{p}.correct", str(o.score.correct)), (f"{p}.errors", str(o.score.errors)),
                      (f"{p}.net", str(o.score.net))]
        lines.append(f"winner: {phase.winner}")
        lines.append("")
        pairs.append((f"{phase.label}.winner", phase.winner))
    return lines[:-1], pairs
