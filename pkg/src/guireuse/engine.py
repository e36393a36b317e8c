"""Test reuse pipeline: generation, deduplication, adaptation.

Generation walks the source test event by event, matching each source
widget to the most similar reachable target widget and executing the
result, so the produced test is replayable by construction. Deduplication
strips artifacts of layout differences (a repeated opening event, an
inverted event pair) but keeps a removal only when replay still produces
the same oracle outcomes. Adaptation revisits suspicious matches (crossed
or weakest scores) and accepts a rematch only when the whole test gets
semantically closer to the source without losing oracle ground.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

from .config import RunConfig
from .errors import ValidationError
from .explorer import PathCache, resolve_reachable
from .lexicon import EmbeddingTable
from .matcher import Candidate, rank_model_candidates, widget_similarity
from .model import AppModel, Event, TestCase, Widget
from .simulator import (
    ConcreteEvent,
    OracleContext,
    Session,
    STATUS_NO_TRANSITION,
    STATUS_ORACLE_PASS,
)

ORACLE_PASS = "pass"
ORACLE_FAIL = "fail"


# ---------------------------------------------------------------------------
# result types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MatchPair:
    """One source event matched (or not) on the target app.

    Skip markers have no concrete event and score 0.0. Back events carry
    no widget and score 1.0 when executable. ``leading_events`` navigate
    from the state left by the previous pair to the matched widget.
    """

    source_index: int
    kind: str
    action: str
    score: float
    matched_widget: Widget | None = None
    concrete: ConcreteEvent | None = None
    leading_events: tuple[ConcreteEvent, ...] = ()
    oracle_outcome: str | None = None

    @property
    def skipped(self) -> bool:
        return self.concrete is None

    def to_dict(self) -> dict:
        out: dict = {
            "source_index": self.source_index,
            "kind": self.kind,
            "action": self.action,
            "widget_id": self.concrete.widget_id if self.concrete else None,
            "score": self.score,
            "leading_events": [e.to_dict() for e in self.leading_events],
        }
        if self.concrete is not None and self.concrete.input_text is not None:
            out["input_text"] = self.concrete.input_text
        if self.concrete is not None and self.concrete.expected_text is not None:
            out["expected_text"] = self.concrete.expected_text
        if self.skipped:
            out["skipped"] = True
        return out


@dataclass(frozen=True)
class MatchedTest:
    """A reuse result: ordered match pairs plus the recorded oracle status."""

    source_test_id: str
    target_app_id: str
    pairs: tuple[MatchPair, ...]
    oracle_status: str
    phase_timings_ms: dict[str, float] = field(default_factory=dict, compare=False)

    @property
    def total_similarity(self) -> float:
        return sum(p.score for p in self.pairs)

    @property
    def average_similarity(self) -> float:
        if not self.pairs:
            return 0.0
        return self.total_similarity / len(self.pairs)

    def concrete_events(self) -> list[ConcreteEvent]:
        events: list[ConcreteEvent] = []
        for pair in self.pairs:
            events.extend(pair.leading_events)
            if pair.concrete is not None:
                events.append(pair.concrete)
        return events

    def to_dict(self, timings: bool = True) -> dict:
        summary = {
            "total_similarity": self.total_similarity,
            "average_similarity": self.average_similarity,
            "oracle_status": self.oracle_status,
        }
        if timings and self.phase_timings_ms:
            summary["phase_timings_ms"] = self.phase_timings_ms
        return {
            "source_test_id": self.source_test_id,
            "target_app_id": self.target_app_id,
            "pairs": [p.to_dict() for p in self.pairs],
            "summary": summary,
        }


@dataclass(frozen=True)
class IndexSets:
    """Pair positions adaptation should revisit."""

    crossed: tuple[int, ...]
    weakest: tuple[int, ...]


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------


def _concrete_for(event: Event, widget_id: str) -> ConcreteEvent:
    if event.kind == "gui":
        return ConcreteEvent(action=event.action, widget_id=widget_id, input_text=event.input_text)
    return ConcreteEvent(
        action=event.action,
        widget_id=widget_id,
        expected_text=event.expected_text,
        oracle_widget=event.widget if event.action == "widget_exists" else None,
    )


def _skip_pair(index: int, event: Event) -> MatchPair:
    return MatchPair(
        source_index=index,
        kind=event.kind,
        action=event.action,
        score=0.0,
        oracle_outcome=ORACLE_FAIL if event.kind == "oracle" else None,
    )


def _match_one(
    index: int,
    event: Event,
    target: AppModel,
    table: EmbeddingTable,
    cfg: RunConfig,
    session: Session,
    cache: PathCache,
) -> MatchPair:
    """Match a single source event and advance the session accordingly."""
    if event.kind == "gui" and event.action == "back":
        concrete = ConcreteEvent(action="back")
        outcome = session.model.transitions.get((session.current_screen_id, None, "back"))
        if outcome is None:
            return _skip_pair(index, event)
        session.execute_event(concrete)
        return MatchPair(index, event.kind, event.action, 1.0, None, concrete)

    candidates = rank_model_candidates(
        event.widget,
        target,
        table,
        cfg.weights,
        cfg.matcher.k,
        cfg.matcher.threshold,
        cfg.matcher.normalized,
        cfg.abbrevs,
    )
    remaining = list(candidates)
    while remaining:
        pick = resolve_reachable(session, remaining, cache, cfg.explorer.max_path_len)
        if pick is None:
            break
        candidate, leading = pick
        concrete = _concrete_for(event, candidate.widget.widget_id)
        if event.kind == "gui":
            # a reachable widget may still reject the action; try the next one
            probe = session.clone_for_probe()
            for ev in leading:
                probe.execute_event(ev)
            if probe.execute_event(concrete).status == STATUS_NO_TRANSITION:
                remaining.remove(candidate)
                continue
        for ev in leading:
            session.execute_event(ev)
        outcome = session.execute_event(concrete)
        oracle_outcome = None
        if event.kind == "oracle":
            oracle_outcome = ORACLE_PASS if outcome.status == STATUS_ORACLE_PASS else ORACLE_FAIL
        return MatchPair(
            source_index=index,
            kind=event.kind,
            action=event.action,
            score=candidate.score,
            matched_widget=candidate.widget,
            concrete=concrete,
            leading_events=tuple(leading),
            oracle_outcome=oracle_outcome,
        )
    return _skip_pair(index, event)


def _match_events(
    indexed_events: list[tuple[int, Event]],
    target: AppModel,
    table: EmbeddingTable,
    cfg: RunConfig,
    session: Session,
    cache: PathCache,
) -> list[MatchPair]:
    return [_match_one(i, e, target, table, cfg, session, cache) for i, e in indexed_events]


def _final_status(pairs: list[MatchPair]) -> str:
    for pair in reversed(pairs):
        if pair.kind == "oracle":
            return pair.oracle_outcome or ORACLE_FAIL
    return ORACLE_FAIL


def generate_initial_test(
    source: TestCase,
    target: AppModel,
    table: EmbeddingTable,
    cfg: RunConfig,
    session: Session | None = None,
    cache: PathCache | None = None,
) -> MatchedTest:
    """Produce the initial matched test by semantic matching plus execution."""
    if session is None:
        session = make_session(target, table, cfg)
    if cache is None:
        cache = PathCache(enabled=cfg.explorer.cache)
    session.reset()
    pairs = _match_events(list(enumerate(source.events)), target, table, cfg, session, cache)
    return MatchedTest(
        source_test_id=source.test_id,
        target_app_id=target.app_id,
        pairs=tuple(pairs),
        oracle_status=_final_status(pairs),
    )


def make_session(target: AppModel, table: EmbeddingTable, cfg: RunConfig) -> Session:
    ctx = OracleContext(
        table=table,
        weights=cfg.weights,
        threshold=cfg.oracle.threshold,
        normalized=cfg.matcher.normalized,
        abbrevs=cfg.abbrevs,
    )
    return Session(model=target, oracle_ctx=ctx)


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------


def replay_oracle_outcomes(pairs: list[MatchPair], session: Session) -> list[tuple[int, str]] | None:
    """Replay pairs from reset; oracle outcomes per source index.

    Returns None when the replay cannot run to completion (a leading or
    concrete event hit no_transition), which callers treat as a changed
    outcome.
    """
    session.reset()
    outcomes: list[tuple[int, str]] = []
    for pair in pairs:
        for ev in list(pair.leading_events) + ([pair.concrete] if pair.concrete else []):
            result = session.execute_event(ev)
            if result.status == STATUS_NO_TRANSITION:
                return None
        if pair.kind == "oracle" and pair.concrete is not None:
            status = ORACLE_PASS if session.trace[-1].status == STATUS_ORACLE_PASS else ORACLE_FAIL
            outcomes.append((pair.source_index, status))
        elif pair.kind == "oracle":
            outcomes.append((pair.source_index, ORACLE_FAIL))
    return outcomes


# ---------------------------------------------------------------------------
# deduplication
# ---------------------------------------------------------------------------


def _plain_concrete(pair: MatchPair) -> ConcreteEvent | None:
    """The pair's concrete event when it is a leading-free gui event."""
    if pair.kind != "gui" or pair.skipped or pair.leading_events:
        return None
    return pair.concrete


def deduplicate(initial: MatchedTest, target: AppModel, cfg: RunConfig, session: Session) -> MatchedTest:
    """Remove duplicate-event artifacts while preserving oracle outcomes.

    Two rules, each removal replayed before it is kept: a leading run of
    one repeated concrete event collapses to a single occurrence, and when
    the test starts with events A, B and the reversed pair B, A occurs
    later, that later pair is dropped.
    """
    pairs = list(initial.pairs)
    baseline = replay_oracle_outcomes(pairs, session)

    # rule 1: collapse leading repetitions one at a time
    while len(pairs) >= 2:
        first, second = _plain_concrete(pairs[0]), _plain_concrete(pairs[1])
        if first is None or first != second:
            break
        candidate_pairs = pairs[1:]
        if replay_oracle_outcomes(candidate_pairs, session) != baseline:
            break
        pairs = candidate_pairs

    # rule 2: drop a later occurrence of the reversed opening pair
    changed = True
    while changed and len(pairs) >= 4:
        changed = False
        e0, e1 = _plain_concrete(pairs[0]), _plain_concrete(pairs[1])
        if e0 is None or e1 is None:
            break
        for i in range(2, len(pairs) - 1):
            if _plain_concrete(pairs[i]) == e1 and _plain_concrete(pairs[i + 1]) == e0:
                candidate_pairs = pairs[:i] + pairs[i + 2:]
                if replay_oracle_outcomes(candidate_pairs, session) == baseline:
                    pairs = candidate_pairs
                    changed = True
                    break
    return replace(initial, pairs=tuple(pairs))


# ---------------------------------------------------------------------------
# adaptation
# ---------------------------------------------------------------------------


def select_rematch_indexes(
    test: MatchedTest,
    source: TestCase,
    table: EmbeddingTable,
    cfg: RunConfig,
) -> IndexSets:
    """Pair positions worth revisiting: crossed matches and weakest scores.

    A position is crossed when its matched target widget resembles some
    other source event's widget more than its own. The weakest set holds
    the lowest-scoring positions (a configured fraction, at least one),
    drawing from oracle positions only once gui positions run out; skip
    markers always qualify.
    """
    pairs = test.pairs
    crossed: list[int] = []
    for i, pair in enumerate(pairs):
        if pair.matched_widget is None:
            continue
        for j, event in enumerate(source.events):
            if j == pair.source_index or event.widget is None:
                continue
            other = widget_similarity(
                event.widget, pair.matched_widget, table, cfg.weights, cfg.matcher.normalized, cfg.abbrevs
            )
            if other > pair.score:
                crossed.append(i)
                break

    quota = max(1, math.ceil(cfg.adaptation.weakest_fraction * len(pairs)))
    pool = sorted(
        (i for i, p in enumerate(pairs) if not p.skipped),
        key=lambda i: (pairs[i].score, i),
    )
    weakest = pool[:quota]
    weakest.extend(i for i, p in enumerate(pairs) if p.skipped)
    return IndexSets(crossed=tuple(sorted(set(crossed))), weakest=tuple(sorted(set(weakest))))


def _oracle_rank(status: str) -> int:
    return 1 if status == ORACLE_PASS else 0


def _rebuild_with(
    test: MatchedTest,
    position: int,
    candidate: Candidate,
    source: TestCase,
    target: AppModel,
    table: EmbeddingTable,
    cfg: RunConfig,
    session: Session,
    cache: PathCache,
) -> MatchedTest | None:
    """Variant of ``test`` with ``position`` rematched to ``candidate``.

    Replays the prefix, forces the candidate through the explorer, then
    regenerates every later pair from the resulting state. None when the
    candidate is unreachable or rejects its action.
    """
    session.reset()
    for pair in test.pairs[:position]:
        for ev in list(pair.leading_events) + ([pair.concrete] if pair.concrete else []):
            if session.execute_event(ev).status == STATUS_NO_TRANSITION:
                return None

    old = test.pairs[position]
    event = source.events[old.source_index]
    pick = resolve_reachable(session, [candidate], cache, cfg.explorer.max_path_len)
    if pick is None:
        return None
    _, leading = pick
    concrete = _concrete_for(event, candidate.widget.widget_id)
    if event.kind == "gui":
        probe = session.clone_for_probe()
        for ev in leading:
            probe.execute_event(ev)
        if probe.execute_event(concrete).status == STATUS_NO_TRANSITION:
            return None
    for ev in leading:
        session.execute_event(ev)
    outcome = session.execute_event(concrete)
    oracle_outcome = None
    if event.kind == "oracle":
        oracle_outcome = ORACLE_PASS if outcome.status == STATUS_ORACLE_PASS else ORACLE_FAIL
    new_pair = MatchPair(
        source_index=old.source_index,
        kind=event.kind,
        action=event.action,
        score=candidate.score,
        matched_widget=candidate.widget,
        concrete=concrete,
        leading_events=tuple(leading),
        oracle_outcome=oracle_outcome,
    )

    suffix_events = [(p.source_index, source.events[p.source_index]) for p in test.pairs[position + 1:]]
    suffix = _match_events(suffix_events, target, table, cfg, session, cache)
    pairs = test.pairs[:position] + (new_pair,) + tuple(suffix)
    return replace(test, pairs=pairs, oracle_status=_final_status(list(pairs)))


def adapt(
    test: MatchedTest,
    source: TestCase,
    target: AppModel,
    table: EmbeddingTable,
    cfg: RunConfig,
    session: Session | None = None,
    cache: PathCache | None = None,
) -> MatchedTest:
    """Improve suspicious matches; never trade away similarity or oracles.

    Index sets are fixed up front (crossed first, then weakest, ascending).
    Each position retries the next-best candidates under the retry budget;
    a variant is kept only when average similarity strictly rises and the
    final oracle does not degrade. The loop ends as soon as the current
    test's final oracle passes.
    """
    if session is None:
        session = make_session(target, table, cfg)
    if cache is None:
        cache = PathCache(enabled=cfg.explorer.cache)

    current = test
    if current.oracle_status == ORACLE_PASS:
        return current

    sets = select_rematch_indexes(current, source, table, cfg)
    order = list(sets.crossed) + [i for i in sets.weakest if i not in sets.crossed]
    for position in order:
        pair = current.pairs[position]
        event = source.events[pair.source_index]
        if event.widget is None:
            continue
        candidates = rank_model_candidates(
            event.widget,
            target,
            table,
            cfg.weights,
            cfg.matcher.k,
            cfg.matcher.threshold,
            cfg.matcher.normalized,
            cfg.abbrevs,
        )
        if pair.matched_widget is not None:
            matched_id = pair.matched_widget.widget_id
            candidates = [c for c in candidates if c.widget.widget_id != matched_id]
        for candidate in candidates[: cfg.retry_budget]:
            variant = _rebuild_with(current, position, candidate, source, target, table, cfg, session, cache)
            if variant is None:
                continue
            if (
                variant.average_similarity > current.average_similarity
                and _oracle_rank(variant.oracle_status) >= _oracle_rank(current.oracle_status)
            ):
                current = variant
                break
        if current.oracle_status == ORACLE_PASS:
            break
    return current


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


def run_pipeline(
    source: TestCase,
    target: AppModel,
    table: EmbeddingTable,
    cfg: RunConfig,
) -> tuple[MatchedTest, PathCache]:
    """Generation, deduplication and adaptation as one run.

    The session and path cache persist across phases, so WTG feedback and
    verified paths discovered early keep paying off later.
    """
    session = make_session(target, table, cfg)
    cache = PathCache(enabled=cfg.explorer.cache)

    t0 = time.perf_counter()
    initial = generate_initial_test(source, target, table, cfg, session, cache)
    t1 = time.perf_counter()
    processed = deduplicate(initial, target, cfg, session)
    t2 = time.perf_counter()
    adapted = adapt(processed, source, target, table, cfg, session, cache)
    t3 = time.perf_counter()

    adapted.phase_timings_ms.update(
        {
            "generation": (t1 - t0) * 1000.0,
            "deduplication": (t2 - t1) * 1000.0,
            "adaptation": (t3 - t2) * 1000.0,
        }
    )
    return adapted, cache


def validate_matched_test(test: MatchedTest, session: Session) -> None:
    """Assert the executability contract: the pairs replay without errors."""
    session.reset()
    outcomes = session.execute_test(test.concrete_events())
    if outcomes and outcomes[-1].status == STATUS_NO_TRANSITION:
        raise ValidationError("pairs: replay hit a missing transition")
