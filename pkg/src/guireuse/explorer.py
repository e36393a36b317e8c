"""Reachability search over the live WTG.

Candidates ranked by the matcher may live on other screens. The explorer
enumerates activity-level paths from the current position, verifies each
one by probe execution on a scratch session (the WTG may be stale or
incomplete), and hands back the leading events that bring the app to a
screen actually containing the wanted widget.

Verified paths are cached per (current screen, target activity). The
cache is purely an optimization: every query enumerates and verifies the
complete path list once, so a later identical query returns exactly what
a fresh search would, minus the probe executions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .matcher import Candidate
from .model import LiveWtg, WtgEdge
from .simulator import ConcreteEvent, Session, STATUS_OK

DEFAULT_MAX_PATH_LEN = 4

Path = tuple[WtgEdge, ...]


def find_paths(wtg: LiveWtg, from_activity: str, to_activity: str, max_len: int = DEFAULT_MAX_PATH_LEN) -> list[Path]:
    """All node-simple edge paths from one activity to another, shortest first.

    When source and target coincide the empty path comes first, followed by
    any single self-loop edges. Edges triggered by input actions are never
    used for navigation: the explorer has no meaningful text to type.
    Unknown activities raise ValueError.
    """
    for activity in (from_activity, to_activity):
        if activity not in wtg.nodes:
            raise ValueError(f"unknown activity {activity!r}")
    if max_len < 1:
        return [()] if from_activity == to_activity else []

    usable = [e for e in wtg.edges if e.action != "input"]

    if from_activity == to_activity:
        loops = [(e,) for e in usable if e.from_activity == e.to_activity == from_activity]
        return [()] + loops

    by_source: dict[str, list[WtgEdge]] = {}
    for e in usable:
        by_source.setdefault(e.from_activity, []).append(e)

    found: list[Path] = []

    def walk(current: str, visited: set[str], acc: list[WtgEdge]) -> None:
        for e in by_source.get(current, []):
            if len(acc) + 1 > max_len:
                return
            if e.to_activity == to_activity:
                found.append(tuple(acc) + (e,))
            elif e.to_activity not in visited and len(acc) + 1 < max_len:
                visited.add(e.to_activity)
                acc.append(e)
                walk(e.to_activity, visited, acc)
                acc.pop()
                visited.remove(e.to_activity)

    walk(from_activity, {from_activity}, [])
    found.sort(key=len)
    return found


@dataclass(frozen=True)
class VerifiedPath:
    """A path that probe execution confirmed from a specific screen."""

    path: Path
    leading_events: tuple[ConcreteEvent, ...]
    destination_screen_id: str


@dataclass
class ProbeStats:
    probes: int = 0
    hits: int = 0
    misses: int = 0


@dataclass
class PathCache:
    """Verified-path store keyed by (screen, target activity).

    Keying by the concrete screen rather than its activity keeps cached
    answers exact: two screens of one activity need not expose the same
    widgets, and the simulator is deterministic per screen.
    """

    enabled: bool = True
    entries: dict[tuple[str, str], list[VerifiedPath]] = field(default_factory=dict)
    stats: ProbeStats = field(default_factory=ProbeStats)

    def to_dict(self) -> dict:
        return {
            "enabled": self.enabled,
            "stats": {"probes": self.stats.probes, "hits": self.stats.hits, "misses": self.stats.misses},
            "entries": [
                {
                    "from_screen": screen,
                    "to_activity": activity,
                    "paths": [
                        {
                            "edges": [
                                {
                                    "from_activity": e.from_activity,
                                    "widget_id": e.widget_id,
                                    "action": e.action,
                                    "to_activity": e.to_activity,
                                }
                                for e in vp.path
                            ],
                            "leading_events": [ev.to_dict() for ev in vp.leading_events],
                            "destination_screen": vp.destination_screen_id,
                        }
                        for vp in paths
                    ],
                }
                for (screen, activity), paths in sorted(self.entries.items())
            ],
        }


def _probe_path(session: Session, path: Path, stats: ProbeStats) -> VerifiedPath | None:
    """Replay one path on a scratch session; None when the WTG lied."""
    if not path:
        return VerifiedPath((), (), session.current_screen_id)
    stats.probes += 1
    probe = session.clone_for_probe()
    events: list[ConcreteEvent] = []
    for edge in path:
        if edge.widget_id is not None and probe.current_screen.widget(edge.widget_id) is None:
            return None
        event = ConcreteEvent(action=edge.action, widget_id=edge.widget_id)
        outcome = probe.execute_event(event)
        if outcome.status != STATUS_OK or probe.current_activity != edge.to_activity:
            return None
        events.append(event)
    return VerifiedPath(path, tuple(events), probe.current_screen_id)


def verified_paths(
    session: Session,
    cache: PathCache,
    to_activity: str,
    max_len: int = DEFAULT_MAX_PATH_LEN,
) -> list[VerifiedPath]:
    """Complete list of probe-verified paths from the current screen.

    Cache misses enumerate and verify every candidate path so the stored
    answer is as complete as a fresh search; this is what makes cache hits
    indistinguishable from cache-off runs.
    """
    key = (session.current_screen_id, to_activity)
    if cache.enabled:
        cached = cache.entries.get(key)
        if cached is not None:
            cache.stats.hits += 1
            return cached
    cache.stats.misses += 1

    if to_activity not in session.live_wtg.nodes:
        verified: list[VerifiedPath] = []
    else:
        verified = []
        for path in find_paths(session.live_wtg, session.current_activity, to_activity, max_len):
            vp = _probe_path(session, path, cache.stats)
            if vp is not None:
                verified.append(vp)

    if cache.enabled:
        cache.entries[key] = verified
    return verified


def resolve_reachable(
    session: Session,
    candidates: list[Candidate],
    cache: PathCache,
    max_len: int = DEFAULT_MAX_PATH_LEN,
) -> tuple[Candidate, list[ConcreteEvent]] | None:
    """Pick the best-ranked candidate that execution can actually reach.

    Candidate rank strictly dominates path length: a lower-ranked candidate
    is considered only after every path for the higher-ranked one failed
    verification or landed on a screen without the widget. The session is
    left untouched apart from live WTG growth recorded by probes.
    """
    for candidate in candidates:
        for vp in verified_paths(session, cache, candidate.activity, max_len):
            destination = session.model.screen(vp.destination_screen_id)
            if destination.widget(candidate.widget.widget_id) is not None:
                return candidate, list(vp.leading_events)
    return None
