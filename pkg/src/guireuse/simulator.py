"""Deterministic app simulator.

Executes concrete events against an app model: GUI actions move between
screens through the transition map, oracle events assert against the
current screen without moving. Activity transitions observed during
execution feed back into the session's live WTG, so path search later in
a run benefits from what execution has already revealed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import SimulationError, ValidationError
from .lexicon import AbbreviationMap, DEFAULT_ABBREVIATIONS, EmbeddingTable
from .matcher import Weights, widget_similarity
from .model import (
    ATTRIBUTE_NAMES,
    AppModel,
    GUI_ACTIONS,
    LiveWtg,
    ORACLE_ACTIONS,
    Widget,
    WtgEdge,
    widget_to_dict,
)

DEFAULT_ORACLE_THRESHOLD = 0.8

STATUS_OK = "ok"
STATUS_NO_TRANSITION = "no_transition"
STATUS_ORACLE_PASS = "oracle_pass"
STATUS_ORACLE_FAIL = "oracle_fail"


@dataclass(frozen=True)
class ConcreteEvent:
    """An executable event bound to a concrete target widget.

    ``widget_id`` is absent for back events. ``oracle_widget`` carries the
    widget snapshot a widget_exists oracle asserts, since the check is
    semantic rather than an id lookup.
    """

    action: str
    widget_id: str | None = None
    input_text: str | None = None
    expected_text: str | None = None
    oracle_widget: Widget | None = None

    def to_dict(self) -> dict:
        out: dict = {"action": self.action, "widget_id": self.widget_id}
        if self.input_text is not None:
            out["input_text"] = self.input_text
        if self.expected_text is not None:
            out["expected_text"] = self.expected_text
        if self.oracle_widget is not None:
            out["oracle_widget"] = widget_to_dict(self.oracle_widget)
        return out


@dataclass(frozen=True)
class TransitionOutcome:
    index: int
    status: str
    screen_id: str
    event: ConcreteEvent

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "status": self.status,
            "screen": self.screen_id,
            "action": self.event.action,
            "widget_id": self.event.widget_id,
        }


@dataclass(frozen=True)
class OracleContext:
    """Matching context for widget_exists oracles."""

    table: EmbeddingTable
    weights: Weights | None = None
    threshold: float = DEFAULT_ORACLE_THRESHOLD
    normalized: bool = False
    abbrevs: AbbreviationMap = DEFAULT_ABBREVIATIONS


@dataclass
class Session:
    """One execution session over an app model."""

    model: AppModel
    oracle_ctx: OracleContext | None = None
    current_screen_id: str = ""
    live_wtg: LiveWtg = field(default_factory=lambda: LiveWtg([], []))
    trace: list[TransitionOutcome] = field(default_factory=list)

    def __post_init__(self):
        if not self.current_screen_id:
            self.current_screen_id = self.model.initial_screen
        if not self.live_wtg.nodes and not self.live_wtg.edges:
            self.live_wtg = LiveWtg.from_wtg(self.model.wtg)

    @property
    def current_screen(self):
        return self.model.screen(self.current_screen_id)

    @property
    def current_activity(self) -> str:
        return self.current_screen.activity

    def reset(self) -> None:
        """Return to the initial screen with an empty trace.

        The live WTG is knowledge about the app, not app state, so it
        survives resets within a run.
        """
        self.current_screen_id = self.model.initial_screen
        self.trace = []

    def clone_for_probe(self) -> "Session":
        """A scratch session sharing the live WTG but not screen or trace."""
        return Session(
            model=self.model,
            oracle_ctx=self.oracle_ctx,
            current_screen_id=self.current_screen_id,
            live_wtg=self.live_wtg,
            trace=[],
        )

    # -- execution ---------------------------------------------------------

    def execute_event(self, event: ConcreteEvent) -> TransitionOutcome:
        """Execute one concrete event from the current screen.

        GUI events either move (ok) or leave the state untouched
        (no_transition). Oracle events never move. Unknown widgets and
        malformed events raise SimulationError.
        """
        if event.action in ("click", "long_click", "input"):
            outcome = self._execute_gui(event)
        elif event.action == "back":
            outcome = self._execute_back(event)
        elif event.action == "text_present":
            outcome = self._oracle_outcome(event, self._text_present(event))
        elif event.action == "widget_exists":
            outcome = self._oracle_outcome(event, self._widget_exists(event))
        else:
            raise SimulationError(f"unknown action {event.action!r}")
        self.trace.append(outcome)
        return outcome

    def _execute_gui(self, event: ConcreteEvent) -> TransitionOutcome:
        if event.widget_id is None:
            raise SimulationError(f"{event.action} requires a widget_id")
        screen = self.current_screen
        if screen.widget(event.widget_id) is None:
            raise SimulationError(
                f"widget {event.widget_id!r} not on screen {screen.screen_id!r}"
            )
        key = (screen.screen_id, event.widget_id, event.action)
        destination = self.model.transitions.get(key)
        if destination is None:
            return TransitionOutcome(len(self.trace), STATUS_NO_TRANSITION, screen.screen_id, event)
        self._record_feedback(screen.activity, event.widget_id, event.action, destination)
        self.current_screen_id = destination
        return TransitionOutcome(len(self.trace), STATUS_OK, destination, event)

    def _execute_back(self, event: ConcreteEvent) -> TransitionOutcome:
        screen = self.current_screen
        destination = self.model.transitions.get((screen.screen_id, None, "back"))
        if destination is None:
            return TransitionOutcome(len(self.trace), STATUS_NO_TRANSITION, screen.screen_id, event)
        self._record_feedback(screen.activity, None, "back", destination)
        self.current_screen_id = destination
        return TransitionOutcome(len(self.trace), STATUS_OK, destination, event)

    def _record_feedback(self, from_activity: str, widget_id: str | None, action: str, destination: str) -> None:
        to_activity = self.model.screen(destination).activity
        self.live_wtg.add_edge(WtgEdge(from_activity, widget_id, action, to_activity))

    def _text_present(self, event: ConcreteEvent) -> bool:
        if event.expected_text is None:
            raise SimulationError("text_present requires expected_text")
        return any(w.get("text") == event.expected_text for w in self.current_screen.widgets)

    def _widget_exists(self, event: ConcreteEvent) -> bool:
        snapshot = event.oracle_widget
        if snapshot is None:
            raise SimulationError("widget_exists requires an oracle_widget snapshot")
        if self.oracle_ctx is None:
            raise SimulationError("widget_exists requires an oracle matching context")
        ctx = self.oracle_ctx
        return any(
            widget_similarity(snapshot, w, ctx.table, ctx.weights, ctx.normalized, ctx.abbrevs)
            >= ctx.threshold
            for w in self.current_screen.widgets
        )

    def _oracle_outcome(self, event: ConcreteEvent, passed: bool) -> TransitionOutcome:
        status = STATUS_ORACLE_PASS if passed else STATUS_ORACLE_FAIL
        return TransitionOutcome(len(self.trace), status, self.current_screen_id, event)

    def execute_test(self, events: list[ConcreteEvent]) -> list[TransitionOutcome]:
        """Execute events in order, stopping after the first no_transition.

        The truncating outcome is the last entry of the returned list.
        Hard failures propagate as SimulationError with the failing index.
        """
        outcomes: list[TransitionOutcome] = []
        for i, event in enumerate(events):
            try:
                outcome = self.execute_event(event)
            except SimulationError as exc:
                raise SimulationError(str(exc), index=i) from exc
            outcomes.append(outcome)
            if outcome.status == STATUS_NO_TRANSITION:
                break
        return outcomes


def trace_to_jsonl(outcomes: list[TransitionOutcome]) -> str:
    """One outcome per line, stable key order."""
    return "\n".join(json.dumps(o.to_dict(), sort_keys=True) for o in outcomes) + ("\n" if outcomes else "")


def load_concrete_events(doc: dict) -> list[ConcreteEvent]:
    """Parse a concrete event list document: {"events": [...]}.

    Each entry carries an action plus whatever that action needs: a
    widget_id for widget-bound actions, input_text for input,
    expected_text for text_present, and an inline oracle_widget
    (widget_id plus attributes) for widget_exists.
    """
    violations: list[str] = []
    if not isinstance(doc, dict) or set(doc) - {"events"}:
        raise ValidationError("events document: expected an object with a single 'events' key")
    raw_events = doc.get("events")
    if not isinstance(raw_events, list):
        raise ValidationError("events: expected a list")
    events: list[ConcreteEvent] = []
    for i, raw in enumerate(raw_events):
        where = f"events[{i}]"
        if not isinstance(raw, dict):
            violations.append(f"{where}: expected an object")
            continue
        extra = set(raw) - {"action", "widget_id", "input_text", "expected_text", "oracle_widget"}
        if extra:
            violations.append(f"{where}: unknown keys {sorted(extra)}")
            continue
        action = raw.get("action")
        if action not in GUI_ACTIONS + ORACLE_ACTIONS:
            violations.append(f"{where}.action: expected one of {GUI_ACTIONS + ORACLE_ACTIONS}")
            continue
        widget_id = raw.get("widget_id")
        if action == "back":
            if widget_id is not None:
                violations.append(f"{where}.widget_id: back events carry no widget")
                continue
        elif action != "widget_exists" and (not isinstance(widget_id, str) or not widget_id):
            violations.append(f"{where}.widget_id: expected a non-empty string")
            continue
        input_text = raw.get("input_text")
        if (action == "input") != (input_text is not None):
            violations.append(f"{where}.input_text: required exactly for input events")
            continue
        if input_text is not None and not isinstance(input_text, str):
            violations.append(f"{where}.input_text: expected a string")
            continue
        expected_text = raw.get("expected_text")
        if (action == "text_present") != (expected_text is not None):
            violations.append(f"{where}.expected_text: required exactly for text_present events")
            continue
        if expected_text is not None and not isinstance(expected_text, str):
            violations.append(f"{where}.expected_text: expected a string")
            continue
        oracle_widget = None
        raw_widget = raw.get("oracle_widget")
        if (action == "widget_exists") != (raw_widget is not None):
            violations.append(f"{where}.oracle_widget: required exactly for widget_exists events")
            continue
        if raw_widget is not None:
            if (
                not isinstance(raw_widget, dict)
                or set(raw_widget) != {"widget_id", "attributes"}
                or not isinstance(raw_widget.get("widget_id"), str)
                or not isinstance(raw_widget.get("attributes"), dict)
            ):
                violations.append(f"{where}.oracle_widget: expected widget_id plus attributes")
                continue
            attrs = raw_widget["attributes"]
            bad = [k for k in attrs if k not in ATTRIBUTE_NAMES or not isinstance(attrs[k], str)]
            if bad:
                violations.append(f"{where}.oracle_widget.attributes: bad entries {sorted(bad)}")
                continue
            oracle_widget = Widget.build(raw_widget["widget_id"], attrs)
            widget_id = widget_id if isinstance(widget_id, str) else raw_widget["widget_id"]
        events.append(
            ConcreteEvent(
                action=action,
                widget_id=widget_id if action != "back" else None,
                input_text=input_text,
                expected_text=expected_text,
                oracle_widget=oracle_widget,
            )
        )
    if violations:
        raise ValidationError(violations)
    return events
