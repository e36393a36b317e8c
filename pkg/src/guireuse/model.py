"""Serialized app models and recorded GUI tests.

An app model is a desk-scale stand-in for a running app: screens with
widget snapshots, a deterministic transition map, and a window transition
graph (WTG) over activities that may be incomplete or stale. Tests are
sequences of GUI events plus oracle assertions, each carrying the widget
snapshot it was recorded against.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ParseError, ValidationError

ATTRIBUTE_NAMES = (
    "class",
    "resource-id",
    "text",
    "content-desc",
    "clickable",
    "password",
    "parent_text",
    "sibling_text",
    "activity",
    "package",
)

GUI_ACTIONS = ("click", "long_click", "input", "back")
ORACLE_ACTIONS = ("text_present", "widget_exists")


# ---------------------------------------------------------------------------
# core types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Widget:
    """A widget snapshot: opaque id plus its non-empty semantic attributes."""

    widget_id: str
    attributes: tuple[tuple[str, str], ...]

    @classmethod
    def build(cls, widget_id: str, attributes: dict[str, str]) -> "Widget":
        ordered = tuple(
            (name, attributes[name]) for name in ATTRIBUTE_NAMES if attributes.get(name)
        )
        return cls(widget_id, ordered)

    @property
    def attrs(self) -> dict[str, str]:
        return dict(self.attributes)

    def get(self, name: str) -> str:
        for key, value in self.attributes:
            if key == name:
                return value
        return ""


@dataclass(frozen=True)
class Screen:
    screen_id: str
    activity: str
    widgets: tuple[Widget, ...]

    def widget(self, widget_id: str) -> Widget | None:
        for w in self.widgets:
            if w.widget_id == widget_id:
                return w
        return None


@dataclass(frozen=True)
class WtgEdge:
    """Directed activity transition labelled with the triggering event."""

    from_activity: str
    widget_id: str | None
    action: str
    to_activity: str


@dataclass(frozen=True)
class Wtg:
    nodes: tuple[str, ...]
    edges: tuple[WtgEdge, ...]


class LiveWtg:
    """Mutable WTG grown by execution feedback during one run."""

    def __init__(self, nodes: list[str], edges: list[WtgEdge]):
        self.nodes = list(nodes)
        self.edges = list(edges)
        self._edge_set = set(edges)

    @classmethod
    def from_wtg(cls, wtg: Wtg) -> "LiveWtg":
        return cls(list(wtg.nodes), list(wtg.edges))

    def has_edge(self, edge: WtgEdge) -> bool:
        return edge in self._edge_set

    def add_edge(self, edge: WtgEdge) -> bool:
        """Insert a missing edge; returns True when the graph grew."""
        if edge in self._edge_set:
            return False
        for node in (edge.from_activity, edge.to_activity):
            if node not in self.nodes:
                self.nodes.append(node)
        self.edges.append(edge)
        self._edge_set.add(edge)
        return True


TransitionKey = tuple[str, str | None, str]


@dataclass(frozen=True, eq=False)
class AppModel:
    app_id: str
    screens: tuple[Screen, ...]
    initial_screen: str
    wtg: Wtg
    transitions: dict[TransitionKey, str]
    wtg_gaps: tuple[WtgEdge, ...] = ()

    def screen(self, screen_id: str) -> Screen:
        for s in self.screens:
            if s.screen_id == screen_id:
                return s
        raise KeyError(screen_id)

    def __eq__(self, other):
        if not isinstance(other, AppModel):
            return NotImplemented
        return (
            self.app_id == other.app_id
            and self.screens == other.screens
            and self.initial_screen == other.initial_screen
            and self.wtg == other.wtg
            and self.transitions == other.transitions
        )

    def __hash__(self):
        return hash((self.app_id, self.screens, self.initial_screen, self.wtg))


@dataclass(frozen=True)
class Event:
    """One step of a recorded test: a GUI interaction or an oracle check."""

    kind: str
    action: str
    widget: Widget | None = None
    input_text: str | None = None
    expected_text: str | None = None


@dataclass(frozen=True)
class TestCase:
    test_id: str
    events: tuple[Event, ...]

    @property
    def final_oracle_index(self) -> int:
        return len(self.events) - 1


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------


def _require(doc: dict, key: str, path: str, violations: list[str], kind=str):
    value = doc.get(key)
    if value is None:
        violations.append(f"{path}.{key}: missing")
        return None
    if kind is not None and not isinstance(value, kind):
        violations.append(f"{path}.{key}: expected {kind.__name__}")
        return None
    return value


def _parse_widget(doc, path: str, violations: list[str]) -> Widget | None:
    if not isinstance(doc, dict):
        violations.append(f"{path}: expected object")
        return None
    widget_id = _require(doc, "widget_id", path, violations)
    raw_attrs = doc.get("attributes", {})
    if not isinstance(raw_attrs, dict):
        violations.append(f"{path}.attributes: expected object")
        return None
    extra = set(doc) - {"widget_id", "attributes"}
    if extra:
        violations.append(f"{path}: unknown keys {sorted(extra)}")
    attrs: dict[str, str] = {}
    for name, value in raw_attrs.items():
        if name not in ATTRIBUTE_NAMES:
            violations.append(f"{path}.attributes: unknown attribute {name!r}")
            continue
        if not isinstance(value, str):
            violations.append(f"{path}.attributes.{name}: expected string")
            continue
        attrs[name] = value
    for flag in ("clickable", "password"):
        if attrs.get(flag, "") not in ("", "true", "false"):
            violations.append(f"{path}.attributes.{flag}: expected 'true' or 'false'")
    if widget_id is None:
        return None
    return Widget.build(widget_id, attrs)


def load_app_model(doc: dict) -> AppModel:
    """Validate a parsed app-model document and build the typed model.

    Raises ValidationError listing every violation, each prefixed with the
    path of the offending element.
    """
    if not isinstance(doc, dict):
        raise ValidationError("$: expected object")
    violations: list[str] = []
    allowed = {"app_id", "screens", "initial_screen", "wtg", "transitions"}
    extra = set(doc) - allowed
    if extra:
        violations.append(f"$: unknown top-level keys {sorted(extra)}")
    app_id = _require(doc, "app_id", "$", violations)
    initial = _require(doc, "initial_screen", "$", violations)
    raw_screens = _require(doc, "screens", "$", violations, list)

    screens: list[Screen] = []
    seen_screen_ids: set[str] = set()
    if raw_screens is not None:
        if not raw_screens:
            violations.append("$.screens: must not be empty")
        for i, raw in enumerate(raw_screens):
            path = f"screens[{i}]"
            if not isinstance(raw, dict):
                violations.append(f"{path}: expected object")
                continue
            screen_id = _require(raw, "screen_id", path, violations)
            activity = _require(raw, "activity", path, violations)
            raw_widgets = _require(raw, "widgets", path, violations, list)
            widgets: list[Widget] = []
            seen_widget_ids: set[str] = set()
            for j, raw_w in enumerate(raw_widgets or []):
                w = _parse_widget(raw_w, f"{path}.widgets[{j}]", violations)
                if w is None:
                    continue
                if w.widget_id in seen_widget_ids:
                    violations.append(f"{path}.widgets[{j}]: duplicate widget_id {w.widget_id!r}")
                    continue
                seen_widget_ids.add(w.widget_id)
                widgets.append(w)
            if screen_id is None or activity is None:
                continue
            if screen_id in seen_screen_ids:
                violations.append(f"{path}.screen_id: duplicate {screen_id!r}")
                continue
            seen_screen_ids.add(screen_id)
            screens.append(Screen(screen_id, activity, tuple(widgets)))

    screen_by_id = {s.screen_id: s for s in screens}
    if initial is not None and initial not in screen_by_id:
        violations.append(f"$.initial_screen: unknown screen {initial!r}")

    raw_wtg = _require(doc, "wtg", "$", violations, dict)
    nodes: list[str] = []
    edges: list[WtgEdge] = []
    if raw_wtg is not None:
        raw_nodes = _require(raw_wtg, "nodes", "wtg", violations, list)
        raw_edges = _require(raw_wtg, "edges", "wtg", violations, list)
        for i, n in enumerate(raw_nodes or []):
            if not isinstance(n, str):
                violations.append(f"wtg.nodes[{i}]: expected string")
            elif n in nodes:
                violations.append(f"wtg.nodes[{i}]: duplicate node {n!r}")
            else:
                nodes.append(n)
        for i, raw in enumerate(raw_edges or []):
            path = f"wtg.edges[{i}]"
            if not isinstance(raw, dict):
                violations.append(f"{path}: expected object")
                continue
            src = _require(raw, "from_activity", path, violations)
            dst = _require(raw, "to_activity", path, violations)
            action = _require(raw, "action", path, violations)
            widget_id = raw.get("widget_id")
            if widget_id is not None and not isinstance(widget_id, str):
                violations.append(f"{path}.widget_id: expected string or null")
                continue
            if action is not None and action not in GUI_ACTIONS:
                violations.append(f"{path}.action: unknown action {action!r}")
                continue
            if action == "back" and widget_id is not None:
                violations.append(f"{path}.widget_id: back edges carry no widget")
                continue
            if action is not None and action != "back" and widget_id is None:
                violations.append(f"{path}.widget_id: required for {action!r}")
                continue
            if src is None or dst is None or action is None:
                continue
            for node, label in ((src, "from_activity"), (dst, "to_activity")):
                if node not in nodes:
                    violations.append(f"{path}.{label}: unknown activity {node!r}")
            edges.append(WtgEdge(src, widget_id, action, dst))

    raw_transitions = _require(doc, "transitions", "$", violations, list)
    transitions: dict[TransitionKey, str] = {}
    if raw_transitions is not None:
        for i, raw in enumerate(raw_transitions):
            path = f"transitions[{i}]"
            if not isinstance(raw, dict):
                violations.append(f"{path}: expected object")
                continue
            src = _require(raw, "from_screen", path, violations)
            dst = _require(raw, "to_screen", path, violations)
            action = _require(raw, "action", path, violations)
            widget_id = raw.get("widget_id")
            if widget_id is not None and not isinstance(widget_id, str):
                violations.append(f"{path}.widget_id: expected string or null")
                continue
            if action is not None and action not in GUI_ACTIONS:
                violations.append(f"{path}.action: unknown action {action!r}")
                continue
            if action == "back":
                if widget_id is not None:
                    violations.append(f"{path}.widget_id: back transitions carry no widget")
                    continue
            elif action is not None and widget_id is None:
                violations.append(f"{path}.widget_id: required for {action!r}")
                continue
            if src is None or dst is None or action is None:
                continue
            if src not in screen_by_id:
                violations.append(f"{path}.from_screen: unknown screen {src!r}")
                continue
            if dst not in screen_by_id:
                violations.append(f"{path}.to_screen: unknown screen {dst!r}")
                continue
            if widget_id is not None and screen_by_id[src].widget(widget_id) is None:
                violations.append(f"{path}.widget_id: {widget_id!r} not on screen {src!r}")
                continue
            key = (src, widget_id, action)
            if key in transitions:
                violations.append(f"{path}: duplicate transition {key!r}")
                continue
            transitions[key] = dst

    if violations:
        raise ValidationError(violations)

    # transitions not represented in the WTG are recorded, not rejected
    edge_set = set(edges)
    gaps: list[WtgEdge] = []
    for (src, widget_id, action), dst in transitions.items():
        induced = WtgEdge(screen_by_id[src].activity, widget_id, action, screen_by_id[dst].activity)
        if induced not in edge_set and induced not in gaps:
            gaps.append(induced)

    return AppModel(
        app_id=app_id,
        screens=tuple(screens),
        initial_screen=initial,
        wtg=Wtg(tuple(nodes), tuple(edges)),
        transitions=transitions,
        wtg_gaps=tuple(gaps),
    )


def _parse_event(doc, path: str, violations: list[str]) -> Event | None:
    if not isinstance(doc, dict):
        violations.append(f"{path}: expected object")
        return None
    kind = _require(doc, "kind", path, violations)
    action = _require(doc, "action", path, violations)
    if kind not in ("gui", "oracle"):
        violations.append(f"{path}.kind: expected 'gui' or 'oracle'")
        return None
    widget = None
    if doc.get("widget") is not None:
        widget = _parse_widget(doc["widget"], f"{path}.widget", violations)
    input_text = doc.get("input_text")
    expected_text = doc.get("expected_text")
    if input_text is not None and not isinstance(input_text, str):
        violations.append(f"{path}.input_text: expected string")
        return None
    if expected_text is not None and not isinstance(expected_text, str):
        violations.append(f"{path}.expected_text: expected string")
        return None

    if kind == "gui":
        if action not in GUI_ACTIONS:
            violations.append(f"{path}.action: unknown gui action {action!r}")
            return None
        if action == "back":
            if widget is not None:
                violations.append(f"{path}.widget: back events carry no widget")
                return None
        elif widget is None:
            violations.append(f"{path}.widget: required for {action!r}")
            return None
        if (action == "input") != (input_text is not None):
            violations.append(f"{path}.input_text: present iff action is 'input'")
            return None
        if expected_text is not None:
            violations.append(f"{path}.expected_text: only oracle events carry it")
            return None
    else:
        if action not in ORACLE_ACTIONS:
            violations.append(f"{path}.action: unknown oracle action {action!r}")
            return None
        if widget is None:
            violations.append(f"{path}.widget: oracle events carry the asserted widget")
            return None
        if (action == "text_present") != (expected_text is not None):
            violations.append(f"{path}.expected_text: present iff action is 'text_present'")
            return None
        if input_text is not None:
            violations.append(f"{path}.input_text: only input events carry it")
            return None
    return Event(kind, action, widget, input_text, expected_text)


def load_test(doc: dict) -> TestCase:
    """Validate a parsed test document and build the TestCase."""
    if not isinstance(doc, dict):
        raise ValidationError("$: expected object")
    violations: list[str] = []
    extra = set(doc) - {"test_id", "events"}
    if extra:
        violations.append(f"$: unknown top-level keys {sorted(extra)}")
    test_id = _require(doc, "test_id", "$", violations)
    raw_events = _require(doc, "events", "$", violations, list)
    events: list[Event] = []
    if raw_events is not None:
        if not raw_events:
            violations.append("$.events: must not be empty")
        for i, raw in enumerate(raw_events):
            ev = _parse_event(raw, f"events[{i}]", violations)
            if ev is not None:
                events.append(ev)

    if events and len(events) == len(raw_events or []):
        if events[-1].kind != "oracle":
            violations.append(f"events[{len(events) - 1}]: final event must be an oracle")
        gui_positions = [i for i, e in enumerate(events) if e.kind == "gui"]
        if gui_positions:
            first_gui = gui_positions[0]
            for i, e in enumerate(events[:first_gui]):
                if e.kind == "oracle":
                    violations.append(f"events[{i}]: oracle precedes the first gui event")
    if violations:
        raise ValidationError(violations)
    return TestCase(test_id, tuple(events))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def widget_to_dict(w: Widget) -> dict:
    return {"widget_id": w.widget_id, "attributes": dict(w.attributes)}


def app_model_to_dict(model: AppModel) -> dict:
    return {
        "app_id": model.app_id,
        "initial_screen": model.initial_screen,
        "screens": [
            {
                "screen_id": s.screen_id,
                "activity": s.activity,
                "widgets": [widget_to_dict(w) for w in s.widgets],
            }
            for s in model.screens
        ],
        "wtg": {
            "nodes": list(model.wtg.nodes),
            "edges": [
                {
                    "from_activity": e.from_activity,
                    "widget_id": e.widget_id,
                    "action": e.action,
                    "to_activity": e.to_activity,
                }
                for e in model.wtg.edges
            ],
        },
        "transitions": [
            {"from_screen": src, "widget_id": widget_id, "action": action, "to_screen": dst}
            for (src, widget_id, action), dst in model.transitions.items()
        ],
    }


def event_to_dict(e: Event) -> dict:
    out: dict = {"kind": e.kind, "action": e.action}
    if e.widget is not None:
        out["widget"] = widget_to_dict(e.widget)
    if e.input_text is not None:
        out["input_text"] = e.input_text
    if e.expected_text is not None:
        out["expected_text"] = e.expected_text
    return out


def test_to_dict(test: TestCase) -> dict:
    return {"test_id": test.test_id, "events": [event_to_dict(e) for e in test.events]}


def read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc


def read_app_model(path: str) -> AppModel:
    return load_app_model(read_json(path))


def read_test(path: str) -> TestCase:
    return load_test(read_json(path))
