"""Evaluation: ground truth comparison and multi-tuple benchmark runs."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

from .config import RunConfig, config_from_dict
from .engine import MatchedTest, ORACLE_PASS, run_pipeline
from .errors import ParseError, ValidationError
from .lexicon import EmbeddingTable, load_embeddings
from .model import read_app_model, read_json, read_test

try:
    import tomllib
except ModuleNotFoundError:  # python 3.10
    import tomli as tomllib


@dataclass(frozen=True)
class TruthEntry:
    source_index: int
    target_widget_id: str | None
    target_action: str


@dataclass(frozen=True)
class GroundTruth:
    """Expected matches for one source test on one target app.

    ``droppable`` marks source indexes that a correct result may leave
    out entirely (duplicate-removal artifacts); they never count for or
    against the result.
    """

    test_id: str
    entries: dict[int, TruthEntry]
    droppable: frozenset[int] = frozenset()


def load_ground_truth(doc: dict) -> GroundTruth:
    violations: list[str] = []
    if not isinstance(doc, dict):
        raise ValidationError("truth: expected an object")
    extra = set(doc) - {"test_id", "entries", "droppable"}
    if extra:
        violations.append(f"truth: unknown keys {sorted(extra)}")
    test_id = doc.get("test_id")
    if not isinstance(test_id, str) or not test_id:
        violations.append("truth.test_id: expected a non-empty string")
    entries: dict[int, TruthEntry] = {}
    raw_entries = doc.get("entries", [])
    if not isinstance(raw_entries, list):
        violations.append("truth.entries: expected a list")
        raw_entries = []
    for pos, raw in enumerate(raw_entries):
        where = f"truth.entries[{pos}]"
        if not isinstance(raw, dict):
            violations.append(f"{where}: expected an object")
            continue
        idx = raw.get("source_index")
        widget = raw.get("target_widget_id")
        action = raw.get("target_action")
        if not isinstance(idx, int) or idx < 0:
            violations.append(f"{where}.source_index: expected a non-negative integer")
            continue
        if idx in entries:
            violations.append(f"{where}: duplicate source_index {idx}")
            continue
        if widget is not None and (not isinstance(widget, str) or not widget):
            violations.append(f"{where}.target_widget_id: expected null or a non-empty string")
            continue
        if not isinstance(action, str) or not action:
            violations.append(f"{where}.target_action: expected a non-empty string")
            continue
        entries[idx] = TruthEntry(idx, widget, action)
    droppable = doc.get("droppable", [])
    if not isinstance(droppable, list) or not all(isinstance(i, int) for i in droppable):
        violations.append("truth.droppable: expected a list of integers")
        droppable = []
    if violations:
        raise ValidationError(violations)
    return GroundTruth(test_id=test_id, entries=entries, droppable=frozenset(droppable))


@dataclass(frozen=True)
class Metrics:
    gui_precision: float
    gui_recall: float
    oracle_precision: float
    oracle_recall: float
    success: bool
    elapsed_ms: float = field(default=0.0, compare=False)

    def to_dict(self, timings: bool = True) -> dict:
        out = {
            "gui_precision": self.gui_precision,
            "gui_recall": self.gui_recall,
            "oracle_precision": self.oracle_precision,
            "oracle_recall": self.oracle_recall,
            "success": self.success,
        }
        if timings:
            out["elapsed_ms"] = self.elapsed_ms
        return out


def _pair_correct(pair, entry: TruthEntry) -> bool:
    if pair.skipped:
        return False
    if pair.concrete.widget_id != entry.target_widget_id:
        return False
    return pair.action == entry.target_action


def compute_metrics(result: MatchedTest, truth: GroundTruth, elapsed_ms: float = 0.0) -> Metrics:
    """Precision and recall per event kind, plus end-to-end success.

    Matched means the pair carries a concrete event; a skip marker counts
    as matched-and-incorrect unless its source index is droppable. With no
    matched pairs of a kind, precision is vacuously 1.0; likewise recall
    with no truth entries of that kind.
    """
    if truth.test_id != result.source_test_id:
        raise ValidationError(
            f"truth.test_id: {truth.test_id!r} does not match result test {result.source_test_id!r}"
        )

    counts = {"gui": [0, 0], "oracle": [0, 0]}  # kind -> [correct, matched]
    seen: set[int] = set()
    for pair in result.pairs:
        if pair.source_index in truth.droppable:
            continue
        seen.add(pair.source_index)
        entry = truth.entries.get(pair.source_index)
        correct = entry is not None and _pair_correct(pair, entry)
        counts[pair.kind][1] += 1
        if correct:
            counts[pair.kind][0] += 1

    def precision(kind: str) -> float:
        correct, matched = counts[kind]
        return correct / matched if matched else 1.0

    truth_by_kind = {"gui": 0, "oracle": 0}
    correct_by_kind = {"gui": 0, "oracle": 0}
    pair_by_index = {p.source_index: p for p in result.pairs}
    for idx, entry in truth.entries.items():
        if idx in truth.droppable:
            continue
        kind = "oracle" if entry.target_action in ("text_present", "widget_exists") else "gui"
        truth_by_kind[kind] += 1
        pair = pair_by_index.get(idx)
        if pair is not None and _pair_correct(pair, entry):
            correct_by_kind[kind] += 1

    def recall(kind: str) -> float:
        total = truth_by_kind[kind]
        return correct_by_kind[kind] / total if total else 1.0

    final = None
    for pair in reversed(result.pairs):
        if pair.kind == "oracle":
            final = pair
            break
    final_entry = truth.entries.get(final.source_index) if final is not None else None
    success = (
        final is not None
        and final_entry is not None
        and _pair_correct(final, final_entry)
        and result.oracle_status == ORACLE_PASS
    )
    return Metrics(
        gui_precision=precision("gui"),
        gui_recall=recall("gui"),
        oracle_precision=precision("oracle"),
        oracle_recall=recall("oracle"),
        success=success,
        elapsed_ms=elapsed_ms,
    )


# ---------------------------------------------------------------------------
# benchmark suites
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteTuple:
    group: str
    source_app: Path
    target_app: Path
    test: Path
    truth: Path
    embeddings: Path


@dataclass(frozen=True)
class Suite:
    tuples: tuple[SuiteTuple, ...]
    config: RunConfig


def load_suite(path: Path) -> Suite:
    """Parse a benchmark suite file; relative paths resolve from the file."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: invalid TOML: {exc}") from exc

    base = path.parent
    violations: list[str] = []
    extra = set(doc) - {"tuples", "config"}
    if extra:
        violations.append(f"suite: unknown keys {sorted(extra)}")
    raw_tuples = doc.get("tuples", [])
    if not isinstance(raw_tuples, list) or not raw_tuples:
        violations.append("suite.tuples: expected a non-empty array of tables")
        raw_tuples = []
    tuples: list[SuiteTuple] = []
    for pos, raw in enumerate(raw_tuples):
        where = f"suite.tuples[{pos}]"
        if not isinstance(raw, dict):
            violations.append(f"{where}: expected a table")
            continue
        extra = set(raw) - {"group", "source_app", "target_app", "test", "truth", "embeddings"}
        if extra:
            violations.append(f"{where}: unknown keys {sorted(extra)}")
            continue
        missing = [k for k in ("group", "source_app", "target_app", "test", "truth", "embeddings") if k not in raw]
        if missing:
            violations.append(f"{where}: missing keys {missing}")
            continue
        if not all(isinstance(raw[k], str) and raw[k] for k in raw):
            violations.append(f"{where}: all values must be non-empty strings")
            continue
        tuples.append(
            SuiteTuple(
                group=raw["group"],
                source_app=base / raw["source_app"],
                target_app=base / raw["target_app"],
                test=base / raw["test"],
                truth=base / raw["truth"],
                embeddings=base / raw["embeddings"],
            )
        )
    if violations:
        raise ValidationError(violations)
    cfg = config_from_dict(doc.get("config", {}), base_dir=base)
    return Suite(tuples=tuple(tuples), config=cfg)


def run_tuple(entry: SuiteTuple, cfg: RunConfig, table: EmbeddingTable | None = None) -> tuple[MatchedTest, Metrics]:
    if table is None:
        table = load_embeddings(entry.embeddings)
    target = read_app_model(entry.target_app)
    source = read_test(entry.test)
    truth = load_ground_truth(read_json(entry.truth))
    start = time.perf_counter()
    result, _ = run_pipeline(source, target, table, cfg)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return result, compute_metrics(result, truth, elapsed_ms)


def run_suite(suite: Suite) -> dict:
    """Run every tuple; failures are recorded per tuple, never fatal."""
    rows: list[dict] = []
    tables: dict[Path, EmbeddingTable] = {}
    for entry in suite.tuples:
        row: dict = {
            "group": entry.group,
            "source_app": entry.source_app.stem,
            "target_app": entry.target_app.stem,
            "test": entry.test.stem,
        }
        try:
            table = tables.get(entry.embeddings)
            if table is None:
                table = load_embeddings(entry.embeddings)
                tables[entry.embeddings] = table
            result, metrics = run_tuple(entry, suite.config, table)
            row["metrics"] = metrics.to_dict()
            row["oracle_status"] = result.oracle_status
            row["average_similarity"] = result.average_similarity
        except Exception as exc:  # noqa: BLE001 - per-tuple isolation is the point
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)

    groups: dict[str, list[dict]] = {}
    for row in rows:
        if "metrics" in row:
            groups.setdefault(row["group"], []).append(row["metrics"])
    averages = {}
    for group in sorted(groups):
        ms = groups[group]
        averages[group] = {
            "tuples": len(ms),
            "gui_precision": sum(m["gui_precision"] for m in ms) / len(ms),
            "gui_recall": sum(m["gui_recall"] for m in ms) / len(ms),
            "oracle_precision": sum(m["oracle_precision"] for m in ms) / len(ms),
            "oracle_recall": sum(m["oracle_recall"] for m in ms) / len(ms),
            "success_rate": sum(1 for m in ms if m["success"]) / len(ms),
        }
    return {"tuples": rows, "group_averages": averages}


def strip_timings(report: dict) -> dict:
    """Copy of a suite report with every timing field removed."""
    out = {"tuples": [], "group_averages": report["group_averages"]}
    for row in report["tuples"]:
        row = dict(row)
        if "metrics" in row:
            row["metrics"] = {k: v for k, v in row["metrics"].items() if k != "elapsed_ms"}
        out["tuples"].append(row)
    return out


def format_report_table(report: dict) -> str:
    """Aligned text table for terminal output."""
    headers = ("group", "source", "target", "gui P", "gui R", "orc P", "orc R", "ok")
    lines: list[list[str]] = []
    for row in report["tuples"]:
        if "error" in row:
            lines.append([row["group"], row["source_app"], row["target_app"], "-", "-", "-", "-", "ERR"])
            continue
        m = row["metrics"]
        lines.append(
            [
                row["group"],
                row["source_app"],
                row["target_app"],
                f"{m['gui_precision']:.2f}",
                f"{m['gui_recall']:.2f}",
                f"{m['oracle_precision']:.2f}",
                f"{m['oracle_recall']:.2f}",
                "yes" if m["success"] else "no",
            ]
        )
    for group, avg in sorted(report["group_averages"].items()):
        lines.append(
            [
                f"avg:{group}",
                "",
                "",
                f"{avg['gui_precision']:.2f}",
                f"{avg['gui_recall']:.2f}",
                f"{avg['oracle_precision']:.2f}",
                f"{avg['oracle_recall']:.2f}",
                f"{avg['success_rate']:.2f}",
            ]
        )
    widths = [max(len(h), *(len(line[i]) for line in lines)) if lines else len(h) for i, h in enumerate(headers)]
    def fmt(cells: list[str] | tuple[str, ...]) -> str:
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    out = [fmt(headers), fmt(["-" * w for w in widths])]
    out.extend(fmt(line) for line in lines)
    return "\n".join(out)
