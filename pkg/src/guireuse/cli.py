"""Command line interface.

Exit codes: 0 when the run completed and the final oracle passed (or
nothing failed, for evaluate/simulate), 2 when the run completed but an
oracle or tuple failed, 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import RunConfig, load_config
from .engine import ORACLE_PASS, run_pipeline
from .errors import GuiReuseError
from .evaluation import format_report_table, load_suite, run_suite, strip_timings
from .lexicon import EmbeddingTable, load_embeddings
from .model import read_app_model, read_json, read_test
from .simulator import (
    STATUS_NO_TRANSITION,
    STATUS_ORACLE_FAIL,
    Session,
    load_concrete_events,
    trace_to_jsonl,
)
from .engine import make_session

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED = 2


def _dump_json(obj: dict, out: Path | None) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _load_run_config(args: argparse.Namespace) -> RunConfig:
    if getattr(args, "config", None) is not None:
        return load_config(Path(args.config))
    return RunConfig()


def _resolve_embeddings(args: argparse.Namespace, cfg: RunConfig) -> EmbeddingTable:
    if getattr(args, "embeddings", None) is not None:
        return load_embeddings(Path(args.embeddings))
    if cfg.embeddings is not None:
        return load_embeddings(cfg.embeddings)
    raise GuiReuseError("no embeddings given: pass --embeddings or set it in the config file")


def cmd_reuse(args: argparse.Namespace) -> int:
    cfg = _load_run_config(args)
    table = _resolve_embeddings(args, cfg)
    read_app_model(Path(args.source_app))  # validated for parity; matching needs only the test
    target = read_app_model(Path(args.target_app))
    source = read_test(Path(args.test))

    result, cache = run_pipeline(source, target, table, cfg)
    _dump_json(result.to_dict(timings=not args.no_timings), Path(args.out) if args.out else None)
    if args.dump_cache:
        Path(args.dump_cache).write_text(
            json.dumps(cache.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    return EXIT_OK if result.oracle_status == ORACLE_PASS else EXIT_FAILED


def cmd_evaluate(args: argparse.Namespace) -> int:
    suite = load_suite(Path(args.suite))
    report = run_suite(suite)
    if args.no_timings:
        report = strip_timings(report)
    out = Path(args.out) if args.out else None
    _dump_json(report, out)
    if out is not None:
        sys.stdout.write(format_report_table(report) + "\n")
    return EXIT_FAILED if any("error" in row for row in report["tuples"]) else EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _load_run_config(args)
    model = read_app_model(Path(args.app))
    if getattr(args, "embeddings", None) is not None or cfg.embeddings is not None:
        table = _resolve_embeddings(args, cfg)
    else:
        # without embeddings the widget_exists oracle degrades to exact matching
        table = EmbeddingTable(dimension=1, vectors={})
    events = load_concrete_events(read_json(Path(args.test)))
    session = make_session(model, table, cfg)
    outcomes = session.execute_test(events)
    text = trace_to_jsonl(outcomes)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    bad = any(o.status in (STATUS_NO_TRANSITION, STATUS_ORACLE_FAIL) for o in outcomes)
    return EXIT_FAILED if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="guireuse", description="GUI test reuse across apps")
    sub = parser.add_subparsers(dest="command", required=True)

    reuse = sub.add_parser("reuse", help="adapt one source test to a target app")
    reuse.add_argument("--source-app", required=True, help="source app model (json)")
    reuse.add_argument("--target-app", required=True, help="target app model (json)")
    reuse.add_argument("--test", required=True, help="source test case (json)")
    reuse.add_argument("--embeddings", help="word embedding table (word2vec text)")
    reuse.add_argument("--config", help="run configuration (toml)")
    reuse.add_argument("--out", help="write the matched test here instead of stdout")
    reuse.add_argument("--no-timings", action="store_true", help="omit timing fields from output")
    reuse.add_argument("--dump-cache", help="write explorer path cache contents to this file")
    reuse.set_defaults(func=cmd_reuse)

    evaluate = sub.add_parser("evaluate", help="run a benchmark suite and report metrics")
    evaluate.add_argument("--suite", required=True, help="suite description (toml)")
    evaluate.add_argument("--out", help="write the json report here; table goes to stdout")
    evaluate.add_argument("--no-timings", action="store_true", help="omit timing fields from output")
    evaluate.set_defaults(func=cmd_evaluate)

    simulate = sub.add_parser("simulate", help="execute a concrete event list on an app model")
    simulate.add_argument("--app", required=True, help="app model (json)")
    simulate.add_argument("--test", required=True, help="concrete event list (json)")
    simulate.add_argument("--embeddings", help="embeddings for widget_exists oracles")
    simulate.add_argument("--config", help="run configuration (toml)")
    simulate.add_argument("--out", help="write the trace here instead of stdout")
    simulate.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GuiReuseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
