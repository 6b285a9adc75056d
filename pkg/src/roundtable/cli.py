"""Command-line entry points: headless sessions, log replay, evaluation runs,
the placement benchmark, and report emission.

Every subcommand runs fully offline when pointed at a scripted fixtures
directory (lm.json / search.json / embed.json); without one, gateways run in
live mode and read LM_API_KEY / SEARCH_API_KEY from the environment.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable

from .engine.events import load_events
from .engine.session import advance, replay, start_session
from .errors import BudgetExhausted, RoundtableError, SessionTerminated
from .evalharness.insertion import (
    METHODS,
    format_insertion_table,
    insertion_benchmark,
    load_insertion_tasks,
)
from .evalharness.runner import (
    case_metrics,
    run_budgeted,
    summarize_metrics,
    write_metrics_csv,
    write_summary_json,
)
from .evalharness.wildseek import load_bundled_sample, load_wildseek
from .gateways.base import Gateways
from .gateways.config import GatewayConfig, build_gateways
from .report import generate_report
from .service.registry import snapshot_of, snapshot_text
from .turns import EngineConfig, Utterance


def _gateway_factory(args: argparse.Namespace) -> Callable[[], Gateways]:
    if getattr(args, "scripted", None):
        config = GatewayConfig(mode="scripted", fixtures_dir=args.scripted)
    elif getattr(args, "gateway_config", None):
        config = GatewayConfig.from_file(args.gateway_config)
    else:
        config = GatewayConfig(mode="live")
    return lambda: build_gateways(config)


def _engine_config(args: argparse.Namespace) -> EngineConfig:
    if getattr(args, "config", None):
        return EngineConfig.from_file(args.config)
    return EngineConfig()


def _turn_line(utterance: Utterance) -> str:
    return (
        f"[{utterance.turn_index:>2}] {utterance.actor.label()} "
        f"({utterance.intent.value}): {utterance.text}"
    )


def _cmd_session_run(args: argparse.Namespace) -> int:
    gateways = _gateway_factory(args)()
    state = start_session(
        args.topic, args.goal, _engine_config(args), gateways,
        event_log_path=args.log_out,
    )
    print(f"session started on {args.topic!r}; personas:")
    for persona in state.personas:
        print(f"  - {persona.role}: {persona.description}")
    for _ in range(args.auto_turns):
        try:
            utterance = advance(state, gateways)
        except (SessionTerminated, BudgetExhausted) as exc:
            print(f"stopped: {exc}")
            break
        print(_turn_line(utterance))
    if args.report_out:
        report = generate_report(state.mind_map, state, gateways)
        Path(args.report_out).write_text(report.to_markdown(), encoding="utf-8")
        print(f"report written to {args.report_out}")
    print(
        f"phase={state.phase.value} turns={len(state.history)} "
        f"searches={state.budget.spent}/{state.budget.initial} "
        f"events={len(state.event_log)}"
    )
    return 0


def _cmd_session_replay(args: argparse.Namespace) -> int:
    events = load_events(args.log)
    state = replay(events, _gateway_factory(args)())
    original = [e.to_line() for e in events]
    reconstructed = state.event_log.to_lines()
    if reconstructed != original:
        for i, (a, b) in enumerate(zip(original, reconstructed)):
            if a != b:
                print(f"replay diverged at event {i}:\n  logged: {a}\n  replay: {b}",
                      file=sys.stderr)
                break
        else:
            print(
                f"replay produced {len(reconstructed)} events, log has {len(original)}",
                file=sys.stderr,
            )
        return 1
    if args.snapshot_out:
        body = snapshot_text(snapshot_of(Path(args.log).stem, state))
        Path(args.snapshot_out).write_text(body, encoding="utf-8")
    print(
        f"replayed {len(events)} events; log byte-identical; "
        f"phase={state.phase.value} turns={len(state.history)}"
    )
    return 0


def _cmd_eval_run(args: argparse.Namespace) -> int:
    if args.cases == "sample":
        cases = load_bundled_sample()
    else:
        cases = load_wildseek(args.cases, official=args.official)
    if args.limit:
        cases = cases[: args.limit]
    factory = _gateway_factory(args)

    def one(case):
        return case_metrics(run_budgeted(args.pipeline, case, args.budget, factory()))

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(one, cases))
    else:
        rows = [one(case) for case in cases]
    if args.out_csv:
        write_metrics_csv(rows, args.out_csv)
        print(f"per-case metrics written to {args.out_csv}")
    summary = summarize_metrics(rows)
    if args.out_json:
        write_summary_json(summary, args.out_json)
        print(f"summary written to {args.out_json}")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _cmd_eval_insertion(args: argparse.Namespace) -> int:
    factory = _gateway_factory(args)
    tasks = load_insertion_tasks(args.tasks, factory().embedder)
    methods = list(METHODS) if args.method == "all" else [args.method]
    reports = [insertion_benchmark(tasks, method, factory()) for method in methods]
    print(format_insertion_table(reports))
    if args.out:
        payload = {r.method: r.to_json() for r in reports}
        Path(args.out).write_text(
            json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8"
        )
        print(f"accuracy report written to {args.out}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    gateways = _gateway_factory(args)()
    state = replay(load_events(args.log), gateways)
    report = generate_report(state.mind_map, state, gateways)
    Path(args.out).write_text(report.to_markdown(), encoding="utf-8")
    print(f"report with {len(report.sections)} sections and "
          f"{len(report.references)} references written to {args.out}")
    return 0


def _add_gateway_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scripted", help="scripted fixtures directory (offline mode)")
    parser.add_argument("--gateway-config", help="gateway config JSON file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roundtable")
    sub = parser.add_subparsers(dest="command", required=True)

    session = sub.add_parser("session", help="run or replay discourse sessions")
    session_sub = session.add_subparsers(dest="session_command", required=True)

    run = session_sub.add_parser("run", help="run a session headless")
    run.add_argument("--topic", required=True)
    run.add_argument("--goal")
    run.add_argument("--auto-turns", type=int, default=6)
    run.add_argument("--config", help="engine config JSON file")
    run.add_argument("--log-out", help="write the event log to this JSONL path")
    run.add_argument("--report-out", help="write the final report markdown here")
    _add_gateway_flags(run)
    run.set_defaults(func=_cmd_session_run)

    rep = session_sub.add_parser("replay", help="replay an event log")
    rep.add_argument("--log", required=True)
    rep.add_argument("--snapshot-out", help="write the reconstructed snapshot here")
    _add_gateway_flags(rep)
    rep.set_defaults(func=_cmd_session_replay)

    ev = sub.add_parser("eval", help="evaluation harness")
    eval_sub = ev.add_subparsers(dest="eval_command", required=True)

    evrun = eval_sub.add_parser("run", help="budgeted pipeline runs over cases")
    evrun.add_argument("--cases", required=True,
                       help="cases JSONL path, or 'sample' for the bundled set")
    evrun.add_argument("--pipeline", choices=("costorm", "rag"), default="costorm")
    evrun.add_argument("--budget", type=int, default=30)
    evrun.add_argument("--limit", type=int, default=0)
    evrun.add_argument("--jobs", type=int, default=1)
    evrun.add_argument("--official", action="store_true",
                       help="enforce the official 100-case / 24-domain shape")
    evrun.add_argument("--out-csv")
    evrun.add_argument("--out-json")
    _add_gateway_flags(evrun)
    evrun.set_defaults(func=_cmd_eval_run)

    evins = eval_sub.add_parser("insertion", help="placement benchmark")
    evins.add_argument("--tasks", required=True)
    evins.add_argument("--method", choices=METHODS + ("all",), default="hybrid")
    evins.add_argument("--out")
    _add_gateway_flags(evins)
    evins.set_defaults(func=_cmd_eval_insertion)

    report = sub.add_parser("report", help="generate a report from an event log")
    report.add_argument("--log", required=True)
    report.add_argument("--out", required=True)
    _add_gateway_flags(report)
    report.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RoundtableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
