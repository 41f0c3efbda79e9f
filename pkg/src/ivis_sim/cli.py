"""Command line front end.

Subcommands::

    ivis-sim run    --scenario <file> --trace <file> [--participant <id>]
    ivis-sim serve  --scenario <file> --listen <addr:port> [--record <dir>]
                    [--frontend <dir>]
    ivis-sim replay --trace <file> [--participant <id>]
    ivis-sim report --logs <dir>

Exit codes: 0 success (run: task completed; replay: both passes identical;
report: headline hypothesis supported), 2 clean run with a negative outcome
(task incomplete, replay divergence, hypothesis unsupported), 3 bad input
files or configuration.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import SimConfigError
from .harness import (
    HypothesisOutcome,
    HypothesisReport,
    InsufficientDataError,
    evaluate_hypotheses,
    load_results_dir,
    task_to_json,
)
from .harness import InteractionModel
from .service import (
    canonical_state_json,
    effective_clock_mode,
    load_scenario,
    load_trace,
    run_headless,
    snapshot_state,
)


def _parse_listen(raw: str) -> tuple[str, int]:
    host, sep, port = raw.rpartition(":")
    if not sep or not host:
        raise SimConfigError(f"--listen needs addr:port, got {raw!r}")
    try:
        return host, int(port)
    except ValueError:
        raise SimConfigError(f"bad port in --listen value {raw!r}") from None


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    trace = load_trace(args.trace)
    result, vehicle = run_headless(
        scenario,
        list(trace.events),
        participant_id=args.participant,
        clock_mode=effective_clock_mode(scenario, trace),
    )
    print(json.dumps({"result": task_to_json(result), "final_state": snapshot_state(vehicle)}))
    return 0 if result.completed else 2


def _cmd_replay(args: argparse.Namespace) -> int:
    trace = load_trace(args.trace)
    if trace.scenario_path is None:
        raise SimConfigError(f"trace {args.trace} has no '# scenario' header to replay against")
    scenario = load_scenario(trace.scenario_path)
    mode = effective_clock_mode(scenario, trace)
    passes = []
    for _ in range(2):
        result, vehicle = run_headless(
            scenario, list(trace.events), participant_id=args.participant, clock_mode=mode
        )
        passes.append((json.dumps(task_to_json(result)), canonical_state_json(vehicle)))
    identical = passes[0] == passes[1]
    print(
        json.dumps(
            {
                "result": json.loads(passes[0][0]),
                "final_state": json.loads(passes[0][1]),
                "deterministic": identical,
            }
        )
    )
    return 0 if identical else 2


def _cmd_serve(args: argparse.Namespace) -> int:
    from .server import serve
    from .service import build_bundle

    scenario = load_scenario(args.scenario)
    bundle = build_bundle(scenario)
    host, port = _parse_listen(args.listen)
    serve(bundle, host, port, record_dir=args.record, frontend_dir=args.frontend)
    return 0


def _outcome_json(outcome: HypothesisOutcome) -> dict:
    return {
        "conventional_mean": outcome.conventional_mean,
        "iinteraction_mean": outcome.iinteraction_mean,
        "supported": outcome.supported,
    }


def report_json(report: HypothesisReport) -> dict:
    return {
        "time": _outcome_json(report.time),
        "satisfaction": _outcome_json(report.satisfaction),
        "errors": _outcome_json(report.errors),
        "supported": report.supported,
    }


def _cmd_report(args: argparse.Namespace) -> int:
    tasks, surveys = load_results_dir(args.logs)
    conv_tasks = [t for t in tasks if t.model is InteractionModel.CONVENTIONAL]
    ii_tasks = [t for t in tasks if t.model is InteractionModel.IINTERACTION]
    conv_surveys = [s for s in surveys if s.model is InteractionModel.CONVENTIONAL]
    ii_surveys = [s for s in surveys if s.model is InteractionModel.IINTERACTION]
    try:
        report = evaluate_hypotheses(conv_tasks, conv_surveys, ii_tasks, ii_surveys)
    except InsufficientDataError as exc:
        raise SimConfigError(str(exc)) from None
    print(json.dumps(report_json(report)))
    return 0 if report.supported else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ivis-sim",
        description="Deterministic in-vehicle interaction simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a recorded input trace headlessly")
    run_p.add_argument("--scenario", required=True)
    run_p.add_argument("--trace", required=True)
    run_p.add_argument("--participant", default="trace")
    run_p.set_defaults(func=_cmd_run)

    serve_p = sub.add_parser("serve", help="serve the WebSocket wire protocol")
    serve_p.add_argument("--scenario", required=True)
    serve_p.add_argument("--listen", required=True, metavar="ADDR:PORT")
    serve_p.add_argument("--record", default=None, metavar="DIR")
    serve_p.add_argument("--frontend", default=None, metavar="DIR")
    serve_p.set_defaults(func=_cmd_serve)

    replay_p = sub.add_parser("replay", help="re-run a recorded trace and check determinism")
    replay_p.add_argument("--trace", required=True)
    replay_p.add_argument("--participant", default="trace")
    replay_p.set_defaults(func=_cmd_replay)

    report_p = sub.add_parser("report", help="evaluate hypotheses over session logs")
    report_p.add_argument("--logs", required=True, metavar="DIR")
    report_p.set_defaults(func=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SimConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
