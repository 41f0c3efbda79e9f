#!/usr/bin/env python3
"""Generate a synthetic usability cohort and evaluate the hypotheses.

Each participant performs the oil-reset task once under each interaction
model.  Conventional runs draw slower pacing, occasional premature hold
releases, stray button presses, and an occasional abandoned attempt; code
entry runs are quicker with an occasional fat-fingered digit.  Results land
in an NDJSON session log compatible with ``ivis-sim report``.

Usage::

    python3 scripts/run_synthetic_study.py --out runs/study --participants 8
    ivis-sim report --logs runs/study
"""

from __future__ import annotations

import argparse
import json
import random
from pathlib import Path

from ivis_sim.agents import (
    expert_icode_script,
    novice_icode_script,
    procedure_a_script,
    procedure_b_script,
)
from ivis_sim.cli import report_json
from ivis_sim.events import button_down, button_up
from ivis_sim.harness import (
    InteractionModel,
    SurveyResponse,
    evaluate_hypotheses,
    export_results,
)
from ivis_sim.service import load_scenario, run_headless

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "data" / "scenarios"


def with_stray_click(events, gap):
    """Slip an off-script mode tap in right after the first event."""
    first = events[0].time
    extra = [button_down(first + 0.2 * gap, "mode"), button_up(first + 0.3 * gap, "mode")]
    merged = sorted(list(events) + extra, key=lambda e: e.time)
    return merged


def conventional_events(rng: random.Random, use_a: bool):
    gap = rng.uniform(1.2, 2.5)
    if use_a:
        first_hold = rng.uniform(2.0, 4.0) if rng.random() < 0.5 else None
        script = procedure_a_script(gap=gap, first_hold=first_hold)
    else:
        script = procedure_b_script(gap=gap)
    events = list(script.events)
    if rng.random() < 0.5:
        events = with_stray_click(events, gap)
    if rng.random() < 0.15:
        events = events[: max(3, int(len(events) * 0.6))]  # walked away
    return events


def icode_events(rng: random.Random):
    gap = rng.uniform(0.8, 1.4)
    if rng.random() < 0.25:
        return list(novice_icode_script("3014", gap=gap).events)
    return list(expert_icode_script("3014", gap=gap).events)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="runs/study", help="output directory for the NDJSON log")
    parser.add_argument("--participants", type=int, default=8)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    scenario_a = load_scenario(SCENARIO_DIR / "oil_due_procedure_a.scn")
    scenario_b = load_scenario(SCENARIO_DIR / "oil_due_procedure_b.scn")
    scenario_i = load_scenario(SCENARIO_DIR / "oil_due_icode.scn")

    results, surveys = [], []
    for index in range(args.participants):
        pid = f"p{index:02d}"
        use_a = index % 2 == 0
        conv_scenario = scenario_a if use_a else scenario_b
        conv_result, _ = run_headless(
            conv_scenario, conventional_events(rng, use_a), participant_id=pid
        )
        ii_result, _ = run_headless(scenario_i, icode_events(rng), participant_id=pid)
        results += [conv_result, ii_result]
        surveys += [
            SurveyResponse(pid, InteractionModel.CONVENTIONAL,
                           tuple(rng.randint(2, 4) for _ in range(3))),
            SurveyResponse(pid, InteractionModel.IINTERACTION,
                           tuple(rng.randint(4, 5) for _ in range(3))),
        ]

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    export_results(out_dir / "study.ndjson", results, surveys)

    conv = [r for r in results if r.model is InteractionModel.CONVENTIONAL]
    ii = [r for r in results if r.model is InteractionModel.IINTERACTION]
    conv_s = [s for s in surveys if s.model is InteractionModel.CONVENTIONAL]
    ii_s = [s for s in surveys if s.model is InteractionModel.IINTERACTION]
    report = evaluate_hypotheses(conv, conv_s, ii, ii_s)

    completed = sum(r.completed for r in results)
    print(f"participants: {args.participants}, tasks: {len(results)}, completed: {completed}")
    print(f"log: {out_dir / 'study.ndjson'}")
    print(json.dumps(report_json(report), indent=2))
    return 0 if report.supported else 2


if __name__ == "__main__":
    raise SystemExit(main())
