"""Scenario files, bundles, trace round-trips, replay determinism, CLI."""

from __future__ import annotations

import json
import random

import pytest

from ivis_sim.agents import expert_icode_script, novice_icode_script, procedure_a_script
from ivis_sim.cli import main
from ivis_sim.ecm import SECONDS_PER_DAY, IgnitionPosition, ItemStatus
from ivis_sim.events import (
    KnobDirection,
    button_down,
    button_up,
    ignition_set,
    knob_turn,
    parse_trace,
    serialize_trace,
)
from ivis_sim.harness import InteractionModel, task_to_json
from ivis_sim.service import (
    ClockMode,
    ScenarioError,
    build_bundle,
    build_session,
    canonical_state_json,
    effective_clock_mode,
    load_scenario,
    load_trace,
    parse_scenario,
    run_headless,
    write_trace,
)

SCN_TEMPLATE = """\
profile {profile}
code_table {table}
model iinteraction
target oil_change
odometer {odometer}
ignition ON
due oil_change
"""


def write_scenario(tmp_path, data_dir, odometer=3400, extra=""):
    text = SCN_TEMPLATE.format(
        profile=data_dir / "profiles" / "default.profile",
        table=data_dir / "tables" / "reference_codes.tbl",
        odometer=odometer,
    ) + extra
    path = tmp_path / "case.scn"
    path.write_text(text, encoding="utf-8")
    return path


def test_stock_scenarios_load(icode_scenario, procedure_a_scenario, procedure_b_scenario):
    assert icode_scenario.model is InteractionModel.IINTERACTION
    assert icode_scenario.clock_mode is ClockMode.VIRTUAL
    assert procedure_a_scenario.ignition is IgnitionPosition.OFF
    assert procedure_b_scenario.procedure_path is not None


def test_bundle_preactivates_distance_due(icode_scenario):
    bundle = build_bundle(icode_scenario)
    item = bundle.initial_vehicle.items["oil_change"]
    assert item.status is ItemStatus.DUE
    assert item.last_reset_odometer == 400.0  # 3400 - 3000
    assert bundle.initial_vehicle.oil_life == 0.0
    assert "SERVICE OIL CHANGE" in bundle.initial_vehicle.lcd.lines


def test_bundle_preactivates_time_due(tmp_path, data_dir):
    path = write_scenario(tmp_path, data_dir, odometer=100)
    bundle = build_bundle(load_scenario(path))
    item = bundle.initial_vehicle.items["oil_change"]
    assert item.status is ItemStatus.DUE
    assert item.last_reset_time == -90.0 * SECONDS_PER_DAY


def test_bundle_cannot_activate_distance_only_item(tmp_path, data_dir):
    text = (
        f"profile {data_dir / 'profiles' / 'default.profile'}\n"
        f"code_table {data_dir / 'tables' / 'reference_codes.tbl'}\n"
        "model iinteraction\ntarget tire_rotation\nodometer 100\ndue tire_rotation\n"
    )
    path = tmp_path / "bad.scn"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ScenarioError, match="tire_rotation"):
        build_bundle(load_scenario(path))


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("model iinteraction\ntarget x\n", "profile"),
        ("profile p\ntarget x\n", "model"),
        ("profile p\nmodel iinteraction\n", "target"),
        ("profile p\nmodel teleport\ntarget x\n", "teleport"),
        ("profile p\nmodel iinteraction\ntarget x\n", "code_table"),
        ("profile p\nprofile q\nmodel conventional\ntarget x\n", "duplicate"),
        ("profile p\nmodel conventional\ntarget x\nprocedure q\nodometer -5\n", ">= 0"),
        ("profile p\nmodel conventional\ntarget x\nprocedure q\nignition TILTED\n", "TILTED"),
        ("profile p\nmodel conventional\ntarget x\nprocedure q\nclock_mode lunar\n", "lunar"),
    ],
)
def test_scenario_parse_errors(tmp_path, text, fragment):
    with pytest.raises(ScenarioError, match=fragment):
        parse_scenario(text, tmp_path, "case")


def test_env_override_profile(tmp_path, data_dir, monkeypatch):
    alt = tmp_path / "alt.profile"
    stock = (data_dir / "profiles" / "default.profile").read_text(encoding="utf-8")
    alt.write_text(stock.replace("dist=3000", "dist=200"), encoding="utf-8")
    monkeypatch.setenv("IVIS_SIM_PROFILE", str(alt))
    scenario = load_scenario(data_dir / "scenarios" / "oil_due_icode.scn")
    bundle = build_bundle(scenario)
    assert bundle.profile.items["oil_change"].distance_interval == 200.0


def test_cross_validation_unknown_target(tmp_path, data_dir):
    text = (
        f"profile {data_dir / 'profiles' / 'default.profile'}\n"
        f"code_table {data_dir / 'tables' / 'reference_codes.tbl'}\n"
        "model iinteraction\ntarget muffler\n"
    )
    path = tmp_path / "bad.scn"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ScenarioError, match="muffler"):
        build_bundle(load_scenario(path))


def test_cross_validation_procedure_target_mismatch(tmp_path, data_dir):
    text = (
        f"profile {data_dir / 'profiles' / 'default.profile'}\n"
        f"procedure {data_dir / 'procedures' / 'procedure_a.proc'}\n"
        "model conventional\ntarget air_filter\n"
    )
    path = tmp_path / "bad.scn"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ScenarioError, match="does not match"):
        build_bundle(load_scenario(path))


# --- traces ---------------------------------------------------------------


def test_trace_round_trip_exact_floats():
    events = [
        ignition_set(0.0, IgnitionPosition.ON),
        button_down(0.1 + 0.2, "mode"),  # 0.30000000000000004
        button_up(1.0 / 3.0, "mode"),
        knob_turn(2.5, "A_clock_adjuster", KnobDirection.CCW),
    ]
    text = serialize_trace(events)
    assert parse_trace(text) == events


def test_trace_file_headers(tmp_path, data_dir):
    path = tmp_path / "t.trace"
    events = [ignition_set(0.0, IgnitionPosition.ON)]
    write_trace(path, events, scenario_path="../scenarios/oil_due_icode.scn", clock_mode=ClockMode.VIRTUAL)
    trace = load_trace(path)
    assert trace.clock_mode is ClockMode.VIRTUAL
    assert trace.scenario_path == tmp_path / ".." / "scenarios" / "oil_due_icode.scn"
    assert list(trace.events) == events


def test_wall_mode_refused_headless(tmp_path, data_dir):
    path = write_scenario(tmp_path, data_dir, extra="clock_mode wall\n")
    scenario = load_scenario(path)
    with pytest.raises(ScenarioError, match="wall"):
        run_headless(scenario, [])
    # a recorded trace pins clock_mode virtual, which overrides the scenario
    result, _ = run_headless(
        scenario, list(expert_icode_script("3014").events), clock_mode=ClockMode.VIRTUAL
    )
    assert result.completed


def test_effective_clock_mode(tmp_path, data_dir):
    path = write_scenario(tmp_path, data_dir, extra="clock_mode wall\n")
    scenario = load_scenario(path)
    trace_path = tmp_path / "t.trace"
    write_trace(trace_path, [], clock_mode=ClockMode.VIRTUAL)
    assert effective_clock_mode(scenario, load_trace(trace_path)) is ClockMode.VIRTUAL
    write_trace(trace_path, [])
    assert effective_clock_mode(scenario, load_trace(trace_path)) is ClockMode.WALL


# --- replay determinism ---------------------------------------------------


def random_trace(rng: random.Random, length: int):
    """Arbitrary of buttons, knobs, and key turns with random gaps."""
    buttons = ["select_reset", "trip_reset", "mode", "digit_3", "digit_0", "digit_1", "digit_4", "digit_9"]
    events = []
    t = 0.0
    held = set()
    for _ in range(length):
        t += rng.choice([0.0, 0.1, 0.5, 1.0, 3.0, 7.0, 11.0])
        roll = rng.random()
        if roll < 0.4:
            button = rng.choice(buttons)
            if button in held:
                held.discard(button)
                events.append(button_up(t, button))
            else:
                held.add(button)
                events.append(button_down(t, button))
        elif roll < 0.6:
            events.append(knob_turn(t, rng.choice(["A_clock_adjuster", "B_trip_reset"]),
                                    rng.choice(list(KnobDirection))))
        else:
            events.append(ignition_set(t, rng.choice(list(IgnitionPosition))))
    return events


@pytest.mark.parametrize("seed", range(5))
def test_fuzzed_replay_identity_both_models(seed, icode_scenario, procedure_a_scenario):
    rng = random.Random(seed)
    events = random_trace(rng, 40)
    for scenario in (icode_scenario, procedure_a_scenario):
        outputs = []
        for _ in range(2):
            result, vehicle = run_headless(scenario, events)
            outputs.append(
                (json.dumps(task_to_json(result), sort_keys=True), canonical_state_json(vehicle))
            )
        assert outputs[0] == outputs[1]


def test_display_stream_is_pure_function_of_inputs(icode_scenario):
    events = list(novice_icode_script("3014").events)
    streams = []
    for _ in range(2):
        session = build_session(build_bundle(icode_scenario))
        seen = []
        for event in events:
            session.feed(event)
            lcd = session.display()
            seen.append((lcd.lines, lcd.blink))
        streams.append(seen)
    assert streams[0] == streams[1]


# --- CLI ------------------------------------------------------------------


def test_cli_run_success(data_dir, capsys):
    code = main(
        [
            "run",
            "--scenario", str(data_dir / "scenarios" / "oil_due_icode.scn"),
            "--trace", str(data_dir / "traces" / "expert_icode.trace"),
        ]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["result"]["completed"] is True
    assert payload["result"]["time_to_complete"] == 5.0
    assert payload["final_state"]["items"]["oil_change"]["status"] == "OK"


def test_cli_run_incomplete_exits_2(tmp_path, data_dir):
    trace = tmp_path / "partial.trace"
    write_trace(trace, list(expert_icode_script("3014").events[:4]))
    code = main(
        [
            "run",
            "--scenario", str(data_dir / "scenarios" / "oil_due_icode.scn"),
            "--trace", str(trace),
        ]
    )
    assert code == 2


def test_cli_run_missing_file_exits_3(data_dir, capsys):
    code = main(
        ["run", "--scenario", str(data_dir / "scenarios" / "oil_due_icode.scn"), "--trace", "nope.trace"]
    )
    assert code == 3
    assert "error:" in capsys.readouterr().err


def test_cli_run_bad_scenario_exits_3(tmp_path, data_dir):
    bad = tmp_path / "bad.scn"
    bad.write_text("model iinteraction\n", encoding="utf-8")
    trace = tmp_path / "t.trace"
    write_trace(trace, [])
    assert main(["run", "--scenario", str(bad), "--trace", str(trace)]) == 3


def test_cli_replay_deterministic(data_dir, capsys):
    code = main(["replay", "--trace", str(data_dir / "traces" / "expert_icode.trace")])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["deterministic"] is True
    assert payload["result"]["completed"] is True


def test_cli_replay_needs_header(tmp_path):
    trace = tmp_path / "bare.trace"
    write_trace(trace, [ignition_set(0.0, IgnitionPosition.ON)])
    assert main(["replay", "--trace", str(trace)]) == 3


def test_cli_record_then_replay_round_trip(tmp_path, data_dir):
    # record: write a trace with headers as serve would, replay it via the CLI
    trace = tmp_path / "recorded.trace"
    write_trace(
        trace,
        list(procedure_a_script().events),
        scenario_path=data_dir / "scenarios" / "oil_due_procedure_a.scn",
        clock_mode=ClockMode.VIRTUAL,
    )
    assert main(["replay", "--trace", str(trace)]) == 0


def test_cli_report(tmp_path, data_dir, capsys):
    from ivis_sim.harness import SurveyResponse, TaskResult, export_results

    export_results(
        tmp_path / "study.ndjson",
        [
            TaskResult("p1", InteractionModel.CONVENTIONAL, "t", True, 15.0, 2),
            TaskResult("p1", InteractionModel.IINTERACTION, "t", True, 5.0, 0),
        ],
        [
            SurveyResponse("p1", InteractionModel.CONVENTIONAL, (2,)),
            SurveyResponse("p1", InteractionModel.IINTERACTION, (5,)),
        ],
    )
    assert main(["report", "--logs", str(tmp_path)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["supported"] is True
    assert payload["time"]["iinteraction_mean"] == 5.0


def test_cli_report_unsupported_exits_2(tmp_path, capsys):
    from ivis_sim.harness import SurveyResponse, TaskResult, export_results

    export_results(
        tmp_path / "study.ndjson",
        [
            TaskResult("p1", InteractionModel.CONVENTIONAL, "t", True, 5.0, 0),
            TaskResult("p1", InteractionModel.IINTERACTION, "t", True, 15.0, 2),
        ],
        [
            SurveyResponse("p1", InteractionModel.CONVENTIONAL, (5,)),
            SurveyResponse("p1", InteractionModel.IINTERACTION, (2,)),
        ],
    )
    assert main(["report", "--logs", str(tmp_path)]) == 2


def test_cli_report_empty_logs_exits_3(tmp_path):
    assert main(["report", "--logs", str(tmp_path)]) == 3
