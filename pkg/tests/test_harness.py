"""Sessions, task metrics, surveys, hypothesis evaluation, result logs."""

from __future__ import annotations

import pytest

from ivis_sim import ecm
from ivis_sim.agents import (
    expert_icode_script,
    novice_icode_script,
    procedure_a_script,
    procedure_b_script,
)
from ivis_sim.ecm import IgnitionPosition, Language
from ivis_sim.engines import DeviationFlag, DeviationKind
from ivis_sim.events import button_down, button_up, ignition_set
from ivis_sim.harness import (
    InsufficientDataError,
    InteractionModel,
    SurveyResponse,
    TaskResult,
    evaluate_hypotheses,
    export_results,
    load_results,
    run_task,
    score_survey,
)
from ivis_sim.service import build_bundle, build_session, run_headless


def session_for(scenario):
    return build_session(build_bundle(scenario))


# hand-computed timing oracles for the stock scripts:
#   expert:   completing digit lands at 5.0
#   novice:   wrong code at 5.0, corrected code lands at 9.0, one flag
#   proc A:   presses at 1/2/3, holds 4..9 and 10..15, completes at 15.0
#   proc B:   off 0, down 1, on 2, up 3, turns 4/5/6, completes at 6.0
CASES = [
    ("icode", expert_icode_script("3014"), True, 5.0, 0),
    ("icode", novice_icode_script("3014"), True, 9.0, 1),
    ("proc_a", procedure_a_script(), True, 15.0, 0),
    ("proc_a", procedure_a_script(first_hold=3.0), True, 19.0, 1),
    ("proc_b", procedure_b_script(), True, 6.0, 0),
]


@pytest.mark.parametrize("kind, script, completed, ttc, errors", CASES)
def test_script_metrics_exact(
    kind, script, completed, ttc, errors, icode_scenario, procedure_a_scenario, procedure_b_scenario
):
    scenario = {
        "icode": icode_scenario,
        "proc_a": procedure_a_scenario,
        "proc_b": procedure_b_scenario,
    }[kind]
    result, _ = run_headless(scenario, list(script.events), participant_id=script.label)
    assert result.completed is completed
    assert result.time_to_complete == ttc
    assert result.error_count == errors
    assert result.error_count == script.injected_errors
    assert len(result.flags) == result.error_count


def test_incomplete_task(procedure_a_scenario):
    script = procedure_a_script()
    result, _ = run_headless(procedure_a_scenario, list(script.events[:7]))
    assert not result.completed
    assert result.time_to_complete is None
    assert result.error_count == 0


def test_completion_latches_at_first_reset(icode_scenario):
    from dataclasses import replace

    script = expert_icode_script("3014")
    extra = expert_icode_script("3014").events[1:]  # key it twice
    shifted = [replace(e, time=e.time + 20.0) for e in extra]
    result, _ = run_headless(icode_scenario, list(script.events) + shifted)
    assert result.completed and result.time_to_complete == 5.0


def test_icode_dark_with_ignition_off(icode_scenario):
    # same key presses but nobody turned the key: nothing happens
    session = session_for(icode_scenario)
    session.vehicle = ecm.set_ignition(session.vehicle, IgnitionPosition.OFF)
    for event in (button_down(1.0, "mode"), button_up(1.4, "mode"), button_down(2.0, "digit_3")):
        session.feed(event)
    assert session.engine.buffer == ""
    assert not session.completed


def test_icode_wakes_after_key_on(icode_scenario):
    session = session_for(icode_scenario)
    session.vehicle = ecm.set_ignition(session.vehicle, IgnitionPosition.OFF)
    session.feed(button_down(0.5, "mode"))      # ignored, ECM dark
    session.feed(ignition_set(1.0, IgnitionPosition.ON))
    session.feed(button_down(2.0, "mode"))      # now it registers
    assert session.engine.mode.value == "code_entry"


def test_session_rejects_backwards_time(icode_scenario):
    session = session_for(icode_scenario)
    session.feed(ignition_set(5.0, IgnitionPosition.ON))
    with pytest.raises(ValueError):
        session.feed(button_down(4.0, "mode"))


def test_combined_code_resets_both_items(icode_scenario):
    script = expert_icode_script("3015")
    result, vehicle = run_headless(icode_scenario, list(script.events))
    assert result.completed  # 3015 includes the oil change target
    assert vehicle.items["oil_filter"].last_reset_time == 5.0
    assert vehicle.items["oil_change"].last_reset_time == 5.0


def test_settings_code_does_not_complete_reset_task(icode_scenario):
    script = expert_icode_script("1002")
    result, vehicle = run_headless(icode_scenario, list(script.events))
    assert not result.completed
    assert vehicle.settings.language is Language.SPANISH


def test_run_task_wrapper(icode_scenario):
    bundle = build_bundle(icode_scenario)
    script = expert_icode_script("3014")
    result = run_task(
        "p1",
        "t1",
        InteractionModel.IINTERACTION,
        bundle.initial_vehicle,
        "oil_change",
        list(script.events),
        table=bundle.table,
    )
    assert result.participant_id == "p1" and result.task_id == "t1"
    assert result.completed and result.time_to_complete == 5.0


# --- surveys and hypotheses ----------------------------------------------


def test_score_survey_mean():
    response = SurveyResponse("p", InteractionModel.IINTERACTION, (5, 4, 4))
    assert score_survey(response) == (5 + 4 + 4) / 3


@pytest.mark.parametrize("ratings", [(), (0,), (6,), (3, 7)])
def test_survey_validation(ratings):
    with pytest.raises(ValueError):
        SurveyResponse("p", InteractionModel.CONVENTIONAL, ratings)


def _task(model, completed, ttc, errors, pid="p", tid="t"):
    return TaskResult(pid, model, tid, completed, ttc, errors)


def _survey(model, *ratings, pid="p"):
    return SurveyResponse(pid, model, tuple(ratings))


def test_evaluate_supported_case():
    conv = [_task(InteractionModel.CONVENTIONAL, True, 15.0, 1), _task(InteractionModel.CONVENTIONAL, True, 19.0, 2)]
    ii = [_task(InteractionModel.IINTERACTION, True, 5.0, 0), _task(InteractionModel.IINTERACTION, True, 9.0, 1)]
    conv_s = [_survey(InteractionModel.CONVENTIONAL, 2, 3)]
    ii_s = [_survey(InteractionModel.IINTERACTION, 5, 4)]
    report = evaluate_hypotheses(conv, conv_s, ii, ii_s)
    assert report.time.conventional_mean == 17.0
    assert report.time.iinteraction_mean == 7.0
    assert report.errors.conventional_mean == 1.5
    assert report.errors.iinteraction_mean == 0.5
    assert report.satisfaction.conventional_mean == 2.5
    assert report.satisfaction.iinteraction_mean == 4.5
    assert report.time.supported and report.satisfaction.supported and report.errors.supported
    assert report.supported


def test_evaluate_ties_reject():
    conv = [_task(InteractionModel.CONVENTIONAL, True, 10.0, 1)]
    ii = [_task(InteractionModel.IINTERACTION, True, 10.0, 1)]
    surveys = ([_survey(InteractionModel.CONVENTIONAL, 3)], [_survey(InteractionModel.IINTERACTION, 3)])
    report = evaluate_hypotheses(conv, surveys[0], ii, surveys[1])
    assert not report.time.supported
    assert not report.satisfaction.supported
    assert not report.errors.supported
    assert not report.supported


def test_evaluate_one_leg_fails_conjunction():
    conv = [_task(InteractionModel.CONVENTIONAL, True, 15.0, 0)]  # conv makes no errors
    ii = [_task(InteractionModel.IINTERACTION, True, 5.0, 1)]
    report = evaluate_hypotheses(
        conv,
        [_survey(InteractionModel.CONVENTIONAL, 2)],
        ii,
        [_survey(InteractionModel.IINTERACTION, 5)],
    )
    assert report.time.supported and report.satisfaction.supported
    assert not report.errors.supported
    assert not report.supported


def test_evaluate_time_uses_completed_only_errors_use_all():
    conv = [
        _task(InteractionModel.CONVENTIONAL, True, 20.0, 1),
        _task(InteractionModel.CONVENTIONAL, False, None, 4),
    ]
    ii = [_task(InteractionModel.IINTERACTION, True, 5.0, 0)]
    report = evaluate_hypotheses(
        conv,
        [_survey(InteractionModel.CONVENTIONAL, 2)],
        ii,
        [_survey(InteractionModel.IINTERACTION, 5)],
    )
    assert report.time.conventional_mean == 20.0  # the incomplete task is excluded
    assert report.errors.conventional_mean == 2.5  # but its errors still count


def test_evaluate_insufficient_data():
    ii = [_task(InteractionModel.IINTERACTION, True, 5.0, 0)]
    ii_s = [_survey(InteractionModel.IINTERACTION, 5)]
    with pytest.raises(InsufficientDataError):
        evaluate_hypotheses([], [], ii, ii_s)
    conv_incomplete = [_task(InteractionModel.CONVENTIONAL, False, None, 2)]
    with pytest.raises(InsufficientDataError):
        evaluate_hypotheses(conv_incomplete, [_survey(InteractionModel.CONVENTIONAL, 3)], ii, ii_s)


# --- NDJSON logs ----------------------------------------------------------


def test_export_round_trip_and_idempotency(tmp_path):
    path = tmp_path / "log.ndjson"
    flags = (DeviationFlag(2.0, DeviationKind.INVALID_CODE, "code 9999 not in table"),)
    results = [
        TaskResult("alice", InteractionModel.IINTERACTION, "t1", True, 9.0, 1, flags),
        TaskResult("alice", InteractionModel.CONVENTIONAL, "t2", False, None, 0),
    ]
    surveys = [SurveyResponse("alice", InteractionModel.IINTERACTION, (5, 4))]
    export_results(path, results, surveys)
    first = path.read_bytes()
    export_results(path, results, surveys)
    assert path.read_bytes() == first  # idempotent
    loaded_tasks, loaded_surveys = load_results(path)
    assert loaded_tasks == results or sorted(
        loaded_tasks, key=lambda t: t.task_id
    ) == sorted(results, key=lambda t: t.task_id)
    assert loaded_surveys == surveys


def test_export_merges_new_participants(tmp_path):
    path = tmp_path / "log.ndjson"
    t1 = TaskResult("alice", InteractionModel.IINTERACTION, "t1", True, 5.0, 0)
    t2 = TaskResult("bob", InteractionModel.IINTERACTION, "t1", True, 7.0, 0)
    export_results(path, [t1], [])
    export_results(path, [t2], [])
    tasks, _ = load_results(path)
    assert {t.participant_id for t in tasks} == {"alice", "bob"}


def test_export_overwrites_same_key(tmp_path):
    path = tmp_path / "log.ndjson"
    old = TaskResult("alice", InteractionModel.IINTERACTION, "t1", False, None, 3)
    new = TaskResult("alice", InteractionModel.IINTERACTION, "t1", True, 5.0, 0)
    export_results(path, [old], [])
    export_results(path, [new], [])
    tasks, _ = load_results(path)
    assert tasks == [new]


def test_load_rejects_garbage(tmp_path):
    path = tmp_path / "log.ndjson"
    path.write_text('{"record": "mystery"}\n', encoding="utf-8")
    with pytest.raises(ValueError, match="unknown record"):
        load_results(path)
