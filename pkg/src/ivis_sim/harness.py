"""Usability-session harness: run tasks, collect metrics, judge hypotheses.

A Session owns one vehicle and one engine and feeds it a timestamped input
stream.  Event times are session-relative seconds; the vehicle's virtual
clock advances by exactly the gap between consecutive events, so a replayed
stream reproduces the run bit for bit.  The task completes the moment the
engine's actions include a reset of the session's target item.

Metrics per task: completion, time to complete (seconds from session start
to the completing event), and error count (total deviation flags).  Surveys
are 1-5 ratings averaged into a satisfaction score.  The evaluation compares
the two interaction models on mean time, mean satisfaction, and mean errors,
and supports the headline claim only when all three go the right way.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from . import ecm
from .code_table import ReferenceTable
from .engines import (
    CodeActionKind,
    DeviationFlag,
    DeviationKind,
    EngineState,
    apply_action,
    combined_display,
    conventional_step,
    icode_step,
    initial_conventional_state,
    initial_icode_state,
)
from .events import EventKind, InputEvent, validate_trace
from .procedures import ProcedureSpec


class InteractionModel(Enum):
    CONVENTIONAL = "conventional"
    IINTERACTION = "iinteraction"


class InsufficientDataError(ValueError):
    """A hypothesis has no data on one side (no tasks, completions, or surveys)."""


@dataclass(frozen=True)
class TaskResult:
    participant_id: str
    model: InteractionModel
    task_id: str
    completed: bool
    time_to_complete: float | None
    error_count: int
    flags: tuple[DeviationFlag, ...] = ()


@dataclass(frozen=True)
class SurveyResponse:
    """Post-task questionnaire: each rating is an integer 1 (worst) to 5."""

    participant_id: str
    model: InteractionModel
    ratings: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.ratings:
            raise ValueError("survey needs at least one rating")
        for rating in self.ratings:
            if not isinstance(rating, int) or not 1 <= rating <= 5:
                raise ValueError(f"rating {rating!r} outside 1..5")


def score_survey(response: SurveyResponse) -> float:
    """Satisfaction = plain mean of the ratings."""
    return sum(response.ratings) / len(response.ratings)


@dataclass
class FeedResult:
    """What one event did: flags raised, whether this event completed the task."""

    flags: tuple[DeviationFlag, ...] = ()
    completed_now: bool = False


class Session:
    """Event-by-event driver binding an engine to a vehicle.

    For the conventional model pass ``procedure``; for the code-entry model
    pass ``table``.  ``target_item`` names the service item whose reset
    counts as task completion.
    """

    def __init__(
        self,
        model: InteractionModel,
        vehicle: ecm.VehicleState,
        target_item: str,
        table: ReferenceTable | None = None,
        procedure: ProcedureSpec | None = None,
    ) -> None:
        if model is InteractionModel.CONVENTIONAL and procedure is None:
            raise ValueError("conventional sessions need a procedure")
        if model is InteractionModel.IINTERACTION and table is None:
            raise ValueError("iinteraction sessions need a reference table")
        self.model = model
        self.vehicle = vehicle
        self.target_item = target_item
        self.table = table
        self.procedure = procedure
        self.base_clock = vehicle.clock
        self.engine: EngineState = (
            initial_conventional_state()
            if model is InteractionModel.CONVENTIONAL
            else initial_icode_state(table.code_length)
        )
        self.flags: list[DeviationFlag] = []
        self.completed = False
        self.completion_time: float | None = None
        self.started_at: float | None = None
        self.last_event_time = 0.0

    def display(self) -> ecm.LcdContent:
        return combined_display(self.engine, self.vehicle)

    def feed(self, event: InputEvent) -> FeedResult:
        if event.time < self.last_event_time:
            raise ValueError(
                f"event at t={event.time} precedes previous event at t={self.last_event_time}"
            )
        self.last_event_time = event.time
        if self.started_at is None:
            self.started_at = event.time
        target_clock = self.base_clock + event.time
        if target_clock > self.vehicle.clock:
            self.vehicle = ecm.advance(self.vehicle, target_clock - self.vehicle.clock, 0.0)
        if event.kind is EventKind.IGNITION_SET:
            self.vehicle = ecm.set_ignition(self.vehicle, event.position)

        if self.model is InteractionModel.CONVENTIONAL:
            result = conventional_step(self.procedure, self.engine, self.vehicle, event)
        elif self.vehicle.ignition is ecm.IgnitionPosition.OFF:
            # the code-entry front end is dark with the ignition off
            return FeedResult()
        else:
            result = icode_step(self.table, self.engine, event)

        self.engine = result.engine
        completed_now = False
        for action in result.actions:
            self.vehicle = apply_action(self.vehicle, action)
            if (
                not self.completed
                and action.kind is CodeActionKind.RESET
                and action.value == self.target_item
            ):
                self.completed = True
                self.completion_time = event.time
                completed_now = True
        self.flags.extend(result.flags)
        return FeedResult(result.flags, completed_now)

    def result(self, participant_id: str, task_id: str) -> TaskResult:
        return TaskResult(
            participant_id=participant_id,
            model=self.model,
            task_id=task_id,
            completed=self.completed,
            time_to_complete=self.completion_time,
            error_count=len(self.flags),
            flags=tuple(self.flags),
        )


def run_session(
    session: Session, events: list[InputEvent], participant_id: str, task_id: str
) -> tuple[TaskResult, ecm.VehicleState]:
    validate_trace(events)
    for event in events:
        session.feed(event)
    return session.result(participant_id, task_id), session.vehicle


def run_task(
    participant_id: str,
    task_id: str,
    model: InteractionModel,
    vehicle: ecm.VehicleState,
    target_item: str,
    events: list[InputEvent],
    table: ReferenceTable | None = None,
    procedure: ProcedureSpec | None = None,
) -> TaskResult:
    """One-shot task run; see Session for the streaming form."""
    session = Session(model, vehicle, target_item, table=table, procedure=procedure)
    result, _ = run_session(session, events, participant_id, task_id)
    return result


# --- hypothesis evaluation ------------------------------------------------


@dataclass(frozen=True)
class HypothesisOutcome:
    name: str
    conventional_mean: float
    iinteraction_mean: float
    supported: bool


@dataclass(frozen=True)
class HypothesisReport:
    time: HypothesisOutcome
    satisfaction: HypothesisOutcome
    errors: HypothesisOutcome
    supported: bool


def _mean(values: list[float], what: str, model: InteractionModel) -> float:
    if not values:
        raise InsufficientDataError(f"no {what} for model {model.value}")
    return sum(values) / len(values)


def evaluate_hypotheses(
    conventional_tasks: list[TaskResult],
    conventional_surveys: list[SurveyResponse],
    iinteraction_tasks: list[TaskResult],
    iinteraction_surveys: list[SurveyResponse],
) -> HypothesisReport:
    """Compare models on mean time, satisfaction, and errors.

    Time uses completed tasks only; errors use every task.  Each comparison
    is a strict inequality, so ties never count as support.  The headline
    verdict is the conjunction of all three.
    """
    conv_times = [t.time_to_complete for t in conventional_tasks if t.completed]
    ii_times = [t.time_to_complete for t in iinteraction_tasks if t.completed]
    time_outcome = HypothesisOutcome(
        "time_to_complete",
        _mean(conv_times, "completed tasks", InteractionModel.CONVENTIONAL),
        _mean(ii_times, "completed tasks", InteractionModel.IINTERACTION),
        supported=False,
    )
    time_outcome = HypothesisOutcome(
        time_outcome.name,
        time_outcome.conventional_mean,
        time_outcome.iinteraction_mean,
        time_outcome.iinteraction_mean < time_outcome.conventional_mean,
    )

    conv_sat = _mean(
        [score_survey(s) for s in conventional_surveys], "surveys", InteractionModel.CONVENTIONAL
    )
    ii_sat = _mean(
        [score_survey(s) for s in iinteraction_surveys], "surveys", InteractionModel.IINTERACTION
    )
    satisfaction_outcome = HypothesisOutcome("satisfaction", conv_sat, ii_sat, ii_sat > conv_sat)

    conv_err = _mean(
        [float(t.error_count) for t in conventional_tasks], "tasks", InteractionModel.CONVENTIONAL
    )
    ii_err = _mean(
        [float(t.error_count) for t in iinteraction_tasks], "tasks", InteractionModel.IINTERACTION
    )
    errors_outcome = HypothesisOutcome("error_count", conv_err, ii_err, ii_err < conv_err)

    return HypothesisReport(
        time=time_outcome,
        satisfaction=satisfaction_outcome,
        errors=errors_outcome,
        supported=time_outcome.supported
        and satisfaction_outcome.supported
        and errors_outcome.supported,
    )


# --- NDJSON session logs --------------------------------------------------


def task_to_json(result: TaskResult) -> dict:
    return {
        "record": "task",
        "participant_id": result.participant_id,
        "model": result.model.value,
        "task_id": result.task_id,
        "completed": result.completed,
        "time_to_complete": result.time_to_complete,
        "error_count": result.error_count,
        "flags": [
            {"time": f.time, "kind": f.kind.value, "detail": f.detail} for f in result.flags
        ],
    }


def task_from_json(record: dict) -> TaskResult:
    return TaskResult(
        participant_id=record["participant_id"],
        model=InteractionModel(record["model"]),
        task_id=record["task_id"],
        completed=record["completed"],
        time_to_complete=record["time_to_complete"],
        error_count=record["error_count"],
        flags=tuple(
            DeviationFlag(f["time"], DeviationKind(f["kind"]), f["detail"])
            for f in record.get("flags", [])
        ),
    )


def survey_to_json(response: SurveyResponse) -> dict:
    return {
        "record": "survey",
        "participant_id": response.participant_id,
        "model": response.model.value,
        "ratings": list(response.ratings),
    }


def survey_from_json(record: dict) -> SurveyResponse:
    return SurveyResponse(
        participant_id=record["participant_id"],
        model=InteractionModel(record["model"]),
        ratings=tuple(record["ratings"]),
    )


def export_results(
    path: str | Path,
    results: list[TaskResult],
    surveys: list[SurveyResponse] = (),
) -> None:
    """Write task and survey records as NDJSON, merging with any existing
    file.  Tasks are keyed by (participant, model, task); surveys by
    (participant, model); re-exporting the same run changes nothing."""
    path = Path(path)
    tasks: dict[tuple, TaskResult] = {}
    seen_surveys: dict[tuple, SurveyResponse] = {}
    if path.exists():
        old_tasks, old_surveys = load_results(path)
        for t in old_tasks:
            tasks[(t.participant_id, t.model, t.task_id)] = t
        for s in old_surveys:
            seen_surveys[(s.participant_id, s.model)] = s
    for t in results:
        tasks[(t.participant_id, t.model, t.task_id)] = t
    for s in surveys:
        seen_surveys[(s.participant_id, s.model)] = s
    lines = [json.dumps(task_to_json(tasks[k]), sort_keys=True) for k in sorted(
        tasks, key=lambda k: (k[0], k[1].value, k[2])
    )]
    lines += [json.dumps(survey_to_json(seen_surveys[k]), sort_keys=True) for k in sorted(
        seen_surveys, key=lambda k: (k[0], k[1].value)
    )]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_results(path: str | Path) -> tuple[list[TaskResult], list[SurveyResponse]]:
    tasks: list[TaskResult] = []
    surveys: list[SurveyResponse] = []
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: line {line_no}: {exc}") from None
        if record.get("record") == "task":
            tasks.append(task_from_json(record))
        elif record.get("record") == "survey":
            surveys.append(survey_from_json(record))
        else:
            raise ValueError(f"{path}: line {line_no}: unknown record type {record.get('record')!r}")
    return tasks, surveys


def load_results_dir(directory: str | Path) -> tuple[list[TaskResult], list[SurveyResponse]]:
    """Concatenate every ``*.ndjson`` log under a directory."""
    tasks: list[TaskResult] = []
    surveys: list[SurveyResponse] = []
    for path in sorted(Path(directory).glob("*.ndjson")):
        t, s = load_results(path)
        tasks += t
        surveys += s
    return tasks, surveys
