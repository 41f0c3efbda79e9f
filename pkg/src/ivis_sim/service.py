"""Scenario files, headless runs, trace files, and state snapshots.

A scenario file binds the pieces of one task: which vehicle profile, which
interaction model (and its table or procedure), the starting odometer and
clock, and which service items start out due.  Key-value lines::

    profile ../profiles/default.profile
    code_table ../tables/reference_codes.tbl
    model iinteraction
    target oil_change
    odometer 3400
    ignition ON
    due oil_change
    clock_mode virtual

Relative paths resolve against the scenario file's directory; the
IVIS_SIM_PROFILE / IVIS_SIM_CODE_TABLE / IVIS_SIM_PROCEDURE environment
variables override the respective paths.  Trace files carry the input
events plus ``# scenario`` and ``# clock_mode`` headers so a recording can
be replayed on its own.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from . import ecm
from .code_table import ReferenceTable, load_table, validate_against_profile
from .errors import SimConfigError
from .events import InputEvent, parse_event_line, serialize_trace, validate_trace
from .harness import InteractionModel, Session, TaskResult, run_session
from .procedures import ProcedureSpec, load_procedure


class ScenarioError(SimConfigError):
    """Scenario file missing, malformed, or internally inconsistent."""


class ClockMode(Enum):
    VIRTUAL = "virtual"
    WALL = "wall"


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    model: InteractionModel
    target_item: str
    profile_path: Path
    code_table_path: Path | None
    procedure_path: Path | None
    odometer: float = 0.0
    clock: float = 0.0
    ignition: ecm.IgnitionPosition = ecm.IgnitionPosition.OFF
    due_items: tuple[str, ...] = ()
    clock_mode: ClockMode = ClockMode.VIRTUAL
    source_path: Path | None = None


_ENV_OVERRIDES = {
    "profile": "IVIS_SIM_PROFILE",
    "code_table": "IVIS_SIM_CODE_TABLE",
    "procedure": "IVIS_SIM_PROCEDURE",
}


def parse_scenario(text: str, base_dir: Path, scenario_id: str) -> Scenario:
    values: dict[str, str] = {}
    due: list[str] = []
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition(" ")
        value = value.strip()
        if not value:
            raise ScenarioError(f"line {line_no}: expected '<key> <value>'")
        if key == "due":
            due.append(value)
            continue
        if key in values:
            raise ScenarioError(f"line {line_no}: duplicate key {key!r}")
        values[key] = value

    def path_for(key: str) -> Path | None:
        override = os.environ.get(_ENV_OVERRIDES[key], "")
        raw = override or values.get(key)
        if raw is None:
            return None
        path = Path(raw)
        return path if path.is_absolute() else (base_dir / path)

    for required in ("profile", "model", "target"):
        if required not in values and not (required == "profile" and path_for("profile")):
            raise ScenarioError(f"scenario is missing the {required!r} key")
    try:
        model = InteractionModel(values["model"])
    except ValueError:
        raise ScenarioError(f"unknown model {values['model']!r}") from None
    if model is InteractionModel.IINTERACTION and path_for("code_table") is None:
        raise ScenarioError("iinteraction scenarios need a code_table")
    if model is InteractionModel.CONVENTIONAL and path_for("procedure") is None:
        raise ScenarioError("conventional scenarios need a procedure")
    try:
        odometer = float(values.get("odometer", "0"))
        clock = float(values.get("clock", "0"))
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    if odometer < 0 or clock < 0:
        raise ScenarioError("odometer and clock must be >= 0")
    try:
        ignition = ecm.IgnitionPosition(values.get("ignition", "OFF"))
    except ValueError:
        raise ScenarioError(f"bad ignition position {values['ignition']!r}") from None
    try:
        clock_mode = ClockMode(values.get("clock_mode", "virtual"))
    except ValueError:
        raise ScenarioError(f"bad clock_mode {values['clock_mode']!r}") from None
    return Scenario(
        scenario_id=scenario_id,
        model=model,
        target_item=values["target"],
        profile_path=path_for("profile"),
        code_table_path=path_for("code_table"),
        procedure_path=path_for("procedure"),
        odometer=odometer,
        clock=clock,
        ignition=ignition,
        due_items=tuple(due),
        clock_mode=clock_mode,
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    scenario = parse_scenario(text, path.parent, path.stem)
    return replace(scenario, source_path=path)


@dataclass(frozen=True)
class ScenarioBundle:
    """Scenario with its referenced files loaded and the start state built."""

    scenario: Scenario
    profile: ecm.VehicleProfile
    table: ReferenceTable | None
    procedure: ProcedureSpec | None
    initial_vehicle: ecm.VehicleState


def _activate_due(state: ecm.VehicleState, item_id: str) -> ecm.VehicleState:
    """Backdate one item's reset baselines until it reads DUE."""
    item = state.items[item_id]
    spec = item.spec
    if spec.distance_interval is not None and state.odometer >= spec.distance_interval:
        item = replace(item, last_reset_odometer=state.odometer - spec.distance_interval)
    elif spec.time_interval is not None:
        item = replace(item, last_reset_time=state.clock - spec.time_interval * ecm.SECONDS_PER_DAY)
    else:
        raise ScenarioError(
            f"cannot make {item_id!r} due: odometer {state.odometer} is below its "
            f"distance interval and it has no time interval"
        )
    items = dict(state.items)
    items[item_id] = item
    return ecm.advance(replace(state, items=items), 0.0, 0.0)


def build_bundle(scenario: Scenario) -> ScenarioBundle:
    profile = ecm.load_profile(scenario.profile_path)
    table = load_table(scenario.code_table_path) if scenario.code_table_path else None
    procedure = load_procedure(scenario.procedure_path) if scenario.procedure_path else None
    if scenario.target_item not in profile.items:
        raise ScenarioError(f"target {scenario.target_item!r} is not in the profile")
    if table is not None:
        validate_against_profile(table, profile)
    if procedure is not None and procedure.target_item not in profile.items:
        raise ScenarioError(
            f"procedure {procedure.procedure_id!r} targets unknown item "
            f"{procedure.target_item!r}"
        )
    if scenario.model is InteractionModel.CONVENTIONAL and procedure is not None:
        if procedure.target_item != scenario.target_item:
            raise ScenarioError(
                f"scenario target {scenario.target_item!r} does not match procedure "
                f"target {procedure.target_item!r}"
            )
    state = ecm.fresh_state(
        profile,
        odometer=scenario.odometer,
        clock=scenario.clock,
        ignition=scenario.ignition,
    )
    for item_id in scenario.due_items:
        if item_id not in profile.items:
            raise ScenarioError(f"due item {item_id!r} is not in the profile")
        state = _activate_due(state, item_id)
    return ScenarioBundle(scenario, profile, table, procedure, state)


def build_session(bundle: ScenarioBundle) -> Session:
    return Session(
        model=bundle.scenario.model,
        vehicle=bundle.initial_vehicle,
        target_item=bundle.scenario.target_item,
        table=bundle.table,
        procedure=bundle.procedure,
    )


# --- canonical state snapshots -------------------------------------------


def snapshot_state(vehicle: ecm.VehicleState) -> dict:
    """JSON-friendly snapshot with deterministic ordering."""
    return {
        "ignition": vehicle.ignition.value,
        "odometer": vehicle.odometer,
        "clock": vehicle.clock,
        "settings": {
            "language": vehicle.settings.language.value,
            "time_zone": vehicle.settings.time_zone.value,
            "dst": vehicle.settings.dst,
        },
        "items": {
            item_id: {
                "last_reset_odometer": item.last_reset_odometer,
                "last_reset_time": item.last_reset_time,
                "status": item.status.value,
            }
            for item_id, item in sorted(vehicle.items.items())
        },
        "dtcs": sorted(dtc.code for dtc in vehicle.dtcs),
        "lcd": {"lines": list(vehicle.lcd.lines), "blink": vehicle.lcd.blink},
        "oil_life": vehicle.oil_life,
    }


def canonical_state_json(vehicle: ecm.VehicleState) -> str:
    return json.dumps(snapshot_state(vehicle), sort_keys=True)


# --- trace files ----------------------------------------------------------


@dataclass(frozen=True)
class TraceFile:
    events: tuple[InputEvent, ...]
    scenario_path: Path | None = None
    clock_mode: ClockMode | None = None


def write_trace(
    path: str | Path,
    events: list[InputEvent],
    scenario_path: str | Path | None = None,
    clock_mode: ClockMode | None = None,
) -> None:
    lines = []
    if scenario_path is not None:
        lines.append(f"# scenario {scenario_path}")
    if clock_mode is not None:
        lines.append(f"# clock_mode {clock_mode.value}")
    header = "\n".join(lines) + "\n" if lines else ""
    Path(path).write_text(header + serialize_trace(events), encoding="utf-8")


def load_trace(path: str | Path) -> TraceFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SimConfigError(f"cannot read trace {path}: {exc}") from None
    events: list[InputEvent] = []
    scenario_path: Path | None = None
    clock_mode: ClockMode | None = None
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line:
            continue
        if line.startswith("#"):
            words = line[1:].split()
            if len(words) == 2 and words[0] == "scenario":
                raw = Path(words[1])
                scenario_path = raw if raw.is_absolute() else (path.parent / raw)
            elif len(words) == 2 and words[0] == "clock_mode":
                try:
                    clock_mode = ClockMode(words[1])
                except ValueError:
                    raise SimConfigError(
                        f"{path}: line {line_no}: bad clock_mode {words[1]!r}"
                    ) from None
            continue
        events.append(parse_event_line(line, line_no))
    validate_trace(events)
    return TraceFile(tuple(events), scenario_path, clock_mode)


def effective_clock_mode(scenario: Scenario, trace: TraceFile) -> ClockMode:
    """Trace header wins: recorded live sessions replay on the virtual clock."""
    return trace.clock_mode if trace.clock_mode is not None else scenario.clock_mode


def run_headless(
    scenario: Scenario,
    events: list[InputEvent],
    participant_id: str = "trace",
    task_id: str | None = None,
    clock_mode: ClockMode | None = None,
) -> tuple[TaskResult, ecm.VehicleState]:
    """Feed a whole event list through a fresh session for this scenario.

    Only virtual-clock runs are reproducible, so an effective wall clock
    mode is a configuration error.  ``clock_mode`` overrides the scenario's
    own setting (a recorded trace carries frozen, virtual timestamps even
    when its scenario was served on the wall clock).
    """
    effective = clock_mode if clock_mode is not None else scenario.clock_mode
    if effective is ClockMode.WALL:
        raise ScenarioError(
            "scenario uses wall clock_mode; headless runs need virtual timestamps"
        )
    bundle = build_bundle(scenario)
    session = build_session(bundle)
    return run_session(session, events, participant_id, task_id or scenario.scenario_id)
