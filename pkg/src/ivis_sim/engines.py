"""The two interaction-model engines and the shared display composition.

Both engines are pure step functions: (engine state, input event) in, new
engine state plus zero or more ECM actions and deviation flags out.  The
conventional engine walks a compiled handbook procedure and flags every
departure from it; the code-entry engine accepts digit presses and resolves
complete codes through the reference table.

Timing inside an engine is whatever clock the event timestamps carry; only
differences between timestamps matter (hold durations, digit gaps).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .code_table import CodeAction, CodeActionKind, ReferenceTable, lookup
from .ecm import (
    LCD_COLS,
    LCD_LINES,
    IgnitionPosition,
    LcdContent,
    SettingKind,
    VehicleState,
    apply_reset,
    apply_setting,
    normalize_ignition,
)
from .events import EventKind, InputEvent
from .procedures import ProcedureSpec, ProcedureStep, StepKind

CODE_ENTRY_TIMEOUT_SECONDS = 10.0
PAGE_COUNT = 4  # ODO, CLOCK, DTC COUNT, OIL LIFE


class DeviationKind(Enum):
    WRONG_BUTTON = "wrong-button"
    PREMATURE_RELEASE = "premature-release"
    OUT_OF_ORDER = "out-of-order"
    WRONG_IGNITION = "wrong-ignition"
    INVALID_CODE = "invalid-code"
    ENTRY_TIMEOUT = "entry-timeout"


@dataclass(frozen=True)
class DeviationFlag:
    """One observed operator error, stamped with the session-relative time."""

    time: float
    kind: DeviationKind
    detail: str


@dataclass(frozen=True)
class EcmAction:
    """An effect an engine asks the ECM to perform."""

    kind: CodeActionKind
    value: str


def actions_for(code_action: CodeAction) -> tuple[EcmAction, ...]:
    """Expand a table action into ECM effects, resets in payload order."""
    if code_action.kind is CodeActionKind.RESET:
        return tuple(EcmAction(CodeActionKind.RESET, item) for item in code_action.payload)
    return (EcmAction(code_action.kind, code_action.payload[0]),)


_SETTING_FOR_ACTION = {
    CodeActionKind.LANGUAGE: SettingKind.LANGUAGE,
    CodeActionKind.TIME_ZONE: SettingKind.TIME_ZONE,
    CodeActionKind.DST: SettingKind.DST,
}


def apply_action(vehicle: VehicleState, action: EcmAction) -> VehicleState:
    if action.kind is CodeActionKind.RESET:
        return apply_reset(vehicle, action.value)
    return apply_setting(vehicle, _SETTING_FOR_ACTION[action.kind], action.value)


class EngineMode(Enum):
    IDLE = "idle"
    IN_PROCEDURE = "in_procedure"
    CODE_ENTRY = "code_entry"


@dataclass(frozen=True)
class EngineState:
    """Interpreter state for either engine kind; unused fields stay at their
    defaults.  ``page`` is the multifunction display page the conventional
    engine is showing; ``buffer`` is the partial code in the entry engine."""

    kind: str
    mode: EngineMode = EngineMode.IDLE
    step_index: int = 0
    presses_done: int = 0
    turns_done: int = 0
    held_button: str | None = None
    held_since: float | None = None
    hold_ignition_seen: bool = False
    page: int = 0
    buffer: str = ""
    last_digit_time: float | None = None
    notice: str | None = None
    code_length: int = 4
    in_reset_mode: bool = False
    procedure_done: bool = False


def initial_conventional_state() -> EngineState:
    return EngineState(kind="conventional")


def initial_icode_state(code_length: int = 4) -> EngineState:
    return EngineState(kind="icode", code_length=code_length)


@dataclass(frozen=True)
class StepResult:
    engine: EngineState
    actions: tuple[EcmAction, ...] = ()
    flags: tuple[DeviationFlag, ...] = ()


# --- display composition --------------------------------------------------


def _page_line(page: int, vehicle: VehicleState) -> str:
    if page == 0:
        return f"ODO {vehicle.odometer:.0f} MI"
    if page == 1:
        # DST shifts the shown clock one hour; the virtual clock never moves.
        secs = vehicle.clock + (3600.0 if vehicle.settings.dst else 0.0)
        return f"CLOCK {int(secs // 3600) % 24:02d}:{int(secs // 60) % 60:02d}"
    if page == 2:
        return f"DTC COUNT {len(vehicle.dtcs)}"
    return f"OIL LIFE {vehicle.oil_life:.0f}%"


def engine_display(engine: EngineState, vehicle: VehicleState) -> tuple[str, ...]:
    """Overlay lines the engine contributes on top of the reminder LCD."""
    if vehicle.ignition is IgnitionPosition.OFF:
        return ()
    lines: list[str] = []
    if engine.kind == "icode":
        if engine.mode is EngineMode.CODE_ENTRY:
            remaining = engine.code_length - len(engine.buffer)
            lines.append(f"CODE: {engine.buffer}{' '.join('_' * remaining)}")
        else:
            lines.append(_page_line(0, vehicle))
        if engine.notice:
            lines.append(engine.notice)
    else:
        lines.append(_page_line(engine.page, vehicle))
        if engine.in_reset_mode:
            lines.append("RESET MODE")
    return tuple(lines)


def combined_display(engine: EngineState, vehicle: VehicleState) -> LcdContent:
    """What the driver actually sees: engine overlay first, then reminder
    lines, clipped to the 2x20 panel.  Dark when the ignition is off."""
    if vehicle.ignition is IgnitionPosition.OFF:
        return LcdContent((), False)
    merged = [line[:LCD_COLS] for line in (*engine_display(engine, vehicle), *vehicle.lcd.lines)]
    return LcdContent(tuple(merged[:LCD_LINES]), vehicle.lcd.blink)


def _display_matches(pattern: str, engine: EngineState, vehicle: VehicleState) -> bool:
    return any(pattern in line for line in combined_display(engine, vehicle).lines)


# --- conventional (handbook procedure) engine -----------------------------


def _entering_reset_mode(spec: ProcedureSpec, index: int) -> bool:
    # the reset-mode screen shows while the final hold is the pending step
    if index >= len(spec.steps):
        return False
    return index == len(spec.steps) - 1 and spec.steps[index].kind is StepKind.HOLD


def _advance(engine: EngineState, spec: ProcedureSpec) -> tuple[EngineState, tuple[EcmAction, ...]]:
    """Move to the next step; emit the target reset when the last step falls."""
    index = engine.step_index + 1
    done = index >= len(spec.steps)
    engine = replace(
        engine,
        step_index=index,
        presses_done=0,
        turns_done=0,
        held_button=None,
        held_since=None,
        hold_ignition_seen=False,
        in_reset_mode=_entering_reset_mode(spec, index),
        procedure_done=done,
    )
    actions = (EcmAction(CodeActionKind.RESET, spec.target_item),) if done else ()
    return engine, actions


def _epsilon(
    spec: ProcedureSpec, engine: EngineState, vehicle: VehicleState
) -> tuple[EngineState, tuple[EcmAction, ...]]:
    """Auto-advance through wait_display steps whose pattern is on screen."""
    actions: tuple[EcmAction, ...] = ()
    while not engine.procedure_done and engine.step_index < len(spec.steps):
        step = spec.steps[engine.step_index]
        if step.kind is not StepKind.WAIT_DISPLAY:
            break
        if not _display_matches(step.pattern, engine, vehicle):
            break
        engine, emitted = _advance(engine, spec)
        actions += emitted
    return engine, actions


def _flag(time: float, kind: DeviationKind, detail: str) -> DeviationFlag:
    return DeviationFlag(time, kind, detail)


def _clear_hold(engine: EngineState) -> EngineState:
    return replace(engine, held_button=None, held_since=None, hold_ignition_seen=False)


def _ignition_step(
    engine: EngineState, spec: ProcedureSpec, step: ProcedureStep, event: InputEvent
) -> tuple[EngineState, tuple[EcmAction, ...], list[DeviationFlag]]:
    if event.kind is EventKind.IGNITION_SET:
        if normalize_ignition(event.position) is normalize_ignition(step.position):
            engine, actions = _advance(engine, spec)
            return engine, actions, []
        return engine, (), [
            _flag(
                event.time,
                DeviationKind.WRONG_IGNITION,
                f"ignition to {event.position.value}, step wants {step.position.value}",
            )
        ]
    if event.kind is EventKind.BUTTON_DOWN:
        return engine, (), [
            _flag(event.time, DeviationKind.WRONG_BUTTON, f"pressed {event.button} during ignition step")
        ]
    if event.kind is EventKind.KNOB_TURN:
        return engine, (), [
            _flag(event.time, DeviationKind.WRONG_BUTTON, f"turned {event.knob} during ignition step")
        ]
    return engine, (), []


def _press_step(
    engine: EngineState, spec: ProcedureSpec, step: ProcedureStep, event: InputEvent
) -> tuple[EngineState, tuple[EcmAction, ...], list[DeviationFlag]]:
    if event.kind is EventKind.BUTTON_DOWN:
        if event.button == step.button:
            if engine.held_button is None:
                engine = replace(engine, held_button=event.button, held_since=event.time)
            return engine, (), []
        return engine, (), [
            _flag(event.time, DeviationKind.WRONG_BUTTON, f"pressed {event.button}, step wants {step.button}")
        ]
    if event.kind is EventKind.BUTTON_UP:
        if event.button == step.button and engine.held_button == step.button:
            presses = engine.presses_done + 1
            page = engine.page
            if step.button == "select_reset":
                page = (page + 1) % PAGE_COUNT
            engine = replace(
                engine, held_button=None, held_since=None, presses_done=presses, page=page
            )
            if presses >= step.count:
                engine, actions = _advance(engine, spec)
                return engine, actions, []
        return engine, (), []
    if event.kind is EventKind.KNOB_TURN:
        return engine, (), [
            _flag(event.time, DeviationKind.WRONG_BUTTON, f"turned {event.knob} during press step")
        ]
    return engine, (), [
        _flag(
            event.time,
            DeviationKind.WRONG_IGNITION,
            f"ignition to {event.position.value} during press step",
        )
    ]


def _hold_step(
    engine: EngineState, spec: ProcedureSpec, step: ProcedureStep, event: InputEvent
) -> tuple[EngineState, tuple[EcmAction, ...], list[DeviationFlag]]:
    if event.kind is EventKind.BUTTON_DOWN:
        if event.button == step.button:
            return replace(engine, held_button=event.button, held_since=event.time), (), []
        flags = [
            _flag(event.time, DeviationKind.WRONG_BUTTON, f"pressed {event.button}, step wants {step.button}")
        ]
        # a different button during the hold invalidates it
        return _clear_hold(engine), (), flags
    if event.kind is EventKind.BUTTON_UP:
        if event.button != step.button:
            return _clear_hold(engine), (), []
        if engine.held_button != step.button:
            return engine, (), []
        duration = event.time - engine.held_since
        engine = _clear_hold(engine)
        if duration >= step.seconds:
            engine, actions = _advance(engine, spec)
            return engine, actions, []
        return engine, (), [
            _flag(
                event.time,
                DeviationKind.PREMATURE_RELEASE,
                f"released {step.button} after {duration:.1f}s, needs {step.seconds:.1f}s",
            )
        ]
    if event.kind is EventKind.KNOB_TURN:
        # flags, but the hold itself survives knob noise
        return engine, (), [
            _flag(event.time, DeviationKind.WRONG_BUTTON, f"turned {event.knob} during hold step")
        ]
    return engine, (), [
        _flag(
            event.time,
            DeviationKind.WRONG_IGNITION,
            f"ignition to {event.position.value} during hold step",
        )
    ]


def _hold_through_step(
    engine: EngineState, spec: ProcedureSpec, step: ProcedureStep, event: InputEvent
) -> tuple[EngineState, tuple[EcmAction, ...], list[DeviationFlag]]:
    holding = engine.held_button == step.button
    if event.kind is EventKind.BUTTON_DOWN:
        if event.button == step.button:
            return (
                replace(engine, held_button=event.button, held_since=event.time, hold_ignition_seen=False),
                (),
                [],
            )
        flags = [
            _flag(event.time, DeviationKind.WRONG_BUTTON, f"pressed {event.button}, step wants {step.button}")
        ]
        return _clear_hold(engine), (), flags
    if event.kind is EventKind.BUTTON_UP:
        if event.button != step.button:
            return _clear_hold(engine), (), []
        if not holding:
            return engine, (), []
        if engine.hold_ignition_seen:
            engine, actions = _advance(engine, spec)
            return engine, actions, []
        return _clear_hold(engine), (), [
            _flag(
                event.time,
                DeviationKind.PREMATURE_RELEASE,
                f"released {step.button} before ignition reached {step.position.value}",
            )
        ]
    if event.kind is EventKind.IGNITION_SET:
        hit = normalize_ignition(event.position) is normalize_ignition(step.position)
        if holding and hit:
            return replace(engine, hold_ignition_seen=True), (), []
        if hit:
            return engine, (), [
                _flag(
                    event.time,
                    DeviationKind.OUT_OF_ORDER,
                    f"ignition to {step.position.value} before holding {step.button}",
                )
            ]
        return engine, (), [
            _flag(
                event.time,
                DeviationKind.WRONG_IGNITION,
                f"ignition to {event.position.value}, step wants {step.position.value}",
            )
        ]
    return engine, (), [
        _flag(event.time, DeviationKind.WRONG_BUTTON, f"turned {event.knob} during hold step")
    ]


def _turn_step(
    engine: EngineState, spec: ProcedureSpec, step: ProcedureStep, event: InputEvent
) -> tuple[EngineState, tuple[EcmAction, ...], list[DeviationFlag]]:
    if event.kind is EventKind.KNOB_TURN:
        if event.knob != step.knob:
            return engine, (), [
                _flag(event.time, DeviationKind.WRONG_BUTTON, f"turned {event.knob}, step wants {step.knob}")
            ]
        if step.direction is not None and event.direction is not step.direction:
            return engine, (), [
                _flag(
                    event.time,
                    DeviationKind.WRONG_BUTTON,
                    f"turned {step.knob} {event.direction.value}, step wants {step.direction.value}",
                )
            ]
        turns = engine.turns_done + 1
        engine = replace(engine, turns_done=turns)
        if turns >= step.count:
            engine, actions = _advance(engine, spec)
            return engine, actions, []
        return engine, (), []
    if event.kind is EventKind.BUTTON_DOWN:
        return engine, (), [
            _flag(event.time, DeviationKind.WRONG_BUTTON, f"pressed {event.button} during knob step")
        ]
    if event.kind is EventKind.IGNITION_SET:
        return engine, (), [
            _flag(
                event.time,
                DeviationKind.WRONG_IGNITION,
                f"ignition to {event.position.value} during knob step",
            )
        ]
    return engine, (), []


def _wait_step(
    engine: EngineState, spec: ProcedureSpec, step: ProcedureStep, event: InputEvent
) -> tuple[EngineState, tuple[EcmAction, ...], list[DeviationFlag]]:
    if event.kind is EventKind.BUTTON_UP:
        return engine, (), []
    return engine, (), [
        _flag(
            event.time,
            DeviationKind.OUT_OF_ORDER,
            f"input before display showed {step.pattern!r}",
        )
    ]


_STEP_HANDLERS = {
    StepKind.IGNITION: _ignition_step,
    StepKind.PRESS: _press_step,
    StepKind.HOLD: _hold_step,
    StepKind.HOLD_THROUGH: _hold_through_step,
    StepKind.TURN: _turn_step,
    StepKind.WAIT_DISPLAY: _wait_step,
}


def conventional_step(
    spec: ProcedureSpec, engine: EngineState, vehicle: VehicleState, event: InputEvent
) -> StepResult:
    """Feed one input event to the handbook-procedure interpreter.

    ``vehicle`` must already reflect the event (ignition moved, clock
    advanced) so display waits see the post-event screen.  Events after
    completion are ignored rather than flagged.
    """
    if engine.kind != "conventional":
        raise ValueError("conventional_step needs a conventional engine state")
    if engine.procedure_done:
        return StepResult(engine)
    if engine.mode is EngineMode.IDLE:
        engine = replace(
            engine,
            mode=EngineMode.IN_PROCEDURE,
            in_reset_mode=_entering_reset_mode(spec, engine.step_index),
        )
    engine, actions = _epsilon(spec, engine, vehicle)
    if engine.procedure_done:
        return StepResult(engine, actions)
    step = spec.steps[engine.step_index]
    engine, emitted, flags = _STEP_HANDLERS[step.kind](engine, spec, step, event)
    actions += emitted
    if not engine.procedure_done:
        engine, emitted = _epsilon(spec, engine, vehicle)
        actions += emitted
    return StepResult(engine, actions, tuple(flags))


# --- code-entry engine ----------------------------------------------------


def icode_step(table: ReferenceTable, engine: EngineState, event: InputEvent) -> StepResult:
    """Feed one input event to the reference-code entry engine.

    Only button-down events matter: mode toggles entry, digits accumulate.
    A complete buffer resolves immediately; unknown codes flag and clear.
    """
    if engine.kind != "icode":
        raise ValueError("icode_step needs a code-entry engine state")
    if event.kind is not EventKind.BUTTON_DOWN:
        return StepResult(engine)
    button = event.button
    if button == "mode":
        target = EngineMode.IDLE if engine.mode is EngineMode.CODE_ENTRY else EngineMode.CODE_ENTRY
        return StepResult(
            replace(engine, mode=target, buffer="", notice=None, last_digit_time=None)
        )
    if engine.mode is not EngineMode.CODE_ENTRY or not button.startswith("digit_"):
        return StepResult(engine)
    flags: list[DeviationFlag] = []
    buffer = engine.buffer
    if buffer and engine.last_digit_time is not None:
        gap = event.time - engine.last_digit_time
        if gap >= CODE_ENTRY_TIMEOUT_SECONDS:
            flags.append(
                _flag(
                    event.time,
                    DeviationKind.ENTRY_TIMEOUT,
                    f"{gap:.1f}s since last digit, entry restarted",
                )
            )
            buffer = ""
    buffer += button.removeprefix("digit_")
    engine = replace(engine, buffer=buffer, last_digit_time=event.time, notice=None)
    if len(buffer) < engine.code_length:
        return StepResult(engine, flags=tuple(flags))
    action = lookup(table, buffer)
    if action is None:
        flags.append(_flag(event.time, DeviationKind.INVALID_CODE, f"code {buffer} not in table"))
        return StepResult(
            replace(engine, buffer="", notice="INVALID CODE"), flags=tuple(flags)
        )
    engine = replace(engine, mode=EngineMode.IDLE, buffer="", last_digit_time=None)
    return StepResult(engine, actions_for(action), tuple(flags))
