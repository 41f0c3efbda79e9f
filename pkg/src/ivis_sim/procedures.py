"""Procedure DSL: handbook reset choreography as a checkable program.

Owner-handbook procedures ("press Select/Reset three times, then hold it
five seconds...") compile into a step list the conventional-model engine
interprets.  Grammar, one statement per line, ``#`` comments allowed::

    procedure <id>
    target <item_id>
    param X1=5
    ignition ON
    press select_reset x3
    hold select_reset X1
    hold select_reset 5s
    hold_through trip_reset ignition ON
    turn A_clock_adjuster x3 cw
    wait_display "OIL LIFE"

Durations are seconds (an optional trailing ``s`` is dropped) or a named
param.  Unresolved params fall back to the stock defaults X1=X2=5s, N=3.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .ecm import IgnitionPosition
from .errors import SimConfigError
from .events import BUTTONS, KNOBS, KnobDirection

DEFAULT_PARAMS = {"X1": 5.0, "X2": 5.0, "N": 3.0}


class ProcedureError(SimConfigError):
    """A procedure file failed to compile; message carries the line number."""


class StepKind(Enum):
    IGNITION = "ignition"
    PRESS = "press"
    HOLD = "hold"
    HOLD_THROUGH = "hold_through"
    TURN = "turn"
    WAIT_DISPLAY = "wait_display"


@dataclass(frozen=True)
class ProcedureStep:
    """One compiled step; only the fields its kind uses are set."""

    kind: StepKind
    button: str | None = None
    knob: str | None = None
    count: int = 1
    seconds: float = 0.0
    direction: KnobDirection | None = None
    position: IgnitionPosition | None = None
    pattern: str | None = None

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"step count must be >= 1, got {self.count}")
        if self.kind in (StepKind.HOLD, StepKind.HOLD_THROUGH) and self.seconds < 0:
            raise ValueError(f"hold duration must be >= 0, got {self.seconds}")
        if self.kind is StepKind.WAIT_DISPLAY and not self.pattern:
            raise ValueError("wait_display needs a non-empty pattern")


@dataclass(frozen=True)
class ProcedureSpec:
    procedure_id: str
    target_item: str
    steps: tuple[ProcedureStep, ...]
    params: dict[str, float]


def _duration(token: str, params: dict[str, float], line_no: int) -> float:
    if token in params:
        return params[token]
    raw = token[:-1] if token.endswith("s") and token[:-1] else token
    try:
        value = float(raw)
    except ValueError:
        raise ProcedureError(f"line {line_no}: bad duration {token!r}") from None
    if value <= 0:
        raise ProcedureError(f"line {line_no}: duration must be > 0, got {token}")
    return value


def _count(token: str, params: dict[str, float], line_no: int) -> int:
    if not token.startswith("x") or len(token) < 2:
        raise ProcedureError(f"line {line_no}: expected a count like 'x3', got {token!r}")
    raw = token[1:]
    if raw in params:
        value = params[raw]
    else:
        try:
            value = float(raw)
        except ValueError:
            raise ProcedureError(f"line {line_no}: bad count {token!r}") from None
    if value < 1 or value != int(value):
        raise ProcedureError(f"line {line_no}: count must be a positive integer, got {token}")
    return int(value)


def _button(token: str, line_no: int) -> str:
    if token not in BUTTONS:
        raise ProcedureError(f"line {line_no}: unknown button {token!r}")
    return token


def _knob(token: str, line_no: int) -> str:
    if token not in KNOBS:
        raise ProcedureError(f"line {line_no}: unknown knob {token!r}")
    return token


def _position(token: str, line_no: int) -> IgnitionPosition:
    try:
        return IgnitionPosition(token.upper())
    except ValueError:
        raise ProcedureError(f"line {line_no}: bad ignition position {token!r}") from None


def compile_procedure(text: str) -> ProcedureSpec:
    """Compile DSL text into a ProcedureSpec; errors name the line."""
    procedure_id: str | None = None
    target_item: str | None = None
    params = dict(DEFAULT_PARAMS)
    statements: list[tuple[int, list[str]]] = []
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            words = shlex.split(line, comments=True)
        except ValueError as exc:
            raise ProcedureError(f"line {line_no}: {exc}") from None
        if not words:
            continue
        head = words[0]
        if head == "procedure":
            if len(words) != 2:
                raise ProcedureError(f"line {line_no}: expected 'procedure <id>'")
            procedure_id = words[1]
        elif head == "target":
            if len(words) != 2:
                raise ProcedureError(f"line {line_no}: expected 'target <item_id>'")
            target_item = words[1]
        elif head == "param":
            # params apply to the whole file regardless of position
            if len(words) != 2 or "=" not in words[1]:
                raise ProcedureError(f"line {line_no}: expected 'param NAME=VALUE'")
            name, _, raw = words[1].partition("=")
            try:
                params[name] = float(raw[:-1] if raw.endswith("s") and raw[:-1] else raw)
            except ValueError:
                raise ProcedureError(f"line {line_no}: bad param value {raw!r}") from None
            if params[name] <= 0:
                raise ProcedureError(f"line {line_no}: param {name} must be > 0")
        else:
            statements.append((line_no, words))

    if procedure_id is None:
        raise ProcedureError("missing 'procedure <id>' header")
    if target_item is None:
        raise ProcedureError("missing 'target <item_id>' header")

    steps: list[ProcedureStep] = []
    for line_no, words in statements:
        head = words[0]
        try:
            if head == "ignition":
                if len(words) != 2:
                    raise ProcedureError(f"line {line_no}: expected 'ignition <position>'")
                steps.append(
                    ProcedureStep(StepKind.IGNITION, position=_position(words[1], line_no))
                )
            elif head == "press":
                if len(words) not in (2, 3):
                    raise ProcedureError(f"line {line_no}: expected 'press <button> [xN]'")
                count = _count(words[2], params, line_no) if len(words) == 3 else 1
                steps.append(
                    ProcedureStep(StepKind.PRESS, button=_button(words[1], line_no), count=count)
                )
            elif head == "hold":
                if len(words) != 3:
                    raise ProcedureError(f"line {line_no}: expected 'hold <button> <secs|param>'")
                steps.append(
                    ProcedureStep(
                        StepKind.HOLD,
                        button=_button(words[1], line_no),
                        seconds=_duration(words[2], params, line_no),
                    )
                )
            elif head == "hold_through":
                if len(words) != 4 or words[2] != "ignition":
                    raise ProcedureError(
                        f"line {line_no}: expected 'hold_through <button> ignition <position>'"
                    )
                steps.append(
                    ProcedureStep(
                        StepKind.HOLD_THROUGH,
                        button=_button(words[1], line_no),
                        position=_position(words[3], line_no),
                    )
                )
            elif head == "turn":
                if len(words) not in (2, 3, 4):
                    raise ProcedureError(f"line {line_no}: expected 'turn <knob> [xN] [cw|ccw]'")
                count = 1
                direction = None  # None = either direction counts
                for token in words[2:]:
                    if token in ("cw", "ccw"):
                        direction = KnobDirection(token)
                    else:
                        count = _count(token, params, line_no)
                steps.append(
                    ProcedureStep(
                        StepKind.TURN,
                        knob=_knob(words[1], line_no),
                        count=count,
                        direction=direction,
                    )
                )
            elif head == "wait_display":
                if len(words) != 2:
                    raise ProcedureError(f'line {line_no}: expected \'wait_display "<substr>"\'')
                steps.append(ProcedureStep(StepKind.WAIT_DISPLAY, pattern=words[1]))
            else:
                raise ProcedureError(f"line {line_no}: unknown statement {head!r}")
        except ValueError as exc:
            raise ProcedureError(f"line {line_no}: {exc}") from None

    if not steps:
        raise ProcedureError("procedure has no steps")
    return ProcedureSpec(procedure_id, target_item, tuple(steps), params)


def load_procedure(path: str | Path) -> ProcedureSpec:
    return compile_procedure(Path(path).read_text(encoding="utf-8"))
