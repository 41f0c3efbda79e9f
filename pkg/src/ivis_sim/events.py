"""Timestamped input events: the only way anything reaches the simulator.

An input trace is a plain text file, one event per line::

    <time> down <button>
    <time> up <button>
    <time> turn <knob> cw|ccw
    <time> ignition OFF|ACC|ON|START

Times are seconds on the virtual clock and must be non-decreasing.  Button
and knob names are closed sets; traces naming anything else are rejected up
front so replay can never silently skip an event.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .ecm import IgnitionPosition
from .errors import SimConfigError

BUTTONS = frozenset(
    {
        "select_reset",
        "trip_reset",
        "mode",
        "confirm",
        "power",
        "forward",
        "reverse",
        *(f"digit_{d}" for d in range(10)),
    }
)

KNOBS = frozenset({"A_clock_adjuster", "B_trip_reset"})


class EventKind(Enum):
    BUTTON_DOWN = "down"
    BUTTON_UP = "up"
    KNOB_TURN = "turn"
    IGNITION_SET = "ignition"


class KnobDirection(Enum):
    CW = "cw"
    CCW = "ccw"


class TraceError(SimConfigError):
    """An input trace failed to parse or validate."""


@dataclass(frozen=True)
class InputEvent:
    time: float
    kind: EventKind
    button: str | None = None
    knob: str | None = None
    direction: KnobDirection | None = None
    position: IgnitionPosition | None = None

    def __post_init__(self) -> None:
        if self.time < 0:
            raise ValueError(f"event time must be >= 0, got {self.time}")
        if self.kind in (EventKind.BUTTON_DOWN, EventKind.BUTTON_UP):
            if self.button not in BUTTONS:
                raise ValueError(f"unknown button {self.button!r}")
        elif self.kind is EventKind.KNOB_TURN:
            if self.knob not in KNOBS:
                raise ValueError(f"unknown knob {self.knob!r}")
            if self.direction is None:
                raise ValueError("knob turn needs a direction")
        elif self.kind is EventKind.IGNITION_SET:
            if self.position is None:
                raise ValueError("ignition event needs a position")


def button_down(time: float, button: str) -> InputEvent:
    return InputEvent(time, EventKind.BUTTON_DOWN, button=button)


def button_up(time: float, button: str) -> InputEvent:
    return InputEvent(time, EventKind.BUTTON_UP, button=button)


def knob_turn(time: float, knob: str, direction: KnobDirection = KnobDirection.CW) -> InputEvent:
    return InputEvent(time, EventKind.KNOB_TURN, knob=knob, direction=direction)


def ignition_set(time: float, position: IgnitionPosition) -> InputEvent:
    return InputEvent(time, EventKind.IGNITION_SET, position=position)


def validate_trace(events: list[InputEvent]) -> None:
    """Reject traces whose timestamps run backwards."""
    last = None
    for index, event in enumerate(events):
        if last is not None and event.time < last:
            raise TraceError(
                f"event {index} at t={event.time} precedes previous event at t={last}"
            )
        last = event.time


def serialize_event(event: InputEvent) -> str:
    stamp = repr(event.time)
    if event.kind is EventKind.BUTTON_DOWN:
        return f"{stamp} down {event.button}"
    if event.kind is EventKind.BUTTON_UP:
        return f"{stamp} up {event.button}"
    if event.kind is EventKind.KNOB_TURN:
        return f"{stamp} turn {event.knob} {event.direction.value}"
    return f"{stamp} ignition {event.position.value}"


def parse_event_line(line: str, line_no: int) -> InputEvent:
    words = line.split()
    if len(words) < 3:
        raise TraceError(f"line {line_no}: expected '<time> <kind> ...'")
    try:
        time = float(words[0])
    except ValueError:
        raise TraceError(f"line {line_no}: bad timestamp {words[0]!r}") from None
    kind_word = words[1]
    try:
        if kind_word in ("down", "up"):
            ctor = button_down if kind_word == "down" else button_up
            if len(words) != 3:
                raise TraceError(f"line {line_no}: expected '<time> {kind_word} <button>'")
            return ctor(time, words[2])
        if kind_word == "turn":
            if len(words) != 4:
                raise TraceError(f"line {line_no}: expected '<time> turn <knob> cw|ccw'")
            try:
                direction = KnobDirection(words[3])
            except ValueError:
                raise TraceError(f"line {line_no}: bad direction {words[3]!r}") from None
            return knob_turn(time, words[2], direction)
        if kind_word == "ignition":
            if len(words) != 3:
                raise TraceError(f"line {line_no}: expected '<time> ignition <position>'")
            try:
                position = IgnitionPosition(words[2])
            except ValueError:
                raise TraceError(f"line {line_no}: bad ignition position {words[2]!r}") from None
            return ignition_set(time, position)
    except ValueError as exc:
        raise TraceError(f"line {line_no}: {exc}") from None
    raise TraceError(f"line {line_no}: unknown event kind {kind_word!r}")


def parse_trace(text: str) -> list[InputEvent]:
    """Parse event lines; ``#`` lines are comments (headers live upstream)."""
    events = []
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        events.append(parse_event_line(line, line_no))
    validate_trace(events)
    return events


def serialize_trace(events: list[InputEvent]) -> str:
    return "\n".join(serialize_event(e) for e in events) + ("\n" if events else "")


def load_trace_events(path: str | Path) -> list[InputEvent]:
    return parse_trace(Path(path).read_text(encoding="utf-8"))
