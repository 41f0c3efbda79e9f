"""Scripted synthetic participants for repeatable usability sessions.

Each builder lays out a deterministic input timeline for one task style.
``gap`` spaces successive operator actions; short button taps release 0.4 of
a gap after the down edge, so timestamps always strictly increase.  The
``injected_errors`` count says how many deviation flags the script is built
to trigger, which tests pin exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ecm import IgnitionPosition
from .events import InputEvent, button_down, button_up, ignition_set, knob_turn


@dataclass(frozen=True)
class AgentScript:
    label: str
    events: tuple[InputEvent, ...]
    injected_errors: int = 0

    def __post_init__(self) -> None:
        last = None
        for event in self.events:
            if last is not None and event.time <= last:
                raise ValueError(f"script {self.label!r} times must strictly increase")
            last = event.time


def _click(events: list[InputEvent], time: float, button: str, gap: float) -> None:
    events.append(button_down(time, button))
    events.append(button_up(time + 0.4 * gap, button))


def expert_icode_script(code: str, gap: float = 1.0) -> AgentScript:
    """Key a code straight through: ignition on, entry mode, digits."""
    events: list[InputEvent] = [ignition_set(0.0, IgnitionPosition.ON)]
    t = gap
    _click(events, t, "mode", gap)
    for digit in code:
        t += gap
        _click(events, t, f"digit_{digit}", gap)
    return AgentScript(f"expert-icode-{code}", tuple(events))


def novice_icode_script(code: str, wrong_digit: str = "9", gap: float = 1.0) -> AgentScript:
    """Fat-finger the last digit, get the invalid-code notice, re-key it."""
    events: list[InputEvent] = [ignition_set(0.0, IgnitionPosition.ON)]
    t = gap
    _click(events, t, "mode", gap)
    for digit in code[:-1] + wrong_digit:
        t += gap
        _click(events, t, f"digit_{digit}", gap)
    for digit in code:
        t += gap
        _click(events, t, f"digit_{digit}", gap)
    return AgentScript(f"novice-icode-{code}", tuple(events), injected_errors=1)


def procedure_a_script(
    x1: float = 5.0,
    x2: float = 5.0,
    gap: float = 1.0,
    first_hold: float | None = None,
) -> AgentScript:
    """Press select/reset three times, then the two long holds.

    ``first_hold`` shorter than ``x1`` simulates letting go too early; the
    script then repeats the hold properly (one premature-release flag).
    """
    events: list[InputEvent] = [ignition_set(0.0, IgnitionPosition.ON)]
    t = 0.0
    for _ in range(3):
        t += gap
        _click(events, t, "select_reset", gap)
    errors = 0
    if first_hold is not None and first_hold < x1:
        t += gap
        events.append(button_down(t, "select_reset"))
        t += first_hold
        events.append(button_up(t, "select_reset"))
        errors = 1
    t += gap
    events.append(button_down(t, "select_reset"))
    t += x1
    events.append(button_up(t, "select_reset"))
    t += gap
    events.append(button_down(t, "select_reset"))
    t += x2
    events.append(button_up(t, "select_reset"))
    return AgentScript("procedure-a", tuple(events), injected_errors=errors)


def procedure_b_script(count: int = 3, gap: float = 1.0) -> AgentScript:
    """Key off, hold trip reset through key-on, release, spin the knob."""
    events: list[InputEvent] = [ignition_set(0.0, IgnitionPosition.OFF)]
    t = gap
    events.append(button_down(t, "trip_reset"))
    t += gap
    events.append(ignition_set(t, IgnitionPosition.ON))
    t += gap
    events.append(button_up(t, "trip_reset"))
    for _ in range(count):
        t += gap
        events.append(knob_turn(t, "A_clock_adjuster"))
    return AgentScript("procedure-b", tuple(events))
