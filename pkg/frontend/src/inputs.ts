// Gesture-to-frame mapping and the client-side session clock.
// In virtual clock mode every input must carry a session-relative stamp;
// the clock here is monotonic by construction so the server never clamps.

import {
  ButtonName,
  IgnitionPosition,
  InputFrame,
  KnobDirection,
  KnobName,
} from "./protocol.js";

/** Session-relative seconds from an injectable millisecond clock. */
export class SessionClock {
  private readonly now: () => number;
  private readonly t0: number;
  private last = 0;

  constructor(now: () => number = () => performance.now()) {
    this.now = now;
    this.t0 = now();
  }

  /** Next stamp in seconds: non-decreasing, millisecond precision. */
  stamp(): number {
    const seconds = Math.round(this.now() - this.t0) / 1000;
    this.last = Math.max(this.last, seconds);
    return this.last;
  }
}

export function buttonDown(clock: SessionClock, button: ButtonName): InputFrame {
  return { type: "input", time: clock.stamp(), event: "down", button };
}

export function buttonUp(clock: SessionClock, button: ButtonName): InputFrame {
  return { type: "input", time: clock.stamp(), event: "up", button };
}

export function knobTurn(
  clock: SessionClock,
  knob: KnobName,
  direction: KnobDirection,
): InputFrame {
  return { type: "input", time: clock.stamp(), event: "turn", knob, direction };
}

export function ignitionSet(clock: SessionClock, position: IgnitionPosition): InputFrame {
  return { type: "input", time: clock.stamp(), event: "ignition", position };
}

// Keyboard shortcuts: digits type themselves, letters hit the named buttons,
// brackets are the clock-adjuster knob. Down/up pairing follows the physical
// keydown/keyup so holds work from the keyboard too.
const KEY_BUTTONS: Record<string, ButtonName> = {
  "0": "digit_0",
  "1": "digit_1",
  "2": "digit_2",
  "3": "digit_3",
  "4": "digit_4",
  "5": "digit_5",
  "6": "digit_6",
  "7": "digit_7",
  "8": "digit_8",
  "9": "digit_9",
  m: "mode",
  s: "select_reset",
  t: "trip_reset",
  c: "confirm",
  p: "power",
  f: "forward",
  r: "reverse",
};

const KEY_KNOBS: Record<string, [KnobName, KnobDirection]> = {
  "[": ["A_clock_adjuster", "ccw"],
  "]": ["A_clock_adjuster", "cw"],
  ",": ["B_trip_reset", "ccw"],
  ".": ["B_trip_reset", "cw"],
};

export function buttonForKey(key: string): ButtonName | null {
  return KEY_BUTTONS[key.toLowerCase()] ?? null;
}

export function knobForKey(key: string): [KnobName, KnobDirection] | null {
  return KEY_KNOBS[key] ?? null;
}
