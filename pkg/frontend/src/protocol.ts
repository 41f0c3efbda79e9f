// Frame types for the ivis-sim WebSocket protocol, plus strict parsing.
// The panel owns no vehicle logic: everything it shows comes from these frames.

export type ButtonName =
  | "select_reset"
  | "trip_reset"
  | "mode"
  | "confirm"
  | "power"
  | "forward"
  | "reverse"
  | "digit_0"
  | "digit_1"
  | "digit_2"
  | "digit_3"
  | "digit_4"
  | "digit_5"
  | "digit_6"
  | "digit_7"
  | "digit_8"
  | "digit_9";

export type KnobName = "A_clock_adjuster" | "B_trip_reset";
export type KnobDirection = "cw" | "ccw";
export type IgnitionPosition = "OFF" | "ACC" | "ON" | "START";

export const BUTTONS: readonly ButtonName[] = [
  "select_reset",
  "trip_reset",
  "mode",
  "confirm",
  "power",
  "forward",
  "reverse",
  "digit_0",
  "digit_1",
  "digit_2",
  "digit_3",
  "digit_4",
  "digit_5",
  "digit_6",
  "digit_7",
  "digit_8",
  "digit_9",
];

export const IGNITION_POSITIONS: readonly IgnitionPosition[] = ["OFF", "ACC", "ON", "START"];

// ---- client -> server ----

export interface ButtonInputFrame {
  type: "input";
  time: number;
  event: "down" | "up";
  button: ButtonName;
}

export interface TurnInputFrame {
  type: "input";
  time: number;
  event: "turn";
  knob: KnobName;
  direction: KnobDirection;
}

export interface IgnitionInputFrame {
  type: "input";
  time: number;
  event: "ignition";
  position: IgnitionPosition;
}

export type InputFrame = ButtonInputFrame | TurnInputFrame | IgnitionInputFrame;

export interface SurveySubmitFrame {
  type: "survey_submit";
  ratings: number[];
}

export type ClientFrame = InputFrame | SurveySubmitFrame;

export function serializeClientFrame(frame: ClientFrame): string {
  return JSON.stringify(frame);
}

// ---- server -> client ----

export interface DisplayFrame {
  type: "display";
  lines: string[];
  blink: boolean;
}

export interface ItemSnapshot {
  status: string;
  last_reset_odometer: number;
  last_reset_time: number;
}

export interface StateFrame {
  type: "state";
  ignition: string;
  odometer: number;
  clock: number;
  oil_life: number;
  settings: { language: string; time_zone: string; dst: boolean };
  items: Record<string, ItemSnapshot>;
  dtcs: string[];
  lcd: { lines: string[]; blink: boolean };
}

export interface TaskStartedFrame {
  type: "task_started";
  participant_id: string;
  task_id: string;
  model: string;
  time: number;
}

/** A usability deviation detected by the engine; counts toward error totals. */
export interface DeviationFrame {
  type: "error_flag";
  time: number;
  kind: string;
  detail: string;
}

/** A protocol problem (bad frame, busy server); not a task error. */
export interface ProtocolErrorFrame {
  type: "error_flag";
  error: string;
}

export type ErrorFlagFrame = DeviationFrame | ProtocolErrorFrame;

export interface TaskRecord {
  record: "task";
  participant_id: string;
  model: string;
  task_id: string;
  completed: boolean;
  time_to_complete: number | null;
  error_count: number;
  flags: { time: number; kind: string; detail: string }[];
}

export interface TaskCompletedFrame {
  type: "task_completed";
  result: TaskRecord;
}

export interface SurveyAckFrame {
  type: "survey_ack";
  survey: { record: "survey"; participant_id: string; model: string; ratings: number[] };
  score: number;
}

export type ServerFrame =
  | DisplayFrame
  | StateFrame
  | TaskStartedFrame
  | ErrorFlagFrame
  | TaskCompletedFrame
  | SurveyAckFrame;

export class ProtocolError extends Error {}

export function isDeviation(frame: ErrorFlagFrame): frame is DeviationFrame {
  return typeof (frame as DeviationFrame).kind === "string";
}

function need<T>(value: unknown, check: (v: unknown) => boolean, what: string): T {
  if (!check(value)) {
    throw new ProtocolError(`bad frame: expected ${what}`);
  }
  return value as T;
}

const isString = (v: unknown) => typeof v === "string";
const isNumber = (v: unknown) => typeof v === "number" && Number.isFinite(v);
const isBool = (v: unknown) => typeof v === "boolean";
const isStringArray = (v: unknown) => Array.isArray(v) && v.every((x) => typeof x === "string");
const isObject = (v: unknown) => typeof v === "object" && v !== null && !Array.isArray(v);

/** Parse one server message; throws ProtocolError on anything malformed. */
export function parseServerFrame(text: string): ServerFrame {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new ProtocolError("bad frame: not JSON");
  }
  if (!isObject(raw)) {
    throw new ProtocolError("bad frame: not an object");
  }
  const frame = raw as Record<string, unknown>;
  switch (frame.type) {
    case "display":
      return {
        type: "display",
        lines: need(frame.lines, isStringArray, "display.lines string list"),
        blink: need(frame.blink, isBool, "display.blink boolean"),
      };
    case "state": {
      need(frame.settings, isObject, "state.settings object");
      need(frame.items, isObject, "state.items object");
      need(frame.lcd, isObject, "state.lcd object");
      return {
        type: "state",
        ignition: need(frame.ignition, isString, "state.ignition string"),
        odometer: need(frame.odometer, isNumber, "state.odometer number"),
        clock: need(frame.clock, isNumber, "state.clock number"),
        oil_life: need(frame.oil_life, isNumber, "state.oil_life number"),
        settings: frame.settings as StateFrame["settings"],
        items: frame.items as StateFrame["items"],
        dtcs: need(frame.dtcs, isStringArray, "state.dtcs string list"),
        lcd: frame.lcd as StateFrame["lcd"],
      };
    }
    case "task_started":
      return {
        type: "task_started",
        participant_id: need(frame.participant_id, isString, "task_started.participant_id"),
        task_id: need(frame.task_id, isString, "task_started.task_id"),
        model: need(frame.model, isString, "task_started.model"),
        time: need(frame.time, isNumber, "task_started.time"),
      };
    case "error_flag":
      if (typeof frame.error === "string") {
        return { type: "error_flag", error: frame.error };
      }
      return {
        type: "error_flag",
        time: need(frame.time, isNumber, "error_flag.time"),
        kind: need(frame.kind, isString, "error_flag.kind"),
        detail: need(frame.detail, isString, "error_flag.detail"),
      };
    case "task_completed": {
      const result = need<Record<string, unknown>>(frame.result, isObject, "task_completed.result");
      if (result.record !== "task") {
        throw new ProtocolError("bad frame: task_completed.result is not a task record");
      }
      return { type: "task_completed", result: result as unknown as TaskRecord };
    }
    case "survey_ack":
      need(frame.survey, isObject, "survey_ack.survey object");
      return {
        type: "survey_ack",
        survey: frame.survey as SurveyAckFrame["survey"],
        score: need(frame.score, isNumber, "survey_ack.score"),
      };
    default:
      throw new ProtocolError(`bad frame: unknown type ${String(frame.type)}`);
  }
}
