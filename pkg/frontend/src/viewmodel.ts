// Pure reducer turning the server frame stream into what the panel shows.
// Keeping this free of DOM and sockets makes the whole display path testable.

import {
  DeviationFrame,
  ServerFrame,
  StateFrame,
  TaskRecord,
  isDeviation,
} from "./protocol.js";

export type ConnectionPhase = "idle" | "connecting" | "open" | "closed";

export interface TaskBanner {
  participantId: string;
  taskId: string;
  model: string;
  startedAt: number;
}

export interface PanelModel {
  connection: ConnectionPhase;
  lines: string[];
  blink: boolean;
  vehicle: StateFrame | null;
  task: TaskBanner | null;
  result: TaskRecord | null;
  deviations: DeviationFrame[];
  protocolErrors: string[];
  surveyScore: number | null;
}

export function initialModel(): PanelModel {
  return {
    connection: "idle",
    lines: [],
    blink: false,
    vehicle: null,
    task: null,
    result: null,
    deviations: [],
    protocolErrors: [],
    surveyScore: null,
  };
}

export function withConnection(model: PanelModel, phase: ConnectionPhase): PanelModel {
  return { ...model, connection: phase };
}

export function reduce(model: PanelModel, frame: ServerFrame): PanelModel {
  switch (frame.type) {
    case "display":
      return { ...model, lines: frame.lines.slice(), blink: frame.blink };
    case "state":
      return { ...model, vehicle: frame };
    case "task_started":
      return {
        ...model,
        task: {
          participantId: frame.participant_id,
          taskId: frame.task_id,
          model: frame.model,
          startedAt: frame.time,
        },
      };
    case "error_flag":
      if (isDeviation(frame)) {
        return { ...model, deviations: [...model.deviations, frame] };
      }
      return { ...model, protocolErrors: [...model.protocolErrors, frame.error] };
    case "task_completed":
      return { ...model, result: frame.result };
    case "survey_ack":
      return { ...model, surveyScore: frame.score };
  }
}
