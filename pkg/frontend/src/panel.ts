// Pure formatting helpers for the panel DOM. No socket or document access
// here so the display path stays unit-testable.

import { DeviationFrame, StateFrame, TaskRecord } from "./protocol.js";

export const LCD_ROWS = 2;
export const LCD_COLS = 20;

/** Fixed 2x20 character grid; a dark panel is all spaces. */
export function padLcd(lines: string[], rows: number = LCD_ROWS, cols: number = LCD_COLS): string[] {
  const grid: string[] = [];
  for (let i = 0; i < rows; i += 1) {
    const line = lines[i] ?? "";
    grid.push(line.slice(0, cols).padEnd(cols, " "));
  }
  return grid;
}

/** Vehicle clock seconds -> HH:MM:SS, wrapping at 24h like the cluster does. */
export function formatClock(seconds: number): string {
  const day = 24 * 3600;
  const s = ((Math.floor(seconds) % day) + day) % day;
  const hh = Math.floor(s / 3600);
  const mm = Math.floor((s % 3600) / 60);
  const ss = s % 60;
  const pad = (n: number) => String(n).padStart(2, "0");
  return `${pad(hh)}:${pad(mm)}:${pad(ss)}`;
}

/** Label/value rows for the telemetry table. */
export function stateRows(state: StateFrame): [string, string][] {
  const rows: [string, string][] = [
    ["Ignition", state.ignition],
    ["Odometer", `${state.odometer.toFixed(0)} MI`],
    ["Clock", formatClock(state.clock)],
    ["Oil life", `${state.oil_life.toFixed(0)}%`],
    ["Language", state.settings.language],
    ["Time zone", state.settings.time_zone],
    ["DST", state.settings.dst ? "On" : "Off"],
    ["DTCs", state.dtcs.length === 0 ? "none" : state.dtcs.join(" ")],
  ];
  for (const itemId of Object.keys(state.items).sort()) {
    rows.push([`Item ${itemId}`, state.items[itemId].status]);
  }
  return rows;
}

export function formatDeviation(flag: DeviationFrame): string {
  return `${flag.time.toFixed(1)}s ${flag.kind}: ${flag.detail}`;
}

export function formatResult(result: TaskRecord): string {
  if (!result.completed) {
    return `task ${result.task_id} not completed (${result.error_count} errors)`;
  }
  const ttc = result.time_to_complete === null ? "?" : result.time_to_complete.toFixed(1);
  return `task ${result.task_id} completed in ${ttc}s with ${result.error_count} errors`;
}
