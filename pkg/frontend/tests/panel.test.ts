import { describe, expect, it } from "vitest";

import { formatClock, formatDeviation, formatResult, padLcd, stateRows } from "../src/panel.js";
import { StateFrame, TaskRecord } from "../src/protocol.js";

describe("padLcd", () => {
  it("always yields a 2x20 grid", () => {
    for (const lines of [[], ["ODO 3400 MI"], ["CODE: 301_", "SERVICE OIL CHANGE"]]) {
      const grid = padLcd(lines);
      expect(grid).toHaveLength(2);
      for (const row of grid) expect(row).toHaveLength(20);
    }
  });

  it("pads short lines and truncates long ones", () => {
    const grid = padLcd(["HI", "X".repeat(30)]);
    expect(grid[0]).toBe("HI" + " ".repeat(18));
    expect(grid[1]).toBe("X".repeat(20));
  });

  it("renders a dark panel as spaces", () => {
    expect(padLcd([])).toEqual([" ".repeat(20), " ".repeat(20)]);
  });
});

describe("formatClock", () => {
  it.each([
    [0, "00:00:00"],
    [5.4, "00:00:05"],
    [3661, "01:01:01"],
    [24 * 3600 + 61, "00:01:01"],
  ])("formats %ss as %s", (seconds, expected) => {
    expect(formatClock(seconds as number)).toBe(expected);
  });
});

describe("stateRows", () => {
  const state: StateFrame = {
    type: "state",
    ignition: "ON",
    odometer: 3400.0,
    clock: 5.0,
    oil_life: 100.0,
    settings: { language: "Spanish", time_zone: "PST", dst: true },
    items: {
      oil_change: { status: "OK", last_reset_odometer: 3400.0, last_reset_time: 5.0 },
      air_filter: { status: "DUE", last_reset_odometer: 0.0, last_reset_time: 0.0 },
    },
    dtcs: ["P0300"],
    lcd: { lines: [], blink: false },
  };

  it("lists vehicle fields then items sorted by id", () => {
    const rows = stateRows(state);
    const labels = rows.map(([label]) => label);
    expect(labels).toEqual([
      "Ignition",
      "Odometer",
      "Clock",
      "Oil life",
      "Language",
      "Time zone",
      "DST",
      "DTCs",
      "Item air_filter",
      "Item oil_change",
    ]);
    const byLabel = Object.fromEntries(rows);
    expect(byLabel["Odometer"]).toBe("3400 MI");
    expect(byLabel["Oil life"]).toBe("100%");
    expect(byLabel["DST"]).toBe("On");
    expect(byLabel["DTCs"]).toBe("P0300");
    expect(byLabel["Item air_filter"]).toBe("DUE");
  });
});

describe("formatters", () => {
  it("describes deviations compactly", () => {
    expect(formatDeviation({ type: "error_flag", time: 4.0, kind: "invalid-code", detail: "code 9999" }))
      .toBe("4.0s invalid-code: code 9999");
  });

  it("describes results for completed and abandoned tasks", () => {
    const done: TaskRecord = {
      record: "task",
      participant_id: "p01",
      model: "iinteraction",
      task_id: "oil_due_icode",
      completed: true,
      time_to_complete: 5.0,
      error_count: 0,
      flags: [],
    };
    expect(formatResult(done)).toBe("task oil_due_icode completed in 5.0s with 0 errors");
    expect(formatResult({ ...done, completed: false, time_to_complete: null, error_count: 2 }))
      .toBe("task oil_due_icode not completed (2 errors)");
  });
});
