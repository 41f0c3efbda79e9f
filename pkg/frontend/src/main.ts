// DOM wiring: one PanelClient, one PanelModel, re-render on every change.

import { BlinkDriver } from "./blink.js";
import { PanelClient, sessionUrl } from "./client.js";
import {
  SessionClock,
  buttonDown,
  buttonForKey,
  buttonUp,
  ignitionSet,
  knobForKey,
  knobTurn,
} from "./inputs.js";
import {
  formatDeviation,
  formatResult,
  padLcd,
  stateRows,
} from "./panel.js";
import {
  BUTTONS,
  ButtonName,
  IGNITION_POSITIONS,
  IgnitionPosition,
  KnobDirection,
  KnobName,
} from "./protocol.js";
import { QUESTIONS, SurveyDraft } from "./survey.js";
import { PanelModel, initialModel, reduce, withConnection } from "./viewmodel.js";

const byId = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const lcdEl = byId<HTMLPreElement>("lcd");
const phaseEl = byId<HTMLSpanElement>("phase");
const taskBannerEl = byId<HTMLParagraphElement>("task-banner");
const taskResultEl = byId<HTMLParagraphElement>("task-result");
const deviationsEl = byId<HTMLUListElement>("deviations");
const protocolErrorsEl = byId<HTMLUListElement>("protocol-errors");
const stateTableEl = byId<HTMLTableElement>("state-table");
const surveyScoreEl = byId<HTMLParagraphElement>("survey-score");
const surveySendEl = byId<HTMLButtonElement>("survey-send");

let model: PanelModel = initialModel();
let client: PanelClient | null = null;
let clock: SessionClock | null = null;
const survey = new SurveyDraft();
const heldButtons = new Set<ButtonName>();

const blink = new BlinkDriver((visible) => {
  lcdEl.classList.toggle("dimmed", !visible);
});

function render(): void {
  phaseEl.textContent = model.connection;
  phaseEl.className = `phase phase-${model.connection}`;

  lcdEl.textContent = padLcd(model.lines).join("\n");
  blink.setBlinking(model.blink);

  if (model.task) {
    taskBannerEl.textContent =
      `${model.task.taskId} / ${model.task.model} / ${model.task.participantId} ` +
      `(started at ${model.task.startedAt.toFixed(1)}s)`;
  } else {
    taskBannerEl.textContent = model.connection === "open" ? "waiting for first input" : "no task yet";
  }
  taskResultEl.textContent = model.result ? formatResult(model.result) : "";

  deviationsEl.replaceChildren(
    ...model.deviations.map((flag) => {
      const li = document.createElement("li");
      li.textContent = formatDeviation(flag);
      return li;
    }),
  );
  protocolErrorsEl.replaceChildren(
    ...model.protocolErrors.map((message) => {
      const li = document.createElement("li");
      li.textContent = message;
      return li;
    }),
  );

  stateTableEl.replaceChildren();
  if (model.vehicle) {
    for (const [label, value] of stateRows(model.vehicle)) {
      const tr = document.createElement("tr");
      const left = document.createElement("td");
      left.textContent = label;
      const right = document.createElement("td");
      right.textContent = value;
      tr.append(left, right);
      stateTableEl.append(tr);
    }
    for (const button of document.querySelectorAll<HTMLButtonElement>("[data-ignition]")) {
      button.classList.toggle(
        "ignition-active",
        button.dataset.ignition === model.vehicle.ignition,
      );
    }
  }

  surveyScoreEl.textContent =
    model.surveyScore === null ? "" : `recorded, mean rating ${model.surveyScore.toFixed(2)}`;
  surveySendEl.disabled = !survey.complete || model.connection !== "open";
}

function apply(next: PanelModel): void {
  model = next;
  render();
}

// ---- outbound gestures ----

function pressStart(button: ButtonName): void {
  if (!client || !clock || heldButtons.has(button)) return;
  heldButtons.add(button);
  client.send(buttonDown(clock, button));
}

function pressEnd(button: ButtonName): void {
  if (!client || !clock || !heldButtons.has(button)) return;
  heldButtons.delete(button);
  client.send(buttonUp(clock, button));
}

function turn(knob: KnobName, direction: KnobDirection): void {
  if (!client || !clock) return;
  client.send(knobTurn(clock, knob, direction));
}

function ignition(position: IgnitionPosition): void {
  if (!client || !clock) return;
  client.send(ignitionSet(clock, position));
}

// ---- control construction ----

function holdableButton(label: string, button: ButtonName): HTMLButtonElement {
  const el = document.createElement("button");
  el.textContent = label;
  el.addEventListener("pointerdown", () => {
    el.classList.add("held");
    pressStart(button);
  });
  const release = () => {
    el.classList.remove("held");
    pressEnd(button);
  };
  el.addEventListener("pointerup", release);
  el.addEventListener("pointerleave", release);
  return el;
}

function buildControls(): void {
  const ignitionRow = byId<HTMLSpanElement>("ignition-buttons");
  for (const position of IGNITION_POSITIONS) {
    const el = document.createElement("button");
    el.textContent = position;
    el.dataset.ignition = position === "START" ? "ON" : position;
    el.addEventListener("click", () => ignition(position));
    ignitionRow.append(el);
  }

  const clusterRow = byId<HTMLSpanElement>("cluster-buttons");
  for (const button of BUTTONS) {
    if (button.startsWith("digit_")) continue;
    clusterRow.append(holdableButton(button.replace("_", " "), button));
  }

  const keypad = byId<HTMLSpanElement>("keypad");
  for (let digit = 0; digit <= 9; digit += 1) {
    keypad.append(holdableButton(String(digit), `digit_${digit}` as ButtonName));
  }

  const knobs = byId<HTMLSpanElement>("knobs");
  const knobControls: [string, KnobName, KnobDirection][] = [
    ["clock ccw", "A_clock_adjuster", "ccw"],
    ["clock cw", "A_clock_adjuster", "cw"],
    ["trip ccw", "B_trip_reset", "ccw"],
    ["trip cw", "B_trip_reset", "cw"],
  ];
  for (const [label, knob, direction] of knobControls) {
    const el = document.createElement("button");
    el.textContent = label;
    el.addEventListener("click", () => turn(knob, direction));
    knobs.append(el);
  }

  const questions = byId<HTMLDivElement>("survey-questions");
  QUESTIONS.forEach((text, index) => {
    const row = document.createElement("div");
    row.className = "survey-question";
    const span = document.createElement("span");
    span.className = "text";
    span.textContent = text;
    row.append(span);
    for (let rating = 1; rating <= 5; rating += 1) {
      const el = document.createElement("button");
      el.textContent = String(rating);
      el.addEventListener("click", () => {
        survey.setRating(index, rating);
        for (const sibling of row.querySelectorAll("button")) {
          sibling.classList.toggle("picked", sibling === el);
        }
        render();
      });
      row.append(el);
    }
    questions.append(row);
  });

  surveySendEl.addEventListener("click", () => {
    if (client && survey.complete) client.send(survey.toFrame());
  });
}

// ---- keyboard ----

window.addEventListener("keydown", (ev) => {
  if (ev.repeat || ev.target instanceof HTMLInputElement) return;
  const button = buttonForKey(ev.key);
  if (button) {
    pressStart(button);
    return;
  }
  const knob = knobForKey(ev.key);
  if (knob) turn(knob[0], knob[1]);
});

window.addEventListener("keyup", (ev) => {
  if (ev.target instanceof HTMLInputElement) return;
  const button = buttonForKey(ev.key);
  if (button) pressEnd(button);
});

// ---- connection ----

byId<HTMLButtonElement>("connect").addEventListener("click", () => {
  client?.close();
  heldButtons.clear();
  clock = new SessionClock();
  model = initialModel();
  const participant = byId<HTMLInputElement>("participant").value.trim() || "anonymous";
  client = new PanelClient(sessionUrl(window.location.host, participant), {
    onFrame: (frame) => apply(reduce(model, frame)),
    onPhase: (phase) => apply(withConnection(model, phase)),
    onBadFrame: (message) =>
      apply({ ...model, protocolErrors: [...model.protocolErrors, message] }),
  });
});

buildControls();
render();
