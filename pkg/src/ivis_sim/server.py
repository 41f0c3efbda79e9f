"""WebSocket wire layer: newline-free JSON frames, one object per message.

Client frames::

    {"type": "input", "time": 1.5, "event": "down", "button": "mode"}
    {"type": "input", "time": 2.0, "event": "turn", "knob": "A_clock_adjuster",
     "direction": "cw"}
    {"type": "input", "time": 0.0, "event": "ignition", "position": "ON"}
    {"type": "survey_submit", "ratings": [5, 4, 5]}

Server frames: ``state`` (canonical snapshot, on connect and on change),
``display`` (lines + blink, on change), ``task_started``, ``error_flag``
(either a deviation with time/kind/detail or a protocol problem with an
``error`` key), ``task_completed`` (full task result), ``survey_ack``.

In virtual clock mode the client owns time: each input carries a
session-relative stamp, clamped to be non-decreasing.  In wall mode the
server stamps inputs from a monotonic clock and the client's ``time`` field
is ignored.  One session at a time; later connections are turned away with
an error frame.
"""

from __future__ import annotations

import json
import time
from pathlib import Path
from types import SimpleNamespace

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .ecm import IgnitionPosition
from .events import InputEvent, button_down, button_up, ignition_set, knob_turn
from .events import KnobDirection
from .harness import (
    SurveyResponse,
    export_results,
    score_survey,
    survey_to_json,
    task_to_json,
)
from .service import ClockMode, ScenarioBundle, build_session, snapshot_state, write_trace

SESSION_LOG_NAME = "sessions.ndjson"


def _event_from_frame(frame: dict, stamp: float) -> InputEvent:
    kind = frame.get("event")
    if kind == "down" or kind == "up":
        ctor = button_down if kind == "down" else button_up
        return ctor(stamp, frame.get("button", ""))
    if kind == "turn":
        direction = KnobDirection(frame.get("direction", "cw"))
        return knob_turn(stamp, frame.get("knob", ""), direction)
    if kind == "ignition":
        return ignition_set(stamp, IgnitionPosition(frame.get("position", "")))
    raise ValueError(f"unknown input event {kind!r}")


class _Connection:
    """One live participant: session, recording buffer, change detection."""

    def __init__(self, bundle: ScenarioBundle, participant_id: str, wall_clock) -> None:
        self.bundle = bundle
        self.participant_id = participant_id
        self.task_id = bundle.scenario.scenario_id
        self.session = build_session(bundle)
        self.wall_mode = bundle.scenario.clock_mode is ClockMode.WALL
        self.wall_clock = wall_clock
        self.t0 = wall_clock() if self.wall_mode else 0.0
        self.events: list[InputEvent] = []
        self.surveys: list[SurveyResponse] = []
        self.last_display: dict | None = None
        self.last_state: dict | None = None
        self.announced_start = False

    def stamp_for(self, frame: dict) -> float:
        if self.wall_mode:
            return self.wall_clock() - self.t0
        raw = frame.get("time")
        if not isinstance(raw, (int, float)):
            raise ValueError("virtual clock mode needs a numeric 'time' in each input")
        return max(float(raw), self.session.last_event_time)

    def display_frame(self) -> dict:
        lcd = self.session.display()
        return {"type": "display", "lines": list(lcd.lines), "blink": lcd.blink}

    def state_frame(self) -> dict:
        return {"type": "state", **snapshot_state(self.session.vehicle)}

    async def send_changes(self, websocket: WebSocket) -> None:
        display = self.display_frame()
        if display != self.last_display:
            self.last_display = display
            await websocket.send_json(display)
        state = self.state_frame()
        if state != self.last_state:
            self.last_state = state
            await websocket.send_json(state)

    async def handle_input(self, websocket: WebSocket, frame: dict) -> None:
        event = _event_from_frame(frame, self.stamp_for(frame))
        self.events.append(event)
        if not self.announced_start:
            self.announced_start = True
            await websocket.send_json(
                {
                    "type": "task_started",
                    "participant_id": self.participant_id,
                    "task_id": self.task_id,
                    "model": self.bundle.scenario.model.value,
                    "time": event.time,
                }
            )
        outcome = self.session.feed(event)
        for flag in outcome.flags:
            await websocket.send_json(
                {
                    "type": "error_flag",
                    "time": flag.time,
                    "kind": flag.kind.value,
                    "detail": flag.detail,
                }
            )
        await self.send_changes(websocket)
        if outcome.completed_now:
            result = self.session.result(self.participant_id, self.task_id)
            await websocket.send_json({"type": "task_completed", "result": task_to_json(result)})

    async def handle_survey(self, websocket: WebSocket, frame: dict) -> None:
        ratings = frame.get("ratings")
        if not isinstance(ratings, list):
            raise ValueError("survey_submit needs a 'ratings' list")
        response = SurveyResponse(
            participant_id=self.participant_id,
            model=self.bundle.scenario.model,
            ratings=tuple(ratings),
        )
        self.surveys.append(response)
        await websocket.send_json(
            {"type": "survey_ack", "survey": survey_to_json(response), "score": score_survey(response)}
        )

    def finalize(self, record_dir: Path | None, sequence: int) -> None:
        """Persist the trace and session log; recorded stamps are virtual."""
        if record_dir is None or not self.events:
            return
        record_dir.mkdir(parents=True, exist_ok=True)
        trace_name = f"{self.task_id}_{self.participant_id}_{sequence:03d}.trace"
        write_trace(
            record_dir / trace_name,
            self.events,
            scenario_path=self.bundle.scenario.source_path,
            clock_mode=ClockMode.VIRTUAL,
        )
        result = self.session.result(self.participant_id, self.task_id)
        export_results(record_dir / SESSION_LOG_NAME, [result], self.surveys)


def create_app(
    bundle: ScenarioBundle,
    record_dir: str | Path | None = None,
    clock=None,
    frontend_dir: str | Path | None = None,
) -> FastAPI:
    """Build the app serving /ws for one scenario, plus optional static UI."""
    app = FastAPI(title="ivis-sim")
    shared = SimpleNamespace(busy=False, sequence=0)
    record_path = Path(record_dir) if record_dir is not None else None
    wall_clock = clock if clock is not None else time.monotonic

    @app.websocket("/ws")
    async def ws_session(websocket: WebSocket) -> None:
        await websocket.accept()
        if shared.busy:
            await websocket.send_json(
                {"type": "error_flag", "error": "another session is in progress"}
            )
            await websocket.close()
            return
        shared.busy = True
        shared.sequence += 1
        connection = _Connection(
            bundle,
            websocket.query_params.get("participant", "anonymous"),
            wall_clock,
        )
        try:
            await connection.send_changes(websocket)
            while True:
                text = await websocket.receive_text()
                try:
                    raw = json.loads(text)
                    frame_type = raw.get("type") if isinstance(raw, dict) else None
                    if frame_type == "input":
                        await connection.handle_input(websocket, raw)
                    elif frame_type == "survey_submit":
                        await connection.handle_survey(websocket, raw)
                    else:
                        raise ValueError(f"unknown frame type {frame_type!r}")
                except ValueError as exc:
                    await websocket.send_json({"type": "error_flag", "error": str(exc)})
        except WebSocketDisconnect:
            pass
        finally:
            connection.finalize(record_path, shared.sequence)
            shared.busy = False

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="panel")
    return app


def serve(
    bundle: ScenarioBundle,
    host: str,
    port: int,
    record_dir: str | Path | None = None,
    frontend_dir: str | Path | None = None,
) -> None:
    """Run the app under uvicorn until interrupted."""
    import uvicorn

    app = create_app(bundle, record_dir=record_dir, frontend_dir=frontend_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
