"""Live telemetry/command endpoint.

A background thread ticks the mission at the scenario rate; WebSocket
clients at ``/ws`` receive one telemetry JSON object per tick and may send
command objects, which are queued and applied at the next tick boundary.
Replies are acks or errors mirroring Mission.handle_command.
"""

from __future__ import annotations

import asyncio
import json
import threading
import time
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse
from fastapi.staticfiles import StaticFiles

from conedrive.mission.pipeline import Mission


class MissionRuntime:
    """Wall-clock paced tick loop with a command queue and latest-frame slot."""

    def __init__(self, mission: Mission, realtime: bool = True):
        self.mission = mission
        self.realtime = realtime
        self._lock = threading.Lock()
        self._commands: list[tuple[dict, threading.Event, list]] = []
        self._latest: dict | None = None
        self._running = False
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        self._running = True
        self._thread = threading.Thread(target=self._loop, name="mission-tick", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._running = False
        if self._thread is not None:
            self._thread.join(timeout=2.0)

    def _loop(self) -> None:
        dt = 1.0 / self.mission.scenario.mission.tick_rate
        while self._running:
            t0 = time.perf_counter()
            with self._lock:
                pending, self._commands = self._commands, []
            for cmd, event, slot in pending:
                slot.append(self.mission.handle_command(cmd))
                event.set()
            frame = self.mission.tick(dt)
            with self._lock:
                self._latest = frame.to_json()
            if self.realtime:
                remaining = dt - (time.perf_counter() - t0)
                if remaining > 0:
                    time.sleep(remaining)

    def submit(self, cmd: dict, timeout: float = 2.0) -> dict:
        """Queue a command for the next tick and wait for its reply."""
        event = threading.Event()
        slot: list = []
        with self._lock:
            self._commands.append((cmd, event, slot))
        if not event.wait(timeout):
            return {"type": "error", "message": "command timed out"}
        return slot[0]

    def latest(self) -> dict | None:
        with self._lock:
            return self._latest


def create_app(runtime: MissionRuntime, console_dir: str | Path | None = None) -> FastAPI:
    @asynccontextmanager
    async def lifespan(_: FastAPI):
        if runtime._thread is None:
            runtime.start()
        yield
        runtime.stop()

    app = FastAPI(title="conedrive mission service", lifespan=lifespan)
    app.state.runtime = runtime

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket) -> None:
        await websocket.accept()
        interval = 1.0 / runtime.mission.scenario.mission.tick_rate

        async def push_frames() -> None:
            last_t = None
            while True:
                frame = runtime.latest()
                if frame is not None and frame["t"] != last_t:
                    last_t = frame["t"]
                    await websocket.send_text(json.dumps(frame))
                await asyncio.sleep(interval / 2.0)

        pusher = asyncio.create_task(push_frames())
        try:
            while True:
                raw = await websocket.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await websocket.send_text(json.dumps({"type": "error", "message": "invalid JSON"}))
                    continue
                if msg.get("type") != "command":
                    await websocket.send_text(
                        json.dumps({"type": "error", "message": "expected a command message"})
                    )
                    continue
                loop = asyncio.get_running_loop()
                reply = await loop.run_in_executor(None, runtime.submit, msg)
                await websocket.send_text(json.dumps(reply))
        except WebSocketDisconnect:
            pass
        finally:
            pusher.cancel()

    if console_dir is not None and Path(console_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(console_dir), html=True), name="console")
    else:

        @app.get("/")
        def index() -> HTMLResponse:
            return HTMLResponse(
                "<h1>conedrive mission service</h1><p>Telemetry WebSocket at <code>/ws</code>. "
                "Build the operator console under <code>frontend/</code> to serve it here.</p>"
            )

    return app
