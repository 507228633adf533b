"""Realtime teleop service: one sim worker thread, JSON frames over /stream.

The worker owns the TeleopSession outright; websocket handlers only push
parsed commands into a bounded queue and pull frames from per-client queues,
so a slow client can never stall the physics.

No `from __future__ import annotations` here: the websocket route is defined
inside build_app with its types imported locally, and the framework must be
able to evaluate that annotation.
"""

import asyncio
import json
import threading
import time
from collections import deque
from pathlib import Path

from .configio import default_config
from .runner import SimConfig
from .teleop import Command, CommandError, TeleopSession, command_to_json, parse_command

COMMAND_QUEUE_LIMIT = 64
CLIENT_FRAME_QUEUE = 8
RESYNC_AFTER = 2.0  # s of accumulated lag before the wall-clock anchor resets

UI_DIR = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"

_FALLBACK_PAGE = """<!doctype html>
<html><head><title>snakesim teleop</title></head>
<body style="font-family: sans-serif">
<h1>snakesim teleop service</h1>
<p>The web console bundle is not built. Connect to <code>/stream</code>
directly, or build the frontend (<code>npm run build</code> in frontend/)
and restart.</p>
</body></html>
"""


class SimWorker:
    """Paces the session against the wall clock and fans frames out."""

    def __init__(self, session: TeleopSession, decimation: int = 5,
                 record_path: str | None = None):
        if decimation < 1:
            raise ValueError("decimation must be >= 1")
        self.session = session
        self.decimation = decimation
        self.commands: deque[tuple[Command, asyncio.Queue | None]] = deque()
        self.lock = threading.Lock()
        self.clients: set[asyncio.Queue] = set()
        self.loop: asyncio.AbstractEventLoop | None = None
        self.record = open(record_path, "a", encoding="utf-8") if record_path else None
        self._stop = threading.Event()
        self.thread = threading.Thread(target=self._run, name="sim-worker", daemon=True)

    def start(self) -> None:
        self.thread.start()

    def stop(self) -> None:
        self._stop.set()
        self.thread.join(timeout=2.0)
        if self.record:
            self.record.close()

    def submit(self, command: Command, origin: asyncio.Queue | None) -> None:
        """Queue a command; on overflow the oldest one is dropped with a warning."""
        with self.lock:
            dropped = None
            if len(self.commands) >= COMMAND_QUEUE_LIMIT:
                dropped = self.commands.popleft()
            self.commands.append((command, origin))
        if dropped is not None and dropped[1] is not None:
            self._offer(dropped[1], json.dumps(
                {"type": "warning", "message": "command queue full, oldest dropped"}))

    def _drain(self) -> list[Command]:
        with self.lock:
            batch = list(self.commands)
            self.commands.clear()
        if self.record:
            for command, _ in batch:
                self.record.write(json.dumps(
                    {"tick": self.session.tick,
                     "command": command_to_json(command)}) + "\n")
            self.record.flush()
        return [command for command, _ in batch]

    def _offer(self, q: asyncio.Queue, payload: str) -> None:
        loop = self.loop
        if loop is None or loop.is_closed():
            return

        def push():
            if q.full():
                try:
                    q.get_nowait()  # stale frame out, latest in
                except asyncio.QueueEmpty:
                    pass
            q.put_nowait(payload)

        loop.call_soon_threadsafe(push)

    def broadcast(self, payload: str) -> None:
        for q in tuple(self.clients):
            self._offer(q, payload)

    def _run(self) -> None:
        anchor = time.perf_counter()
        while not self._stop.is_set():
            anchor += self.session.dt
            try:
                frame = self.session.loop_tick(self._drain())
            except CommandError as err:  # bad value; drop it, keep ticking
                self.broadcast(json.dumps(
                    {"type": "error", "message": f"rejected command: {err}"}))
                continue
            except Exception as err:  # solver failure must not kill the service
                self.session.running = False
                self.broadcast(json.dumps(
                    {"type": "error", "message": f"simulation paused: {err}"}))
                continue
            lag = time.perf_counter() - anchor
            if frame.seq % self.decimation == 0 and lag < self.session.dt:
                self.broadcast(json.dumps(frame.to_json()))
            if lag < 0.0:
                time.sleep(-lag)
            elif lag > RESYNC_AFTER:
                anchor = time.perf_counter()


def build_app(worker: SimWorker):
    from contextlib import asynccontextmanager

    from fastapi import FastAPI, WebSocket, WebSocketDisconnect
    from fastapi.responses import HTMLResponse
    from fastapi.staticfiles import StaticFiles

    @asynccontextmanager
    async def lifespan(app):
        worker.loop = asyncio.get_running_loop()
        worker.start()
        yield
        worker.stop()

    app = FastAPI(title="snakesim teleop", lifespan=lifespan)

    @app.websocket("/stream")
    async def stream(ws: WebSocket):
        await ws.accept()
        frames: asyncio.Queue = asyncio.Queue(maxsize=CLIENT_FRAME_QUEUE)
        worker.clients.add(frames)

        async def sender():
            while True:
                await ws.send_text(await frames.get())

        send_task = asyncio.create_task(sender())
        try:
            while True:
                text = await ws.receive_text()
                try:
                    command = parse_command(json.loads(text))
                except (json.JSONDecodeError, CommandError) as err:
                    await ws.send_text(json.dumps(
                        {"type": "error", "message": str(err)}))
                    continue
                worker.submit(command, frames)
        except WebSocketDisconnect:
            pass
        finally:
            worker.clients.discard(frames)
            send_task.cancel()

    if UI_DIR.is_dir():
        app.mount("/", StaticFiles(directory=str(UI_DIR), html=True), name="ui")
    else:
        @app.get("/")
        async def index() -> HTMLResponse:
            return HTMLResponse(_FALLBACK_PAGE)

    return app


def serve(config: SimConfig | None = None, host: str = "127.0.0.1",
          port: int = 8000, record: str | None = None, decimation: int = 5) -> None:
    import uvicorn

    cfg = config if config is not None else default_config()
    session = TeleopSession(
        spec=cfg.spec, friction=cfg.friction, dt=cfg.dt, initial_params=cfg.gait)
    worker = SimWorker(session, decimation=decimation, record_path=record)
    uvicorn.run(build_app(worker), host=host, port=port, log_level="warning")
