"""Telemetry hub and producer client.

The hub is the observe-plane: pipeline processes push JSON messages to
its /pub WebSocket, dashboard clients subscribe on /ws, and the
calibration loop (record a labeled gesture, retrain the head) runs over
plain HTTP. Fan-out is strictly non-blocking: each subscriber has a
bounded backlog and is dropped when it falls 256 messages behind, so a
slow dashboard can never back-pressure the control path.
"""

from __future__ import annotations

import asyncio
import collections
import json
import threading
import time
from pathlib import Path

import numpy as np
from aiohttp import WSMsgType, web

from . import classifier, dataset
from .acquisition import synth_stream
from .errors import InsufficientData
from .gestures import parse_gesture
from .windowing import TRAIN_HOP, WindowBuilder

MAX_BACKLOG = 256
DEFAULT_TELEMETRY_PORT = 8080


class TelemetryHub:
    """aiohttp server owning fan-out plus the calibration session state."""

    def __init__(self, host: str = "127.0.0.1",
                 port: int = DEFAULT_TELEMETRY_PORT,
                 dataset_dir=None, model_path=None,
                 static_dir=None, hop: int = TRAIN_HOP,
                 backbone_seed: int = classifier.DEFAULT_BACKBONE_SEED):
        self.host = host
        self.port = port
        self.dataset_dir = Path(dataset_dir) if dataset_dir else None
        self.model_path = Path(model_path) if model_path else None
        self.static_dir = Path(static_dir) if static_dir else None
        self.hop = hop
        self.backbone_seed = backbone_seed

        self.dropped_clients = 0
        self.messages_in = 0
        self._subscribers: set[asyncio.Queue] = set()
        self._busy_with: str | None = None
        self._busy_lock = threading.Lock()
        self._record_counter = 0
        self._last_train: dict | None = None

        self._loop: asyncio.AbstractEventLoop | None = None
        self._thread: threading.Thread | None = None
        self._started = threading.Event()
        self._runner: web.AppRunner | None = None

    # --- lifecycle ------------------------------------------------------

    def start(self) -> None:
        """Run the server on a dedicated thread with its own event loop."""
        self._thread = threading.Thread(target=self._run, daemon=True)
        self._thread.start()
        if not self._started.wait(timeout=10.0):
            raise RuntimeError("telemetry hub failed to start")

    def _run(self) -> None:
        self._loop = asyncio.new_event_loop()
        asyncio.set_event_loop(self._loop)
        self._loop.run_until_complete(self._start_app())
        self._started.set()
        self._loop.run_forever()
        self._loop.run_until_complete(self._loop.shutdown_asyncgens())
        self._loop.close()

    async def _start_app(self) -> None:
        app = self.build_app()
        self._runner = web.AppRunner(app)
        await self._runner.setup()
        site = web.TCPSite(self._runner, self.host, self.port)
        await site.start()
        self.port = self._runner.addresses[0][1]

    def stop(self) -> None:
        if self._loop is None:
            return

        async def _shutdown():
            if self._runner is not None:
                await self._runner.cleanup()
            self._loop.stop()

        asyncio.run_coroutine_threadsafe(_shutdown(), self._loop)
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    def build_app(self) -> web.Application:
        app = web.Application()
        app.router.add_get("/ws", self._handle_subscriber)
        app.router.add_get("/pub", self._handle_producer)
        app.router.add_get("/status", self._handle_status)
        app.router.add_post("/session/record", self._handle_record)
        app.router.add_post("/session/train", self._handle_train)
        if self.static_dir and self.static_dir.is_dir():
            app.router.add_get("/", self._handle_index)
            app.router.add_static("/app", self.static_dir)
        return app

    # --- fan-out ----------------------------------------------------------

    def publish(self, message: dict) -> None:
        """Thread-safe, never-blocking publish from any producer thread."""
        if self._loop is None:
            return
        try:
            self._loop.call_soon_threadsafe(self._publish_local, message)
        except RuntimeError:
            pass  # loop already closed

    def _publish_local(self, message: dict) -> None:
        self.messages_in += 1
        text = json.dumps(message, separators=(",", ":"))
        for queue in list(self._subscribers):
            try:
                queue.put_nowait(text)
            except asyncio.QueueFull:
                self._subscribers.discard(queue)
                self.dropped_clients += 1

    async def _handle_subscriber(self, request: web.Request):
        ws = web.WebSocketResponse()
        await ws.prepare(request)
        queue: asyncio.Queue = asyncio.Queue(maxsize=MAX_BACKLOG)
        self._subscribers.add(queue)
        # subscribers are observe-only: the first inbound frame is the
        # close handshake (or a protocol violation); either ends the feed
        reader = asyncio.ensure_future(ws.receive())
        try:
            while queue in self._subscribers:
                getter = asyncio.ensure_future(queue.get())
                done, _pending = await asyncio.wait(
                    {getter, reader}, timeout=0.5,
                    return_when=asyncio.FIRST_COMPLETED)
                if reader in done:
                    getter.cancel()
                    break
                if getter in done:
                    await ws.send_str(getter.result())
                else:
                    getter.cancel()  # timeout: re-check drop status
        except (ConnectionResetError, asyncio.CancelledError):
            pass
        finally:
            self._subscribers.discard(queue)
            reader.cancel()
            if not ws.closed:
                await ws.close()
        return ws

    async def _handle_producer(self, request: web.Request):
        ws = web.WebSocketResponse()
        await ws.prepare(request)
        async for msg in ws:
            if msg.type != WSMsgType.TEXT:
                continue
            try:
                obj = json.loads(msg.data)
            except json.JSONDecodeError:
                continue
            if isinstance(obj, dict) and "type" in obj:
                self._publish_local(obj)
        return ws

    # --- HTTP endpoints ---------------------------------------------------

    async def _handle_status(self, request: web.Request):
        counts = (dataset.dataset_counts(self.dataset_dir)
                  if self.dataset_dir and self.dataset_dir.is_dir() else {})
        return web.json_response({
            "clients": len(self._subscribers),
            "dropped_clients": self.dropped_clients,
            "messages_in": self.messages_in,
            "busy": self._busy_with,
            "dataset_counts": counts,
            "model_present": bool(self.model_path and self.model_path.exists()),
            "last_train": self._last_train,
        })

    def _acquire(self, what: str) -> bool:
        with self._busy_lock:
            if self._busy_with is not None:
                return False
            self._busy_with = what
            return True

    def _release(self) -> None:
        with self._busy_lock:
            self._busy_with = None

    async def _handle_record(self, request: web.Request):
        if self.dataset_dir is None:
            return web.json_response({"error": "no dataset directory"},
                                     status=400)
        try:
            body = await request.json()
            gesture = parse_gesture(body["gesture"])
            seconds = float(body["seconds"])
            if not 0 < seconds <= 120:
                raise ValueError("seconds out of range")
            seed = int(body.get("seed", self._record_counter))
        except (KeyError, TypeError, ValueError) as exc:
            return web.json_response({"error": str(exc)}, status=400)
        if not self._acquire("record"):
            return web.json_response({"error": "busy"}, status=409)
        try:
            result = await asyncio.get_event_loop().run_in_executor(
                None, self._do_record, gesture, seconds, seed)
            return web.json_response(result)
        finally:
            self._release()

    def _do_record(self, gesture, seconds: float, seed: int) -> dict:
        self._record_counter += 1
        n_frames = int(round(seconds * 200))
        frames = synth_stream(gesture, seed, n_frames)
        builder = WindowBuilder(hop=self.hop)
        windows = []
        for frame in frames:
            win = builder.push_frame(frame, label=gesture)
            if win is not None:
                windows.append(win)
        manifest = dataset.append_to_dataset(
            self.dataset_dir, windows,
            source="session record", hop=self.hop, seed=seed)
        self.publish({"type": "session", "event": "recorded",
                      "gesture": gesture.value, "added_windows": len(windows),
                      "t_us": int(time.time() * 1e6)})
        return {"gesture": gesture.value, "added_windows": len(windows),
                "counts": manifest["counts"]}

    async def _handle_train(self, request: web.Request):
        if self.dataset_dir is None or self.model_path is None:
            return web.json_response(
                {"error": "hub started without dataset/model paths"},
                status=400)
        try:
            body = await request.json()
            config = classifier.TrainConfig(
                steps=int(body.get("steps", 4000)),
                batch_size=int(body.get("batch", 100)),
                learning_rate=float(body.get("lr", 0.01)),
                seed=int(body.get("seed", 42)),
                eval_every=int(body.get("eval_every", 100)),
            )
        except (TypeError, ValueError) as exc:
            return web.json_response({"error": str(exc)}, status=400)
        if not self._acquire("train"):
            return web.json_response({"error": "busy"}, status=409)
        try:
            result = await asyncio.get_event_loop().run_in_executor(
                None, self._do_train, config)
            return web.json_response(result)
        except InsufficientData as exc:
            return web.json_response({"error": str(exc)}, status=400)
        finally:
            self._release()

    def _do_train(self, config: classifier.TrainConfig) -> dict:
        images = dataset.load_dataset(self.dataset_dir)
        backbone = classifier.BackboneSpec(seed=self.backbone_seed)

        def progress(step, tr, va, xe):
            self.publish({"type": "train_progress", "step": step,
                          "train_acc": tr, "val_acc": va, "val_xent": xe})

        labels = np.array([y for _, y in images], dtype=np.int64)
        features = classifier.featurize([im for im, _ in images], backbone)
        head, report = classifier.train_on_features(
            features, labels, config, progress=progress)
        classifier.save_model(head, backbone, self.model_path)
        summary = {
            "steps": config.steps,
            "final_test_accuracy": report.final_test_accuracy,
            "final_test_cross_entropy": report.final_test_cross_entropy,
            "wall_time_s": report.wall_time_s,
            "series": [
                {"step": s, "train_acc": tr, "val_acc": va, "val_xent": xe}
                for s, tr, va, xe in report.series
            ],
        }
        self._last_train = {k: summary[k] for k in
                            ("steps", "final_test_accuracy",
                             "final_test_cross_entropy")}
        self.publish({"type": "session", "event": "trained", **self._last_train,
                      "t_us": int(time.time() * 1e6)})
        return summary

    async def _handle_index(self, request: web.Request):
        index = self.static_dir / "index.html"
        if index.exists():
            return web.FileResponse(index)
        raise web.HTTPNotFound()


class TelemetryPublisher:
    """Producer-side client: queue to a background thread, drop-oldest.

    publish() is O(1) and never blocks; when the hub is unreachable the
    messages simply age out of the deque.
    """

    def __init__(self, url: str | None, maxlen: int = MAX_BACKLOG):
        self.url = url
        self.dropped = 0
        self._queue: collections.deque = collections.deque(maxlen=maxlen)
        self._event = threading.Event()
        self._closing = False
        self._thread: threading.Thread | None = None
        if url:
            self._thread = threading.Thread(target=self._run, daemon=True)
            self._thread.start()

    def publish(self, message: dict) -> None:
        if self._thread is None:
            return
        if len(self._queue) == self._queue.maxlen:
            self.dropped += 1
        self._queue.append(json.dumps(message, separators=(",", ":")))
        self._event.set()

    def _run(self) -> None:
        from websockets.sync.client import connect

        conn = None
        while not self._closing:
            self._event.wait(timeout=0.2)
            self._event.clear()
            while self._queue and not self._closing:
                if conn is None:
                    try:
                        conn = connect(self.url, open_timeout=2)
                    except Exception:
                        time.sleep(0.5)
                        break
                text = self._queue.popleft()
                try:
                    conn.send(text)
                except Exception:
                    conn = None
        if conn is not None:
            try:
                conn.close()
            except Exception:
                pass

    def close(self, drain_s: float = 1.0) -> None:
        deadline = time.monotonic() + drain_s
        while self._queue and time.monotonic() < deadline:
            time.sleep(0.02)
        self._closing = True
        self._event.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
