"""Command-line entry points wiring the pipeline end to end.

Two-process topology: `run` streams a scripted source through the
predictor and sends debounced gesture commands over the authenticated
link; `arm-serve` hosts the link server, drives the virtual arm, and
publishes telemetry. `telemetry` runs the observe-plane hub the
dashboard connects to.
"""

from __future__ import annotations

import json
import os
import queue
import signal
import statistics
import threading
import time
from pathlib import Path

import click

from . import classifier, dataset as dataset_mod
from .acquisition import (GestureScript, read_recording, synth_stream,
                          write_recording)
from .arm import VirtualArm
from .errors import EmgArmError, ConnectionLost
from .gestures import Gesture, parse_gesture
from .link import DEFAULT_PORT, LinkClient, LinkConfig, LinkServer
from .predictor import Predictor, PredictorConfig
from .telemetry import DEFAULT_TELEMETRY_PORT, TelemetryHub, TelemetryPublisher
from .windowing import LIVE_HOP, TRAIN_HOP, WindowBuilder, windows_from_labeled_frames, window_rms

SECRET_ENV = "EMGLINK_SECRET"


def _resolve_secret(secret_file: str | None) -> bytes:
    if secret_file:
        data = Path(secret_file).read_bytes().rstrip(b"\n")
        if not data:
            raise click.UsageError(f"secret file {secret_file} is empty")
        return data
    env = os.environ.get(SECRET_ENV, "")
    if env:
        return env.encode("utf-8")
    raise click.UsageError(
        f"no shared secret: pass --secret-file or set {SECRET_ENV}")


def _parse_address(text: str, default_port: int) -> tuple[str, int]:
    if ":" in text:
        host, _, port = text.rpartition(":")
        return host or "127.0.0.1", int(port)
    return text, default_port


class _JsonlLog:
    """Line-buffered JSONL sink; silently inert when no path is given."""

    def __init__(self, path: str | None):
        self._fh = open(path, "w", encoding="utf-8") if path else None

    def write(self, record: dict) -> None:
        if self._fh is not None:
            self._fh.write(json.dumps(record, separators=(",", ":")) + "\n")

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()


@click.group()
def main():
    """Hardware-free sEMG gesture pipeline."""


@main.command()
@click.option("--gesture", required=True, help="FIST, THUMBS_UP, OPEN_HAND or REST")
@click.option("--seconds", type=float, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def record(gesture, seconds, seed, out):
    """Record a synthetic single-gesture stream to a CSV file."""
    try:
        g = parse_gesture(gesture)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    if seconds <= 0:
        raise click.UsageError("--seconds must be positive")
    n_frames = int(round(seconds * 200))
    frames = synth_stream(g, seed, n_frames)
    write_recording(out, [(f, g) for f in frames])
    click.echo(f"wrote {n_frames} frames to {out}")


@main.group()
def dataset():
    """Dataset construction commands."""


@dataset.command("build")
@click.option("--in-dir", type=click.Path(exists=True, file_okay=False),
              required=True, help="directory of CSV recordings")
@click.option("--hop", type=int, default=TRAIN_HOP, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
def dataset_build(in_dir, hop, out_dir):
    """Render labeled recordings into a PNG image dataset."""
    recordings = sorted(Path(in_dir).glob("*.csv"))
    if not recordings:
        raise click.ClickException(f"no .csv recordings under {in_dir}")
    windows = []
    for path in recordings:
        rows = read_recording(path)
        wins = windows_from_labeled_frames(rows, hop=hop)
        if not wins:
            click.echo(f"warning: {path.name}: no complete windows", err=True)
        windows.extend(wins)
    manifest = dataset_mod.write_dataset(
        out_dir, windows, seed=None, hop=hop,
        source=f"recordings: {', '.join(p.name for p in recordings)}")
    click.echo(json.dumps(manifest["counts"], sort_keys=True))


@dataset.command("synth")
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--windows-per-class", type=int, default=200, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
def dataset_synth(seed, windows_per_class, out_dir):
    """Generate the fixed synthetic dataset directly."""
    from .gestures import GESTURES
    from .rng import SplitMix64

    seeder = SplitMix64(seed)
    windows = []
    for gesture in GESTURES:
        windows.extend(dataset_mod.make_synthetic_windows(
            gesture, seeder.next_u64(), windows_per_class))
    manifest = dataset_mod.write_dataset(out_dir, windows, seed=seed,
                                         hop=TRAIN_HOP, source="synthetic")
    click.echo(json.dumps(manifest["counts"], sort_keys=True))


@main.command()
@click.option("--dataset", "dataset_dir",
              type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--steps", type=int, default=4000, show_default=True)
@click.option("--batch", type=int, default=100, show_default=True)
@click.option("--lr", type=float, default=0.01, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--eval-every", type=int, default=100, show_default=True)
@click.option("--backbone-seed", type=int,
              default=classifier.DEFAULT_BACKBONE_SEED, show_default=True)
@click.option("--model", "model_path", type=click.Path(dir_okay=False),
              required=True)
@click.option("--report", "report_path", type=click.Path(dir_okay=False))
def train(dataset_dir, steps, batch, lr, seed, eval_every, backbone_seed,
          model_path, report_path):
    """Train the softmax head on an image dataset and save the model."""
    images = dataset_mod.load_dataset(dataset_dir)
    if not images:
        raise click.ClickException(f"dataset {dataset_dir} is empty")
    backbone = classifier.BackboneSpec(seed=backbone_seed)
    config = classifier.TrainConfig(steps=steps, batch_size=batch,
                                    learning_rate=lr, seed=seed,
                                    eval_every=eval_every)
    head, report = classifier.train(images, backbone, config)
    classifier.save_model(head, backbone, model_path)
    if report_path:
        Path(report_path).write_text(report.to_csv(), encoding="utf-8")
    click.echo(json.dumps({
        "final_test_accuracy": report.final_test_accuracy,
        "final_test_cross_entropy": report.final_test_cross_entropy,
        "steps": steps,
        "wall_time_s": round(report.wall_time_s, 3),
        "model": str(model_path),
    }))


@main.command("eval")
@click.option("--dataset", "dataset_dir",
              type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--model", "model_path",
              type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--split", type=click.Choice(["all", "train", "val", "test"]),
              default="all", show_default=True)
@click.option("--split-seed", type=int, default=42, show_default=True)
def eval_cmd(dataset_dir, model_path, split, split_seed):
    """Evaluate a saved model on a dataset (or one of its splits)."""
    import numpy as np

    head, backbone = classifier.load_model(model_path)
    images = dataset_mod.load_dataset(dataset_dir)
    if not images:
        raise click.ClickException(f"dataset {dataset_dir} is empty")
    labels = np.array([y for _, y in images], dtype=np.int64)
    features = classifier.featurize([im for im, _ in images], backbone)
    if split != "all":
        idx_train, idx_val, idx_test = classifier.split_indices(
            len(images), split_seed)
        chosen = {"train": idx_train, "val": idx_val, "test": idx_test}[split]
        features, labels = features[chosen], labels[chosen]
    accuracy, xent = classifier.evaluate_features(head, features, labels)
    click.echo(json.dumps({"split": split, "n": int(labels.shape[0]),
                           "accuracy": accuracy, "cross_entropy": xent}))


@main.command()
@click.option("--model", "model_path",
              type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--script", "script_path",
              type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--connect", default=f"127.0.0.1:{DEFAULT_PORT}",
              show_default=True)
@click.option("--secret-file", type=click.Path(exists=True, dir_okay=False))
@click.option("--hop", type=int, default=LIVE_HOP, show_default=True)
@click.option("--confidence-threshold", type=float, default=0.70,
              show_default=True)
@click.option("--consecutive", type=int, default=3, show_default=True)
@click.option("--fast", is_flag=True,
              help="no real-time pacing; deterministic outputs")
@click.option("--log", "log_path", type=click.Path(dir_okay=False))
@click.option("--telemetry", "telemetry_url",
              help="hub producer URL, e.g. ws://127.0.0.1:8080/pub")
def run(model_path, script_path, connect, secret_file, hop,
        confidence_threshold, consecutive, fast, log_path, telemetry_url):
    """Stream a gesture script through the predictor to the arm server."""
    secret = _resolve_secret(secret_file)
    host, port = _parse_address(connect, DEFAULT_PORT)
    script = GestureScript.from_json(Path(script_path).read_text("utf-8"))
    config = LinkConfig(shared_secret=secret, host=host, port=port,
                        io_timeout_ms=5000)
    predictor = Predictor(model_path, PredictorConfig(
        confidence_threshold=confidence_threshold,
        consecutive_required=consecutive))
    log = _JsonlLog(log_path)
    publisher = TelemetryPublisher(telemetry_url)
    try:
        summary = _run_pipeline(script, predictor, config, hop, fast, log,
                                publisher)
    except EmgArmError as exc:
        log.close()
        publisher.close(drain_s=0)
        raise click.ClickException(f"{type(exc).__name__}: {exc}")
    log.close()
    publisher.close()
    click.echo(json.dumps(summary))


def _run_pipeline(script, predictor, link_config, hop, fast, log, publisher):
    from .acquisition import script_stream

    script_stream_rows = script_stream(script)
    builder = WindowBuilder(hop=hop)
    client = LinkClient(link_config)
    seq = 0
    events = []
    latencies_ms = []
    dropped = 0
    n_frames = 0
    n_windows = 0

    frame_queue: queue.Queue | None = None
    drop_box = [0]
    if not fast:
        # paced mode: acquisition keeps schedule on its own thread,
        # classification consumes through a bounded drop-oldest queue
        frame_queue = queue.Queue(maxsize=1024)

        def pace():
            t0 = time.monotonic_ns()
            for frame, _label in script_stream_rows:
                target = t0 + frame.t_us * 1000
                now = time.monotonic_ns()
                if target > now:
                    time.sleep((target - now) / 1e9)
                try:
                    frame_queue.put_nowait(frame)
                except queue.Full:
                    try:
                        frame_queue.get_nowait()
                        drop_box[0] += 1
                    except queue.Empty:
                        pass
                    frame_queue.put_nowait(frame)
            frame_queue.put(None)

    def handle_frame(frame) -> None:
        nonlocal seq, n_windows, client
        publisher.publish({"type": "frame", "t_us": frame.t_us,
                           "ch": list(frame.ch)})
        window = builder.push_frame(frame)
        if window is None:
            return
        n_windows += 1
        wall_emit = None if fast else time.monotonic_ns()
        publisher.publish({"type": "window_rms", "t_us": window.t_end_us,
                           "rms": [round(v, 3) for v in window_rms(window)]})
        classification, event = predictor.process(window)
        publisher.publish({
            "type": "prediction", "t_us": window.t_end_us,
            "gesture": classification.gesture.value,
            "confidence": round(classification.confidence, 6),
        })
        if event is None:
            return
        seq += 1
        record = {"kind": "event", "gesture": event.gesture.value,
                  "seq": seq, "t_us": event.t_us,
                  "confidence": round(event.confidence, 6)}
        try:
            client.send_gesture(event.gesture, seq)
        except ConnectionLost:
            client = LinkClient(link_config)  # idle-dropped: re-auth and retry
            client.send_gesture(event.gesture, seq)
        if wall_emit is not None:
            ack_ns = time.monotonic_ns()
            record["t_ack_mono_ns"] = ack_ns
            latencies_ms.append((ack_ns - wall_emit) / 1e6)
        events.append(record)
        log.write(record)
        publisher.publish(event.to_json_payload())

    if fast:
        for frame, _label in script_stream_rows:
            handle_frame(frame)
            n_frames += 1
    else:
        pacer = threading.Thread(target=pace, daemon=True)
        pacer.start()
        while True:
            frame = frame_queue.get()
            if frame is None:
                break
            handle_frame(frame)
            n_frames += 1
        pacer.join()
        dropped = drop_box[0]

    client.close()
    summary = {
        "events": events,
        "frames": n_frames,
        "windows": n_windows,
        "dropped_frames": dropped,
        "load_count": predictor.load_count,
        "median_window_to_ack_ms": (round(statistics.median(latencies_ms), 3)
                                    if latencies_ms else None),
    }
    log.write({"kind": "summary", **summary})
    return summary


@main.command("arm-serve")
@click.option("--listen", default=f"127.0.0.1:{DEFAULT_PORT}", show_default=True)
@click.option("--secret-file", type=click.Path(exists=True, dir_okay=False))
@click.option("--slew", "slew_deg_s", type=float, default=400.0,
              show_default=True,
              help="servo slew rate; service default is faster than the "
                   "library's 300 deg/s so a full 180-degree transition "
                   "settles inside the 500 ms latency budget")
@click.option("--step-ms", type=int, default=5, show_default=True)
@click.option("--io-timeout-ms", type=int, default=30000, show_default=True,
              help="idle drop for link connections; gestures arrive seconds "
                   "apart, so this is much longer than the protocol default")
@click.option("--log", "log_path", type=click.Path(dir_okay=False))
@click.option("--command-log", "command_log_path",
              type=click.Path(dir_okay=False))
@click.option("--telemetry", "telemetry_url")
def arm_serve(listen, secret_file, slew_deg_s, step_ms, io_timeout_ms,
              log_path, command_log_path, telemetry_url):
    """Serve the command link and drive the virtual 7-servo arm."""
    secret = _resolve_secret(secret_file)
    host, port = _parse_address(listen, DEFAULT_PORT)
    arm = VirtualArm(slew_deg_s=slew_deg_s)
    arm_lock = threading.Lock()
    log = _JsonlLog(log_path)
    publisher = TelemetryPublisher(telemetry_url)
    stop = threading.Event()
    was_settled = [True]

    def handler(gesture: Gesture) -> None:
        now = time.monotonic_ns()
        with arm_lock:
            arm.set_target(gesture)
            was_settled[0] = arm.settled()
            already_settled = was_settled[0]
            t_us = arm.t_us
        log.write({"kind": "dispatch", "gesture": gesture.value,
                   "t_mono_ns": now})
        if already_settled:  # idempotent command: target already reached
            log.write({"kind": "settled", "t_mono_ns": now,
                       "target": [round(a, 3) for a in arm.target]})
        publisher.publish({"type": "gesture", "gesture": gesture.value,
                           "confidence": 1.0, "t_us": t_us})

    def stepper():
        last = time.monotonic_ns()
        while not stop.is_set():
            time.sleep(step_ms / 1000.0)
            now = time.monotonic_ns()
            dt_us = max(1, (now - last) // 1000)
            last = now
            with arm_lock:
                arm.step(int(dt_us))
                settled = arm.settled()
                newly = settled and not was_settled[0]
                was_settled[0] = settled
                pose = list(arm.current)
                target = list(arm.target)
                t_us = arm.t_us
            if newly:
                log.write({"kind": "settled", "t_mono_ns": now,
                           "target": [round(a, 3) for a in target]})
            publisher.publish({"type": "pose",
                               "angles": [round(a, 3) for a in pose],
                               "t_us": t_us})

    config = LinkConfig(shared_secret=secret, host=host, port=port,
                        io_timeout_ms=io_timeout_ms)
    server = LinkServer(config, handler)
    click.echo(f"arm-serve listening on {host}:{server.port}", err=True)
    stepper_thread = threading.Thread(target=stepper, daemon=True)
    stepper_thread.start()

    def shutdown(_signum, _frame):
        stop.set()

    signal.signal(signal.SIGINT, shutdown)
    signal.signal(signal.SIGTERM, shutdown)
    while not stop.is_set():
        time.sleep(0.05)
    server.close()
    stepper_thread.join(timeout=2.0)
    if command_log_path:
        Path(command_log_path).write_text(arm.command_log_csv(),
                                          encoding="utf-8")
    log.write({"kind": "summary", "dispatches": server.dispatch_count,
               "acks": server.ack_count,
               "final_pose": [round(a, 3) for a in arm.current]})
    log.close()
    publisher.close()


@main.command()
@click.option("--listen", default=f"127.0.0.1:{DEFAULT_TELEMETRY_PORT}",
              show_default=True)
@click.option("--dataset", "dataset_dir", type=click.Path(file_okay=False))
@click.option("--model", "model_path", type=click.Path(dir_okay=False))
@click.option("--static", "static_dir", type=click.Path(file_okay=False),
              help="dashboard build directory to serve at /")
@click.option("--hop", type=int, default=TRAIN_HOP, show_default=True)
@click.option("--backbone-seed", type=int,
              default=classifier.DEFAULT_BACKBONE_SEED, show_default=True)
def telemetry(listen, dataset_dir, model_path, static_dir, hop, backbone_seed):
    """Run the telemetry hub (WebSocket fan-out + calibration endpoints)."""
    host, port = _parse_address(listen, DEFAULT_TELEMETRY_PORT)
    hub = TelemetryHub(host=host, port=port, dataset_dir=dataset_dir,
                       model_path=model_path, static_dir=static_dir,
                       hop=hop, backbone_seed=backbone_seed)
    hub.start()
    click.echo(f"telemetry hub on http://{host}:{hub.port} "
               f"(ws: /ws, producers: /pub)", err=True)
    stop = threading.Event()

    def shutdown(_signum, _frame):
        stop.set()

    signal.signal(signal.SIGINT, shutdown)
    signal.signal(signal.SIGTERM, shutdown)
    while not stop.is_set():
        time.sleep(0.05)
    hub.stop()


if __name__ == "__main__":
    main()
