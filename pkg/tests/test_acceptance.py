"""Acceptance gate: one test per criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines. The expensive artifacts (fixed synthetic dataset, trained models)
are session fixtures shared with the module tests.
"""

import contextlib
import json
import os
import random
import signal
import socket
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from emgarm import classifier
from emgarm.classifier import SoftmaxHead, predict_probs
from emgarm.dataset import make_synthetic_windows
from emgarm.gestures import GESTURES
from emgarm.link import LinkConfig, LinkServer, compute_mac
from emgarm.rendering import render_graph

from conftest import BUDGETS, DATASET_SEED, TIMINGS
from test_classifier import _finite_difference_check
from test_link import _manual_hmac_sha256

GOLDENS_PATH = Path(__file__).parent / "golden_checksums.json"


@contextlib.contextmanager
def criterion(number: int, description: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number}: FAIL - {description}")
        raise
    print(f"ACCEPTANCE {number}: PASS - {description}")


def test_criterion_1_table_trend(budget_runs):
    with criterion(1, "validation trend over step budgets; "
                      "test accuracy >= 0.95 at 30000; runtime < 5 min"):
        val_acc = []
        val_xe = []
        for steps in BUDGETS:
            _head, report = budget_runs[steps]
            assert report.series, f"no evaluations recorded at {steps}"
            val_acc.append(report.series[-1][2])
            val_xe.append(report.series[-1][3])
        for earlier, later in zip(val_xe, val_xe[1:]):
            assert later <= earlier, f"validation xent rose: {val_xe}"
        for earlier, later in zip(val_acc, val_acc[1:]):
            assert later >= earlier, f"validation accuracy fell: {val_acc}"
        assert budget_runs[30000][1].final_test_accuracy >= 0.95
        total = TIMINGS["dataset_and_features"] + TIMINGS["budget_training"]
        assert total < 300.0, f"budget runs took {total:.0f}s"


def test_criterion_2_gradient_correctness():
    with criterion(2, "analytic gradients match central finite differences "
                      "(10 trials, rel err < 1e-4)"):
        worst = max(_finite_difference_check(seed) for seed in range(50, 60))
        assert worst < 1e-4, f"max relative error {worst:.3e}"


def test_criterion_3_softmax_stability():
    with criterion(3, "softmax sums to 1 within 1e-9 over 1000 draws "
                      "with logits up to 1e3"):
        rng = np.random.default_rng(2024)
        for trial in range(1000):
            head = SoftmaxHead(W=rng.normal(0, 0.02, (4, 2048)),
                               b=rng.uniform(-1, 1, 4))
            if trial % 3 == 0:
                head.b *= 1e3  # logit magnitudes up to 1e3
            features = rng.uniform(-1, 1, 2048)
            p = predict_probs(head, features)
            assert np.all(np.isfinite(p))
            assert abs(float(p.sum()) - 1.0) < 1e-9


def _checksum_script() -> str:
    return (
        "import json\n"
        "from emgarm.dataset import make_synthetic_windows\n"
        "from emgarm.gestures import GESTURES\n"
        "from emgarm.rendering import render_graph\n"
        "out = {g.value: [render_graph(w).checksum()\n"
        "                 for w in make_synthetic_windows(g, 42, 3)]\n"
        "       for g in GESTURES}\n"
        "print(json.dumps(out))\n"
    )


def test_criterion_4_rendering_determinism():
    with criterion(4, "golden checksums stable across processes and "
                      "across compiled/pure kernel backends"):
        goldens = json.loads(GOLDENS_PATH.read_text())

        in_process = {
            g.value: [render_graph(w).checksum()
                      for w in make_synthetic_windows(g, 42, 3)]
            for g in GESTURES}
        assert in_process == goldens

        # two independent process runs, one per kernel backend
        results = []
        for force_pure in ("0", "1"):
            env = dict(os.environ, EMGARM_PURE_KERNELS=force_pure)
            out = subprocess.run([sys.executable, "-c", _checksum_script()],
                                 capture_output=True, text=True, env=env,
                                 check=True, timeout=120)
            results.append(json.loads(out.stdout))
        assert results[0] == goldens, "native-backend process diverged"
        assert results[1] == goldens, "pure-backend process diverged"

        from emgarm.kernels import available_backends
        assert "native" in available_backends(), \
            "compiled backend missing; build with setup.py build_ext --inplace"


def test_criterion_5_protocol_soundness():
    with criterion(5, "codec round-trip >= 1e4 frames; >= 1e3 hostile "
                      "sessions dispatch nothing; HMAC matches oracle"):
        from emgarm.link import Ack, GestureCmd, decode_frame, encode_frame

        rng = random.Random(99)
        count = 0
        for _ in range(10_000):
            if rng.random() < 0.5:
                frame = GestureCmd(rng.choice(GESTURES),
                                   rng.getrandbits(64))
            else:
                frame = Ack(rng.getrandbits(64))
            assert decode_frame(encode_frame(frame)) == frame
            count += 1
        assert count >= 10_000

        # HMAC cross-check against an independent implementation
        client_nonce, server_nonce = "00" * 8, "ff" * 8
        assert compute_mac(b"k", client_nonce, server_nonce) == \
            _manual_hmac_sha256(b"k", (client_nonce + server_nonce).encode())

        dispatches = []
        config = LinkConfig(shared_secret=b"fuzz-secret", host="127.0.0.1",
                            port=0, io_timeout_ms=200)
        with LinkServer(config, dispatches.append) as server:
            payloads = _hostile_payloads(rng)
            assert len(payloads) >= 1000
            for payload in payloads:
                try:
                    sock = socket.create_connection(("127.0.0.1", server.port),
                                                    timeout=1)
                    if payload:
                        sock.sendall(payload)
                    sock.settimeout(0.02)
                    with contextlib.suppress(OSError):
                        sock.recv(256)
                    sock.close()
                except OSError:
                    pass
            deadline = time.monotonic() + 5
            while time.monotonic() < deadline and not dispatches:
                time.sleep(0.05)
        assert dispatches == [], f"hostile traffic dispatched {dispatches!r}"


def _hostile_payloads(rng: random.Random) -> list[bytes]:
    payloads = []
    for i in range(1050):
        kind = i % 7
        if kind == 0:
            payloads.append(bytes(rng.randrange(256) for _ in range(rng.randrange(1, 64))))
        elif kind == 1:
            payloads.append(b"EMG/1 GESTURE FIST 1\n")  # pre-auth gesture
        elif kind == 2:
            payloads.append(b"EMG/1 HELLO 1 aaaaaaaaaaaaaaaa\n"
                            b"EMG/1 AUTH " + b"0" * 64 + b"\n"
                            b"EMG/1 GESTURE FIST 1\n")  # bad mac
        elif kind == 3:
            payloads.append(b"EMG/2 HELLO 1 aaaaaaaaaaaaaaaa\n")
        elif kind == 4:
            payloads.append(b"x" * 2048 + b"\n")  # oversize line
        elif kind == 5:
            payloads.append(b"")  # connect and vanish
        else:
            payloads.append(b"EMG/1 HELLO 1 aaaaaaaaaaaaaaaa\n"
                            b"EMG/1 GESTURE FIST 1\n")  # skip AUTH
    return payloads


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _wait_listening(port: int, timeout_s: float = 10.0) -> None:
    deadline = time.monotonic() + timeout_s
    while time.monotonic() < deadline:
        try:
            socket.create_connection(("127.0.0.1", port), timeout=0.2).close()
            return
        except OSError:
            time.sleep(0.05)
    raise TimeoutError(f"port {port} never started listening")


@pytest.fixture(scope="module")
def scenario_artifacts(trained_model_path, tmp_path_factory):
    """Run the two-process loopback scenario once; criteria 6 and 7 share it."""
    tmp = tmp_path_factory.mktemp("scenario")
    secret_file = tmp / "secret"
    secret_file.write_bytes(b"acceptance-secret\n")
    script_file = tmp / "script.json"
    script_file.write_text(json.dumps({
        "seed": 99,
        "steps": [{"gesture": g, "duration_ms": 3000}
                  for g in ("REST", "FIST", "OPEN_HAND", "THUMBS_UP")],
    }))
    arm_log = tmp / "arm.jsonl"
    run_log = tmp / "run.jsonl"
    port = _free_port()

    arm_proc = subprocess.Popen(
        [sys.executable, "-m", "emgarm", "arm-serve",
         "--listen", f"127.0.0.1:{port}",
         "--secret-file", str(secret_file),
         "--log", str(arm_log),
         "--command-log", str(tmp / "commands.csv")],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE)
    try:
        _wait_listening(port)
        run_out = subprocess.run(
            [sys.executable, "-m", "emgarm", "run",
             "--model", str(trained_model_path),
             "--script", str(script_file),
             "--connect", f"127.0.0.1:{port}",
             "--secret-file", str(secret_file),
             "--log", str(run_log)],
            capture_output=True, text=True, timeout=120)
        time.sleep(1.0)  # let the arm settle and flush its last pose
    finally:
        arm_proc.send_signal(signal.SIGINT)
        try:
            arm_proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            arm_proc.kill()
            arm_proc.wait()

    assert run_out.returncode == 0, run_out.stderr
    summary = json.loads(run_out.stdout.strip().splitlines()[-1])
    arm_records = [json.loads(line)
                   for line in arm_log.read_text().splitlines()]
    return summary, arm_records, tmp


def test_criterion_6_end_to_end_scenario(scenario_artifacts):
    with criterion(6, "4 in-order debounced events; arm within 1 degree "
                      "<= 500 ms after ACK; median window-to-ACK < 50 ms"):
        summary, arm_records, tmp = scenario_artifacts
        events = summary["events"]
        assert [e["gesture"] for e in events] == \
            ["REST", "FIST", "OPEN_HAND", "THUMBS_UP"]
        assert len(events) == 4

        dispatches = [r for r in arm_records if r["kind"] == "dispatch"]
        settles = [r for r in arm_records if r["kind"] == "settled"]
        assert [d["gesture"] for d in dispatches] == \
            ["REST", "FIST", "OPEN_HAND", "THUMBS_UP"]
        for event, dispatch in zip(events, dispatches):
            ack_ns = event["t_ack_mono_ns"]
            settle = next((s for s in settles
                           if s["t_mono_ns"] >= dispatch["t_mono_ns"]), None)
            assert settle is not None, f"no settle after {dispatch}"
            lag_ms = (settle["t_mono_ns"] - ack_ns) / 1e6
            assert lag_ms <= 500.0, \
                f"{event['gesture']} settled {lag_ms:.0f} ms after ACK"

        median = summary["median_window_to_ack_ms"]
        assert median is not None and median < 50.0, \
            f"median window-to-ACK {median} ms"

        # command log flushed on shutdown
        commands = (tmp / "commands.csv").read_text().splitlines()
        assert commands[0] == "t_us,channel,pulse_us"
        assert len(commands) == 1 + 7 * 4


def test_criterion_7_load_once_predictor(scenario_artifacts):
    with criterion(7, "model loaded exactly once across the full scenario"):
        summary, _arm_records, _tmp = scenario_artifacts
        assert summary["load_count"] == 1


def test_criterion_8_persistence_bit_exact(budget_runs, synthetic_features,
                                           trained_model_path):
    with criterion(8, "save -> load -> re-evaluate reproduces the "
                      "criterion-1 test metrics bit-exactly"):
        features, labels, _backbone = synthetic_features
        _head, report = budget_runs[30000]
        loaded_head, _loaded_backbone = classifier.load_model(
            trained_model_path)
        _, _, idx_test = classifier.split_indices(len(labels), DATASET_SEED)
        accuracy, xent = classifier.evaluate_features(
            loaded_head, features[idx_test], labels[idx_test])
        assert accuracy == report.final_test_accuracy
        assert xent == report.final_test_cross_entropy
