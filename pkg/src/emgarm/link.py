"""Authenticated TCP line protocol carrying gesture commands.

Grammar: one LF-terminated UTF-8 line per frame, `EMG/1 <VERB> [args...]`,
max 1024 bytes. Handshake is HMAC-SHA256 challenge-response over the
concatenated hex nonces; after OK, each GESTURE carries a strictly
increasing sequence number and is dispatched to the handler exactly once
before its ACK. No transport encryption: this is an authenticated
command pipe, not a secrecy layer.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import socket
import threading
from dataclasses import dataclass

from .errors import (AuthFailed, BindFailure, ConnectionLost, LinkTimeout,
                     NonMonotonicSeq, OversizeLine, ParseError)
from .gestures import Gesture, parse_gesture

PROTOCOL_PREFIX = "EMG/1"
PROTOCOL_VERSION = 1
MAX_LINE_BYTES = 1024
DEFAULT_PORT = 7777

_HEX = set("0123456789abcdef")


# --- frames -------------------------------------------------------------

@dataclass(frozen=True)
class Hello:
    version: int
    client_nonce: str


@dataclass(frozen=True)
class Challenge:
    server_nonce: str


@dataclass(frozen=True)
class Auth:
    mac: str


@dataclass(frozen=True)
class Ok:
    pass


@dataclass(frozen=True)
class GestureCmd:
    gesture: Gesture
    seq: int


@dataclass(frozen=True)
class Ack:
    seq: int


@dataclass(frozen=True)
class Err:
    code: str
    message: str = ""


LinkFrame = Hello | Challenge | Auth | Ok | GestureCmd | Ack | Err


def _check_nonce(s: str) -> str:
    if len(s) != 16 or not set(s) <= _HEX:
        raise ParseError(f"malformed nonce {s!r}")
    return s


def _check_mac(s: str) -> str:
    if len(s) != 64 or not set(s) <= _HEX:
        raise ParseError(f"malformed mac {s!r}")
    return s


def _check_u64(s: str, what: str) -> int:
    if not s.isdigit():
        raise ParseError(f"malformed {what} {s!r}")
    value = int(s)
    if value >= 2 ** 64:
        raise ParseError(f"{what} {s!r} exceeds u64")
    return value


def encode_frame(frame: LinkFrame) -> str:
    """Frame to its LF-terminated wire line."""
    match frame:
        case Hello(version, nonce):
            line = f"{PROTOCOL_PREFIX} HELLO {version} {nonce}"
        case Challenge(nonce):
            line = f"{PROTOCOL_PREFIX} CHALLENGE {nonce}"
        case Auth(mac):
            line = f"{PROTOCOL_PREFIX} AUTH {mac}"
        case Ok():
            line = f"{PROTOCOL_PREFIX} OK"
        case GestureCmd(gesture, seq):
            line = f"{PROTOCOL_PREFIX} GESTURE {gesture.value} {seq}"
        case Ack(seq):
            line = f"{PROTOCOL_PREFIX} ACK {seq}"
        case Err(code, message):
            line = f"{PROTOCOL_PREFIX} ERR {code}"
            if message:
                line += f" {message}"
        case _:
            raise ParseError(f"unknown frame type {type(frame).__name__}")
    encoded = line + "\n"
    if len(encoded.encode("utf-8")) > MAX_LINE_BYTES:
        raise OversizeLine(f"frame encodes to more than {MAX_LINE_BYTES} bytes")
    return encoded


def decode_frame(line: str) -> LinkFrame:
    """Wire line (with or without trailing LF) back to a frame."""
    if len(line.encode("utf-8")) > MAX_LINE_BYTES:
        raise OversizeLine(f"line exceeds {MAX_LINE_BYTES} bytes")
    line = line.removesuffix("\n")
    if "\n" in line:
        raise ParseError("embedded newline")
    parts = line.split(" ")
    prefix = parts[0]
    if prefix != PROTOCOL_PREFIX:
        if prefix.startswith("EMG/"):
            raise ParseError(f"unsupported protocol version {prefix!r}")
        raise ParseError(f"bad protocol prefix {prefix!r}")
    if len(parts) < 2:
        raise ParseError("missing verb")
    verb, args = parts[1], parts[2:]
    if verb == "HELLO":
        if len(args) != 2:
            raise ParseError("HELLO takes 2 args")
        return Hello(_check_u64(args[0], "version"), _check_nonce(args[1]))
    if verb == "CHALLENGE":
        if len(args) != 1:
            raise ParseError("CHALLENGE takes 1 arg")
        return Challenge(_check_nonce(args[0]))
    if verb == "AUTH":
        if len(args) != 1:
            raise ParseError("AUTH takes 1 arg")
        return Auth(_check_mac(args[0]))
    if verb == "OK":
        if args:
            raise ParseError("OK takes no args")
        return Ok()
    if verb == "GESTURE":
        if len(args) != 2:
            raise ParseError("GESTURE takes 2 args")
        try:
            gesture = parse_gesture(args[0])
        except ValueError as exc:
            raise ParseError(str(exc)) from exc
        return GestureCmd(gesture, _check_u64(args[1], "seq"))
    if verb == "ACK":
        if len(args) != 1:
            raise ParseError("ACK takes 1 arg")
        return Ack(_check_u64(args[0], "seq"))
    if verb == "ERR":
        if not args:
            raise ParseError("ERR takes at least 1 arg")
        return Err(args[0], " ".join(args[1:]))
    raise ParseError(f"unknown verb {verb!r}")


def compute_mac(secret: bytes, client_nonce: str, server_nonce: str) -> str:
    """hex(HMAC-SHA256(secret, client_nonce || server_nonce))."""
    msg = (client_nonce + server_nonce).encode("ascii")
    return hmac.new(secret, msg, hashlib.sha256).hexdigest()


# --- transport ----------------------------------------------------------

@dataclass(frozen=True)
class LinkConfig:
    shared_secret: bytes
    host: str = "127.0.0.1"
    port: int = DEFAULT_PORT
    io_timeout_ms: int = 1000

    def __post_init__(self):
        if not self.shared_secret:
            raise ValueError("shared_secret must be non-empty")


class _LineSocket:
    """Size-limited line I/O over a socket."""

    def __init__(self, sock: socket.socket, timeout_ms: int):
        self.sock = sock
        sock.settimeout(timeout_ms / 1000.0)
        self._rx = b""

    def send_frame(self, frame: LinkFrame) -> None:
        try:
            self.sock.sendall(encode_frame(frame).encode("utf-8"))
        except socket.timeout as exc:
            raise LinkTimeout("send timed out") from exc
        except OSError as exc:
            raise ConnectionLost(str(exc)) from exc

    def recv_frame(self) -> LinkFrame:
        while b"\n" not in self._rx:
            if len(self._rx) > MAX_LINE_BYTES:
                raise OversizeLine("incoming line exceeds limit")
            try:
                chunk = self.sock.recv(4096)
            except socket.timeout as exc:
                raise LinkTimeout("receive timed out") from exc
            except OSError as exc:
                raise ConnectionLost(str(exc)) from exc
            if not chunk:
                raise ConnectionLost("peer closed connection")
            self._rx += chunk
        line, self._rx = self._rx.split(b"\n", 1)
        if len(line) + 1 > MAX_LINE_BYTES:
            raise OversizeLine("incoming line exceeds limit")
        try:
            return decode_frame(line.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise ParseError("line is not valid UTF-8") from exc

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


class LinkClient:
    """Authenticated client session; one user at a time."""

    def __init__(self, config: LinkConfig):
        self.config = config
        try:
            raw = socket.create_connection(
                (config.host, config.port),
                timeout=config.io_timeout_ms / 1000.0)
        except socket.timeout as exc:
            raise LinkTimeout("connect timed out") from exc
        except OSError as exc:
            raise ConnectionLost(f"cannot connect: {exc}") from exc
        self._ls = _LineSocket(raw, config.io_timeout_ms)
        self._handshake()

    def _handshake(self) -> None:
        client_nonce = secrets.token_hex(8)
        self._ls.send_frame(Hello(PROTOCOL_VERSION, client_nonce))
        reply = self._ls.recv_frame()
        if isinstance(reply, Err):
            self._ls.close()
            raise AuthFailed(f"server rejected hello: {reply.code}")
        if not isinstance(reply, Challenge):
            self._ls.close()
            raise ParseError(f"expected CHALLENGE, got {reply}")
        mac = compute_mac(self.config.shared_secret, client_nonce,
                          reply.server_nonce)
        self._ls.send_frame(Auth(mac))
        reply = self._ls.recv_frame()
        if isinstance(reply, Ok):
            return
        self._ls.close()
        if isinstance(reply, Err) and reply.code == "auth":
            raise AuthFailed("shared secret rejected")
        raise ParseError(f"expected OK, got {reply}")

    def send_gesture(self, gesture: Gesture, seq: int) -> Ack:
        self._ls.send_frame(GestureCmd(gesture, seq))
        reply = self._ls.recv_frame()
        if isinstance(reply, Ack):
            if reply.seq != seq:
                raise ParseError(f"ACK for seq {reply.seq}, expected {seq}")
            return reply
        if isinstance(reply, Err):
            if reply.code == "seq":
                raise NonMonotonicSeq(reply.message or "sequence rejected")
            raise ConnectionLost(f"server error: {reply.code} {reply.message}")
        raise ParseError(f"expected ACK, got {reply}")

    def close(self) -> None:
        self._ls.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class LinkServer:
    """Threaded server: handshake gate, then exactly-once dispatch per ACK."""

    def __init__(self, config: LinkConfig, handler):
        self.config = config
        self.handler = handler
        self.dispatch_count = 0
        self.ack_count = 0
        self._lock = threading.Lock()
        self._threads: list[threading.Thread] = []
        self._stopping = threading.Event()
        try:
            self._listener = socket.create_server(
                (config.host, config.port), reuse_port=False)
        except OSError as exc:
            raise BindFailure(f"cannot bind {config.host}:{config.port}: "
                              f"{exc}") from exc
        self._listener.settimeout(0.2)
        self._accept_thread = threading.Thread(target=self._accept_loop,
                                               daemon=True)
        self._accept_thread.start()

    @property
    def port(self) -> int:
        return self._listener.getsockname()[1]

    def _accept_loop(self) -> None:
        while not self._stopping.is_set():
            try:
                sock, _addr = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            t = threading.Thread(target=self._serve_connection, args=(sock,),
                                 daemon=True)
            t.start()
            self._threads.append(t)

    def _serve_connection(self, sock: socket.socket) -> None:
        ls = _LineSocket(sock, self.config.io_timeout_ms)
        try:
            self._run_session(ls)
        except (ConnectionLost, LinkTimeout):
            pass
        except OversizeLine as exc:
            self._try_send(ls, Err("oversize", str(exc)))
        except ParseError as exc:
            self._try_send(ls, Err("parse", str(exc)))
        finally:
            ls.close()

    def _run_session(self, ls: _LineSocket) -> None:
        frame = ls.recv_frame()
        if not isinstance(frame, Hello):
            self._try_send(ls, Err("unauthenticated", "expected HELLO"))
            return
        if frame.version != PROTOCOL_VERSION:
            self._try_send(ls, Err("version",
                                   f"unsupported version {frame.version}"))
            return
        server_nonce = secrets.token_hex(8)
        ls.send_frame(Challenge(server_nonce))
        reply = ls.recv_frame()
        if not isinstance(reply, Auth):
            self._try_send(ls, Err("unauthenticated", "expected AUTH"))
            return
        expected = compute_mac(self.config.shared_secret, frame.client_nonce,
                               server_nonce)
        if not hmac.compare_digest(expected, reply.mac):
            self._try_send(ls, Err("auth", "bad mac"))
            return
        ls.send_frame(Ok())
        self._gesture_loop(ls)

    def _gesture_loop(self, ls: _LineSocket) -> None:
        last_seq: int | None = None
        while not self._stopping.is_set():
            frame = ls.recv_frame()
            if not isinstance(frame, GestureCmd):
                self._try_send(ls, Err("proto", "expected GESTURE"))
                return
            if last_seq is not None and frame.seq <= last_seq:
                ls.send_frame(Err("seq", f"seq {frame.seq} not above {last_seq}"))
                continue
            last_seq = frame.seq
            try:
                self.handler(frame.gesture)
            except Exception as exc:
                ls.send_frame(Err("handler", str(exc)))
                continue
            with self._lock:
                self.dispatch_count += 1
            ls.send_frame(Ack(frame.seq))
            with self._lock:
                self.ack_count += 1

    @staticmethod
    def _try_send(ls: _LineSocket, frame: LinkFrame) -> None:
        try:
            ls.send_frame(frame)
        except (ConnectionLost, LinkTimeout, OversizeLine):
            pass

    def close(self) -> None:
        self._stopping.set()
        try:
            self._listener.close()
        except OSError:
            pass
        self._accept_thread.join(timeout=2.0)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
