"""Deterministic rasterization of a window into its 8-subplot graph image.

Layout: 256x256 canvas, 4 rows x 2 columns of 128x64 cells, channel c in
row c//2 / column c%2. Each channel's 40 samples become a polyline of
integer-endpoint Bresenham segments (ink 0 on background 255), with a
2-px inner margin per cell. No axes, no anti-aliasing: identical windows
produce byte-identical images on every platform.
"""

from __future__ import annotations

import hashlib
import struct
import zlib
from dataclasses import dataclass

from . import kernels
from .errors import FormatError, IoFailure
from .rng import round_half_away
from .windowing import WINDOW_LEN, EmgWindow

IMAGE_W = 256
IMAGE_H = 256
CELL_W = 128
CELL_H = 64
MARGIN = 2
INK = 0
BACKGROUND = 255


@dataclass(frozen=True)
class GraphImage:
    width: int
    height: int
    pixels: bytes  # row-major 8-bit grayscale

    def __post_init__(self):
        if len(self.pixels) != self.width * self.height:
            raise ValueError("pixel buffer size mismatch")

    def checksum(self) -> str:
        """SHA-256 of the raw pixel buffer."""
        return hashlib.sha256(self.pixels).hexdigest()


def sample_x(i: int) -> int:
    """Cell-local x of sample index i in [0, 39]."""
    return MARGIN + round_half_away(i * 123 / 39)

def sample_y(v: int) -> int:
    """Cell-local y of a channel value in [-128, 127]."""
    return MARGIN + round_half_away((127 - v) * 59 / 255)


def render_graph(window: EmgWindow) -> GraphImage:
    buf = bytearray(bytes([BACKGROUND]) * (IMAGE_W * IMAGE_H))
    xs = [sample_x(i) for i in range(WINDOW_LEN)]
    for c, row in enumerate(window.samples):
        cell_x = (c % 2) * CELL_W
        cell_y = (c // 2) * CELL_H
        pxs = [cell_x + x for x in xs]
        pys = [cell_y + sample_y(v) for v in row]
        kernels.draw_polyline(buf, IMAGE_W, pxs, pys, INK)
    return GraphImage(width=IMAGE_W, height=IMAGE_H, pixels=bytes(buf))


# --- minimal PNG codec (8-bit grayscale, non-interlaced) ---------------
#
# Hand-rolled so dataset files are byte-deterministic and free of any
# encoder-version drift; only the subset this pipeline emits is needed,
# but the reader handles all five standard scanline filters.

_PNG_SIG = b"\x89PNG\r\n\x1a\n"


def _chunk(tag: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(tag + payload) & 0xFFFFFFFF
    return struct.pack(">I", len(payload)) + tag + payload + struct.pack(">I", crc)


def png_encode(image: GraphImage) -> bytes:
    ihdr = struct.pack(">IIBBBBB", image.width, image.height, 8, 0, 0, 0, 0)
    raw = bytearray()
    stride = image.width
    for y in range(image.height):
        raw.append(0)  # filter: None
        raw.extend(image.pixels[y * stride:(y + 1) * stride])
    idat = zlib.compress(bytes(raw), 6)
    return (_PNG_SIG + _chunk(b"IHDR", ihdr) + _chunk(b"IDAT", idat)
            + _chunk(b"IEND", b""))


def png_decode(data: bytes) -> GraphImage:
    if data[:8] != _PNG_SIG:
        raise FormatError("not a PNG file")
    pos = 8
    width = height = None
    idat = bytearray()
    while pos + 8 <= len(data):
        (length,) = struct.unpack(">I", data[pos:pos + 4])
        tag = data[pos + 4:pos + 8]
        payload = data[pos + 8:pos + 8 + length]
        if len(payload) != length:
            raise FormatError("truncated PNG chunk")
        if tag == b"IHDR":
            width, height, depth, color, _, _, interlace = struct.unpack(
                ">IIBBBBB", payload)
            if depth != 8 or color != 0 or interlace != 0:
                raise FormatError("unsupported PNG variant (need 8-bit gray)")
        elif tag == b"IDAT":
            idat.extend(payload)
        elif tag == b"IEND":
            break
        pos += 12 + length
    if width is None:
        raise FormatError("PNG missing IHDR")
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as exc:
        raise FormatError(f"bad PNG image data: {exc}") from exc
    stride = width
    if len(raw) != height * (stride + 1):
        raise FormatError("PNG scanline data has wrong length")
    out = bytearray(width * height)
    prev = bytearray(stride)
    for y in range(height):
        ftype = raw[y * (stride + 1)]
        line = bytearray(raw[y * (stride + 1) + 1:(y + 1) * (stride + 1)])
        if ftype == 1:  # Sub
            for x in range(stride):
                line[x] = (line[x] + (line[x - 1] if x else 0)) & 0xFF
        elif ftype == 2:  # Up
            for x in range(stride):
                line[x] = (line[x] + prev[x]) & 0xFF
        elif ftype == 3:  # Average
            for x in range(stride):
                left = line[x - 1] if x else 0
                line[x] = (line[x] + (left + prev[x]) // 2) & 0xFF
        elif ftype == 4:  # Paeth
            for x in range(stride):
                a = line[x - 1] if x else 0
                b = prev[x]
                c = prev[x - 1] if x else 0
                p = a + b - c
                pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
                pred = a if pa <= pb and pa <= pc else (b if pb <= pc else c)
                line[x] = (line[x] + pred) & 0xFF
        elif ftype != 0:
            raise FormatError(f"unknown PNG filter {ftype}")
        out[y * stride:(y + 1) * stride] = line
        prev = line
    return GraphImage(width=width, height=height, pixels=bytes(out))


def write_png(image: GraphImage, path) -> None:
    try:
        with open(path, "wb") as fh:
            fh.write(png_encode(image))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_png(path) -> GraphImage:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return png_decode(data)
