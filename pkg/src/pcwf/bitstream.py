"""Bit-exact sidecar stream for enhancement flags and filter coefficients.

Stream layout (all multi-byte fields little-endian, bits packed MSB-first
within bytes, every frame byte-aligned):

    header   magic "PCWF" | version u8 | qp u8 | gof_size u8 | k u8 | mode u8
    frames   one payload per frame, in frame order, until end of stream

Frame payload bits:

    bwf/ciwf   flag_c1, flag_c2, flag_c3, then one coefficient record per
               flagged component (in c1, c2, c3 order) on coefficient-bearing
               frames
    vcwf       flag_luma; if set, five category flags; flag_c2; flag_c3;
               then records for flagged sets in cat1..cat5, c2, c3 order on
               coefficient-bearing frames

A coefficient record is 7 taps in s1.14 fixed point: 16-bit signed values,
written low byte first.  Coefficient-bearing frames are every frame in bwf
mode and the first frame of each group otherwise; all other frames carry
flags only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cloud import round_half_away

MAGIC = b"PCWF"
VERSION = 1
FILTER_ORDER = 7
FRACTION_BITS = 14
COEFF_BITS = 16
COEFF_SET_BITS = COEFF_BITS * FILTER_ORDER  # 112
HEADER_BYTES = 9

MODES = ("bwf", "ciwf", "vcwf")
_MODE_CODE = {name: i for i, name in enumerate(MODES)}

_RAW_MIN = -(1 << (COEFF_BITS - 1))
_RAW_MAX = (1 << (COEFF_BITS - 1)) - 1
_SCALE = float(1 << FRACTION_BITS)

# Flag slots per mode; vcwf's derived luma flag is the OR of the five
# category slots and is what actually travels in the stream.
FLAT_SETS = ("c1", "c2", "c3")
VCWF_SETS = ("cat1", "cat2", "cat3", "cat4", "cat5", "c2", "c3")


class PayloadError(ValueError):
    """Malformed payload stream."""

    def __init__(self, message: str, *, offset: Optional[int] = None,
                 frame: Optional[int] = None):
        detail = message
        if frame is not None:
            detail += f" (frame {frame})"
        if offset is not None:
            detail += f" at byte offset {offset}"
        super().__init__(detail)
        self.offset = offset
        self.frame = frame


@dataclass(frozen=True)
class StreamHeader:
    qp: int
    gof_size: int
    mode: str
    k: int = FILTER_ORDER

    def __post_init__(self):
        if self.mode not in MODES:
            raise PayloadError(f"unknown mode '{self.mode}'")
        if not 0 <= self.qp <= 255:
            raise PayloadError(f"qp {self.qp} does not fit the header byte")
        if not 1 <= self.gof_size <= 255:
            raise PayloadError(f"gof_size {self.gof_size} out of [1, 255]")
        if self.k != FILTER_ORDER:
            raise PayloadError(f"unsupported filter order {self.k}")


@dataclass(frozen=True)
class FramePayload:
    """Flags plus optional raw coefficient records for one frame.

    flags/coeffs are aligned to FLAT_SETS (bwf/ciwf) or VCWF_SETS (vcwf).
    Records exist only for flagged sets of coefficient-bearing frames and
    hold raw fixed-point integers, the exact wire values.
    """

    mode: str
    flags: tuple
    coeffs: tuple

    def __post_init__(self):
        sets = set_names(self.mode)
        if len(self.flags) != len(sets):
            raise PayloadError(
                f"{self.mode} payload needs {len(sets)} flags, "
                f"got {len(self.flags)}"
            )
        if len(self.coeffs) != len(sets):
            raise PayloadError("flags and coefficient slots misaligned")
        for flag, raw in zip(self.flags, self.coeffs):
            if raw is None:
                continue
            if not flag:
                raise PayloadError("coefficients present for an unflagged set")
            if len(raw) != FILTER_ORDER:
                raise PayloadError(
                    f"coefficient record must hold {FILTER_ORDER} taps"
                )
            for value in raw:
                if not _RAW_MIN <= value <= _RAW_MAX:
                    raise PayloadError(f"raw coefficient {value} out of s1.14 range")

    @property
    def luma_flag(self) -> bool:
        if self.mode == "vcwf":
            return any(self.flags[:5])
        return bool(self.flags[0])

    def record_count(self) -> int:
        return sum(1 for c in self.coeffs if c is not None)


def set_names(mode: str) -> tuple:
    if mode == "vcwf":
        return VCWF_SETS
    if mode in ("bwf", "ciwf"):
        return FLAT_SETS
    raise PayloadError(f"unknown mode '{mode}'")


def frame_carries_coeffs(mode: str, gof_size: int, frame_index: int) -> bool:
    """True when this frame's flagged sets are followed by records."""
    if mode == "bwf":
        return True
    return frame_index % gof_size == 0


def quantize_taps(taps) -> tuple[tuple, bool]:
    """Taps -> raw s1.14 integers; reports whether any value was clamped."""
    raw = round_half_away(np.asarray(taps, dtype=np.float64) * _SCALE)
    clamped = bool(np.any(raw < _RAW_MIN) or np.any(raw > _RAW_MAX))
    raw = np.clip(raw, _RAW_MIN, _RAW_MAX).astype(np.int64)
    return tuple(int(v) for v in raw), clamped


def dequantize_taps(raw) -> np.ndarray:
    """Raw s1.14 integers -> float64 taps; both codec sides filter with these."""
    return np.asarray(raw, dtype=np.float64) / _SCALE


def payload_bit_count(payload: FramePayload) -> int:
    """Exact pre-padding bit length of one frame's payload."""
    bits = payload.record_count() * COEFF_SET_BITS
    if payload.mode == "vcwf":
        bits += 1 + (5 if payload.luma_flag else 0) + 2
    else:
        bits += 3
    return bits


class _BitWriter:
    def __init__(self):
        self._out = bytearray()
        self._acc = 0
        self._pending = 0

    def write(self, value: int, nbits: int) -> None:
        self._acc = (self._acc << nbits) | (value & ((1 << nbits) - 1))
        self._pending += nbits
        while self._pending >= 8:
            self._pending -= 8
            self._out.append((self._acc >> self._pending) & 0xFF)
        self._acc &= (1 << self._pending) - 1

    def write_bit(self, flag: bool) -> None:
        self.write(1 if flag else 0, 1)

    def align(self) -> None:
        if self._pending:
            self.write(0, 8 - self._pending)

    def getvalue(self) -> bytes:
        return bytes(self._out)


class _BitReader:
    def __init__(self, data: bytes, start: int = 0):
        self._data = data
        self._byte = start
        self._bit = 0

    @property
    def byte_offset(self) -> int:
        return self._byte

    def exhausted(self) -> bool:
        return self._byte >= len(self._data)

    def read(self, nbits: int) -> int:
        value = 0
        for _ in range(nbits):
            if self._byte >= len(self._data):
                raise PayloadError("truncated stream", offset=self._byte)
            bit = (self._data[self._byte] >> (7 - self._bit)) & 1
            value = (value << 1) | bit
            self._bit += 1
            if self._bit == 8:
                self._bit = 0
                self._byte += 1
        return value

    def read_bit(self) -> bool:
        return bool(self.read(1))

    def align(self) -> None:
        if self._bit:
            self._bit = 0
            self._byte += 1


def _write_record(writer: _BitWriter, raw) -> None:
    for value in raw:
        u = value & 0xFFFF
        writer.write(u & 0xFF, 8)
        writer.write(u >> 8, 8)


def _read_record(reader: _BitReader):
    taps = []
    for _ in range(FILTER_ORDER):
        lo = reader.read(8)
        hi = reader.read(8)
        u = lo | (hi << 8)
        taps.append(u - 0x10000 if u >= 0x8000 else u)
    return tuple(taps)


def serialize(header: StreamHeader, payloads) -> bytes:
    """Serialize a header and per-frame payloads to the sidecar format."""
    writer = _BitWriter()
    for byte in MAGIC:
        writer.write(byte, 8)
    for byte in (VERSION, header.qp, header.gof_size, header.k,
                 _MODE_CODE[header.mode]):
        writer.write(byte, 8)
    for index, payload in enumerate(payloads):
        if payload.mode != header.mode:
            raise PayloadError(
                f"payload mode '{payload.mode}' does not match header",
                frame=index,
            )
        carries = frame_carries_coeffs(header.mode, header.gof_size, index)
        if not carries and payload.record_count():
            raise PayloadError(
                "coefficient records on a non-coefficient-bearing frame",
                frame=index,
            )
        if header.mode == "vcwf":
            writer.write_bit(payload.luma_flag)
            if payload.luma_flag:
                for flag in payload.flags[:5]:
                    writer.write_bit(flag)
            writer.write_bit(payload.flags[5])
            writer.write_bit(payload.flags[6])
        else:
            for flag in payload.flags:
                writer.write_bit(flag)
        for raw in payload.coeffs:
            if raw is not None:
                _write_record(writer, raw)
        writer.align()
    return writer.getvalue()


def parse(data: bytes):
    """Inverse of serialize; raises PayloadError with position on bad input."""
    if len(data) < HEADER_BYTES:
        raise PayloadError("stream shorter than the fixed header", offset=0)
    if data[:4] != MAGIC:
        raise PayloadError("bad magic", offset=0)
    version, qp, gof_size, k, mode_code = data[4:HEADER_BYTES]
    if version != VERSION:
        raise PayloadError(f"unsupported version {version}", offset=4)
    if mode_code >= len(MODES):
        raise PayloadError(f"reserved mode byte {mode_code}", offset=8)
    if k != FILTER_ORDER:
        raise PayloadError(f"unsupported filter order {k}", offset=7)
    if gof_size < 1:
        raise PayloadError("gof_size must be >= 1", offset=6)
    header = StreamHeader(qp=qp, gof_size=gof_size, mode=MODES[mode_code], k=k)
    payloads = []
    reader = _BitReader(data, start=HEADER_BYTES)
    index = 0
    while not reader.exhausted():
        try:
            payloads.append(_parse_frame(reader, header, index))
        except PayloadError as exc:
            raise PayloadError(str(exc), frame=index) from exc
        index += 1
    return header, payloads


def _parse_frame(reader: _BitReader, header: StreamHeader,
                 index: int) -> FramePayload:
    carries = frame_carries_coeffs(header.mode, header.gof_size, index)
    if header.mode == "vcwf":
        luma = reader.read_bit()
        if luma:
            cats = tuple(reader.read_bit() for _ in range(5))
            if not any(cats):
                raise PayloadError("luma flag set but every category flag clear")
        else:
            cats = (False,) * 5
        flags = cats + (reader.read_bit(), reader.read_bit())
    else:
        flags = tuple(reader.read_bit() for _ in range(3))
    coeffs = []
    for flag in flags:
        if flag and carries:
            coeffs.append(_read_record(reader))
        else:
            coeffs.append(None)
    reader.align()
    return FramePayload(mode=header.mode, flags=flags, coeffs=tuple(coeffs))
