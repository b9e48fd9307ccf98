"""Minimal RIFF/WAVE reader for PCM integer and IEEE float data."""
from __future__ import annotations

import struct
import wave
from dataclasses import dataclass

import numpy as np

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE


class WavError(ValueError):
    """Malformed or truncated WAV file."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class UnsupportedFormatError(WavError):
    """Well-formed WAV whose codec or sample layout is not supported."""


@dataclass(frozen=True)
class WavFormat:
    format_tag: int
    channels: int
    sample_rate: int
    bits_per_sample: int
    block_align: int


def _parse_fmt(body, offset):
    if len(body) < 16:
        raise WavError("fmt chunk shorter than 16 bytes", offset)
    tag, channels, rate, _, align, bits = struct.unpack("<HHIIHH", body[:16])
    if tag == WAVE_FORMAT_EXTENSIBLE:
        if len(body) < 40:
            raise WavError("extensible fmt chunk shorter than 40 bytes", offset)
        # first two bytes of the SubFormat GUID carry the actual format tag
        tag = struct.unpack("<H", body[24:26])[0]
    if channels < 1:
        raise WavError("fmt chunk declares zero channels", offset)
    if rate < 1:
        raise WavError("fmt chunk declares a non-positive sample rate", offset)
    return WavFormat(tag, channels, rate, bits, align)


def read_wav(path):
    """Return ``(samples, sample_rate)``; samples are float64 ``(frames, channels)``.

    Integer PCM is scaled by full scale (``2**(bits-1)``; 8-bit data is
    unsigned with offset 128). Float data is returned as stored.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12:
        raise WavError("file too short for a RIFF header", len(data))
    riff, _, wave_id = struct.unpack("<4sI4s", data[:12])
    if riff != b"RIFF" or wave_id != b"WAVE":
        raise UnsupportedFormatError("not a RIFF/WAVE file", 0)
    fmt = None
    payload = None
    pos = 12
    while pos < len(data):
        if pos + 8 > len(data):
            raise WavError("truncated chunk header", pos)
        cid, size = struct.unpack("<4sI", data[pos:pos + 8])
        start = pos + 8
        end = start + size
        if cid == b"fmt ":
            if end > len(data):
                raise WavError("truncated fmt chunk", pos)
            fmt = _parse_fmt(data[start:end], pos)
        elif cid == b"data":
            if end > len(data):
                raise WavError(f"data chunk declares {size} bytes, {len(data) - start} present", pos)
            payload = (data[start:end], start)
            break
        pos = end + (size & 1)
    if fmt is None:
        raise WavError("missing fmt chunk", pos)
    if payload is None:
        raise WavError("missing data chunk", pos)
    raw, data_offset = payload
    samples = _decode(raw, fmt, data_offset)
    return samples, fmt.sample_rate


def _decode(raw, fmt, offset):
    bits, ch = fmt.bits_per_sample, fmt.channels
    width = bits // 8
    if bits % 8 or width * ch != fmt.block_align:
        raise UnsupportedFormatError(f"unsupported sample layout: {bits} bits, block align {fmt.block_align}")
    if len(raw) % fmt.block_align:
        raise WavError("data chunk is not a whole number of frames", offset + len(raw) - len(raw) % fmt.block_align)
    if fmt.format_tag == WAVE_FORMAT_PCM:
        if bits == 8:
            x = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
        elif bits == 16:
            x = np.frombuffer(raw, dtype="<i2") / 32768.0
        elif bits == 24:
            b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
            v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
            v = np.where(v >= 1 << 23, v - (1 << 24), v)
            x = v / float(1 << 23)
        elif bits == 32:
            x = np.frombuffer(raw, dtype="<i4") / float(1 << 31)
        else:
            raise UnsupportedFormatError(f"unsupported PCM bit depth {bits}")
    elif fmt.format_tag == WAVE_FORMAT_IEEE_FLOAT:
        if bits == 32:
            x = np.frombuffer(raw, dtype="<f4").astype(np.float64)
        elif bits == 64:
            x = np.frombuffer(raw, dtype="<f8").copy()
        else:
            raise UnsupportedFormatError(f"unsupported float bit depth {bits}")
    else:
        raise UnsupportedFormatError(f"unsupported WAV codec 0x{fmt.format_tag:04x}")
    return x.reshape(-1, ch)


def write_wav(path, samples, sample_rate, sampwidth=2):
    """Write float samples in [-1, 1] as integer PCM (16-bit by default).

    ``samples`` is ``(frames,)`` or ``(frames, channels)``; values are
    clipped and rounded to the nearest code.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    full = float(1 << (8 * sampwidth - 1))
    codes = np.clip(np.round(x * full), -full, full - 1).astype(np.int64)
    if sampwidth == 1:
        raw = (codes + 128).astype(np.uint8).tobytes()
    elif sampwidth == 2:
        raw = codes.astype("<i2").tobytes()
    elif sampwidth == 3:
        c = codes.astype("<i4").reshape(-1, 1).view(np.uint8).reshape(-1, 4)[:, :3]
        raw = np.ascontiguousarray(c).tobytes()
    else:
        raise ValueError(f"unsupported sample width {sampwidth}")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(x.shape[1])
        w.setsampwidth(sampwidth)
        w.setframerate(int(sample_rate))
        w.writeframes(raw)
