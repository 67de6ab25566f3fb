"""Audio and label ingestion, normalization and 9-bit quantization."""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (CorruptHeader, DegenerateSignal, MalformedLine,
                     NonMonotonicSpans, NonPcmEncoding, UnsupportedFormat)

FULL_SCALE = 32767
GRID_BITS = 7
GRID_STEP = 1 << GRID_BITS  # 128: one 9-bit step in 16-bit units
MIN_SAMPLE_RATE = 8000

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RawAudio:
    samples: np.ndarray
    sample_rate: int
    channels: int = 1

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 1 or self.channels != 1:
            raise UnsupportedFormat(f"expected mono audio, got {self.channels} channels")
        if samples.size == 0:
            raise CorruptHeader("audio contains no samples")
        if self.sample_rate < MIN_SAMPLE_RATE:
            raise UnsupportedFormat(f"sample rate {self.sample_rate} Hz below {MIN_SAMPLE_RATE} Hz")
        dtype = np.int64 if np.issubdtype(samples.dtype, np.integer) else np.float64
        object.__setattr__(self, "samples", _frozen(samples, dtype))
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def duration(self):
        return self.samples.size / self.sample_rate


@dataclass(frozen=True, eq=False)
class Utterance:
    """Demeaned signal scaled so that its peak magnitude is exactly 1."""

    samples: np.ndarray
    sample_rate: int
    utterance_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen(self.samples, np.float64))

    def __len__(self):
        return self.samples.size

    @property
    def duration(self):
        return self.samples.size / self.sample_rate


@dataclass(frozen=True, eq=False)
class QuantizedSignal:
    qsamples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        object.__setattr__(self, "qsamples", _frozen(self.qsamples, np.int32))

    def __len__(self):
        return self.qsamples.size


@dataclass(frozen=True)
class ReferenceLabels:
    entries: tuple = field(default_factory=tuple)

    def __post_init__(self):
        entries = tuple((int(b), int(e), str(lab)) for b, e, lab in self.entries)
        prev_end = None
        for i, (b, e, lab) in enumerate(entries):
            if b >= e:
                raise NonMonotonicSpans(f"entry {i} ({b} {e} {lab}): begin must precede end")
            if prev_end is not None and b < prev_end:
                raise NonMonotonicSpans(f"entry {i} ({b} {e} {lab}) overlaps the previous span")
            prev_end = e
        object.__setattr__(self, "entries", entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def boundaries(self):
        """Interior phone boundaries (sample indices), utterance start and end excluded."""
        if not self.entries:
            return []
        points = set()
        for b, e, _ in self.entries:
            points.add(b)
            points.add(e)
        points.discard(self.entries[0][0])
        points.discard(self.entries[-1][1])
        return sorted(points)


# --- audio ---------------------------------------------------------------

def _read_bytes(path):
    if not os.path.isfile(path):
        raise FileNotFoundError(f"no such audio file: {os.fspath(path)}")
    with open(path, "rb") as fh:
        return fh.read()


def _parse_wav(data):
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise CorruptHeader("missing RIFF/WAVE signature")
    pos = 12
    fmt = None
    pcm = None
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        if cid == b"fmt ":
            if len(body) < 16:
                raise CorruptHeader("fmt chunk too short")
            fmt = struct.unpack("<HHIIHH", body[:16])
            tag = fmt[0]
            if tag == _WAVE_FORMAT_EXTENSIBLE:
                if len(body) < 26:
                    raise CorruptHeader("extensible fmt chunk too short")
                (tag,) = struct.unpack("<H", body[24:26])
            fmt = (tag,) + fmt[1:]
        elif cid == b"data":
            pcm = body
            if fmt is not None:
                break
        pos += 8 + size + (size & 1)
    if fmt is None or pcm is None:
        raise CorruptHeader("WAV lacks fmt or data chunk")
    tag, channels, rate, _, _, bits = fmt
    if tag != _WAVE_FORMAT_PCM:
        raise NonPcmEncoding(f"WAV format tag {tag:#06x} is not PCM")
    if bits != 16:
        raise UnsupportedFormat(f"{bits}-bit WAV; only 16-bit PCM is supported")
    if channels != 1:
        raise UnsupportedFormat(f"{channels}-channel WAV; only mono is supported")
    samples = np.frombuffer(pcm[:len(pcm) - len(pcm) % 2], dtype="<i2")
    return RawAudio(samples, rate, 1)


def _parse_sphere_header(data):
    if not data.startswith(b"NIST_1A"):
        raise CorruptHeader("missing NIST_1A signature")
    lines = data[:4096].split(b"\n")
    try:
        header_size = int(lines[1].strip())
    except (IndexError, ValueError) as exc:
        raise CorruptHeader("unreadable SPHERE header size") from exc
    if header_size < 16 or header_size > len(data):
        raise CorruptHeader(f"SPHERE header size {header_size} out of range")
    fields = {}
    for raw in data[:header_size].split(b"\n")[2:]:
        line = raw.strip()
        if not line:
            continue
        if line == b"end_head":
            break
        parts = line.split(None, 2)
        if len(parts) != 3:
            raise CorruptHeader(f"bad SPHERE header line {line!r}")
        key, kind, value = (p.decode("ascii", "replace") for p in parts)
        if kind == "-i":
            try:
                fields[key] = int(value)
            except ValueError as exc:
                raise CorruptHeader(f"bad integer for {key}: {value!r}") from exc
        elif kind == "-r":
            fields[key] = float(value)
        else:
            fields[key] = value
    else:
        raise CorruptHeader("SPHERE header has no end_head")
    return header_size, fields


def _parse_sphere(data):
    header_size, h = _parse_sphere_header(data)
    coding = h.get("sample_coding", "pcm")
    if coding != "pcm":
        raise NonPcmEncoding(f"SPHERE sample_coding {coding!r} is not plain pcm")
    width = h.get("sample_n_bytes", 2)
    if width != 2:
        raise UnsupportedFormat(f"SPHERE sample_n_bytes {width}; only 16-bit is supported")
    channels = h.get("channel_count", 1)
    if channels != 1:
        raise UnsupportedFormat(f"{channels}-channel SPHERE; only mono is supported")
    if "sample_rate" not in h:
        raise CorruptHeader("SPHERE header lacks sample_rate")
    order = h.get("sample_byte_format", "01")
    if order == "01":
        dtype = "<i2"
    elif order == "10":
        dtype = ">i2"
    else:
        raise CorruptHeader(f"unknown sample_byte_format {order!r}")
    body = data[header_size:]
    count = h.get("sample_count", len(body) // 2)
    if count * 2 > len(body):
        raise CorruptHeader(f"SPHERE declares {count} samples but holds {len(body) // 2}")
    samples = np.frombuffer(body[:count * 2], dtype=dtype)
    return RawAudio(samples, int(h["sample_rate"]), 1)


def load_audio(path, format_hint="auto"):
    """Read a 16-bit PCM mono WAV or NIST SPHERE file."""
    data = _read_bytes(path)
    if format_hint == "auto":
        if data.startswith(b"NIST_1A"):
            format_hint = "sphere"
        elif data.startswith(b"RIFF"):
            format_hint = "wav"
        else:
            raise UnsupportedFormat(f"{os.fspath(path)}: neither RIFF/WAVE nor NIST SPHERE")
    if format_hint == "wav":
        return _parse_wav(data)
    if format_hint == "sphere":
        return _parse_sphere(data)
    raise ValueError(f"unknown format_hint {format_hint!r}")


def write_wav(path, samples, sample_rate):
    """Write 16-bit mono PCM; ``samples`` are integers in the int16 range."""
    pcm = np.asarray(samples).astype("<i2").tobytes()
    fmt = struct.pack("<HHIIHH", _WAVE_FORMAT_PCM, 1, sample_rate, sample_rate * 2, 2, 16)
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", 4 + 8 + len(fmt) + 8 + len(pcm)) + b"WAVE")
        fh.write(b"fmt " + struct.pack("<I", len(fmt)) + fmt)
        fh.write(b"data" + struct.pack("<I", len(pcm)) + pcm)


def write_sphere(path, samples, sample_rate, big_endian=False):
    pcm = np.asarray(samples).astype(">i2" if big_endian else "<i2").tobytes()
    lines = [
        "NIST_1A",
        "   1024",
        f"sample_count -i {len(pcm) // 2}",
        "sample_n_bytes -i 2",
        "channel_count -i 1",
        f"sample_byte_format -s2 {'10' if big_endian else '01'}",
        f"sample_rate -i {sample_rate}",
        "sample_coding -s3 pcm",
        "end_head",
    ]
    header = ("\n".join(lines) + "\n").encode("ascii").ljust(1024, b" ")
    with open(path, "wb") as fh:
        fh.write(header + pcm)


# --- normalization / quantization ---------------------------------------

def normalize_samples(samples):
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise DegenerateSignal("empty signal")
    z = x - x.mean()
    peak = np.max(np.abs(z))
    if peak == 0.0:
        raise DegenerateSignal("signal is constant; demeaned signal is identically zero")
    return z / peak


def normalize(raw, utterance_id=""):
    """Remove the mean and scale the peak magnitude to 1."""
    return Utterance(normalize_samples(raw.samples), raw.sample_rate, utterance_id)


def quantize_samples(x):
    ints = np.trunc(np.asarray(x, dtype=np.float64) * FULL_SCALE).astype(np.int64)
    mags = (np.abs(ints) >> GRID_BITS) << GRID_BITS
    return np.sign(ints) * mags


def quantize_9bit(u):
    """Map to the 16-bit integer scale (toward zero) and zero the 7 low magnitude bits."""
    return QuantizedSignal(quantize_samples(u.samples), u.sample_rate)


# --- labels --------------------------------------------------------------

def parse_labels(text, source="<string>"):
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise MalformedLine(f"{source}:{lineno}: expected 'begin end label', got {raw!r}")
        try:
            begin, end = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise MalformedLine(f"{source}:{lineno}: non-integer sample index in {raw!r}") from exc
        entries.append((begin, end, parts[2]))
    return ReferenceLabels(tuple(entries))


def load_labels(path):
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        return parse_labels(fh.read(), os.fspath(path))


def format_labels(labels):
    return "".join(f"{b} {e} {lab}\n" for b, e, lab in labels.entries)


def write_labels(path, labels):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_labels(labels))
