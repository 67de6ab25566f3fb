"""Per-hop frame features: silence index, extrema positions (PFE/PLE) and ADE.

Every hop ``k`` owns the mid segment ``[k*hop, (k+1)*hop)``.  The short
silence-index window and the long extrema window are both centred on that
segment; samples outside the utterance read as zeros.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import InsufficientZeroCrossings, NoExtrema
from .signal_io import GRID_STEP, quantize_samples


@dataclass(frozen=True)
class FramePlan:
    si_frame_ms: float = 10.0
    feature_frame_ms: float = 40.0
    hop_ms: float = 5.0
    min_silence_run: int = 3
    ade_threshold: float = 0.02

    def __post_init__(self):
        for name in ("si_frame_ms", "feature_frame_ms", "hop_ms", "min_silence_run"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("si_frame_ms", "feature_frame_ms"):
            ratio = getattr(self, name) / self.hop_ms
            if abs(ratio - round(ratio)) > 1e-9:
                raise ValueError(f"hop_ms must divide {name}")

    @staticmethod
    def to_samples(ms, sample_rate):
        return max(1, int(round(ms * sample_rate / 1000.0)))

    def layout(self, sample_rate):
        """(hop, si_len, feature_len) in samples."""
        return (self.to_samples(self.hop_ms, sample_rate),
                self.to_samples(self.si_frame_ms, sample_rate),
                self.to_samples(self.feature_frame_ms, sample_rate))

    def n_hops(self, n_samples, sample_rate):
        hop = self.to_samples(self.hop_ms, sample_rate)
        return -(-n_samples // hop)

    def window_start(self, k, frame_len, sample_rate):
        hop = self.to_samples(self.hop_ms, sample_rate)
        return k * hop + hop // 2 - frame_len // 2


@dataclass(frozen=True)
class ExtremaSet:
    maxima: tuple  # ((sample_index, value), ...), values > 0
    minima: tuple  # values < 0
    first_zc: int
    last_zc: int

    def indices(self):
        return sorted(i for i, _ in self.maxima + self.minima)


@dataclass(frozen=True)
class FrameFeatures:
    hop_index: int
    center_time: float
    si: float
    pfe_ms: float | None
    ple_ms: float | None
    ade: float | None
    ade_reliable: bool


@dataclass(frozen=True, eq=False)
class FeatureTrack:
    """Array view of a feature sequence; undefined entries are NaN."""

    si: np.ndarray
    pfe_ms: np.ndarray
    ple_ms: np.ndarray
    ade: np.ndarray
    reliable: np.ndarray
    center_time: np.ndarray

    def __len__(self):
        return self.si.size

    def records(self):
        def opt(v):
            return None if math.isnan(v) else float(v)
        return [FrameFeatures(k, float(self.center_time[k]), float(self.si[k]),
                              opt(self.pfe_ms[k]), opt(self.ple_ms[k]), opt(self.ade[k]),
                              bool(self.reliable[k]))
                for k in range(self.si.size)]

    @classmethod
    def from_records(cls, features):
        def arr(attr):
            return np.array([np.nan if getattr(f, attr) is None else getattr(f, attr)
                             for f in features], dtype=np.float64)
        return cls(si=arr("si"), pfe_ms=arr("pfe_ms"), ple_ms=arr("ple_ms"), ade=arr("ade"),
                   reliable=np.array([f.ade_reliable for f in features], dtype=bool),
                   center_time=arr("center_time"))


def silence_mask(qsamples):
    """True where the quantized magnitude is within one 9-bit step."""
    return (np.abs(np.asarray(qsamples)) <= GRID_STEP).astype(np.uint8)


def _padded(a, pad, fill=0):
    out = np.full(a.size + 2 * pad, fill, dtype=a.dtype)
    out[pad:pad + a.size] = a
    return out


def silence_counts(qsamples, starts, frame_len, min_run):
    """Silent-sample counts for windows starting at ``starts`` (may overhang)."""
    starts = np.asarray(starts, dtype=np.int64)
    mask = silence_mask(qsamples)
    lo = int(min(0, starts.min(initial=0)))
    hi = int(max(mask.size, (starts + frame_len).max(initial=0)))
    pad = max(-lo, hi - mask.size)
    # zero extension: out-of-range samples are silent
    mask = _padded(mask, pad, fill=1)
    return _backend.kernels.silence_counts(mask, starts + pad, int(frame_len), int(min_run))


def silence_index(q, frame_start, frame_len, min_run=3):
    """Fraction of the frame made of sub-threshold runs at least ``min_run`` long."""
    count = silence_counts(q.qsamples, [frame_start], frame_len, min_run)[0]
    return count / frame_len


def _extended(x, start, length):
    pad = max(0, -start, start + length - x.size)
    return _padded(np.ascontiguousarray(x, dtype=np.float64), pad), pad


def select_extrema(b, frame_start, frame_len):
    """Lobe extrema of the BPF frame surviving the two-pass adaptive threshold."""
    x, pad = _extended(b.samples, frame_start, frame_len)
    mi, mv, ni, nv, fz, lz = _backend.kernels.frame_extrema(x, frame_start + pad, frame_len)
    if fz < 0:
        raise InsufficientZeroCrossings(
            f"frame at sample {frame_start} has fewer than two zero crossings")
    return ExtremaSet(
        maxima=tuple((int(i) - pad, float(v)) for i, v in zip(mi, mv)),
        minima=tuple((int(i) - pad, float(v)) for i, v in zip(ni, nv)),
        first_zc=int(fz) - pad,
        last_zc=int(lz) - pad,
    )


def pfe_ple(e, frame_center, sample_rate):
    """Signed offsets (ms) of the first and last extremum from the frame centre."""
    idx = e.indices()
    if not idx:
        raise NoExtrema("no extremum survived thresholding")
    scale = 1000.0 / sample_rate
    return (idx[0] - frame_center) * scale, (idx[-1] - frame_center) * scale


def ade(e):
    """Mean |maximum - minimum| over positionally paired surviving extrema."""
    k = min(len(e.maxima), len(e.minima))
    if k == 0:
        raise NoExtrema("ADE needs at least one maximum and one minimum")
    diffs = np.array([abs(e.maxima[i][1] - e.minima[i][1]) for i in range(k)])
    return float(np.cumsum(diffs)[-1] / k)


def compute_track(u, b, plan=FramePlan()):
    rate = u.sample_rate
    n = len(u)
    hop, si_len, feat_len = plan.layout(rate)
    n_hops = plan.n_hops(n, rate)
    hops = np.arange(n_hops, dtype=np.int64)
    si_starts = hops * hop + hop // 2 - si_len // 2
    feat_starts = hops * hop + hop // 2 - feat_len // 2
    centers = feat_starts + feat_len // 2

    q = quantize_samples(u.samples)
    si = silence_counts(q, si_starts, si_len, plan.min_silence_run) / si_len

    pad = feat_len + hop
    x = _padded(np.ascontiguousarray(b.samples, dtype=np.float64), pad)
    first, last, ade_v, status = _backend.kernels.extrema_summary(x, feat_starts + pad, feat_len)
    ok = status == _backend.STATUS_OK
    scale = 1000.0 / rate
    pfe = np.where(ok, (first - pad - centers) * scale, np.nan)
    ple = np.where(ok, (last - pad - centers) * scale, np.nan)
    reliable = np.nan_to_num(ade_v, nan=-1.0) >= plan.ade_threshold
    center_time = (hops * hop + hop / 2.0) / rate
    return FeatureTrack(si=si, pfe_ms=pfe, ple_ms=ple, ade=ade_v, reliable=reliable,
                        center_time=center_time)


def extract_features(u, b, plan=FramePlan()):
    """One ``FrameFeatures`` record per hop, in hop order."""
    return compute_track(u, b, plan).records()
