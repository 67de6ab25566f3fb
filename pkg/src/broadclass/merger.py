"""Merge SI and PFE/PLE transitions and label the segments between them."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .detector import HL, LH, NS, SN
from .errors import InconsistentSequence

LABELS = ("H", "L", "S", "HL", "LH")

_EPS = 1e-9
# same-instant ties: S-N before an amplitude transition, N-S after it
_ORDER = {SN: 0, LH: 1, HL: 1, NS: 2}

_PAIR_LABEL = {
    (NS, SN): "S",
    (LH, HL): "H",
    (HL, LH): "L",
    (HL, HL): "LH",
    (LH, LH): "HL",
    (SN, LH): "L",
    (SN, HL): "H",
    (LH, NS): "H",
    (HL, NS): "L",
    (NS, LH): "S",
    (NS, HL): "S",
    (LH, SN): "H",
    (HL, SN): "L",
}


@dataclass(frozen=True)
class MergerParams:
    sn_lh_ms: float = 10.0
    sn_hl_ms: float = 20.0
    amp_ns_ms: float = 20.0


@dataclass(frozen=True)
class ClassSegment:
    label: str
    start: float
    end: float
    start_sample: int
    end_sample: int
    provenance: tuple = ()  # indices of the bounding transitions, -1 at utterance edges


@dataclass(frozen=True)
class Segmentation:
    utterance_id: str
    sample_rate: int
    n_samples: int
    segments: tuple
    transitions: tuple
    removed: tuple = field(default=(), compare=False)

    @property
    def duration(self):
        return self.n_samples / self.sample_rate

    def label_at(self, sample):
        for seg in self.segments:
            if seg.start_sample <= sample < seg.end_sample:
                return seg.label
        return self.segments[-1].label if self.segments else "S"


def _sorted(transitions):
    return sorted(transitions, key=lambda t: (t.time, _ORDER[t.kind]))


def _within(a, b, ms):
    return b.time - a.time <= ms / 1000.0 + _EPS


def merge_with_removed(si_t, amp_t, params=MergerParams()):
    """Apply the merger rules; return ``(kept, removed)`` in time order."""
    pooled = _sorted(list(si_t) + list(amp_t))
    removed = []
    seq = []
    silent = True
    for t in pooled:
        if t.kind == SN:
            silent = False
        elif t.kind == NS:
            silent = True
        elif silent:
            # amplitude evidence inside silence: dropped, kind kept for labelling
            removed.append(t)
            continue
        seq.append(t)

    i = 0
    while i < len(seq) - 1:
        a, b = seq[i], seq[i + 1]
        if a.kind == SN and b.kind == LH and _within(a, b, params.sn_lh_ms):
            removed.append(seq.pop(i + 1))
        elif a.kind == SN and b.kind == HL and _within(a, b, params.sn_hl_ms):
            removed.append(seq.pop(i + 1))
        elif a.kind in (LH, HL) and b.kind == NS and _within(a, b, params.amp_ns_ms):
            removed.append(seq.pop(i))
            i = max(i - 1, 0)
        else:
            i += 1
    return seq, _sorted(removed)


def merge_transitions(si_t, amp_t, params=MergerParams()):
    return merge_with_removed(si_t, amp_t, params)[0]


def _majority_label(start, end, evidence, track, hop, window):
    """H or L, whichever the amplitude evidence says covers more of [start, end)."""
    near = [t for t in evidence if start - window <= t.sample <= end + window]
    if near:
        near.sort(key=lambda t: t.sample)
        h_len = l_len = 0
        state = "L" if near[0].kind == LH else "H"
        cursor = start
        for t in near + [None]:
            stop = end if t is None else min(max(t.sample, start), end)
            if stop > cursor:
                if state == "H":
                    h_len += stop - cursor
                else:
                    l_len += stop - cursor
                cursor = stop
            if t is not None:
                state = "H" if t.kind == LH else "L"
        return "H" if h_len >= l_len else "L"
    if track is not None and hop:
        centers = np.arange(len(track)) * hop + hop / 2.0
        inside = (centers >= start) & (centers < end)
        if inside.any():
            return "H" if track.reliable[inside].mean() >= 0.5 else "L"
    return "L"


def assign_classes(merged, duration, sample_rate=16000, evidence=(), track=None, hop=None,
                   utterance_id="", window_ms=20.0):
    """Tile ``[0, duration]`` with S/H/L/HL/LH segments.

    ``evidence`` holds amplitude transitions removed by the merger; together
    with the optional feature ``track`` it decides the H/L label of spans
    bounded by S-N on the left and N-S (or the utterance end) on the right.
    """
    n = int(round(duration * sample_rate))
    seq = list(merged)
    silent = True
    for t in seq:
        if t.kind == SN:
            if not silent:
                raise InconsistentSequence(f"S-N at {t.time:.4f}s follows another S-N")
            silent = False
        elif t.kind == NS:
            if silent:
                raise InconsistentSequence(f"N-S at {t.time:.4f}s while already in silence")
            silent = True
    window = int(round(window_ms * sample_rate / 1000.0))
    evidence = [t for t in evidence if t.kind in (LH, HL)]

    points = [0] + [min(max(t.sample, 0), n) for t in seq] + [n]
    segments = []
    for i in range(len(points) - 1):
        lo, hi = points[i], points[i + 1]
        if hi <= lo:
            continue
        left = seq[i - 1] if i > 0 else None
        right = seq[i] if i < len(seq) else None
        if left is None:
            label = "S"
        elif right is None:
            label = {NS: "S", LH: "H", HL: "L"}.get(left.kind)
            if label is None:
                label = _majority_label(lo, hi, evidence, track, hop, window)
        elif (left.kind, right.kind) == (SN, NS):
            label = _majority_label(lo, hi, evidence, track, hop, window)
        else:
            label = _PAIR_LABEL.get((left.kind, right.kind))
            if label is None:
                raise InconsistentSequence(f"no label for {left.kind} followed by {right.kind}")
        segments.append(ClassSegment(label, lo / sample_rate, hi / sample_rate, lo, hi,
                                     (i - 1, i if right is not None else -1)))
    return Segmentation(utterance_id, sample_rate, n, tuple(segments), tuple(seq),
                        tuple(evidence))
