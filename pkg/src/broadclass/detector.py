"""Transition detection on the SI contour and on the PFE/PLE contours."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import FeatureTrack, FramePlan, silence_counts

SN, NS, LH, HL = "S-N", "N-S", "L-H", "H-L"
KINDS = (SN, NS, LH, HL)
STRONG, WEAK, NA = "strong", "weak", "na"


@dataclass(frozen=True)
class Transition:
    kind: str
    strength: str
    time: float
    source: str
    hop_index: int
    sample: int

    @property
    def is_si(self):
        return self.kind in (SN, NS)


@dataclass(frozen=True)
class DetectorParams:
    si_hi: float = 0.6
    si_lo: float = 0.4
    si_resume_lo: float = 0.35
    si_resume_hi: float = 0.7
    si_crossover: float = 0.5
    weak_window_ms: float = 5.0
    far_threshold_ms: float = 5.0
    ade_threshold: float = 0.02
    subseg_ms: float = 1.0


def _track(features):
    return features if isinstance(features, FeatureTrack) else FeatureTrack.from_records(features)


def _qsamples(q):
    return q.qsamples if hasattr(q, "qsamples") else np.asarray(q)


# --- silence / non-silence ------------------------------------------------

def refine_si_sample(q, around_hop, direction, params=DetectorParams(), plan=FramePlan(),
                     lower_bound=-1):
    """Sample index where 1 ms sub-segment SI crosses the crossover level.

    The search covers the hop's SI frame plus one frame on either side, on a
    sub-segment grid aligned to absolute time.  Among crossings in the
    requested direction the one nearest the hop's mid-segment centre wins;
    with none, the centre itself is returned.
    """
    rate = q.sample_rate
    hop, si_len, _ = plan.layout(rate)
    sub = plan.to_samples(params.subseg_ms, rate)
    start = plan.window_start(around_hop, si_len, rate)
    lo = (start - si_len) // sub * sub
    hi = -(-(start + 2 * si_len) // sub) * sub
    starts = np.arange(lo, hi, sub, dtype=np.int64)
    vals = silence_counts(_qsamples(q), starts, sub, plan.min_silence_run) / sub
    c = params.si_crossover
    prev, cur = vals[:-1], vals[1:]
    if direction == "falling":
        hits = (prev >= c) & (cur < c)
    elif direction == "rising":
        hits = (prev < c) & (cur >= c)
    else:
        raise ValueError(f"direction must be 'falling' or 'rising', not {direction!r}")
    candidates = starts[1:][hits]
    candidates = candidates[candidates > lower_bound]
    center = around_hop * hop + hop // 2
    if candidates.size == 0:
        return max(center, lower_bound + 1)
    return int(candidates[np.argmin(np.abs(candidates - center))])


def refine_si_instant(q, around_hop, direction, params=DetectorParams(), plan=FramePlan()):
    return refine_si_sample(q, around_hop, direction, params, plan) / q.sample_rate


def detect_si_transitions(features, q, params=DetectorParams(), plan=FramePlan()):
    """Hysteresis scan of the SI contour, starting in silence."""
    si = _track(features).si
    n = si.size
    if n == 0:
        return []
    # the utterance is taken to start in silence; the tail repeats its last value
    padded = np.concatenate(([1.0], si, [si[-1]]))
    out = []
    silent = True
    last_sample = -1
    for k in range(n):
        before, here, after = padded[k], padded[k + 1], padded[k + 2]
        if silent:
            fire = (before >= params.si_hi and after <= params.si_lo) or here <= params.si_resume_lo
            kind, direction = SN, "falling"
        else:
            fire = (before <= params.si_lo and after >= params.si_hi) or here >= params.si_resume_hi
            kind, direction = NS, "rising"
        if not fire:
            continue
        sample = refine_si_sample(q, k, direction, params, plan, lower_bound=last_sample)
        out.append(Transition(kind, NA, sample / q.sample_rate, "si", k, sample))
        last_sample = sample
        silent = not silent
    return out


# --- high / low amplitude ----------------------------------------------------

def _negative_crossings(values, centers):
    """Positive-to-negative sign changes across defined entries.

    Yields ``(hop, position)`` where ``hop`` is the first entry at or past the
    crossing and ``position`` the crossing location interpolated between hop
    centres (an exact zero entry is itself the crossing).
    """
    last_pos = None
    zero_hop = None
    for h in np.flatnonzero(~np.isnan(values)):
        v = values[h]
        if v > 0:
            last_pos, zero_hop = h, None
        elif v == 0:
            if last_pos is not None and zero_hop is None:
                zero_hop = h
        else:
            if last_pos is not None:
                if zero_hop is not None:
                    yield int(zero_hop), float(centers[zero_hop])
                else:
                    vp = values[last_pos]
                    frac = vp / (vp - v)
                    yield int(h), float(centers[last_pos] + frac * (centers[h] - centers[last_pos]))
            last_pos, zero_hop = None, None


def _local_extrema(values, sign):
    """First hop of each plateau strictly above (sign=+1) or below (-1) both neighbours."""
    hops = np.flatnonzero(~np.isnan(values))
    runs = []
    for h in hops:
        if runs and values[h] == runs[-1][1]:
            continue
        runs.append((int(h), float(values[h])))
    for i in range(1, len(runs) - 1):
        v = runs[i][1] * sign
        if v > runs[i - 1][1] * sign and v > runs[i + 1][1] * sign:
            yield runs[i][0]


def bpf_zero_crossings(samples):
    pos = np.asarray(samples) > 0
    return np.flatnonzero(pos[1:] != pos[:-1]) + 1


def _nearest(crossings, target):
    if crossings.size == 0:
        return int(round(target))
    j = int(np.searchsorted(crossings, target))
    best = None
    for c in crossings[max(j - 1, 0):j + 1]:
        if best is None or abs(c - target) < abs(best - target):
            best = int(c)
    return best


def detect_amplitude_transitions(features, b, params=DetectorParams(), plan=FramePlan()):
    """Strong/weak L-H and H-L candidates from the PFE/PLE contours, ADE gated."""
    track = _track(features)
    rate = b.sample_rate
    hop = plan.to_samples(plan.hop_ms, rate)
    centers = np.arange(len(track)) * hop + hop / 2.0
    pfe, ple = track.pfe_ms, track.ple_ms
    far, near = params.far_threshold_ms, params.weak_window_ms
    with np.errstate(invalid="ignore"):
        reliable = track.ade >= params.ade_threshold

    cands = []  # (hop, rank, kind, strength, source, target_sample)
    for h, pos in _negative_crossings(pfe, centers):
        if ple[h] >= far:
            cands.append((h, 0, LH, STRONG, "pfe", pos))
    for h, pos in _negative_crossings(ple, centers):
        if pfe[h] <= -far:
            cands.append((h, 0, HL, STRONG, "ple", pos))
    # weak rules: a contour extremum that approaches the reference without a sign change
    for h in _local_extrema(pfe, +1):
        if -near <= pfe[h] <= 0 and ple[h] >= far:
            cands.append((h, 1, LH, WEAK, "pfe", centers[h]))
    for h in _local_extrema(ple, -1):
        if 0 <= ple[h] <= near and pfe[h] <= -far:
            cands.append((h, 1, HL, WEAK, "ple", centers[h]))

    cands = [c for c in cands if reliable[c[0]]]
    cands.sort(key=lambda c: (c[0], c[1], KINDS.index(c[2])))
    crossings = bpf_zero_crossings(b.samples)
    out = []
    used_hops = set()
    for h, _, kind, strength, source, target in cands:
        if h in used_hops:
            continue
        used_hops.add(h)
        sample = _nearest(crossings, target)
        out.append(Transition(kind, strength, sample / rate, source, h, sample))
    out.sort(key=lambda t: (t.sample, t.strength != STRONG))
    unique = []
    for t in out:
        if unique and unique[-1].sample == t.sample:
            continue
        unique.append(t)
    return unique

