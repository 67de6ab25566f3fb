"""Scoring detected transitions and class segments against phone labels."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .detector import HL, LH, NS, SN
from .merger import LABELS

CATEGORIES = (
    "vowel", "semivowel", "nasal", "unvoiced_fricative", "voiced_fricative",
    "voiced_stop", "unvoiced_stop", "affricate", "voiced_closure", "unvoiced_closure",
    "other_silence", "excluded",
)

BROAD_CLASSES = {
    "sonorant": ("vowel", "semivowel", "nasal"),
    "non_sonorant": ("unvoiced_fricative", "voiced_fricative", "voiced_stop",
                     "unvoiced_stop", "affricate"),
    "silence": ("other_silence", "voiced_closure", "unvoiced_closure"),
    "voiced_non_sonorant": ("voiced_fricative", "voiced_stop"),
    "unvoiced_non_sonorant": ("unvoiced_fricative", "unvoiced_stop", "affricate"),
}

DEFAULT_TOLERANCES_MS = (5, 10, 15, 20, 25, 30, 35, 40)
DEFAULT_ONSET_TOLERANCES_MS = (20, 30, 40)

_SONORANT = set(BROAD_CLASSES["sonorant"])
_SILENCE = set(BROAD_CLASSES["silence"])
_CLOSURE = {"voiced_closure", "unvoiced_closure"}

# onset type -> (permitted transition types, test on (category, previous category))
ONSET_RULES = {
    "sonorant": ({"L-H", "S-H"},
                 lambda c, p: c in _SONORANT
                 and p in ("unvoiced_fricative", "unvoiced_stop", "affricate")),
    "unvoiced_fricative_affricate": ({"H-L", "S-L"},
                                     lambda c, p: c in ("unvoiced_fricative", "affricate")
                                     and (p in _SONORANT or p in _SILENCE)),
    "stop_closure": ({"L-S", "H-S"},
                     lambda c, p: c in _CLOSURE and p is not None and p not in _SILENCE),
    "burst": ({"S-H", "S-L"},
              lambda c, p: c in ("voiced_stop", "unvoiced_stop") and p in _CLOSURE),
}


_COMMENT = re.compile(r"(^|\s)#.*")


class PhoneClassMap:
    def __init__(self, mapping):
        bad = {c for c in mapping.values() if c not in CATEGORIES}
        if bad:
            raise ValueError(f"unknown phone categories: {sorted(bad)}")
        self.mapping = dict(mapping)

    @classmethod
    def parse(cls, text):
        mapping = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            # "#" opens a comment only at line start or after whitespace ("h#" is a phone)
            line = _COMMENT.sub("", raw).strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"phone map line {lineno}: expected 'phone category'")
            if parts[0] in mapping:
                raise ValueError(f"phone map line {lineno}: {parts[0]!r} listed twice")
            mapping[parts[0]] = parts[1]
        return cls(mapping)

    @classmethod
    def load(cls, path=None):
        if path:
            with open(path, "r", encoding="utf-8") as fh:
                return cls.parse(fh.read())
        return cls.parse(resources.files(__package__).joinpath("timit_phones.txt")
                         .read_text(encoding="utf-8"))

    def category(self, phone):
        return self.mapping.get(phone.lower())

    def broad(self, phone):
        cat = self.category(phone)
        return [name for name, members in BROAD_CLASSES.items() if cat in members]


# --- transition matching ----------------------------------------------------

@dataclass(frozen=True)
class Match:
    detected: object
    boundary: float
    deviation_ms: float


def _time(t):
    return t.time if hasattr(t, "time") else float(t)


def match_transitions(detected, boundaries, nearest_only=False):
    """One-to-one assignment of detections to reference boundaries (seconds).

    Pairs are taken in increasing order of |detected - boundary|; unmatched
    detections are insertions.  With ``nearest_only`` a detection may only
    claim its own nearest boundary, and loses to a closer rival.
    """
    det = [_time(t) for t in detected]
    bnd = [float(b) for b in boundaries]
    if not det or not bnd:
        return [], list(detected)
    d = np.subtract.outer(np.asarray(det), np.asarray(bnd))
    if nearest_only:
        j_best = np.argmin(np.abs(d), axis=1)
        pairs = sorted((abs(d[i, j]), i, j) for i, j in enumerate(j_best))
    else:
        pairs = sorted((abs(d[i, j]), i, j) for i in range(len(det)) for j in range(len(bnd)))
    used_d, used_b = set(), set()
    matches = []
    for _, i, j in pairs:
        if i in used_d or j in used_b:
            continue
        used_d.add(i)
        used_b.add(j)
        matches.append((i, Match(detected[i], bnd[j], float(1000.0 * d[i, j]))))
    matches.sort(key=lambda m: m[0])
    insertions = [detected[i] for i in range(len(det)) if i not in used_d]
    return [m for _, m in matches], insertions


def accuracy_table(matches, tolerances=DEFAULT_TOLERANCES_MS):
    """Percent of matched detections with |deviation| within each tolerance."""
    devs = np.abs([m.deviation_ms if isinstance(m, Match) else m for m in matches])
    return {tol: (100.0 * float(np.sum(devs <= tol + 1e-9)) / devs.size if devs.size else 0.0)
            for tol in tolerances}


def deviation_histogram(deviations_ms, bin_ms=5.0):
    """Counts in bins centred on multiples of ``bin_ms``; returns [(bin_start_ms, count)]."""
    devs = np.asarray(deviations_ms, dtype=np.float64)
    if devs.size == 0:
        return []
    lo = math.floor(devs.min() / bin_ms + 0.5)
    hi = math.floor(devs.max() / bin_ms + 0.5)
    edges = (np.arange(lo, hi + 2) - 0.5) * bin_ms
    counts, _ = np.histogram(devs, bins=edges)
    return [(float(e), int(c)) for e, c in zip(edges[:-1], counts)]


# --- class distribution -------------------------------------------------------

def class_durations(seg, ref, pmap, trim_ms=0.0):
    """Samples of each phone category falling into each class label."""
    trim = int(round(trim_ms * seg.sample_rate / 1000.0))
    starts = np.array([s.start_sample for s in seg.segments])
    out = {}
    for b, e, phone in ref:
        cat = pmap.category(phone)
        if cat is None or cat == "excluded":
            continue
        b, e = b + trim, e - trim
        if e <= b:
            continue
        row = out.setdefault(cat, dict.fromkeys(LABELS, 0))
        i = max(int(np.searchsorted(starts, b, side="right")) - 1, 0)
        covered = 0
        while i < len(seg.segments) and seg.segments[i].start_sample < e:
            s = seg.segments[i]
            ov = min(e, s.end_sample) - max(b, s.start_sample)
            if ov > 0:
                row[s.label] += ov
                covered += ov
            i += 1
        # phone extends past the segmentation (labels longer than the audio)
        if covered < e - b and seg.segments:
            row[seg.segments[-1].label if b < seg.n_samples else "S"] += (e - b) - covered
    return out


def to_percentages(durations):
    table = {}
    for cat, row in durations.items():
        total = sum(row.values())
        if total:
            table[cat] = {lab: 100.0 * row[lab] / total for lab in LABELS}
    return table


def broad_rollup(durations):
    out = {}
    for name, members in BROAD_CLASSES.items():
        row = dict.fromkeys(LABELS, 0)
        for cat in members:
            for lab, v in durations.get(cat, {}).items():
                row[lab] += v
        if sum(row.values()):
            out[name] = row
    return out


def class_distribution(seg, ref, pmap, trim_ms=0.0):
    """Percent of each phone category's duration per class label; rows sum to 100."""
    return to_percentages(class_durations(seg, ref, pmap, trim_ms))


# --- onsets ---------------------------------------------------------------------

def transition_types(seg):
    """``(sample, type)`` for each transition, e.g. S-N followed by H becomes ``S-H``."""
    after = {s.start_sample: s.label for s in seg.segments}
    before = {s.end_sample: s.label for s in seg.segments}
    out = []
    for t in seg.transitions:
        if t.kind == SN:
            out.append((t.sample, "S-" + after.get(t.sample, "S")))
        elif t.kind == NS:
            out.append((t.sample, before.get(t.sample, "S") + "-S"))
        elif t.kind in (LH, HL):
            out.append((t.sample, t.kind))
    return out


def onset_counts(seg, ref, pmap, tolerances=DEFAULT_ONSET_TOLERANCES_MS):
    """Per onset type: (total onsets, {tolerance: onsets hit})."""
    types = transition_types(seg)
    rate = seg.sample_rate
    out = {name: [0, dict.fromkeys(tolerances, 0)] for name in ONSET_RULES}
    entries = list(ref)
    for i, (b, _, phone) in enumerate(entries):
        cat = pmap.category(phone)
        prev = pmap.category(entries[i - 1][2]) if i and entries[i - 1][1] == b else None
        for name, (allowed, rule) in ONSET_RULES.items():
            if not rule(cat, prev):
                continue
            out[name][0] += 1
            dists = [abs(s - b) for s, kind in types if kind in allowed]
            nearest_ms = min(dists) * 1000.0 / rate if dists else math.inf
            for tol in tolerances:
                if nearest_ms <= tol + 1e-9:
                    out[name][1][tol] += 1
    return {k: (v[0], v[1]) for k, v in out.items()}


def onset_accuracy(seg, ref, pmap, tolerances=DEFAULT_ONSET_TOLERANCES_MS):
    """Percent of onsets of each type with a permitted transition within tolerance."""
    return {name: {tol: (100.0 * hits[tol] / total if total else None) for tol in tolerances}
            for name, (total, hits) in onset_counts(seg, ref, pmap, tolerances).items()}


# --- report -----------------------------------------------------------------------

@dataclass
class EvalReport:
    tolerances: tuple = DEFAULT_TOLERANCES_MS
    onset_tolerances: tuple = DEFAULT_ONSET_TOLERANCES_MS
    deviations_ms: list = field(default_factory=list)
    n_detections: int = 0
    n_insertions: int = 0
    n_boundaries: int = 0
    n_utterances: int = 0
    class_samples: dict = field(default_factory=dict)
    onset_totals: dict = field(default_factory=dict)
    onset_hits: dict = field(default_factory=dict)

    def merge(self, other):
        out = EvalReport(self.tolerances, self.onset_tolerances)
        out.deviations_ms = self.deviations_ms + other.deviations_ms
        out.n_detections = self.n_detections + other.n_detections
        out.n_insertions = self.n_insertions + other.n_insertions
        out.n_boundaries = self.n_boundaries + other.n_boundaries
        out.n_utterances = self.n_utterances + other.n_utterances
        for src in (self.class_samples, other.class_samples):
            for cat, row in src.items():
                dst = out.class_samples.setdefault(cat, dict.fromkeys(LABELS, 0))
                for lab, v in row.items():
                    dst[lab] += v
        for src_t, src_h in ((self.onset_totals, self.onset_hits),
                             (other.onset_totals, other.onset_hits)):
            for name, total in src_t.items():
                out.onset_totals[name] = out.onset_totals.get(name, 0) + total
                hits = out.onset_hits.setdefault(name, dict.fromkeys(self.onset_tolerances, 0))
                for tol, v in src_h.get(name, {}).items():
                    hits[tol] = hits.get(tol, 0) + v
        return out

    @property
    def deviation_mean_ms(self):
        return float(np.mean(self.deviations_ms)) if self.deviations_ms else None

    @property
    def deviation_std_ms(self):
        return float(np.std(self.deviations_ms)) if self.deviations_ms else None

    @property
    def accuracy_by_tolerance(self):
        return accuracy_table(self.deviations_ms, self.tolerances)

    @property
    def insertion_rate(self):
        return 100.0 * self.n_insertions / self.n_detections if self.n_detections else 0.0

    @property
    def histogram(self):
        return deviation_histogram(self.deviations_ms)

    @property
    def class_distribution(self):
        return to_percentages(self.class_samples)

    @property
    def broad_class_distribution(self):
        return to_percentages(broad_rollup(self.class_samples))

    @property
    def onset_accuracy(self):
        return {name: {tol: (100.0 * self.onset_hits[name].get(tol, 0) / total if total else None)
                       for tol in self.onset_tolerances}
                for name, total in self.onset_totals.items()}

    def to_dict(self):
        return {
            "n_utterances": self.n_utterances,
            "n_detections": self.n_detections,
            "n_matched": self.n_detections - self.n_insertions,
            "n_insertions": self.n_insertions,
            "n_boundaries": self.n_boundaries,
            "deviation_mean_ms": self.deviation_mean_ms,
            "deviation_std_ms": self.deviation_std_ms,
            "accuracy_by_tolerance": {str(k): v for k, v in self.accuracy_by_tolerance.items()},
            "insertion_rate": self.insertion_rate,
            "histogram": [{"bin_start_ms": b, "count": c} for b, c in self.histogram],
            "class_distribution": self.class_distribution,
            "broad_class_distribution": self.broad_class_distribution,
            "onset_accuracy": {k: {str(t): v for t, v in row.items()}
                               for k, row in self.onset_accuracy.items()},
            "onset_counts": dict(self.onset_totals),
        }


def evaluate_utterance(seg, ref, pmap, tolerances=DEFAULT_TOLERANCES_MS,
                       onset_tolerances=DEFAULT_ONSET_TOLERANCES_MS, nearest_only=False,
                       trim_ms=0.0):
    rate = seg.sample_rate
    bounds = [b / rate for b in ref.boundaries()]
    dets = [t.sample / rate for t in seg.transitions]
    matches, insertions = match_transitions(dets, bounds, nearest_only)
    report = EvalReport(tuple(tolerances), tuple(onset_tolerances))
    report.deviations_ms = [m.deviation_ms for m in matches]
    report.n_detections = len(dets)
    report.n_insertions = len(insertions)
    report.n_boundaries = len(bounds)
    report.n_utterances = 1
    report.class_samples = class_durations(seg, ref, pmap, trim_ms)
    for name, (total, hits) in onset_counts(seg, ref, pmap, onset_tolerances).items():
        report.onset_totals[name] = total
        report.onset_hits[name] = dict(hits)
    return report
