"""Deliberately naive reference implementations used only by the tests."""
import itertools


def run_counter(qframe, step=128, min_run=3):
    """Count samples of |q| <= step that sit in runs of at least ``min_run``."""
    total = 0
    run = 0
    for v in list(qframe) + [step + 1]:
        if abs(int(v)) <= step:
            run += 1
        else:
            if run >= min_run:
                total += run
            run = 0
    return total


def lobe_extrema(frame):
    """Two-pass thresholded lobe extrema, written as plain loops.

    Returns (maxima, minima, first_zc, last_zc) with indices relative to the
    frame, or None when the frame has fewer than two zero crossings.
    """
    x = [float(v) for v in frame]
    crossings = [i for i in range(1, len(x)) if (x[i] > 0) != (x[i - 1] > 0)]
    if len(crossings) < 2:
        return None
    first, last = crossings[0], crossings[-1]

    peaks, valleys = [], []
    for a, b in zip(crossings[:-1], crossings[1:]):
        if x[a] > 0:
            best = a
            for i in range(a, b):
                if x[i] > x[best]:
                    best = i
            peaks.append((best, x[best]))
        else:
            best = a
            for i in range(a, b):
                if x[i] < x[best]:
                    best = i
            if x[best] < 0:
                valleys.append((best, x[best]))

    def mean(values):
        s = 0.0
        for v in values:
            s += v
        return s / len(values)

    def two_pass(items, samples):
        if not samples:
            return []
        t1 = mean(samples)
        kept = [(i, m) for i, m in items if m > 0.5 * t1]
        if not kept:
            return []
        t2 = mean([m for _, m in kept])
        return [(i, m) for i, m in kept if m >= 0.5 * t2]

    region = x[first:last]
    maxima = two_pass(peaks, [v for v in region if v > 0])
    minima = two_pass([(i, -v) for i, v in valleys], [-v for v in region if v < 0])
    return maxima, [(i, -m) for i, m in minima], first, last


def exhaustive_matching(detected, boundaries):
    """Matching whose sorted |deviation| vector is lexicographically smallest.

    Tries every injection of the shorter list into the longer one.  For
    distinct pairwise distances this is the greedy smallest-first matching.
    Returns a set of (detected_index, boundary_index).
    """
    best_key, best = None, set()
    if not detected or not boundaries:
        return best
    n, m = len(detected), len(boundaries)
    k = min(n, m)
    for ds in itertools.combinations(range(n), k):
        for bs in itertools.permutations(range(m), k):
            pairs = list(zip(ds, bs))
            key = sorted(abs(detected[i] - boundaries[j]) for i, j in pairs)
            if best_key is None or key < best_key:
                best_key, best = key, set(pairs)
    return best
