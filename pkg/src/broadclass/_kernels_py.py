"""Pure numpy implementations of the per-frame kernels.

Same signatures and results as the compiled ``_kernels`` module; used when the
extension is not built or ``BROADCLASS_PURE_PYTHON=1`` is set.

Zero crossings: index ``i`` is a crossing when ``x[i] > 0`` differs from
``x[i-1] > 0`` (zero counts as non-positive).  A lobe is the span between two
successive crossings.  Status codes: 0 ok, 1 fewer than two crossings,
2 no surviving extremum.
"""
import numpy as np

STATUS_OK = 0
STATUS_FEW_CROSSINGS = 1
STATUS_NO_EXTREMA = 2


def silence_counts(mask, starts, frame_len, min_run):
    """Number of masked samples lying in in-frame runs of at least ``min_run``."""
    mask = np.asarray(mask, dtype=np.uint8)
    out = np.zeros(len(starts), dtype=np.int64)
    for f, s in enumerate(starts):
        m = mask[s:s + frame_len].astype(np.int8)
        edges = np.diff(np.concatenate(([0], m, [0])))
        run_starts = np.flatnonzero(edges == 1)
        run_ends = np.flatnonzero(edges == -1)
        lengths = run_ends - run_starts
        out[f] = lengths[lengths >= min_run].sum()
    return out


def _mean(a):
    # sequential accumulation, matching the compiled kernel bit for bit
    return float(np.cumsum(a)[-1]) / a.size


def _select(idx, mag, first_threshold):
    keep = mag > 0.5 * first_threshold
    idx, mag = idx[keep], mag[keep]
    if mag.size == 0:
        return idx, mag
    keep = mag >= 0.5 * _mean(mag)
    return idx[keep], mag[keep]


def frame_extrema(x, start, length):
    """Two-pass thresholded lobe extrema of ``x[start:start+length]``.

    Returns ``(max_idx, max_val, min_idx, min_val, first_zc, last_zc)`` with
    indices into ``x``; ``first_zc == last_zc == -1`` when the frame has fewer
    than two zero crossings.
    """
    x = np.asarray(x, dtype=np.float64)
    seg = x[start:start + length]
    pos = seg > 0
    zc = np.flatnonzero(pos[1:] != pos[:-1]) + 1
    empty_i = np.zeros(0, dtype=np.int64)
    empty_f = np.zeros(0, dtype=np.float64)
    if zc.size < 2:
        return empty_i, empty_f, empty_i, empty_f, -1, -1
    first, last = int(zc[0]), int(zc[-1])
    region = seg[first:last]
    offsets = zc[:-1] - first
    lengths = np.diff(zc)
    positive = region[offsets] > 0
    maxv = np.maximum.reduceat(region, offsets)
    minv = np.minimum.reduceat(region, offsets)
    target = np.where(positive, maxv, minv)
    lobe_id = np.repeat(np.arange(offsets.size), lengths)
    hits = np.flatnonzero(region == target[lobe_id])
    _, first_hit = np.unique(lobe_id[hits], return_index=True)
    arg = hits[first_hit] + first + start

    pos_samples = region[region > 0]
    neg_samples = -region[region < 0]

    if pos_samples.size:
        max_idx, max_mag = _select(arg[positive], maxv[positive], _mean(pos_samples))
    else:
        max_idx, max_mag = empty_i, empty_f
    neg_lobe = ~positive & (minv < 0)
    if neg_samples.size:
        min_idx, min_mag = _select(arg[neg_lobe], -minv[neg_lobe], _mean(neg_samples))
    else:
        min_idx, min_mag = empty_i, empty_f
    return (max_idx.astype(np.int64), max_mag.astype(np.float64),
            min_idx.astype(np.int64), -min_mag.astype(np.float64),
            first + start, last + start)


def extrema_summary(x, starts, length):
    """Per-frame (first extremum index, last extremum index, ADE, status)."""
    n = len(starts)
    first_idx = np.full(n, -1, dtype=np.int64)
    last_idx = np.full(n, -1, dtype=np.int64)
    ade = np.full(n, np.nan)
    status = np.zeros(n, dtype=np.int8)
    for f, s in enumerate(starts):
        mi, mv, ni, nv, fz, _ = frame_extrema(x, int(s), length)
        if fz < 0:
            status[f] = STATUS_FEW_CROSSINGS
            continue
        if mi.size == 0 and ni.size == 0:
            status[f] = STATUS_NO_EXTREMA
            continue
        both = np.concatenate((mi, ni))
        first_idx[f] = both.min()
        last_idx[f] = both.max()
        k = min(mi.size, ni.size)
        if k:
            ade[f] = _mean(np.abs(mv[:k] - nv[:k]))
    return first_idx, last_idx, ade, status
