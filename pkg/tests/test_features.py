import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from broadclass import _backend, _kernels_py
from broadclass.bandpass import BpfSignal
from broadclass.errors import InsufficientZeroCrossings, NoExtrema
from broadclass.features import (ExtremaSet, FramePlan, ade, compute_track, extract_features,
                                 pfe_ple, select_extrema, silence_index)
from broadclass.signal_io import QuantizedSignal, quantize_samples

from conftest import FS, silence, tone, utterance
from oracles import lobe_extrema, run_counter

BACKENDS = ["python"]
try:
    from broadclass import _kernels as _compiled
    BACKENDS.append("cython")
except ImportError:  # pragma: no cover
    _compiled = None


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    monkeypatch.setattr(_backend, "kernels",
                        _kernels_py if request.param == "python" else _compiled)
    return request.param


def _bpf(x):
    return BpfSignal(np.asarray(x, dtype=np.float64), FS, None)


def random_qframe(rng, n=160):
    choices = np.array([0, 128, -128, 256, -256, 1024, -4096])
    q = rng.choice(choices, n, p=[0.35, 0.15, 0.15, 0.1, 0.1, 0.1, 0.05])
    return q.astype(np.int64)


def random_bpf_frame(rng, n=640):
    t = np.arange(n)
    kind = rng.integers(0, 4)
    if kind == 0:
        x = rng.normal(0, 1, n)
    elif kind == 1:
        x = np.sin(2 * np.pi * rng.uniform(0.002, 0.03) * t + rng.uniform(0, 6.3))
        x *= np.exp(rng.uniform(-3, 3) * t / n)
    elif kind == 2:
        x = rng.normal(0, 0.01, n)
        i = rng.integers(0, n - 60)
        x[i:i + 60] += np.hanning(60) * rng.choice([-1, 1])
    else:
        x = np.round(rng.normal(0, 1, n) * 3) / 3
    return x


# --- silence index -----------------------------------------------------------

def test_silence_index_matches_run_counter(backend):
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        q = random_qframe(rng)
        got = silence_index(QuantizedSignal(q, FS), 0, q.size, 3)
        assert got * q.size == run_counter(q)


def test_silence_index_examples():
    assert silence_index(QuantizedSignal(np.zeros(160, np.int64), FS), 0, 160) == 1.0
    q = np.full(160, 4096, np.int64)
    q[50:52] = 0
    assert silence_index(QuantizedSignal(q, FS), 0, 160) == 0.0


def test_full_scale_sinusoid_is_not_silent():
    q = quantize_samples(tone(200, 1.0, 0.01))
    assert silence_index(QuantizedSignal(q, FS), 0, 160) < 0.1


def test_silence_index_counts_out_of_range_as_silent():
    q = QuantizedSignal(np.full(100, 4096, np.int64), FS)
    assert silence_index(q, -50, 100) == 0.5


# --- extrema ---------------------------------------------------------------------

def _as_pairs(extrema):
    return [(int(i), float(v)) for i, v in extrema]


def test_select_extrema_matches_lobe_oracle(backend):
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(1000):
        x = random_bpf_frame(rng)
        expected = lobe_extrema(x)
        if expected is None:
            with pytest.raises(InsufficientZeroCrossings):
                select_extrema(_bpf(x), 0, x.size)
            continue
        e = select_extrema(_bpf(x), 0, x.size)
        assert _as_pairs(e.maxima) == _as_pairs(expected[0])
        assert _as_pairs(e.minima) == _as_pairs(expected[1])
        assert (e.first_zc, e.last_zc) == expected[2:]
        checked += 1
    assert checked > 900


def test_sinusoid_frame_gives_one_peak_per_cycle():
    x = np.sin(2 * np.pi * np.arange(640) * 3 / 640 - 0.1)  # three cycles
    e = select_extrema(_bpf(x), 0, 640)
    assert len(e.maxima) == 3
    assert len(e.minima) in (2, 3)
    assert all(v == pytest.approx(1.0, abs=1e-3) for _, v in e.maxima)


def test_tiny_lobes_are_thresholded_away():
    x = np.zeros(640)
    for k in range(10):
        x[k * 60 + 5:k * 60 + 35] = (1.0 if k == 4 else 0.01) * np.hanning(30)
        x[k * 60 + 35:k * 60 + 60] = -0.01 * np.hanning(25)
    e = select_extrema(_bpf(x), 0, 640)
    assert [i for i, _ in e.maxima] == [lobe_extrema(x)[0][0][0]]


def test_dc_frame_has_no_crossings():
    with pytest.raises(InsufficientZeroCrossings):
        select_extrema(_bpf(np.full(640, 0.3)), 0, 640)


def test_extrema_set_invariants():
    rng = np.random.default_rng(9)
    for _ in range(200):
        x = random_bpf_frame(rng)
        if lobe_extrema(x) is None:
            continue
        e = select_extrema(_bpf(x), 0, x.size)
        assert all(v > 0 for _, v in e.maxima)
        assert all(v < 0 for _, v in e.minima)
        idx = e.indices()
        assert idx == sorted(set(idx))
        assert all(e.first_zc <= i <= e.last_zc for i in idx)


def _near_threshold(x, rel=1e-9):
    """True if some lobe extremum sits on a pass threshold, where rounding decides survival."""
    frame = [float(v) for v in x]
    crossings = [i for i in range(1, len(frame)) if (frame[i] > 0) != (frame[i - 1] > 0)]
    if len(crossings) < 2:
        return False
    region = frame[crossings[0]:crossings[-1]]
    for sign in (1, -1):
        lobes = [max(sign * v for v in frame[a:b])
                 for a, b in zip(crossings[:-1], crossings[1:]) if (frame[a] > 0) == (sign > 0)]
        samples = [sign * v for v in region if sign * v > 0]
        if not samples or not lobes:
            continue
        t1 = 0.5 * sum(samples) / len(samples)
        kept = [m for m in lobes if m > t1]
        t2 = 0.5 * sum(kept) / len(kept) if kept else None
        for m in lobes:
            for t in (t1, t2):
                if t is not None and abs(m - t) <= rel * max(abs(t), 1e-12):
                    return True
    return False


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(0.01, 100.0))
def test_positive_gain_keeps_extrema_positions(seed, c):
    x = random_bpf_frame(np.random.default_rng(seed))
    assume(lobe_extrema(x) is not None and not _near_threshold(x))
    a = select_extrema(_bpf(x), 0, x.size)
    b = select_extrema(_bpf(c * x), 0, x.size)
    assert a.indices() == b.indices()
    if a.maxima and a.minima:
        assert ade(b) == pytest.approx(c * ade(a), rel=1e-9)


def test_pfe_ple_examples():
    e = ExtremaSet(((220, 1.0),), ((380, -1.0),), 0, 640)
    assert pfe_ple(e, 300, FS) == (-5.0, 5.0)
    e = ExtremaSet(((300, 1.0),), (), 0, 640)
    assert pfe_ple(e, 300, FS) == (0.0, 0.0)
    e = ExtremaSet(((10, 1.0), (100, 2.0)), ((50, -1.0),), 0, 640)
    pfe, ple = pfe_ple(e, 320, FS)
    assert pfe < -10 and ple < -10
    with pytest.raises(NoExtrema):
        pfe_ple(ExtremaSet((), (), 0, 640), 320, FS)


def test_ade_examples():
    assert ade(ExtremaSet(((0, 0.2),), ((5, -0.12),), 0, 9)) == pytest.approx(0.32)
    assert ade(ExtremaSet(((0, 0.7),), ((5, -0.7),), 0, 9)) == pytest.approx(1.4)
    assert ade(ExtremaSet(((0, 0.006),), ((5, -0.004),), 0, 9)) == pytest.approx(0.01)
    with pytest.raises(NoExtrema):
        ade(ExtremaSet(((0, 0.5),), (), 0, 9))


# --- whole-utterance track ---------------------------------------------------------

def test_one_second_gives_200_records(bpf_of):
    u, b = bpf_of(tone(200, 0.5, 1.0))
    recs = extract_features(u, b)
    assert len(recs) == 200
    assert [r.hop_index for r in recs] == list(range(200))
    assert recs[0].center_time == pytest.approx(0.0025)


def test_silent_utterance_has_undefined_features(bpf_of):
    x = silence(0.5)
    x[0] = 1e-3  # avoid a degenerate signal; one click is still silence after quantization
    u, b = bpf_of(x)
    recs = extract_features(u, b)
    assert min(r.si for r in recs) > 0.9


def test_stationary_tone_has_opposite_signs(bpf_of):
    u, b = bpf_of(tone(200, 0.5, 0.5))
    track = compute_track(u, b)
    mid = slice(20, 80)
    assert np.all(track.pfe_ms[mid] < 0) and np.all(track.ple_ms[mid] > 0)
    assert np.all(track.reliable[mid])


def test_voiced_then_unvoiced_frame_has_negative_pfe_and_ple(bpf_of):
    from conftest import highpass_noise
    x = np.concatenate([tone(200, 0.8, 0.4), highpass_noise(0.4, 0.2)])
    u, b = bpf_of(x)
    track = compute_track(u, b)
    k = int(0.4 * FS / 80) + 1  # hop just after the splice
    assert track.pfe_ms[k] < 0 and track.ple_ms[k] < 0


def test_track_invariants(bpf_of):
    rng = np.random.default_rng(1)
    x = np.concatenate([silence(0.1), rng.normal(0, 0.3, 4000), tone(150, 0.6, 0.2)])
    u, b = bpf_of(x)
    t = compute_track(u, b)
    assert np.all((t.si >= 0) & (t.si <= 1))
    both = ~np.isnan(t.pfe_ms) & ~np.isnan(t.ple_ms)
    assert np.all(t.pfe_ms[both] <= t.ple_ms[both])
    np.testing.assert_array_equal(t.reliable, np.nan_to_num(t.ade, nan=-1) >= 0.02)


def test_records_round_trip(bpf_of):
    from broadclass.features import FeatureTrack
    u, b = bpf_of(tone(300, 0.5, 0.2))
    t = compute_track(u, b)
    back = FeatureTrack.from_records(t.records())
    for name in ("si", "pfe_ms", "ple_ms", "ade", "center_time"):
        np.testing.assert_array_equal(getattr(back, name), getattr(t, name))


def test_backends_give_same_track(bpf_of, monkeypatch):
    if _compiled is None:
        pytest.skip("compiled kernels not built")
    rng = np.random.default_rng(4)
    x = np.concatenate([silence(0.1), rng.normal(0, 0.3, 3000), tone(180, 0.5, 0.3)])
    u, b = bpf_of(x)
    tracks = []
    for mod in (_kernels_py, _compiled):
        monkeypatch.setattr(_backend, "kernels", mod)
        tracks.append(compute_track(u, b))
    for name in ("si", "pfe_ms", "ple_ms", "ade"):
        np.testing.assert_array_equal(getattr(tracks[0], name), getattr(tracks[1], name))


@pytest.mark.parametrize("kwargs", [dict(hop_ms=3), dict(si_frame_ms=0), dict(min_silence_run=0)])
def test_frame_plan_validation(kwargs):
    with pytest.raises(ValueError):
        FramePlan(**kwargs)
