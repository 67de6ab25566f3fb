"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--seconds 3.0] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from broadclass import _backend, _kernels_py
from broadclass.bandpass import apply_bandpass
from broadclass.features import FramePlan, compute_track, silence_mask
from broadclass.signal_io import RawAudio, normalize, quantize_samples

try:
    from broadclass import _kernels as compiled
except ImportError:
    compiled = None


def speech_like(seconds, fs=16000, seed=0):
    rng = np.random.default_rng(seed)
    n = int(seconds * fs)
    t = np.arange(n) / fs
    env = (np.sin(2 * np.pi * 2.5 * t) > 0).astype(float)
    x = env * np.sin(2 * np.pi * 180 * t) * 0.6 + (1 - env) * rng.normal(0, 0.1, n)
    return x + rng.normal(0, 1e-3, n)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seconds", type=float, default=3.0, help="utterance length")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    fs = 16000
    u = normalize(RawAudio(speech_like(args.seconds, fs), fs))
    b = apply_bandpass(u)
    hop, si_len, feat_len = FramePlan().layout(fs)
    n_hops = FramePlan().n_hops(len(u), fs)
    x = np.concatenate([np.zeros(feat_len), b.samples, np.zeros(feat_len)])
    feat_starts = np.arange(n_hops, dtype=np.int64) * hop + feat_len - feat_len // 2
    mask = silence_mask(quantize_samples(u.samples))
    si_starts = np.arange(0, mask.size - si_len, hop, dtype=np.int64)

    backends = [("python", _kernels_py)] + ([("cython", compiled)] if compiled else [])
    cases = {
        "extrema_summary": lambda k: k.extrema_summary(x, feat_starts, feat_len),
        "silence_counts": lambda k: k.silence_counts(mask, si_starts, si_len, 3),
    }

    def full_track(k):
        _backend.kernels = k
        compute_track(u, b)

    cases["compute_track"] = full_track

    print(f"{args.seconds:.1f} s utterance, {n_hops} hops, best of {args.repeat}")
    print(f"{'kernel':18}" + "".join(f"{name:>12}" for name, _ in backends) + "     speedup")
    original = _backend.kernels
    try:
        for case, fn in cases.items():
            times = [min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat))
                     for _, k in backends]
            row = f"{case:18}" + "".join(f"{t * 1000:10.2f}ms" for t in times)
            if len(times) == 2:
                row += f"  {times[0] / times[1]:8.1f}x"
            print(row)
    finally:
        _backend.kernels = original
    if compiled is None:
        print("compiled kernels not built; only the fallback was timed")


if __name__ == "__main__":
    main()
