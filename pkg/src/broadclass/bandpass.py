"""Zero-phase bell-cosine bandpass filter applied in the frequency domain."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpecInvalidForRate

# Extra zero padding before rounding up to a power of two, so the circular
# convolution implied by the FFT does not wrap the filter tails back into the
# utterance.
GUARD_SECONDS = 0.1


@dataclass(frozen=True)
class BandpassSpec:
    f1: float = 70.0
    f2: float = 500.0

    def validate(self, sample_rate):
        if not (0 < self.f1 / 2 < self.f1 <= self.f2 / 2 < self.f2 < sample_rate / 2):
            raise SpecInvalidForRate(
                f"band f1={self.f1} Hz, f2={self.f2} Hz is invalid at {sample_rate} Hz")


@dataclass(frozen=True, eq=False)
class BpfSignal:
    samples: np.ndarray
    sample_rate: int
    spec: BandpassSpec

    def __post_init__(self):
        a = np.array(self.samples, dtype=np.float64)
        a.setflags(write=False)
        object.__setattr__(self, "samples", a)

    def __len__(self):
        return self.samples.size


def filter_response(f, spec=BandpassSpec()):
    """Gain of the bell-cosine band at frequency ``f`` (Hz); scalar or array."""
    f = np.asarray(f, dtype=np.float64)
    lo, hi = spec.f1 / 2, spec.f2 / 2
    gain = np.zeros_like(f)
    rise = (f >= lo) & (f < spec.f1)
    gain[rise] = 0.5 - 0.5 * np.cos(np.pi * (f[rise] - lo) / lo)
    gain[(f >= spec.f1) & (f <= hi)] = 1.0
    fall = (f > hi) & (f <= spec.f2)
    gain[fall] = 0.5 + 0.5 * np.cos(np.pi * (f[fall] - hi) / hi)
    return gain if gain.ndim else float(gain)


def fft_length(n, sample_rate):
    need = n + int(np.ceil(GUARD_SECONDS * sample_rate))
    return 1 << int(np.ceil(np.log2(max(need, 2))))


def bandpass_samples(x, sample_rate, spec=BandpassSpec()):
    spec.validate(sample_rate)
    x = np.asarray(x, dtype=np.float64)
    nfft = fft_length(x.size, sample_rate)
    spectrum = np.fft.rfft(x, nfft)
    # rfft bins cover the non-negative half axis; irfft mirrors the real gain
    spectrum *= filter_response(np.fft.rfftfreq(nfft, 1.0 / sample_rate), spec)
    return np.fft.irfft(spectrum, nfft)[:x.size]


def apply_bandpass(u, spec=BandpassSpec()):
    return BpfSignal(bandpass_samples(u.samples, u.sample_rate, spec), u.sample_rate, spec)
