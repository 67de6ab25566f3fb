import numpy as np
import pytest

from broadclass.bandpass import apply_bandpass
from broadclass.signal_io import RawAudio, normalize

FS = 16000


def tone(freq, amp, seconds, fs=FS, phase=0.0):
    t = np.arange(int(round(seconds * fs))) / fs
    return amp * np.sin(2 * np.pi * freq * t + phase)


def silence(seconds, fs=FS, level=0.0, seed=0):
    n = int(round(seconds * fs))
    if level == 0.0:
        return np.zeros(n)
    return np.random.default_rng(seed).normal(0.0, level, n)


def highpass_noise(seconds, amp, cutoff=1000.0, fs=FS, seed=1):
    """White noise with everything below ``cutoff`` removed."""
    n = int(round(seconds * fs))
    x = np.random.default_rng(seed).normal(0.0, 1.0, n)
    spec = np.fft.rfft(x)
    spec[np.fft.rfftfreq(n, 1 / fs) < cutoff] = 0.0
    y = np.fft.irfft(spec, n)
    return amp * y / np.max(np.abs(y))


def to_int16(x):
    return np.round(np.asarray(x) * 32767).astype(np.int16)


def utterance(x, fs=FS, uid=""):
    return normalize(RawAudio(to_int16(x), fs), uid)


@pytest.fixture
def tone_in_silence():
    """300 ms silence, 400 ms of 200 Hz at 0.5, 300 ms silence."""
    return np.concatenate([silence(0.3), tone(200, 0.5, 0.4), silence(0.3)])


@pytest.fixture
def bpf_of():
    def make(x, fs=FS):
        u = utterance(x, fs)
        return u, apply_bandpass(u)
    return make
