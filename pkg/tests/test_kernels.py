"""The compiled kernels and the numpy fallback must agree exactly."""
import numpy as np
import pytest

from broadclass import _kernels_py

kc = pytest.importorskip("broadclass._kernels")


def _frames(count, length=640, seed=11):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        t = np.arange(length)
        x = sum(rng.uniform(0, 1) * np.sin(2 * np.pi * rng.uniform(0.001, 0.05) * t
                                           + rng.uniform(0, 6.3))
                for _ in range(rng.integers(1, 4)))
        x = x + rng.normal(0, rng.choice([0.0, 0.01, 0.3]), length)
        if rng.uniform() < 0.2:
            x[rng.integers(0, length, 30)] = 0.0
        if rng.uniform() < 0.1:
            x = x + rng.choice([-2.0, 2.0])
        yield np.ascontiguousarray(x)


def test_frame_extrema_agree():
    for x in _frames(500):
        a = _kernels_py.frame_extrema(x, 20, 560)
        b = kc.frame_extrema(x, 20, 560)
        for u, v in zip(a, b):
            np.testing.assert_array_equal(np.asarray(u), np.asarray(v))


def test_extrema_summary_agrees():
    x = np.concatenate(list(_frames(40, 400)))
    starts = np.arange(0, x.size - 640, 80, dtype=np.int64)
    a = _kernels_py.extrema_summary(x, starts, 640)
    b = kc.extrema_summary(x, starts, 640)
    for u, v in zip(a, b):
        np.testing.assert_array_equal(np.asarray(u), np.asarray(v))


def test_silence_counts_agree():
    rng = np.random.default_rng(5)
    mask = (rng.uniform(size=20000) < 0.6).astype(np.uint8)
    starts = np.arange(0, 19800, 37, dtype=np.int64)
    np.testing.assert_array_equal(_kernels_py.silence_counts(mask, starts, 160, 3),
                                  kc.silence_counts(mask, starts, 160, 3))


def test_status_codes_agree():
    assert (kc.STATUS_OK, kc.STATUS_FEW_CROSSINGS, kc.STATUS_NO_EXTREMA) == (
        _kernels_py.STATUS_OK, _kernels_py.STATUS_FEW_CROSSINGS, _kernels_py.STATUS_NO_EXTREMA)


def _backend_name(env_value):
    import os
    import subprocess
    import sys
    env = dict(os.environ, BROADCLASS_PURE_PYTHON=env_value)
    out = subprocess.run([sys.executable, "-c", "import broadclass; print(broadclass.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_environment_forces_fallback():
    assert _backend_name("1") == "python"
    assert _backend_name("0") == "cython"
