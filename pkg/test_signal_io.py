#!/usr/bin/env python3
"""
신호 입출력 테스트
"""
import sys
import tempfile
from pathlib import Path

import numpy as np
from scipy.io import wavfile

sys.path.insert(0, str(Path(__file__).parent))

from src.error_handler import SignalFormatError
from src.models import Signal, SignalKind
from src.signal_io import gaussian_mixture, load_signal, random_mixture, save_signal_csv, synthesize


def _raises(exc_type, func, *args, **kwargs):
    try:
        func(*args, **kwargs)
    except exc_type as e:
        return e
    raise AssertionError(f"{exc_type.__name__}가 발생하지 않았습니다")


def test_synthesize_gaussian_is_centered():
    f = synthesize(SignalKind.GAUSSIAN, n=512, dt=0.0625)
    assert f.n == 512
    assert f.t0 == -16.0
    assert abs(f.samples[256] - 1.0) < 1e-15
    k = np.arange(1, 256)
    assert np.array_equal(f.samples[256 - k], f.samples[256 + k])


def test_gaussian_pair_signs():
    a = 2.0
    plus = synthesize(SignalKind.GAUSSIAN_PAIR_PLUS, a=a)
    minus = synthesize(SignalKind.GAUSSIAN_PAIR_MINUS, a=a)
    i_left = 256 - 32  # t = -2
    i_right = 256 + 32  # t = +2
    assert abs(plus.samples[i_left] - plus.samples[i_right]) < 1e-15
    assert abs(minus.samples[i_left] + minus.samples[i_right]) < 1e-15
    assert minus.samples[i_left].real > 0.99


def test_modulated_gaussian_magnitude():
    f = synthesize(SignalKind.MODULATED_GAUSSIAN, b=1.5)
    g = synthesize(SignalKind.GAUSSIAN)
    assert np.allclose(np.abs(f.samples), np.abs(g.samples), atol=1e-15)
    assert np.max(np.abs(f.samples.imag)) > 0.5


def test_gaussian_energy():
    f = gaussian_mixture([0.0], [0.0], [1.0])
    # ∫e^{-2πt²}dt = 2^{-1/2}
    assert abs(f.energy - 2 ** -0.5) < 1e-12


def test_random_mixture_is_deterministic():
    f1 = random_mixture(np.random.default_rng(7))
    f2 = random_mixture(np.random.default_rng(7))
    f3 = random_mixture(np.random.default_rng(8))
    assert np.array_equal(f1.samples, f2.samples)
    assert not np.array_equal(f1.samples, f3.samples)


def test_csv_roundtrip_keeps_header():
    f = gaussian_mixture([0.5, -1.0], [0.25, 1.0], [1.0, 0.5j])
    with tempfile.TemporaryDirectory() as tmp:
        path = save_signal_csv(f, str(Path(tmp) / "f.csv"))
        g = load_signal(str(path))
    assert g.dt == f.dt
    assert g.t0 == f.t0
    assert np.array_equal(g.samples, f.samples)


def test_csv_without_header_defaults_dt():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "plain.txt"
        path.write_text("1.0\n2.0, 0.5\n\n3.0\n", encoding="utf-8")
        f = load_signal(str(path))
    assert f.dt == 1.0 and f.t0 == 0.0
    assert np.array_equal(f.samples, np.array([1.0, 2.0 + 0.5j, 3.0]))


def test_csv_rejects_non_finite():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "bad.csv"
        path.write_text("dt=0.5\n1.0\nnan\n", encoding="utf-8")
        err = _raises(SignalFormatError, load_signal, str(path))
    assert "non-finite sample at line 3" in str(err)
    assert err.error_code == "signal_format"


def test_wav_int16_mono():
    data = np.array([0, 16384, -32768, 32767], dtype=np.int16)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "s.wav"
        wavfile.write(str(path), 16, data)
        f = load_signal(str(path))
        g = load_signal(str(path), normalize=True)
    assert f.dt == 1 / 16
    assert np.allclose(f.samples.real, [0.0, 0.5, -1.0, 32767 / 32768])
    assert abs(np.max(np.abs(g.samples)) - 1.0) < 1e-15


def test_wav_rejects_stereo_and_float():
    with tempfile.TemporaryDirectory() as tmp:
        stereo = Path(tmp) / "stereo.wav"
        wavfile.write(str(stereo), 8000, np.zeros((10, 2), dtype=np.int16))
        err = _raises(SignalFormatError, load_signal, str(stereo))
        assert "multi-channel" in str(err)

        floats = Path(tmp) / "float.wav"
        wavfile.write(str(floats), 8000, np.zeros(10, dtype=np.float32))
        _raises(SignalFormatError, load_signal, str(floats))


def test_unknown_format_and_missing_file():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "x.mp3"
        path.write_bytes(b"\x00")
        _raises(SignalFormatError, load_signal, str(path))
        _raises(SignalFormatError, load_signal, str(Path(tmp) / "none.csv"))


def test_signal_validation():
    _raises(SignalFormatError, Signal, np.array([1.0]), 1.0)
    _raises(SignalFormatError, Signal, np.array([1.0, 2.0]), 0.0)
    _raises(SignalFormatError, Signal, np.array([1.0, np.inf]), 1.0)
    # SignalFormatError는 ValueError이기도 함
    _raises(ValueError, synthesize, SignalKind.GAUSSIAN, n=8)


TESTS = [
    test_synthesize_gaussian_is_centered,
    test_gaussian_pair_signs,
    test_modulated_gaussian_magnitude,
    test_gaussian_energy,
    test_random_mixture_is_deterministic,
    test_csv_roundtrip_keeps_header,
    test_csv_without_header_defaults_dt,
    test_csv_rejects_non_finite,
    test_wav_int16_mono,
    test_wav_rejects_stereo_and_float,
    test_unknown_format_and_missing_file,
    test_signal_validation,
]


def main():
    """메인 함수"""
    print("=== 신호 입출력 테스트 ===")
    failed = 0
    for test in TESTS:
        try:
            test()
            print(f"✓ {test.__name__}")
        except Exception as e:
            failed += 1
            print(f"✗ {test.__name__}: {type(e).__name__}: {e}")
    print(f"\n=== {len(TESTS) - failed}/{len(TESTS)} 통과 ===")
    return 0 if failed == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
