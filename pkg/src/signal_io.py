"""
신호 입출력 - WAV/CSV 로드와 해석적 테스트 신호 합성
"""
import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.io import wavfile
from scipy.special import erfc

from .error_handler import SignalFormatError
from .logger import get_logger
from .models import Signal, SignalKind

logger = get_logger("SignalIO")

# 창 밖 꼬리 질량 경고 기준
TAIL_MASS_WARNING = 1e-12


def gaussian(t: np.ndarray) -> np.ndarray:
    """φ(t) = e^{-πt²}"""
    return np.exp(-np.pi * np.asarray(t, dtype=np.float64) ** 2)


def load_signal(path: str, fmt: Optional[str] = None, normalize: bool = False) -> Signal:
    """WAV(16비트 모노) 또는 CSV 신호 로드"""
    path = Path(path)
    if not path.is_file():
        raise SignalFormatError(f"파일을 찾을 수 없습니다: {path}")

    fmt = (fmt or path.suffix.lstrip(".")).lower()
    if fmt == "wav":
        signal = _load_wav(path)
    elif fmt in ("csv", "txt"):
        signal = _load_csv(path)
    else:
        raise SignalFormatError(f"지원하지 않는 형식: {fmt}")

    if normalize:
        peak = float(np.max(np.abs(signal.samples)))
        if peak > 0:
            signal = signal.scaled(1.0 / peak)
    logger.debug(f"신호 로드: {path.name}, n={signal.n}, dt={signal.dt:g}")
    return signal


def _load_wav(path: Path) -> Signal:
    """16비트 PCM 모노 WAV → [-1, 1) 실수 신호"""
    try:
        rate, data = wavfile.read(str(path))
    except ValueError as e:
        raise SignalFormatError(f"WAV 파일을 읽을 수 없습니다: {e}")
    if data.ndim != 1:
        raise SignalFormatError(f"multi-channel WAV는 지원하지 않습니다 (채널 {data.shape[1]}개)")
    if data.dtype != np.int16:
        raise SignalFormatError(f"16-bit PCM만 지원합니다 (dtype={data.dtype})")
    return Signal(data.astype(np.float64) / 32768.0, dt=1.0 / rate, t0=0.0)


def _load_csv(path: Path) -> Signal:
    """한 줄에 실수 하나 또는 (re, im) 쌍. 선택적 헤더 'dt=<float>[,t0=<float>]'"""
    dt, t0 = 1.0, 0.0
    values = []
    with open(path, 'r', encoding='utf-8') as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("dt="):
                try:
                    header = dict(item.split("=", 1) for item in line.split(","))
                    dt = float(header["dt"])
                    t0 = float(header.get("t0", 0.0))
                except (KeyError, ValueError):
                    raise SignalFormatError(f"잘못된 헤더 (line {line_no}): {line}")
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) not in (1, 2):
                raise SignalFormatError(f"line {line_no}: 값은 1개 또는 2개여야 합니다")
            try:
                re_part = float(parts[0])
                im_part = float(parts[1]) if len(parts) == 2 else 0.0
            except ValueError:
                raise SignalFormatError(f"line {line_no}: 숫자가 아닙니다: {line}")
            if not (math.isfinite(re_part) and math.isfinite(im_part)):
                raise SignalFormatError(f"non-finite sample at line {line_no}")
            values.append(complex(re_part, im_part))

    if len(values) < 2:
        raise SignalFormatError("CSV 신호의 샘플이 2개 미만입니다")
    return Signal(np.array(values, dtype=np.complex128), dt=dt, t0=t0)


def save_signal_csv(signal: Signal, path: str) -> Path:
    """신호를 CSV로 저장 (헤더 dt, t0 + 줄마다 re,im)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.column_stack([signal.samples.real, signal.samples.imag])
    np.savetxt(path, data, fmt="%.17g", delimiter=",",
               header=f"dt={signal.dt!r},t0={signal.t0!r}", comments="")
    return path


def centered_times(n: int, dt: float) -> np.ndarray:
    """t=0이 격자점에 오는 중앙 정렬 시간 격자"""
    return (np.arange(n) - n // 2) * dt


def synthesize(kind: SignalKind, a: float = 0.0, b: float = 0.0,
               n: int = 512, dt: float = 0.0625) -> Signal:
    """해석적 테스트 신호 합성"""
    kind = SignalKind(kind)
    if n < 16:
        raise SignalFormatError("합성 신호 길이 n은 16 이상이어야 합니다")
    if not dt > 0:
        raise SignalFormatError("dt는 양수여야 합니다")

    t = centered_times(n, dt)
    if kind == SignalKind.GAUSSIAN:
        samples = gaussian(t).astype(np.complex128)
        centers = [0.0]
    elif kind == SignalKind.GAUSSIAN_PAIR_PLUS:
        samples = (gaussian(t + a) + gaussian(t - a)).astype(np.complex128)
        centers = [-a, a]
    elif kind == SignalKind.GAUSSIAN_PAIR_MINUS:
        samples = (gaussian(t + a) - gaussian(t - a)).astype(np.complex128)
        centers = [-a, a]
    else:
        samples = gaussian(t) * np.exp(2j * np.pi * b * t)
        centers = [0.0]

    _check_tail_mass(t, centers)
    return Signal(samples, dt=dt, t0=float(t[0]))


def gaussian_mixture(centers: Sequence[float], modulations: Sequence[float],
                     amplitudes: Sequence[complex], n: int = 512, dt: float = 0.0625) -> Signal:
    """Σ c_k·e^{2πi b_k t}·φ(t − a_k) 형태의 가우시안 혼합 신호"""
    if not (len(centers) == len(modulations) == len(amplitudes)) or len(centers) == 0:
        raise SignalFormatError("centers, modulations, amplitudes 길이가 같아야 합니다")
    t = centered_times(n, dt)
    samples = np.zeros(n, dtype=np.complex128)
    for a, b, c in zip(centers, modulations, amplitudes):
        samples += complex(c) * gaussian(t - a) * np.exp(2j * np.pi * b * t)
    _check_tail_mass(t, list(centers))
    return Signal(samples, dt=dt, t0=float(t[0]))


def random_mixture(rng: np.random.Generator, components: int = 3, spread: float = 1.5,
                   n: int = 512, dt: float = 0.0625) -> Signal:
    """무작위 가우시안 혼합 (고정 시드 Generator 사용)"""
    centers = rng.uniform(-spread, spread, components)
    modulations = rng.uniform(-spread, spread, components)
    amplitudes = rng.uniform(0.5, 1.0, components) * np.exp(2j * np.pi * rng.uniform(0, 1, components))
    return gaussian_mixture(centers, modulations, amplitudes, n=n, dt=dt)


def _check_tail_mass(t: np.ndarray, centers: Sequence[float]) -> None:
    """창 밖에 남는 |φ|² 질량 비율이 기준을 넘으면 경고"""
    t_min, t_max = float(t[0]), float(t[-1])
    worst = 0.0
    for c in centers:
        # ∫_T^∞ e^{-2πs²}ds / ∫ e^{-2πs²}ds = ½·erfc(√(2π)·T)
        left = 0.5 * erfc(math.sqrt(2 * math.pi) * (c - t_min))
        right = 0.5 * erfc(math.sqrt(2 * math.pi) * (t_max - c))
        worst = max(worst, left + right)
    if worst > TAIL_MASS_WARNING:
        logger.warning(f"샘플 창이 짧습니다: 꼬리 질량 {worst:.2e} > {TAIL_MASS_WARNING:g}")
