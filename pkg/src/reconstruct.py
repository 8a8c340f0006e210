"""
스펙트로그램으로부터의 신호 재구성

스펙트로그램의 (부호 변형) 푸리에 변환이 모호 함수의 곱으로 인수분해되는 성질,
𝓕̃S(ξ, η) = 𝒜f(η, ξ)·conj(𝒜φ(η, ξ)),  𝓕̃S(ξ, η) := ∬ S(x, y)·e^{-2πi(xξ - yη)} dx dy,
을 이용해 𝒜f를 복원하고 대각선 f(t)·conj f(0)을 읽습니다.

모든 격자 연산은 자기 쌍대 격자 (N·Δ² = 1, 정사각, x0 = y0) 위에서 이루어집니다.
"""
import math

import numpy as np
import scipy.fft

from .error_handler import GridError, ReconstructionError
from .gabor_core import DEFAULT_T_CUT, PHI_NORM_SQ, ambiguity, dgt, gaussian_ambiguity_closed_form
from .logger import get_logger
from .models import ReconstructionConfig, Regularization, Signal, TfGrid

logger = get_logger("Reconstruct")

# |f(0)|² / ‖f‖² 하한
ORIGIN_TOL = 1e-6


def _check_self_dual(grid: TfGrid) -> int:
    """자기 쌍대 격자 확인, 원점 인덱스 반환"""
    if not grid.is_self_dual:
        raise GridError(f"재구성에는 N·Δ² = 1인 정사각 격자가 필요합니다 ({grid.nx}x{grid.ny}, Δ={grid.delta:g})")
    if abs(grid.x0 - grid.y0) > 1e-12:
        raise GridError("재구성 격자는 x0 = y0 이어야 합니다")
    m0 = -grid.x0 / grid.delta
    if abs(m0 - round(m0)) > 1e-9 or not 0 <= round(m0) < grid.nx:
        raise GridError("원점이 격자점이 아닙니다")
    return int(round(m0))


def _lattice_dft(A: np.ndarray, grid: TfGrid, sign: int, axis: int, workers: int = 1) -> np.ndarray:
    """out[k] = Δ·Σ_i A[i]·e^{sign·2πi c_i c_k},  c_i = c0 + iΔ

    c_i c_k = c0² + c0Δ(i + k) + ik/N 로 분해해 FFT로 계산합니다.
    """
    n, d, c0 = grid.nx, grid.delta, grid.x0
    idx = np.arange(n)
    shape = [1, 1]
    shape[axis] = n
    pre = np.exp(sign * 2j * np.pi * c0 * d * idx).reshape(shape)
    post = (np.exp(sign * 2j * np.pi * (c0 ** 2 + c0 * d * idx)) * d).reshape(shape)
    if sign < 0:
        transformed = scipy.fft.fft(A * pre, axis=axis, workers=workers)
    else:
        transformed = scipy.fft.ifft(A * pre, axis=axis, workers=workers) * n
    return transformed * post


def spectrogram_transform(S: np.ndarray, grid: TfGrid, workers: int = 1) -> np.ndarray:
    """𝓕̃S[k, l] = 𝓕̃S(c_k, c_l)"""
    _check_self_dual(grid)
    A = _lattice_dft(np.asarray(S, dtype=np.complex128), grid, -1, axis=0, workers=workers)
    return _lattice_dft(A, grid, +1, axis=1, workers=workers)


def verify_factorization(f: Signal, grid: TfGrid, t_cut: float = DEFAULT_T_CUT, workers: int = 1) -> float:
    """‖𝓕̃|V_φf|² - S(𝒜f·conj 𝒜φ)‖ / ‖S(𝒜f·conj 𝒜φ)‖ (둘 다 0이면 0)"""
    _check_self_dual(grid)
    V = dgt(f, grid, t_cut, workers)
    lhs = spectrogram_transform(np.abs(V.values) ** 2, grid, workers)
    A = ambiguity(f, grid, workers)
    rhs = (A.values * np.conj(gaussian_ambiguity_closed_form(grid).values)).T
    denom = float(np.linalg.norm(rhs))
    num = float(np.linalg.norm(lhs - rhs))
    if denom == 0:
        return 0.0 if num == 0 else math.inf
    residual = num / denom
    logger.debug(f"인수분해 잔차: {residual:.3e}")
    return residual


def default_tau_reg(noise_level: float = 0.0, max_amb: float = PHI_NORM_SQ) -> float:
    """잡음 없음: 1e-8, 잡음 수준 ν: 10·ν / max|𝒜φ|"""
    if noise_level <= 0:
        return 1e-8
    return 10.0 * noise_level / max_amb


def reconstruct_from_spectrogram(S: np.ndarray, cfg: ReconstructionConfig, workers: int = 1) -> Signal:
    """S = |V_φf|² 에서 전역 위상을 제외하고 f 복원"""
    grid = cfg.grid
    m0 = _check_self_dual(grid)
    S = np.asarray(S, dtype=np.float64)
    if S.shape != grid.shape:
        raise GridError(f"스펙트로그램 크기 {S.shape}가 격자 {grid.shape}와 다릅니다")
    if not np.all(np.isfinite(S)) or np.any(S < 0):
        raise ReconstructionError("스펙트로그램은 유한한 음이 아닌 값이어야 합니다")

    # (1)-(2) 변환 후 좌표 교환: amb[a, b] ≈ 𝒜f(c_a, c_b)·conj 𝒜φ(c_a, c_b)
    amb = spectrogram_transform(S, grid, workers).T

    # (3) conj(𝒜φ)로 나눗셈 (정규화)
    D = np.conj(gaussian_ambiguity_closed_form(grid).values)
    absD = np.abs(D)
    within = grid.radius() <= cfg.radius_cap
    if cfg.regularization == Regularization.THRESHOLD:
        keep = within & (absD >= cfg.tau_reg * absD.max())
        safe = np.where(keep, D, 1.0)
        amb_f = np.where(keep, amb / safe, 0.0)
    else:
        amb_f = np.where(within, amb * np.conj(D) / (absD ** 2 + cfg.tau_reg ** 2), 0.0)

    # (4) 두 번째 좌표 역변환: K[a, m] = f(c_m)·conj f(c_m - c_a)
    K = _lattice_dft(amb_f, grid, +1, axis=1, workers=workers)

    # (5) 대각선 g(t) = f(t)·conj f(0)
    g = np.diagonal(K).copy()
    g0 = g[m0]
    # 𝒜f(0, 0) = ‖f‖²
    energy = float(np.abs(amb_f[m0, m0]))
    peak = float(np.abs(g).max())
    if peak == 0 or abs(g0) < 1e-12 * peak or abs(g0) < ORIGIN_TOL * energy:
        raise ReconstructionError("f(0) ≈ 0; translate input first")

    # (6) 정규화와 위상 고정
    out = g / math.sqrt(abs(g0))
    k = int(np.argmax(np.abs(out)))
    out = out * np.exp(-1j * np.angle(out[k]))
    logger.debug(f"재구성 완료: {cfg.regularization.value}, tau={cfg.tau_reg:g}")
    return Signal(out, dt=grid.delta, t0=grid.x0)


def add_spectrogram_noise(S: np.ndarray, level: float, seed: int = 42) -> np.ndarray:
    """S + level·max(S)·N(0, 1), 0에서 절단"""
    S = np.asarray(S, dtype=np.float64)
    if level <= 0:
        return S.copy()
    rng = np.random.default_rng(seed)
    noisy = S + level * float(S.max()) * rng.standard_normal(S.shape)
    return np.maximum(noisy, 0.0)


def aligned_relative_error(recovered: Signal, reference: Signal) -> float:
    """공통 시간 구간에서 최적 전역 위상 정렬 후 상대 L² 오차"""
    if abs(recovered.dt - reference.dt) > 1e-12 * reference.dt:
        raise GridError("두 신호의 샘플 간격이 다릅니다")
    offset = (recovered.t0 - reference.t0) / reference.dt
    if abs(offset - round(offset)) > 1e-6:
        raise GridError("두 신호의 시간 격자가 정렬되어 있지 않습니다")
    offset = int(round(offset))
    # recovered[m] ↔ reference[m + offset]
    start = max(0, -offset)
    stop = min(recovered.n, reference.n - offset)
    if stop <= start:
        raise GridError("공통 시간 구간이 없습니다")
    rec = recovered.samples[start:stop]
    ref = reference.samples[start + offset:stop + offset]
    norm = float(np.linalg.norm(ref))
    if norm == 0:
        return float(np.linalg.norm(rec))
    alpha = np.angle(np.vdot(rec, ref))
    return float(np.linalg.norm(ref - np.exp(1j * alpha) * rec)) / norm


def reconstruction_grid(delta: float = 0.0625) -> TfGrid:
    """재구성 기본 격자 (N = 1/Δ², 원점 중심)"""
    return TfGrid.self_dual(delta)
