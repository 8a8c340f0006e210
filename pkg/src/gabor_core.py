"""
가보 변환 핵심 연산

이산 가보 변환(dgt), 창 도함수 변환, 모호 함수(ambiguity), 가우시안 닫힌 형태,
기울기 필드, 정칙성(Cauchy-Riemann) 진단을 제공합니다.

인덱스 규약: values[i, j]는 (x_i, y_j) = (x0 + iΔ, y0 + jΔ) 위치의 값이며
x는 시간, y는 주파수 축입니다. 주파수 부호는 e^{-2πiyt}입니다.
"""
from typing import Callable, Tuple

import numpy as np
import scipy.fft

from .error_handler import FieldKindError, GridError, SignalFormatError
from .logger import get_logger
from .models import FieldKind, GaborField, Signal, TfGrid, WeightField

logger = get_logger("GaborCore")

# ‖φ‖₂² = ∫e^{-2πt²}dt
PHI_NORM_SQ = 2.0 ** -0.5
DEFAULT_T_CUT = 5.0


def _check_grid_against_signal(f: Signal, grid: TfGrid) -> None:
    """나이퀴스트 조건 |y| ≤ 1/(2dt) 확인"""
    if f.n == 0:
        raise SignalFormatError("빈 신호입니다")
    nyquist = 0.5 / f.dt
    y_min, y_max = grid.extent[2], grid.extent[3]
    if max(abs(y_min), abs(y_max)) > nyquist * (1 + 1e-12):
        raise GridError(
            f"격자 주파수 범위 [{y_min:g}, {y_max:g}]가 나이퀴스트 {nyquist:g}를 넘습니다"
        )


def _modulated_sums(H: np.ndarray, f: Signal, grid: TfGrid, workers: int = 1) -> np.ndarray:
    """out[i, j] = dt·Σ_m H[i, m]·e^{-2πi y_j t_m}

    M = 1/(dt·Δ)가 정수이면 행마다 길이 M으로 접은 뒤 FFT를 쓰고,
    아니면 직접 행렬곱으로 계산합니다.
    """
    t = f.times
    y = grid.y
    m_float = 1.0 / (f.dt * grid.delta)
    M = int(round(m_float))

    if M >= 1 and abs(m_float - M) <= 1e-9 * m_float:
        # e^{-2πi y_j t_m} = e^{-2πi y0 t_m}·e^{-2πi jΔ t0}·e^{-2πi jm/M}
        Hm = H * np.exp(-2j * np.pi * grid.y0 * t)[None, :]
        pad = (-Hm.shape[1]) % M
        if pad:
            Hm = np.concatenate([Hm, np.zeros((Hm.shape[0], pad), dtype=Hm.dtype)], axis=1)
        folded = Hm.reshape(Hm.shape[0], -1, M).sum(axis=1)
        spectrum = scipy.fft.fft(folded, axis=1, workers=workers)
        j = np.arange(grid.ny)
        phase = np.exp(-2j * np.pi * j * grid.delta * f.t0)
        return f.dt * spectrum[:, j % M] * phase[None, :]

    logger.debug(f"FFT 조건 불만족 (1/(dtΔ)={m_float:g}), 직접 계산")
    kernel = np.exp(-2j * np.pi * np.outer(t, y))
    return f.dt * (H @ kernel)


def _windowed_transform(f: Signal, grid: TfGrid, window: Callable[[np.ndarray], np.ndarray],
                        t_cut: float, workers: int) -> np.ndarray:
    _check_grid_against_signal(f, grid)
    lag = f.times[None, :] - grid.x[:, None]
    win = np.where(np.abs(lag) <= t_cut, window(lag), 0.0)
    return _modulated_sums(f.samples[None, :] * win, f, grid, workers)


def gaussian_window(t: np.ndarray) -> np.ndarray:
    return np.exp(-np.pi * t ** 2)


def gaussian_window_derivative(t: np.ndarray) -> np.ndarray:
    """φ′(t) = -2πt·e^{-πt²}"""
    return -2.0 * np.pi * t * np.exp(-np.pi * t ** 2)


def dgt(f: Signal, grid: TfGrid, t_cut: float = DEFAULT_T_CUT, workers: int = 1) -> GaborField:
    """이산 가보 변환 V_φf(x_i, y_j) = dt·Σ f(t)·φ(t - x_i)·e^{-2πi y_j t}"""
    values = _windowed_transform(f, grid, gaussian_window, t_cut, workers)
    logger.debug(f"dgt: 신호 n={f.n}, 격자 {grid.nx}x{grid.ny}, Δ={grid.delta:g}")
    return GaborField(grid, values, FieldKind.GABOR)


def window_derivative_dgt(f: Signal, grid: TfGrid, t_cut: float = DEFAULT_T_CUT,
                          workers: int = 1) -> GaborField:
    """창을 φ′로 바꾼 변환 V_{φ′}f"""
    values = _windowed_transform(f, grid, gaussian_window_derivative, t_cut, workers)
    return GaborField(grid, values, FieldKind.GENERIC)


def ambiguity(f: Signal, grid: TfGrid, workers: int = 1) -> GaborField:
    """모호 함수 𝒜f(x, y) = dt·Σ f(t)·conj f(t - x)·e^{-2πi y t}

    지연 x_i는 dt의 정수배여야 합니다.
    """
    _check_grid_against_signal(f, grid)
    k = np.rint(grid.x / f.dt).astype(np.int64)
    if np.any(np.abs(k * f.dt - grid.x) > 1e-9 * np.maximum(1.0, np.abs(grid.x))):
        raise GridError("모호 함수의 지연 격자는 신호 간격 dt의 정수배여야 합니다")

    m = np.arange(f.n)
    src = m[None, :] - k[:, None]
    valid = (src >= 0) & (src < f.n)
    shifted = np.where(valid, np.conj(f.samples[np.clip(src, 0, f.n - 1)]), 0.0)
    H = f.samples[None, :] * shifted
    values = _modulated_sums(H, f, grid, workers)
    return GaborField(grid, values, FieldKind.AMBIGUITY)


def gaussian_ambiguity_closed_form(grid: TfGrid) -> GaborField:
    """𝒜φ(x, y) = 2^{-1/2}·e^{-πixy}·e^{-π(x²+y²)/2}"""
    X, Y = grid.mesh()
    values = PHI_NORM_SQ * np.exp(-1j * np.pi * X * Y) * np.exp(-0.5 * np.pi * (X ** 2 + Y ** 2))
    return GaborField(grid, values, FieldKind.AMBIGUITY)


def gabor_closed_form(grid: TfGrid, a: float = 0.0, b: float = 0.0) -> GaborField:
    """V_φ(M_b T_a φ)의 정확한 값. f(t) = e^{2πibt}·φ(t - a)"""
    X, Y = grid.mesh()
    U, W = X - a, Y - b
    values = (PHI_NORM_SQ * np.exp(-2j * np.pi * W * a)
              * np.exp(-1j * np.pi * U * W) * np.exp(-0.5 * np.pi * (U ** 2 + W ** 2)))
    return GaborField(grid, values, FieldKind.GABOR)


def weight_field(F: GaborField, p: float) -> WeightField:
    """w = |F|^p"""
    w = WeightField(F.grid, np.abs(F.values) ** p, p)
    if w.degenerate:
        logger.warning("가중치가 모두 0입니다 (degenerate)")
    return w


def gradient_field(A: np.ndarray, grid: TfGrid) -> Tuple[np.ndarray, np.ndarray]:
    """내부는 중앙 차분, 경계는 한쪽 차분인 (∂x, ∂y)"""
    A = np.asarray(A)
    if A.shape != grid.shape:
        raise GridError(f"행렬 크기 {A.shape}가 격자 {grid.shape}와 다릅니다")
    gx, gy = np.gradient(A, grid.delta, grid.delta)
    return gx, gy


def log_magnitude_gradient(F: GaborField, floor: float = 1e-13) -> Tuple[np.ndarray, np.ndarray]:
    """∇log max(|F|, floor·max|F|) (중앙 차분)"""
    mag = np.abs(F.values)
    peak = float(mag.max())
    if peak == 0:
        return np.zeros_like(mag), np.zeros_like(mag)
    return gradient_field(np.log(np.maximum(mag, floor * peak)), F.grid)


def holomorphic_lift(F: GaborField) -> GaborField:
    """G(x, y′) = η(z)·V_φf(x, -y′), η(z) = e^{π(|z|²/2 - i x y′)}, z = x + iy′

    결과 배열은 F와 같은 인덱스를 쓰며 열 j는 y′ = -y_j에 대응합니다.
    """
    if F.kind != FieldKind.GABOR:
        raise FieldKindError("정칙 리프트는 가보 변환 필드에만 정의됩니다")
    X, Y = F.grid.mesh()
    Yr = -Y
    eta = np.exp(np.pi * (0.5 * (X ** 2 + Yr ** 2) - 1j * X * Yr))
    return GaborField(F.grid, eta * F.values, FieldKind.GENERIC)


def _lift_interior(F: GaborField, floor: float):
    G = holomorphic_lift(F).values
    mag = np.abs(F.values)
    keep = mag[1:-1, 1:-1] >= floor * mag.max()
    return G, keep


def cr_residual(F: GaborField, floor: float = 1e-6) -> float:
    """이산 Cauchy-Riemann 결함 max |∂x G + i∂y′ G| / max(|G|, ε)

    |V| ≥ floor·max|V|인 내부 격자점에서만 평가합니다.
    """
    G, keep = _lift_interior(F, floor)
    d = F.grid.delta
    dGx = (G[2:, 1:-1] - G[:-2, 1:-1]) / (2 * d)
    # y′ = -y 이므로 열 인덱스 증가 방향이 y′ 감소 방향
    dGyr = -(G[1:-1, 2:] - G[1:-1, :-2]) / (2 * d)
    scale = np.maximum(np.abs(G[1:-1, 1:-1]), np.finfo(np.float64).eps)
    defect = np.abs(dGx + 1j * dGyr) / scale
    if not np.any(keep):
        return 0.0
    value = float(defect[keep].max())
    logger.debug(f"CR 잔차: {value:.3e} (Δ={d:g})")
    return value


def magnitude_gradient_defect(F: GaborField, floor: float = 1e-6) -> float:
    """정칙 G에 대해 |G′| = |∇|G||. 이산 상대 결함의 최댓값"""
    G, keep = _lift_interior(F, floor)
    d = F.grid.delta
    dGx = (G[2:, 1:-1] - G[:-2, 1:-1]) / (2 * d)
    absG = np.abs(G)
    gx = (absG[2:, 1:-1] - absG[:-2, 1:-1]) / (2 * d)
    gy = (absG[1:-1, 2:] - absG[1:-1, :-2]) / (2 * d)
    grad = np.hypot(gx, gy)
    valid = keep & (grad > 0)
    if not np.any(valid):
        return 0.0
    return float((np.abs(np.abs(dGx) - grad)[valid] / grad[valid]).max())
