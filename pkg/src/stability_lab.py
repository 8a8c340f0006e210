"""
안정성 실험실

측정 공간 노름 𝒟_{p,q}^{1,s}, 위상 불변 거리, 전역 변동, 로그 도함수 노름,
영점 계수와 두 가우시안 불안정성 실험을 제공합니다.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, asdict
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage, optimize

from .error_handler import ConfigError, DegenerateFieldError, GridError
from .gabor_core import dgt, gradient_field, log_magnitude_gradient, weight_field
from .logger import get_logger
from .models import AnalysisConfig, GaborField, SignalKind, TfGrid
from .multicomponent import inscribed_halfmax_radius
from .signal_io import synthesize
from .spectral_cluster import estimate_cheeger

logger = get_logger("StabilityLab")

ArrayOrField = Union[np.ndarray, GaborField]

# 위상 감김 계산에서 제외할 상대 크기
NOISE_FLOOR = 1e-13


@dataclass(frozen=True)
class DNormParams:
    """𝒟_{p,q}^{r,s} 노름 지수"""
    p: float = 1.0
    q: float = math.inf
    r: int = 1
    s: float = 6.0

    def __post_init__(self):
        if not 1.0 <= self.p < 2.0:
            raise ConfigError(f"p는 [1, 2) 범위여야 합니다 (p={self.p})")
        if not self.q > 2 * self.p / (2 - self.p):
            raise ConfigError(f"q는 2p/(2-p)={2 * self.p / (2 - self.p):g}보다 커야 합니다 (q={self.q})")
        if self.r != 1:
            raise ConfigError("미분 차수 r은 1만 지원합니다")
        if self.s < 0:
            raise ConfigError("다항 가중 지수 s는 0 이상이어야 합니다")


@dataclass
class ExperimentRow:
    """불안정성 실험 한 행"""
    a: float
    h_cal: float
    mismatch: float
    distance: float
    bound_rhs: float  # (1 + 1/h)·mismatch
    ratio: float  # distance / bound_rhs

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


EXPERIMENT_COLUMNS = ["a", "h_cal", "mismatch", "distance", "bound_rhs", "ratio"]


def _values(F: ArrayOrField) -> np.ndarray:
    return F.values if isinstance(F, GaborField) else np.asarray(F)


def lp_norm(values: np.ndarray, p: float, delta: float, mask: Optional[np.ndarray] = None) -> float:
    """셀 측도 Δ²의 이산 L^p 노름 (p = ∞이면 최댓값)"""
    a = np.abs(values)
    if mask is not None:
        a = a[np.asarray(mask, dtype=bool)]
    if a.size == 0:
        return 0.0
    if math.isinf(p):
        return float(a.max())
    return float(np.sum(a ** p) * delta ** 2) ** (1.0 / p)


def d_norm_terms(F: np.ndarray, grid: TfGrid, params: DNormParams,
                 mask: Optional[np.ndarray] = None) -> Tuple[float, float, float, float]:
    """(‖F‖_p, ‖F‖_q, ‖|∇F|‖_p, ‖(|x|+|y|)^s F‖_q)"""
    F = np.asarray(F)
    if not np.all(np.isfinite(F)):
        raise GridError("필드에 유한하지 않은 값이 있습니다")
    d = grid.delta
    gx, gy = gradient_field(F, grid)
    grad = np.sqrt(np.abs(gx) ** 2 + np.abs(gy) ** 2)
    X, Y = grid.mesh()
    weighted = (np.abs(X) + np.abs(Y)) ** params.s * F
    return (lp_norm(F, params.p, d, mask), lp_norm(F, params.q, d, mask),
            lp_norm(grad, params.p, d, mask), lp_norm(weighted, params.q, d, mask))


def d_norm(F: np.ndarray, grid: TfGrid, params: DNormParams, mask: Optional[np.ndarray] = None) -> float:
    """‖F‖_𝒟 = ‖F‖_p + ‖F‖_q + ‖∇F‖_p + ‖(|x|+|y|)^s F‖_q"""
    return float(sum(d_norm_terms(F, grid, params, mask)))


def phase_distance(F1: GaborField, F2: GaborField, p: float = 2.0, mask: Optional[np.ndarray] = None,
                   grid_points: int = 64, xtol: float = 1e-10) -> Tuple[float, float]:
    """min_α ‖F2 - e^{iα}F1‖_{L^p(mask)} 과 최소점 α* ∈ [0, 2π)"""
    if F1.grid != F2.grid:
        raise GridError("두 필드의 격자가 다릅니다")
    sel = np.ones(F1.grid.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    a, b = F1.values[sel], F2.values[sel]
    d = F1.grid.delta

    def objective(alpha: float) -> float:
        return lp_norm(b - np.exp(1j * alpha) * a, p, d)

    if p == 2:
        alpha = float(np.angle(np.vdot(a, b))) % (2 * math.pi)
        return objective(alpha), alpha

    alphas = 2 * math.pi * np.arange(grid_points) / grid_points
    costs = np.array([objective(x) for x in alphas])
    k = int(np.argmin(costs))
    step = 2 * math.pi / grid_points
    bracket = (alphas[k] - step, alphas[k], alphas[k] + step)
    best_alpha, best_cost = float(alphas[k]), float(costs[k])
    left, right = objective(bracket[0]), objective(bracket[2])
    if best_cost < left and best_cost < right:
        res = optimize.minimize_scalar(objective, bracket=bracket, method="golden", tol=xtol)
        if res.fun <= best_cost:
            best_alpha, best_cost = float(res.x), float(res.fun)
    return best_cost, best_alpha % (2 * math.pi)


def global_variation(F: ArrayOrField, mask: Optional[np.ndarray] = None,
                     grid: Optional[TfGrid] = None) -> Tuple[float, float]:
    """(δ_D, δ̃_D). δ_D = min(½·max|F| / max|∇|F||, 1)"""
    if grid is None:
        if not isinstance(F, GaborField):
            raise GridError("배열 입력에는 grid가 필요합니다")
        grid = F.grid
    mag = np.abs(_values(F))
    sel = np.ones(grid.shape, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    peak = float(mag[sel].max()) if np.any(sel) else 0.0
    if peak == 0:
        raise DegenerateFieldError("필드가 0입니다")
    gx, gy = gradient_field(mag, grid)
    grad_max = float(np.hypot(gx, gy)[sel].max())
    delta_d = 1.0 if grad_max == 0 else min(0.5 * peak / grad_max, 1.0)
    delta_tilde = min(inscribed_halfmax_radius(mag, sel, grid.delta), 1.0)
    return delta_d, delta_tilde


def center_field(F: GaborField) -> Tuple[GaborField, Tuple[int, int]]:
    """최대 절댓값이 격자 원점에 오도록 순환 이동. 이동량 (di, dj) 반환"""
    mag = np.abs(F.values)
    peak = np.unravel_index(int(np.argmax(mag)), mag.shape)
    origin = F.grid.index_of(0.0, 0.0)
    shift = (origin[0] - int(peak[0]), origin[1] - int(peak[1]))
    if shift == (0, 0):
        return F, shift
    logger.debug(f"필드 중심 이동: {shift}")
    return F.with_values(np.roll(F.values, shift, axis=(0, 1))), shift


def _check_disc_fits(grid: TfGrid, R: float) -> None:
    x_min, x_max, y_min, y_max = grid.extent
    if R > min(-x_min, x_max, -y_min, y_max) + 1e-12:
        raise GridError(f"반지름 R={R:g}가 격자 범위를 넘습니다")


def disc_integral(values: np.ndarray, grid: TfGrid, R: float, supersample: int = 16) -> float:
    """∫_{B_R(0)} values. 경계 셀은 선형 보간으로 supersample² 점에서 적분"""
    _check_disc_fits(grid, R)
    d = grid.delta
    X, Y = grid.mesh()
    # 격자점 중심 셀 [x-Δ/2, x+Δ/2]²의 꼭짓점 최대/최소 거리
    r_center = np.hypot(X, Y)
    half_diag = d / math.sqrt(2)
    inside = r_center + half_diag <= R
    boundary = (np.abs(r_center - R) < half_diag) & ~inside
    total = float(np.sum(values[inside])) * d ** 2

    bi, bj = np.nonzero(boundary)
    if bi.size:
        offsets = (np.arange(supersample) + 0.5) / supersample - 0.5
        ox, oy = np.meshgrid(offsets, offsets, indexing="ij")
        px = bi[:, None] + ox.ravel()[None, :]
        py = bj[:, None] + oy.ravel()[None, :]
        xs = grid.x0 + px * d
        ys = grid.y0 + py * d
        keep = np.hypot(xs, ys) <= R
        sampled = ndimage.map_coordinates(values, [px.ravel(), py.ravel()], order=1, mode="nearest")
        sampled = sampled.reshape(px.shape)
        total += float(np.sum(np.where(keep, sampled, 0.0))) * d ** 2 / supersample ** 2
    return total


@dataclass
class LogDerivativeNorm:
    """‖∇log|F|‖_{L^r(B_R)} 과 (R⁵ + 1) 대비 비율"""
    value: float
    r: float
    R: float

    @property
    def growth_ratio(self) -> float:
        return self.value / (self.R ** 5 + 1.0)


def log_derivative_norm(F: GaborField, r: float, R: float, floor: float = 1e-13,
                        center: bool = False) -> LogDerivativeNorm:
    """원판 B_R(0) 위 |∇F|/max(|F|, floor·‖F‖_∞)의 이산 L^r 노름

    |∇|F||/|F| = |∇log|F||이므로 log 크기의 중앙 차분으로 계산합니다.
    """
    if not 1.0 <= r < 2.0:
        raise ConfigError(f"r은 [1, 2) 범위여야 합니다 (r={r})")
    if center:
        F, _ = center_field(F)
    gx, gy = log_magnitude_gradient(F, floor)
    integrand = np.hypot(gx, gy) ** r
    value = disc_integral(integrand, F.grid, R) ** (1.0 / r)
    return LogDerivativeNorm(value, r, R)


def log_derivative_growth(F: GaborField, r: float, radii: Sequence[float], floor: float = 1e-13,
                          center: bool = False) -> Tuple[List[LogDerivativeNorm], float]:
    """반지름별 로그 도함수 노름과 증가율 상수 max/min(growth_ratio)"""
    if center:
        F, _ = center_field(F)
    norms = [log_derivative_norm(F, r, float(R), floor) for R in radii]
    ratios = [n.growth_ratio for n in norms]
    low = min(ratios)
    spread = math.inf if low == 0 else max(ratios) / low
    logger.debug(f"로그 도함수 증가율 상수: {spread:.4g} (R={list(radii)})")
    return norms, spread


def _cell_windings(F: GaborField) -> np.ndarray:
    """각 격자 셀 경계를 따라 위상이 감기는 횟수 (nx-1 × ny-1)"""
    V = F.values
    a, b, c, d = V[:-1, :-1], V[1:, :-1], V[1:, 1:], V[:-1, 1:]
    total = (np.angle(b * np.conj(a)) + np.angle(c * np.conj(b))
             + np.angle(d * np.conj(c)) + np.angle(a * np.conj(d)))
    return np.rint(total / (2 * math.pi)).astype(np.int64)


def _corner_ambiguous(F: GaborField, R: float) -> bool:
    """원판 경계 근처 격자점이 국소적으로 거의 0이면 True"""
    mag = np.abs(F.values)
    local_max = ndimage.maximum_filter(mag, size=3, mode="nearest")
    near_zero = mag <= 1e-6 * local_max
    ring = np.abs(F.grid.radius() - R) <= F.grid.delta
    return bool(np.any(near_zero & ring))


def _zero_cells(F: GaborField, R: float) -> Tuple[np.ndarray, np.ndarray]:
    windings = _cell_windings(F)
    # 반올림 잡음 수준의 셀은 위상이 의미 없으므로 제외
    mag = np.abs(F.values)
    corner_max = np.maximum.reduce([mag[:-1, :-1], mag[1:, :-1], mag[1:, 1:], mag[:-1, 1:]])
    resolved = corner_max >= NOISE_FLOOR * mag.max()
    d = F.grid.delta
    cx = F.grid.x[:-1] + 0.5 * d
    cy = F.grid.y[:-1] + 0.5 * d
    CX, CY = np.meshgrid(cx, cy, indexing="ij")
    inside = (np.hypot(CX, CY) < R) & resolved
    return windings, inside


def count_zeros(F: GaborField, R: float, center: bool = False) -> int:
    """B_R(0) 안 셀들의 위상 감김 수 합으로 영점 개수 계산"""
    _check_disc_fits(F.grid, R)
    if center:
        F, _ = center_field(F)
    radius = R
    if _corner_ambiguous(F, R):
        radius = R + 0.5 * F.grid.delta
        logger.debug(f"원판 경계에 영점 근접, 반지름을 {radius:g}로 조정")
    windings, inside = _zero_cells(F, radius)
    return int(abs(int(windings[inside].sum())))


def locate_zeros(F: GaborField, R: float) -> np.ndarray:
    """감김 수가 0이 아닌 셀 중심 좌표 (k, 2)"""
    windings, inside = _zero_cells(F, R)
    sel = (windings != 0) & inside
    i, j = np.nonzero(sel)
    d = F.grid.delta
    return np.column_stack([F.grid.x[i] + 0.5 * d, F.grid.y[j] + 0.5 * d])


def jensen_zero_bound(R: float) -> float:
    """(2π / log 2)·R²"""
    return 2 * math.pi / math.log(2) * R ** 2


def multicomponent_distance(F: GaborField, G: GaborField, masks: Sequence[np.ndarray],
                            p: float = 2.0) -> Tuple[float, List[float]]:
    """Σ_j min_α ‖G - e^{iα}F‖_{L^p(D_j)}"""
    total, alphas = 0.0, []
    for mask in masks:
        dist, alpha = phase_distance(F, G, p, mask)
        total += dist
        alphas.append(alpha)
    return total, alphas


def concentration_epsilon(F: GaborField, R: float, p: float = 2.0) -> float:
    """(∫_{ℝ²∖B_R} |F|^p)^{1/p}"""
    mag_p = np.abs(F.values) ** p
    total = float(mag_p.sum()) * F.grid.delta ** 2
    outside = max(total - disc_integral(mag_p, F.grid, R), 0.0)
    return outside ** (1.0 / p)


def variation_comparison(F: GaborField, R: float, h_cal: float) -> Dict[str, float]:
    """B_R 안 sup|F|²/inf|F|² 와 체거 인자 1 + 1/h"""
    _check_disc_fits(F.grid, R)
    mag = np.abs(F.values)[F.grid.disc_mask(R)]
    low = float(mag.min())
    variation = math.inf if low == 0 else float(mag.max()) ** 2 / low ** 2
    cheeger_factor = math.inf if h_cal == 0 else 1.0 + 1.0 / h_cal
    return {"R": R, "variation_ratio": variation, "cheeger_factor": cheeger_factor}


def cheeger_radius_sweep(F: GaborField, radii: Sequence[float], p: float = 1.0,
                         config: Optional[AnalysisConfig] = None) -> List[Tuple[float, float]]:
    """원판 마스크 B_R(0)별 보정 체거 추정"""
    cfg = config or AnalysisConfig()
    w = weight_field(F, p)
    out = []
    for R in radii:
        _check_disc_fits(F.grid, R)
        est = estimate_cheeger(w, F.grid.disc_mask(R), tol=cfg.eig_tol,
                               max_iter_factor=cfg.eig_max_iter_factor, seed=cfg.seed,
                               floor=cfg.degree_floor)
        out.append((float(R), est.h_calibrated))
        logger.debug(f"R={R:g}: h_cal={est.h_calibrated:.6g}")
    return out


def window_derivative_ratio(F: GaborField, Fprime: GaborField, R: float) -> float:
    """‖V_{φ′}f‖_∞ / ‖V_φf‖_∞ (B_R 위)"""
    _check_disc_fits(F.grid, R)
    mask = F.grid.disc_mask(R)
    peak = float(np.abs(F.values)[mask].max())
    if peak == 0:
        raise DegenerateFieldError("필드가 0입니다")
    return float(np.abs(Fprime.values)[mask].max()) / peak


def experiment_grid() -> TfGrid:
    """불안정성 실험 기본 격자: Δ = 1/8, 129점, 원점 중심"""
    return TfGrid.centered(0.125, 129)


def _experiment_row(a: float, params: DNormParams, grid: TfGrid, cfg: AnalysisConfig) -> ExperimentRow:
    f = synthesize(SignalKind.GAUSSIAN_PAIR_PLUS, a=a, n=cfg.signal_n, dt=cfg.signal_dt)
    g = synthesize(SignalKind.GAUSSIAN_PAIR_MINUS, a=a, n=cfg.signal_n, dt=cfg.signal_dt)
    F = dgt(f, grid, cfg.t_cut)
    G = dgt(g, grid, cfg.t_cut)
    return compare_fields(F, G, params, cfg, a=a)


def compare_fields(F: GaborField, G: GaborField, params: DNormParams,
                   cfg: Optional[AnalysisConfig] = None, a: float = 0.0) -> ExperimentRow:
    """두 측정의 체거 추정·불일치·위상 거리 비교"""
    cfg = cfg or AnalysisConfig()
    est = estimate_cheeger(weight_field(F, params.p), tol=cfg.eig_tol,
                           max_iter_factor=cfg.eig_max_iter_factor, seed=cfg.seed, floor=cfg.degree_floor)
    h = est.h_calibrated
    mismatch = d_norm(np.abs(F.values) - np.abs(G.values), F.grid, params)
    distance, _ = phase_distance(F, G, params.p)
    rhs = math.inf if h == 0 else (1.0 + 1.0 / h) * mismatch
    ratio = math.inf if rhs == 0 else distance / rhs
    logger.debug(f"a={a:g}: h_cal={h:.4e}, 불일치={mismatch:.4e}, 거리={distance:.4e}")
    return ExperimentRow(float(a), h, mismatch, distance, rhs, ratio)


def instability_experiment(a_values: Sequence[float], params: DNormParams,
                           grid: Optional[TfGrid] = None, config: Optional[AnalysisConfig] = None,
                           workers: int = 1) -> List[ExperimentRow]:
    """두 가우시안 쌍 f = φ(·+a)+φ(·-a), g = φ(·+a)-φ(·-a)의 불안정성 실험"""
    if any(a <= 0 for a in a_values):
        raise ConfigError("a 값은 모두 양수여야 합니다")
    cfg = config or AnalysisConfig()
    grid = grid or experiment_grid()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda a: _experiment_row(float(a), params, grid, cfg), a_values))
    logger.info(f"불안정성 실험 완료: {len(rows)}행")
    return rows


def empirical_constant(rows: Sequence[ExperimentRow]) -> float:
    """행들의 비율 최댓값 (경험적 상수 C_emp)"""
    return max(row.ratio for row in rows)
