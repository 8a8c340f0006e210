"""
시간-주파수 안정성 분석의 핵심 데이터 모델
"""
import math
from dataclasses import dataclass, field, fields, asdict
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .error_handler import ConfigError, GridError, SignalFormatError


class SignalKind(Enum):
    """합성 신호 종류 열거형"""
    GAUSSIAN = "gaussian"
    GAUSSIAN_PAIR_PLUS = "gaussian_pair_plus"
    GAUSSIAN_PAIR_MINUS = "gaussian_pair_minus"
    MODULATED_GAUSSIAN = "modulated_gaussian"


class FieldKind(Enum):
    """복소 필드 종류 열거형"""
    GABOR = "gabor"
    AMBIGUITY = "ambiguity"
    GENERIC = "generic"


class Regularization(Enum):
    """디컨볼루션 정규화 방식"""
    THRESHOLD = "threshold"
    TIKHONOV = "tikhonov"


@dataclass
class Signal:
    """균일 간격 복소 샘플 신호"""
    samples: np.ndarray  # 복소 진폭
    dt: float  # 샘플 간격
    t0: float = 0.0  # 첫 샘플의 시각

    def __post_init__(self):
        """초기화 후 검증"""
        self.samples = np.asarray(self.samples, dtype=np.complex128).ravel()
        self.dt = float(self.dt)
        self.t0 = float(self.t0)
        if self.samples.size < 2:
            raise SignalFormatError("신호 길이는 2 이상이어야 합니다")
        if not self.dt > 0:
            raise SignalFormatError("샘플 간격 dt는 양수여야 합니다")
        if not np.all(np.isfinite(self.samples)):
            bad = int(np.flatnonzero(~np.isfinite(self.samples))[0])
            raise SignalFormatError(f"non-finite sample at index {bad}")

    @property
    def n(self) -> int:
        return int(self.samples.size)

    @property
    def times(self) -> np.ndarray:
        """샘플 시각 배열"""
        return self.t0 + self.dt * np.arange(self.n)

    @property
    def energy(self) -> float:
        """이산 에너지 Σ|f|²·dt"""
        return float(np.sum(np.abs(self.samples) ** 2) * self.dt)

    def scaled(self, factor: complex) -> 'Signal':
        """상수배 신호 반환"""
        return Signal(self.samples * factor, self.dt, self.t0)


@dataclass(frozen=True)
class TfGrid:
    """시간-주파수 직사각 격자 (x: 시간, y: 주파수)"""
    delta: float  # 양 축 공통 간격
    nx: int
    ny: int
    x0: float = 0.0  # 인덱스 (0,0)의 x 좌표
    y0: float = 0.0  # 인덱스 (0,0)의 y 좌표

    def __post_init__(self):
        """초기화 후 검증"""
        if not self.delta > 0:
            raise GridError("격자 간격 delta는 양수여야 합니다")
        if self.nx < 4 or self.ny < 4:
            raise GridError(f"격자 크기는 4 이상이어야 합니다 ({self.nx}x{self.ny})")

    @classmethod
    def centered(cls, delta: float, n: int, ny: Optional[int] = None) -> 'TfGrid':
        """원점이 격자점이 되도록 중앙 정렬된 격자 생성"""
        ny = n if ny is None else ny
        return cls(delta=delta, nx=n, ny=ny, x0=-(n // 2) * delta, y0=-(ny // 2) * delta)

    @classmethod
    def self_dual(cls, delta: float) -> 'TfGrid':
        """n·delta² = 1 을 만족하는 정사각 격자 (재구성/인수분해용)"""
        n = int(round(1.0 / delta ** 2))
        if abs(n * delta ** 2 - 1.0) > 1e-9:
            raise GridError(f"1/delta²가 정수가 아닙니다 (delta={delta})")
        return cls.centered(delta, n)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.delta * np.arange(self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.y0 + self.delta * np.arange(self.ny)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def extent(self) -> Tuple[float, float, float, float]:
        """(x_min, x_max, y_min, y_max)"""
        return (self.x0, self.x0 + (self.nx - 1) * self.delta,
                self.y0, self.y0 + (self.ny - 1) * self.delta)

    @property
    def is_self_dual(self) -> bool:
        return self.nx == self.ny and abs(self.nx * self.delta ** 2 - 1.0) < 1e-9

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """(X, Y) 좌표 행렬, indexing='ij'"""
        return np.meshgrid(self.x, self.y, indexing="ij")

    def radius(self) -> np.ndarray:
        """원점까지 거리 |z|"""
        X, Y = self.mesh()
        return np.hypot(X, Y)

    def disc_mask(self, radius: float) -> np.ndarray:
        """원판 B_R(0) 안의 격자점 마스크"""
        return self.radius() <= radius

    def coords(self, ij: np.ndarray) -> np.ndarray:
        """격자 인덱스 (k, 2) → 좌표 (k, 2)"""
        ij = np.asarray(ij)
        return np.column_stack([self.x0 + self.delta * ij[:, 0], self.y0 + self.delta * ij[:, 1]])

    def index_of(self, x: float, y: float) -> Tuple[int, int]:
        """좌표에 가장 가까운 격자 인덱스"""
        i = int(round((x - self.x0) / self.delta))
        j = int(round((y - self.y0) / self.delta))
        return (min(max(i, 0), self.nx - 1), min(max(j, 0), self.ny - 1))

    def to_dict(self) -> Dict:
        return {"delta": self.delta, "nx": self.nx, "ny": self.ny, "x0": self.x0, "y0": self.y0}

    @classmethod
    def from_dict(cls, data: Dict) -> 'TfGrid':
        return cls(delta=float(data["delta"]), nx=int(data["nx"]), ny=int(data["ny"]),
                   x0=float(data.get("x0", 0.0)), y0=float(data.get("y0", 0.0)))


@dataclass
class GaborField:
    """격자 위의 복소 필드 (V_φf, 𝒜f 등)"""
    grid: TfGrid
    values: np.ndarray  # nx × ny 복소 행렬
    kind: FieldKind = FieldKind.GENERIC

    def __post_init__(self):
        """초기화 후 검증"""
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != self.grid.shape:
            raise GridError(f"필드 크기 {self.values.shape}가 격자 {self.grid.shape}와 다릅니다")
        if not np.all(np.isfinite(self.values)):
            raise GridError("필드에 유한하지 않은 값이 있습니다")

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def l2_norm(self) -> float:
        """이산 L² 노름 (셀 측도 delta²)"""
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.delta ** 2))

    def with_values(self, values: np.ndarray, kind: Optional[FieldKind] = None) -> 'GaborField':
        return GaborField(self.grid, values, self.kind if kind is None else kind)


@dataclass
class WeightField:
    """가중치 필드 w = |V_φf|^p"""
    grid: TfGrid
    w: np.ndarray
    p: float
    degenerate: bool = field(default=False)

    def __post_init__(self):
        """초기화 후 검증"""
        self.w = np.asarray(self.w, dtype=np.float64)
        if self.w.shape != self.grid.shape:
            raise GridError(f"가중치 크기 {self.w.shape}가 격자 {self.grid.shape}와 다릅니다")
        if not np.all(np.isfinite(self.w)) or np.any(self.w < 0):
            raise GridError("가중치는 유한한 음이 아닌 값이어야 합니다")
        if not 1.0 <= self.p < math.inf:
            raise ConfigError(f"지수 p는 [1, ∞) 범위여야 합니다 (p={self.p})")
        self.degenerate = bool(not np.any(self.w > 0))

    @property
    def total_mass(self) -> float:
        """Σ w·delta²"""
        return float(np.sum(self.w) * self.grid.delta ** 2)

    def scaled(self, factor: float) -> 'WeightField':
        return WeightField(self.grid, self.w * factor, self.p)


@dataclass
class ReconstructionConfig:
    """스펙트로그램 재구성 설정"""
    grid: TfGrid
    regularization: Regularization = Regularization.THRESHOLD
    tau_reg: float = 1e-8
    radius_cap: float = 9.0

    def __post_init__(self):
        """초기화 후 검증"""
        if isinstance(self.regularization, str):
            self.regularization = Regularization(self.regularization)
        if not self.tau_reg > 0:
            raise ConfigError("tau_reg는 양수여야 합니다")
        if not self.radius_cap > 0:
            raise ConfigError("radius_cap은 양수여야 합니다")


@dataclass
class AnalysisConfig:
    """분석 전체 설정을 저장하는 데이터 클래스"""
    signal_n: int = 512  # 합성 신호 길이
    signal_dt: float = 0.0625  # 합성 신호 간격
    grid_delta: float = 0.0625  # 시간-주파수 격자 간격
    grid_n: int = 257  # 격자 한 변의 점 개수 (원점 중심)
    p: float = 1.0  # 가중치/노름 지수
    q: float = math.inf  # 𝒟-노름 두 번째 지수
    t_cut: float = 5.0  # 창 절단 반경
    degree_floor: float = 1e-14  # 고립 정점 판정 비율
    eig_tol: float = 1e-8  # 고유값 풀이 허용 오차
    eig_max_iter_factor: int = 10  # max_iter = factor · n
    seed: int = 42  # 시작 벡터 시드
    tau: float = 0.05  # 분할 중단 임계값 (보정 단위)
    max_depth: int = 6
    min_vertices: int = 64
    regularization: str = "threshold"
    tau_reg: float = 1e-8
    reconstruction_radius: float = 9.0
    zero_radius: float = 4.0  # 영점 계수 반경
    log_derivative_r: float = 1.5
    svg_floor_db: float = 60.0
    workers: int = 1
    log_level: str = "INFO"

    def __post_init__(self):
        """초기화 후 기본값 검증"""
        if self.signal_n < 16:
            raise ConfigError("signal_n은 16 이상이어야 합니다")
        if not self.signal_dt > 0 or not self.grid_delta > 0:
            raise ConfigError("간격은 양수여야 합니다")
        if self.grid_n < 4:
            raise ConfigError("grid_n은 4 이상이어야 합니다")
        if not 1.0 <= self.p < 2.0:
            raise ConfigError(f"p는 [1, 2) 범위여야 합니다 (p={self.p})")
        if not self.q > 2 * self.p / (2 - self.p):
            raise ConfigError(f"q는 2p/(2-p)={2 * self.p / (2 - self.p):g} 보다 커야 합니다")
        if not self.tau >= 0:
            raise ConfigError("tau는 0 이상이어야 합니다")
        if self.max_depth < 1 or self.min_vertices < 2:
            raise ConfigError("max_depth ≥ 1, min_vertices ≥ 2 이어야 합니다")
        if self.regularization not in [r.value for r in Regularization]:
            raise ConfigError(f"알 수 없는 정규화 방식: {self.regularization}")
        if self.workers < 1:
            raise ConfigError("workers는 1 이상이어야 합니다")

        valid_log_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if self.log_level not in valid_log_levels:
            raise ConfigError(f"로그 레벨은 {valid_log_levels} 중 하나여야 합니다")

    def grid(self) -> TfGrid:
        """기본 시간-주파수 격자"""
        return TfGrid.centered(self.grid_delta, self.grid_n)

    def eig_max_iter(self, n: int) -> int:
        return self.eig_max_iter_factor * max(n, 1)

    def to_dict(self) -> Dict[str, Any]:
        """딕셔너리로 변환"""
        data = asdict(self)
        if math.isinf(self.q):
            data["q"] = "inf"
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'AnalysisConfig':
        """딕셔너리에서 생성 (알 수 없는 키는 무시)"""
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            if key not in known:
                continue
            if key == "q":
                value = float(value)
            kwargs[key] = value
        return cls(**kwargs)


@dataclass
class RunConfig:
    """CLI 실행 한 번의 완전한 설정 (manifest로 기록됨)"""
    subcommand: str
    options: Dict[str, Any]
    analysis: AnalysisConfig
    output_dir: str = "out"

    @property
    def seed(self) -> int:
        return self.analysis.seed

    def to_dict(self) -> Dict[str, Any]:
        """딕셔너리로 변환"""
        return {
            "subcommand": self.subcommand,
            "options": {k: _jsonable(v) for k, v in sorted(self.options.items())},
            "seed": self.seed,
            "output_dir": str(self.output_dir),
            "analysis": self.analysis.to_dict(),
        }


def _jsonable(value: Any) -> Any:
    """manifest 기록용 값 변환"""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "__fspath__"):
        return str(value)
    return value
