"""
가중 격자 그래프와 체거 비율

격자점을 정점으로, 거리 Δ인 4-이웃을 간선으로 두고
간선 가중치는 양 끝점 가중치의 산술 평균 ½(w(z) + w(z′))입니다.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy import ndimage

from .error_handler import DegenerateGraphError, GridError, InvalidCutError
from .logger import get_logger
from .models import TfGrid, WeightField

logger = get_logger("CheegerGraph")

DEGREE_FLOOR = 1e-14
BRUTE_FORCE_LIMIT = 22


@dataclass
class WeightedGridGraph:
    """무방향 가중 그래프 (격자 기반이면 grid/vertex_ij/mask가 채워짐)"""
    n_vertices: int
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_w: np.ndarray
    degrees: np.ndarray
    isolated: np.ndarray
    grid: Optional[TfGrid] = None
    vertex_ij: Optional[np.ndarray] = None  # (n, 2) 격자 인덱스
    mask: Optional[np.ndarray] = None  # 정점 집합 (nx × ny)
    vertex_index: Optional[np.ndarray] = None  # 격자 → 정점 번호, 비정점은 -1

    @property
    def n_edges(self) -> int:
        return int(self.edge_w.size)

    @property
    def total_volume(self) -> float:
        return float(self.degrees.sum())

    @property
    def coords(self) -> Optional[np.ndarray]:
        """정점 좌표 (x, y)"""
        if self.grid is None:
            return None
        return self.grid.coords(self.vertex_ij)

    def adjacency(self) -> sp.csr_matrix:
        """대칭 CSR 가중치 행렬 W"""
        n = self.n_vertices
        rows = np.concatenate([self.edge_u, self.edge_v])
        cols = np.concatenate([self.edge_v, self.edge_u])
        data = np.concatenate([self.edge_w, self.edge_w])
        return sp.csr_matrix((data, (rows, cols)), shape=(n, n))

    def subset_to_mask(self, subset: np.ndarray) -> np.ndarray:
        """정점 부분집합 → 격자 마스크"""
        if self.grid is None:
            raise GridError("격자 기반 그래프가 아닙니다")
        out = np.zeros(self.grid.shape, dtype=bool)
        ij = self.vertex_ij[np.asarray(subset, dtype=bool)]
        out[ij[:, 0], ij[:, 1]] = True
        return out

    @classmethod
    def from_edges(cls, n_vertices: int, edge_u, edge_v, edge_w,
                   floor: float = DEGREE_FLOOR) -> 'WeightedGridGraph':
        """간선 목록에서 소형 그래프 구성 (오라클 검증용)"""
        u = np.asarray(edge_u, dtype=np.int64)
        v = np.asarray(edge_v, dtype=np.int64)
        w = np.asarray(edge_w, dtype=np.float64)
        if np.any(u == v):
            raise DegenerateGraphError("자기 루프는 허용되지 않습니다")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DegenerateGraphError("간선 가중치는 유한한 음이 아닌 값이어야 합니다")
        degrees = _degrees(n_vertices, u, v, w)
        return cls(n_vertices, u, v, w, degrees, _isolated(degrees, floor))


def _degrees(n: int, u: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.bincount(u, weights=w, minlength=n) + np.bincount(v, weights=w, minlength=n)


def _isolated(degrees: np.ndarray, floor: float) -> np.ndarray:
    peak = float(degrees.max()) if degrees.size else 0.0
    if peak <= 0:
        raise DegenerateGraphError("degenerate graph: 모든 가중치가 0입니다")
    return degrees < floor * peak


def build_graph(w: WeightField, domain_mask: Optional[np.ndarray] = None,
                floor: float = DEGREE_FLOOR) -> WeightedGridGraph:
    """가중치 필드에서 4-이웃 격자 그래프 구성"""
    grid = w.grid
    mask = np.ones(grid.shape, dtype=bool) if domain_mask is None else np.asarray(domain_mask, dtype=bool)
    if mask.shape != grid.shape:
        raise GridError(f"마스크 크기 {mask.shape}가 격자 {grid.shape}와 다릅니다")
    n = int(mask.sum())
    if n == 0:
        raise DegenerateGraphError("빈 마스크입니다")
    if not np.any(w.w[mask] > 0):
        raise DegenerateGraphError("degenerate graph: 마스크 위 가중치가 모두 0입니다")

    vertex_index = np.full(grid.shape, -1, dtype=np.int64)
    vertex_index[mask] = np.arange(n)
    vertex_ij = np.argwhere(mask)

    us, vs, ws = [], [], []
    W = w.w
    # x 방향 이웃 (i, j)-(i+1, j), y 방향 이웃 (i, j)-(i, j+1)
    for a_sl, b_sl in (((slice(None, -1), slice(None)), (slice(1, None), slice(None))),
                       ((slice(None), slice(None, -1)), (slice(None), slice(1, None)))):
        both = mask[a_sl] & mask[b_sl]
        us.append(vertex_index[a_sl][both])
        vs.append(vertex_index[b_sl][both])
        ws.append(0.5 * (W[a_sl][both] + W[b_sl][both]))

    edge_u = np.concatenate(us)
    edge_v = np.concatenate(vs)
    edge_w = np.concatenate(ws)
    if edge_w.size == 0:
        raise DegenerateGraphError("degenerate graph: 간선이 없습니다")

    degrees = _degrees(n, edge_u, edge_v, edge_w)
    isolated = _isolated(degrees, floor)
    if np.any(isolated):
        logger.debug(f"고립 정점 {int(isolated.sum())}개 (전체 {n}개)")
    logger.debug(f"그래프 구성: 정점 {n}, 간선 {edge_w.size}")
    return WeightedGridGraph(n, edge_u, edge_v, edge_w, degrees, isolated,
                             grid=grid, vertex_ij=vertex_ij, mask=mask, vertex_index=vertex_index)


@dataclass
class CutResult:
    """이분할 결과"""
    subset: np.ndarray  # 정점별 bool
    cut_weight: float
    vol_in: float
    vol_out: float
    ratio: float

    @property
    def size(self) -> int:
        return int(self.subset.sum())

    def to_dict(self) -> Dict:
        return {
            "cut_size": self.cut_weight,
            "vol_in": self.vol_in,
            "vol_out": self.vol_out,
            "ratio": self.ratio,
            "n_in": self.size,
        }


def cheeger_ratio(g: WeightedGridGraph, subset: np.ndarray) -> CutResult:
    """h_G(C) = cut(C) / min(vol(C), vol(V∖C))"""
    subset = np.asarray(subset, dtype=bool).ravel()
    if subset.size != g.n_vertices:
        raise InvalidCutError(f"부분집합 길이 {subset.size} != 정점 수 {g.n_vertices}")
    k = int(subset.sum())
    if k == 0 or k == g.n_vertices:
        raise InvalidCutError("부분집합은 비어 있지 않은 진부분집합이어야 합니다")

    crossing = subset[g.edge_u] != subset[g.edge_v]
    cut = float(g.edge_w[crossing].sum())
    vol_in = float(g.degrees[subset].sum())
    vol_out = float(g.degrees[~subset].sum())
    smaller = min(vol_in, vol_out)
    ratio = cut / smaller if smaller > 0 else float("inf")
    return CutResult(subset, cut, vol_in, vol_out, ratio)


def bits_to_subset(code: int, n: int) -> np.ndarray:
    """정수 코드 → 정점 bool 배열 (정점 k ↔ 비트 k)"""
    return ((code >> np.arange(n)) & 1).astype(bool)


def _best_in_range(g: WeightedGridGraph, start: int, stop: int) -> Tuple[float, int]:
    """[start, stop) 코드 구간의 최소 비율과 그 코드 (동률이면 작은 코드)"""
    codes = np.arange(start, stop, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(g.n_vertices)) & 1).astype(bool)
    crossing = bits[:, g.edge_u] != bits[:, g.edge_v]
    cut = crossing.astype(np.float64) @ g.edge_w
    vol_in = bits.astype(np.float64) @ g.degrees
    vol_out = (~bits).astype(np.float64) @ g.degrees
    smaller = np.minimum(vol_in, vol_out)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(smaller > 0, cut / np.where(smaller > 0, smaller, 1.0), np.inf)
    k = int(np.argmin(ratio))
    return float(ratio[k]), int(codes[k])


def brute_force_cheeger(g: WeightedGridGraph, max_vertices: int = BRUTE_FORCE_LIMIT,
                        workers: int = 1, chunk: int = 1 << 15) -> CutResult:
    """모든 비자명 부분집합을 열거하는 정확한 체거 상수"""
    n = g.n_vertices
    if n > max_vertices:
        raise DegenerateGraphError(f"정점 {n}개는 완전 탐색 한계 {max_vertices}를 넘습니다; use spectral estimator")
    if n < 2:
        raise DegenerateGraphError("정점이 2개 미만입니다")

    last = (1 << n) - 1  # 전체 집합 제외
    ranges = [(s, min(s + chunk, last)) for s in range(1, last, chunk)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda r: _best_in_range(g, *r), ranges))

    best_ratio, best_code = results[0]
    for ratio, code in results[1:]:
        if ratio < best_ratio:
            best_ratio, best_code = ratio, code
    logger.debug(f"완전 탐색: 정점 {n}, h_G={best_ratio:.6g}")
    return cheeger_ratio(g, bits_to_subset(best_code, n))


def reattach_isolated(g: WeightedGridGraph, subset: np.ndarray, active: np.ndarray) -> np.ndarray:
    """비활성 정점을 가장 가까운 활성 정점과 같은 쪽에 배정"""
    subset = np.asarray(subset, dtype=bool).copy()
    inactive = ~active
    if not np.any(inactive):
        return subset
    if g.grid is None:
        subset[inactive] = False
        return subset

    # 활성 정점이 아닌 모든 격자점을 전경으로 두고 가장 가까운 활성 격자점 인덱스를 구함
    active_grid = np.zeros(g.grid.shape, dtype=bool)
    act_ij = g.vertex_ij[active]
    active_grid[act_ij[:, 0], act_ij[:, 1]] = True
    _, (ni, nj) = ndimage.distance_transform_edt(~active_grid, return_indices=True)
    ij = g.vertex_ij[inactive]
    nearest = g.vertex_index[ni[ij[:, 0], ij[:, 1]], nj[ij[:, 0], ij[:, 1]]]
    subset[inactive] = subset[nearest]
    return subset


def calibrated(h: float, delta: float) -> float:
    """연속 체거 상수 척도로 보정한 값 h_G / Δ"""
    return h / delta
