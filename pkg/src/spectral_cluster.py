"""
스펙트럴 클러스터링 기반 체거 상수 추정

정규화 라플라시안 L = I - D^{-1/2} W D^{-1/2}의 두 번째 고유벡터를 임계값으로 잘라
h_G ≤ h* ≤ 2√h_G 인증 구간을 갖는 추정값을 만듭니다.
"""
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .cheeger_graph import (DEGREE_FLOOR, CutResult, WeightedGridGraph, build_graph,
                            cheeger_ratio, reattach_isolated)
from .error_handler import DegenerateGraphError, EigenSolverError, InvalidCutError
from .logger import get_logger
from .models import WeightField

logger = get_logger("SpectralCluster")

# 이 크기 미만은 조밀 고유값 분해로 풂
DENSE_LIMIT = 32


class NormalizedLaplacian(LinearOperator):
    """활성 정점 위의 행렬-free 정규화 라플라시안 (적용 횟수 기록)"""

    def __init__(self, graph: WeightedGridGraph, active: np.ndarray):
        self.graph = graph
        self.active = np.asarray(active, dtype=bool)
        self.active_index = np.flatnonzero(self.active)
        W = graph.adjacency()[self.active_index][:, self.active_index].tocsr()
        d = np.asarray(W.sum(axis=1)).ravel()
        if np.any(d <= 0):
            raise EigenSolverError("차수 0인 정점이 라플라시안에 포함되었습니다")
        self.W = W
        self.d = d
        self.inv_sqrt_d = 1.0 / np.sqrt(d)
        u = np.sqrt(d)
        self.null_vector = u / np.linalg.norm(u)
        self.applications = 0
        n = self.active_index.size
        super().__init__(dtype=np.float64, shape=(n, n))

    def _matvec(self, x):
        self.applications += 1
        x = np.asarray(x, dtype=np.float64).ravel()
        return x - self.inv_sqrt_d * (self.W @ (self.inv_sqrt_d * x))

    def _rmatvec(self, x):
        return self._matvec(x)

    def dense(self) -> np.ndarray:
        """조밀 행렬 형태 (소형 그래프 전용)"""
        S = sp.diags(self.inv_sqrt_d) @ self.W @ sp.diags(self.inv_sqrt_d)
        return np.eye(self.shape[0]) - S.toarray()


def active_vertices(g: WeightedGridGraph) -> np.ndarray:
    """고립 정점과, 제외 후 활성 부분그래프에서 차수 0이 되는 정점을 반복 제거"""
    active = ~g.isolated
    while True:
        keep = active[g.edge_u] & active[g.edge_v]
        d = (np.bincount(g.edge_u[keep], weights=g.edge_w[keep], minlength=g.n_vertices)
             + np.bincount(g.edge_v[keep], weights=g.edge_w[keep], minlength=g.n_vertices))
        still = active & (d > 0)
        if np.array_equal(still, active):
            return active
        active = still


def normalized_laplacian(g: WeightedGridGraph, active: Optional[np.ndarray] = None) -> NormalizedLaplacian:
    """정규화 그래프 라플라시안 연산자"""
    if active is None:
        active = active_vertices(g)
    if int(np.sum(active)) < 2:
        raise DegenerateGraphError("활성 정점이 2개 미만입니다")
    return NormalizedLaplacian(g, active)


def _residual(L: NormalizedLaplacian, lam: float, v: np.ndarray) -> float:
    return float(np.linalg.norm(L.matvec(v) - lam * v))


def fiedler_vector(L: NormalizedLaplacian, tol: float = 1e-8, max_iter: Optional[int] = None,
                   seed: int = 42) -> Tuple[float, np.ndarray]:
    """두 번째로 작은 고유쌍 (λ₂, v), ‖v‖ = 1, v ⟂ D^{1/2}1

    편향 연산자 M = 2I - L - 2uuᵀ 의 최대 고유값 2 - λ₂를 Lanczos(eigsh)로 구합니다.
    """
    n = L.shape[0]
    u = L.null_vector
    max_iter = max_iter or 10 * n

    if n < DENSE_LIMIT:
        vals, vecs = np.linalg.eigh(L.dense())
        order = np.argsort(vals, kind="stable")
        v = vecs[:, order[1]]
    else:
        def deflated(x):
            x = np.asarray(x, dtype=np.float64).ravel()
            return 2.0 * x - L.matvec(x) - 2.0 * u * (u @ x)

        M = LinearOperator((n, n), matvec=deflated, rmatvec=deflated, dtype=np.float64)
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n)
        v0 -= u * (u @ v0)

        v = None
        last_residual = float("nan")
        for attempt_tol in (0.1 * tol, 1e-3 * tol):
            try:
                _, vecs = eigsh(M, k=1, which="LA", v0=v0, tol=attempt_tol, maxiter=max_iter)
            except ArpackNoConvergence as e:
                if e.eigenvectors is not None and e.eigenvectors.shape[1] > 0:
                    cand = e.eigenvectors[:, 0]
                    last_residual = _residual(L, float(cand @ L.matvec(cand)), cand)
                raise EigenSolverError(
                    f"고유값 풀이가 {max_iter}회 안에 수렴하지 않았습니다 (잔차 {last_residual:.3e})",
                    residual=last_residual, iterations=L.applications)
            cand = vecs[:, 0]
            cand -= u * (u @ cand)
            cand /= np.linalg.norm(cand)
            lam = float(cand @ L.matvec(cand))
            last_residual = _residual(L, lam, cand)
            if last_residual <= tol:
                v = cand
                break
            logger.debug(f"잔차 {last_residual:.3e} > {tol:g}, 더 엄격한 허용 오차로 재시도")
            v0 = cand
        if v is None:
            raise EigenSolverError(f"고유벡터 잔차 {last_residual:.3e}가 허용 오차 {tol:g}를 넘습니다",
                                   residual=last_residual, iterations=L.applications)

    v = v - u * (u @ v)
    v = v / np.linalg.norm(v)
    # 부호 고정: 절댓값 최대 성분을 양수로
    if v[int(np.argmax(np.abs(v)))] < 0:
        v = -v
    lam = float(v @ L.matvec(v))
    residual = _residual(L, lam, v)
    if residual > tol:
        raise EigenSolverError(f"고유벡터 잔차 {residual:.3e}가 허용 오차 {tol:g}를 넘습니다",
                               residual=residual, iterations=L.applications)
    logger.debug(f"Fiedler: λ₂={lam:.6e}, 잔차={residual:.2e}, 적용 {L.applications}회")
    return lam, v


@dataclass
class CheegerEstimate:
    """스펙트럴 체거 추정 결과"""
    h_star: float
    cut: CutResult
    eigen_value: float
    iterations: int
    n_vertices: int
    delta: float = 1.0

    @property
    def h_lower(self) -> float:
        """인증 하한 (h*/2)²"""
        return (self.h_star / 2.0) ** 2

    @property
    def certified_interval(self) -> Tuple[float, float]:
        return (self.h_lower, self.h_star)

    @property
    def h_calibrated(self) -> float:
        """h*/Δ"""
        return self.h_star / self.delta

    @property
    def h_lower_calibrated(self) -> float:
        return self.h_lower / self.delta

    def to_dict(self) -> Dict:
        return {
            "h_star": self.h_star,
            "h_lower": self.h_lower,
            "h_calibrated": self.h_calibrated,
            "h_lower_calibrated": self.h_lower_calibrated,
            "lambda2": self.eigen_value,
            "cut_size": self.cut.cut_weight,
            "vol_in": self.cut.vol_in,
            "vol_out": self.cut.vol_out,
            "n_vertices": self.n_vertices,
            "iterations": self.iterations,
        }


def _sweep(L: NormalizedLaplacian, x: np.ndarray) -> Tuple[float, np.ndarray]:
    """활성 부분그래프에서 모든 임계값 C_t = {x > t} 를 증분 평가, 최적 상위 집합 반환"""
    n = x.size
    order = np.argsort(-x, kind="stable")
    xs = x[order]
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)

    W = sp.triu(L.W, k=1).tocoo()
    lo = np.minimum(pos[W.row], pos[W.col])
    hi = np.maximum(pos[W.row], pos[W.col])
    # 상위 k개 집합에서 간선이 잘리는 조건: lo < k ≤ hi
    diff = np.zeros(n + 1)
    np.add.at(diff, lo + 1, W.data)
    np.add.at(diff, hi + 1, -W.data)
    cut = np.cumsum(diff)[1:n]  # k = 1..n-1
    vol_in = np.cumsum(L.d[order])[:n - 1]
    vol_out = L.d.sum() - vol_in
    smaller = np.minimum(vol_in, vol_out)

    distinct = xs[:-1] > xs[1:]
    if not np.any(distinct):
        raise InvalidCutError("no cut induced: 상수 벡터입니다")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(smaller > 0, cut / np.where(smaller > 0, smaller, 1.0), np.inf)
    thresholds = 0.5 * (xs[:-1] + xs[1:])

    candidates = np.flatnonzero(distinct)
    # 비율 → 작은 쪽 부피 → 낮은 임계값 순
    best = candidates[np.lexsort((thresholds[candidates], smaller[candidates], ratio[candidates]))[0]]
    top = np.zeros(n, dtype=bool)
    top[order[:best + 1]] = True
    return float(ratio[best]), top


def threshold_cut(g: WeightedGridGraph, v: np.ndarray, L: Optional[NormalizedLaplacian] = None,
                  eigen_value: float = float("nan"), iterations: int = 0) -> CheegerEstimate:
    """활성 정점 벡터 v의 임계값 스윕으로 최적 절단 선택"""
    if L is None:
        L = normalized_laplacian(g)
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size != L.shape[0]:
        raise InvalidCutError(f"벡터 길이 {v.size} != 활성 정점 수 {L.shape[0]}")
    _, top = _sweep(L, v)

    subset = np.zeros(g.n_vertices, dtype=bool)
    subset[L.active_index[top]] = True
    subset = reattach_isolated(g, subset, L.active)
    cut = cheeger_ratio(g, subset)
    delta = g.grid.delta if g.grid is not None else 1.0
    return CheegerEstimate(cut.ratio, cut, eigen_value, iterations, g.n_vertices, delta)


def estimate_graph_cheeger(g: WeightedGridGraph, tol: float = 1e-8, max_iter: Optional[int] = None,
                           seed: int = 42) -> CheegerEstimate:
    """그래프 → 라플라시안 → Fiedler 벡터 → 임계값 절단"""
    active = active_vertices(g)
    if int(active.sum()) < 2:
        raise DegenerateGraphError("활성 정점이 2개 미만입니다")
    delta = g.grid.delta if g.grid is not None else 1.0

    sub = g.adjacency()[np.flatnonzero(active)][:, np.flatnonzero(active)]
    sub.eliminate_zeros()
    n_comp, labels = csgraph.connected_components(sub, directed=False)
    if n_comp > 1:
        d_active = g.degrees[active]
        volumes = np.bincount(labels, weights=d_active, minlength=n_comp)
        smallest = int(np.argmin(volumes))
        subset = np.zeros(g.n_vertices, dtype=bool)
        subset[np.flatnonzero(active)[labels == smallest]] = True
        subset = reattach_isolated(g, subset, active)
        cut = cheeger_ratio(g, subset)
        logger.info(f"그래프가 {n_comp}개 성분으로 분리됨: h* = 0")
        return CheegerEstimate(0.0, cut, 0.0, 0, g.n_vertices, delta)

    L = normalized_laplacian(g, active)
    lam, v = fiedler_vector(L, tol=tol, max_iter=max_iter, seed=seed)

    # 고유벡터 자체와 랜덤워크 스케일 D^{-1/2}v 둘 다 스윕하여 더 작은 비율 채택
    best = None
    for x in (v, L.inv_sqrt_d * v):
        est = threshold_cut(g, x, L, lam, L.applications)
        if best is None or est.h_star < best.h_star:
            best = est
    best.iterations = L.applications
    logger.debug(f"체거 추정: h*={best.h_star:.6e}, 보정={best.h_calibrated:.6e}")
    return best


def estimate_cheeger(w: WeightField, domain_mask: Optional[np.ndarray] = None,
                     p: Optional[float] = None, tol: float = 1e-8,
                     max_iter_factor: int = 10, seed: int = 42,
                     floor: float = DEGREE_FLOOR) -> CheegerEstimate:
    """가중치 필드의 체거 상수 추정 (p가 다르면 w^{p/w.p}로 변환)"""
    if p is not None and p != w.p:
        w = WeightField(w.grid, w.w ** (p / w.p), p)
    g = build_graph(w, domain_mask, floor)
    return estimate_graph_cheeger(g, tol=tol, max_iter=max_iter_factor * g.n_vertices, seed=seed)
