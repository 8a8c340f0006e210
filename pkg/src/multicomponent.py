"""
다성분 분할

시간-주파수 평면을 체거 추정값이 임계값 이상인 영역들로 재귀 이분할하고
다성분 안정성 상수 B = max_j (1 + 1/h_j)(1 + κ_j^p / δ̃_j²)를 계산합니다.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import ndimage

from .error_handler import (ConfigError, DegenerateFieldError, DegenerateGraphError, EigenSolverError,
                            InvalidCutError, PartitionIntegrityError)
from .logger import get_logger
from .models import AnalysisConfig, GaborField, WeightField
from .spectral_cluster import CheegerEstimate, estimate_cheeger

logger = get_logger("Multicomponent")


def inscribed_halfmax_radius(magnitude: np.ndarray, mask: np.ndarray, delta: float) -> float:
    """|F| ≥ ½·max_mask|F| 이고 mask 안에 완전히 들어가는 격자 내접 원의 최대 반지름"""
    mask = np.asarray(mask, dtype=bool)
    peak = float(magnitude[mask].max())
    selected = mask & (magnitude >= 0.5 * peak)
    # 격자 밖은 여집합으로 취급
    padded = np.pad(selected, 1, mode="constant", constant_values=False)
    dist = ndimage.distance_transform_edt(padded)
    return max(float(dist.max()) - 0.5, 0.5) * delta


def region_stats(w: Optional[WeightField], F: GaborField, mask: np.ndarray, p: float) -> Tuple[float, float]:
    """(κ, δ̃): κ = ‖F‖_{L^p(mask)} / ‖F‖_{L^∞(mask)}, δ̃ = min(r*, 1)"""
    mask = np.asarray(mask, dtype=bool)
    if not np.any(mask):
        raise DegenerateFieldError("빈 영역입니다")
    mag = np.abs(F.values)
    peak = float(mag[mask].max())
    if peak == 0:
        raise DegenerateFieldError("영역 위 필드가 모두 0입니다")
    delta = F.grid.delta
    if w is not None and w.p == p:
        lp = float(np.sum(w.w[mask]) * delta ** 2) ** (1.0 / p)
    else:
        lp = float(np.sum(mag[mask] ** p) * delta ** 2) ** (1.0 / p)
    kappa = lp / peak
    delta_tilde = min(inscribed_halfmax_radius(mag, mask, delta), 1.0)
    return kappa, delta_tilde


@dataclass
class Region:
    """분할 트리의 노드"""
    node_id: int
    parent_id: Optional[int]
    depth: int
    mask: np.ndarray
    h_est: Optional[CheegerEstimate]
    kappa: float
    delta_tilde: float
    volume: float
    n_vertices: int
    indivisible: bool = False
    flags: List[str] = field(default_factory=list)
    children: List[int] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def h_calibrated(self) -> float:
        """보정 체거 추정. 절단할 수 없는 영역(정점 < 2)은 +∞"""
        return self.h_est.h_calibrated if self.h_est is not None else math.inf

    @property
    def h_lower_calibrated(self) -> float:
        return self.h_est.h_lower_calibrated if self.h_est is not None else math.inf

    def to_dict(self) -> Dict:
        return {
            "node_id": self.node_id,
            "parent_id": self.parent_id,
            "depth": self.depth,
            "children": list(self.children),
            "n_vertices": self.n_vertices,
            "volume": self.volume,
            "kappa": self.kappa,
            "delta_tilde": self.delta_tilde,
            "indivisible": self.indivisible,
            "flags": list(self.flags),
            "h_est": self.h_est.to_dict() if self.h_est is not None else None,
        }


@dataclass
class StabilityBound:
    """B와 잎별 인자"""
    value: float
    conservative: float  # 인증 하한 (h*/2)² 사용
    factors: List[Dict]
    infinite: bool

    def to_dict(self) -> Dict:
        return {"B": self.value, "B_conservative": self.conservative,
                "infinite": self.infinite, "factors": self.factors}


@dataclass
class PartitionReport:
    """재귀 분할 결과"""
    nodes: List[Region]
    threshold: float
    p: float
    root_mask: np.ndarray
    bound: Optional[StabilityBound] = None
    inter_leaf_cut: Dict[str, float] = field(default_factory=dict)

    @property
    def regions(self) -> List[Region]:
        """잎 영역 (깊이 우선 순서)"""
        return [node for node in self.nodes if node.is_leaf]

    @property
    def B(self) -> float:
        return self.bound.value if self.bound is not None else math.nan

    def label_image(self) -> np.ndarray:
        """잎 번호 이미지 (루트 밖은 -1)"""
        labels = np.full(self.root_mask.shape, -1, dtype=np.int64)
        for k, leaf in enumerate(self.regions):
            labels[leaf.mask] = k
        return labels

    def to_dict(self) -> Dict:
        return {
            "threshold": self.threshold,
            "p": self.p,
            "n_leaves": len(self.regions),
            "leaves": [leaf.node_id for leaf in self.regions],
            "tree": [node.to_dict() for node in self.nodes],
            "bound": self.bound.to_dict() if self.bound is not None else None,
            "inter_leaf_cut": dict(self.inter_leaf_cut),
        }


def _make_region(node_id: int, parent_id: Optional[int], depth: int, mask: np.ndarray,
                 w: WeightField, F: GaborField, p: float, cfg: AnalysisConfig) -> Region:
    n_vertices = int(mask.sum())
    volume = float(np.sum(w.w[mask]) * w.grid.delta ** 2)
    flags: List[str] = []
    try:
        kappa, delta_tilde = region_stats(w, F, mask, p)
    except DegenerateFieldError:
        kappa, delta_tilde = 0.0, 1.0
        flags.append("degenerate")

    h_est = None
    if n_vertices >= 2 and "degenerate" not in flags:
        try:
            h_est = estimate_cheeger(w, mask, tol=cfg.eig_tol, max_iter_factor=cfg.eig_max_iter_factor,
                                     seed=cfg.seed, floor=cfg.degree_floor)
        except (DegenerateGraphError, EigenSolverError, InvalidCutError) as e:
            logger.warning(f"영역 {node_id} 체거 추정 실패, 분할 불가로 처리: {e}")
            flags.append(e.error_code)
    return Region(node_id, parent_id, depth, mask, h_est, kappa, delta_tilde, volume, n_vertices, flags=flags)


def recursive_partition(w: WeightField, F: GaborField, tau: float, max_depth: int = 6,
                        min_vertices: int = 64, domain_mask: Optional[np.ndarray] = None,
                        config: Optional[AnalysisConfig] = None) -> PartitionReport:
    """깊이 우선 재귀 이분할 (부피가 큰 자식 먼저)"""
    cfg = config or AnalysisConfig()
    if tau < 0:
        raise ConfigError("tau는 0 이상이어야 합니다")
    if max_depth < 1:
        raise ConfigError("max_depth는 1 이상이어야 합니다")
    root_mask = np.ones(w.grid.shape, dtype=bool) if domain_mask is None else np.asarray(domain_mask, dtype=bool)
    p = w.p

    nodes: List[Region] = []
    stack: List[Tuple[Optional[int], int, np.ndarray]] = [(None, 0, root_mask)]
    while stack:
        parent_id, depth, mask = stack.pop()
        region = _make_region(len(nodes), parent_id, depth, mask, w, F, p, cfg)
        nodes.append(region)
        if parent_id is not None:
            nodes[parent_id].children.append(region.node_id)

        h_cal = region.h_calibrated
        if region.h_est is None:
            if region.flags:
                region.indivisible = True
            continue
        if h_cal >= tau:
            continue
        if region.n_vertices < min_vertices or depth >= max_depth:
            region.indivisible = True
            region.flags.append("min_vertices" if region.n_vertices < min_vertices else "max_depth")
            continue

        graph_subset = region.h_est.cut.subset
        inside = np.zeros(w.grid.shape, dtype=bool)
        ij = np.argwhere(mask)[graph_subset]
        inside[ij[:, 0], ij[:, 1]] = True
        outside = mask & ~inside
        if not np.any(inside) or not np.any(outside):
            region.indivisible = True
            region.flags.append("empty_cut")
            continue

        children = [inside, outside]
        children.sort(key=lambda m: float(np.sum(w.w[m])), reverse=True)
        logger.debug(f"영역 {region.node_id} 분할 (깊이 {depth}, h_cal={h_cal:.3e})")
        # 스택은 LIFO이므로 부피가 작은 자식을 먼저 넣음
        stack.append((region.node_id, depth + 1, children[1]))
        stack.append((region.node_id, depth + 1, children[0]))

    report = PartitionReport(nodes, tau, p, root_mask)
    _check_partition(report)
    report.inter_leaf_cut = inter_leaf_cut_weights(report, w)
    report.bound = stability_bound(report, p)
    logger.info(f"분할 완료: 잎 {len(report.regions)}개, B={report.B:.6g}")
    return report


def _check_partition(report: PartitionReport) -> None:
    """잎 마스크가 루트 마스크를 정확히 분할하는지 확인"""
    coverage = np.zeros(report.root_mask.shape, dtype=np.int64)
    for leaf in report.regions:
        coverage += leaf.mask.astype(np.int64)
    if np.any(coverage > 1):
        raise PartitionIntegrityError("잎 영역이 서로 겹칩니다")
    if not np.array_equal(coverage == 1, report.root_mask):
        raise PartitionIntegrityError("잎 영역의 합집합이 루트 영역과 다릅니다")


def inter_leaf_cut_weights(report: PartitionReport, w: WeightField) -> Dict[str, float]:
    """잎 쌍 사이 간선 가중치 합 (키 'a-b', a < b는 잎 순번)"""
    labels = report.label_image()
    W = w.w
    totals: Dict[Tuple[int, int], float] = {}
    for a_sl, b_sl in (((slice(None, -1), slice(None)), (slice(1, None), slice(None))),
                       ((slice(None), slice(None, -1)), (slice(None), slice(1, None)))):
        la, lb = labels[a_sl], labels[b_sl]
        crossing = (la >= 0) & (lb >= 0) & (la != lb)
        ew = 0.5 * (W[a_sl][crossing] + W[b_sl][crossing])
        for x, y, weight in zip(la[crossing], lb[crossing], ew):
            key = (int(min(x, y)), int(max(x, y)))
            totals[key] = totals.get(key, 0.0) + float(weight)
    return {f"{a}-{b}": totals[(a, b)] for a, b in sorted(totals)}


def _factor(h_cal: float, kappa: float, delta_tilde: float, p: float) -> float:
    if h_cal == 0:
        return math.inf
    return (1.0 + 1.0 / h_cal) * (1.0 + kappa ** p / delta_tilde ** 2)


def stability_bound(report: PartitionReport, p: Optional[float] = None) -> StabilityBound:
    """B = max_j (1 + 1/h_j)(1 + κ_j^p/δ̃_j²)"""
    p = report.p if p is None else p
    leaves = report.regions
    if not leaves:
        raise PartitionIntegrityError("잎 영역이 없습니다")

    factors = []
    for leaf in leaves:
        if "degenerate" in leaf.flags:
            continue
        factors.append({
            "node_id": leaf.node_id,
            "h_calibrated": leaf.h_calibrated,
            "kappa": leaf.kappa,
            "delta_tilde": leaf.delta_tilde,
            "factor": _factor(leaf.h_calibrated, leaf.kappa, leaf.delta_tilde, p),
            "factor_conservative": _factor(leaf.h_lower_calibrated, leaf.kappa, leaf.delta_tilde, p),
        })
    if not factors:
        raise PartitionIntegrityError("유한한 통계를 가진 잎 영역이 없습니다")

    value = max(f["factor"] for f in factors)
    conservative = max(f["factor_conservative"] for f in factors)
    infinite = math.isinf(value)
    if infinite:
        logger.warning("h = 0 인 잎 영역이 있어 B = +∞ 입니다")
    return StabilityBound(value, conservative, factors, infinite)
