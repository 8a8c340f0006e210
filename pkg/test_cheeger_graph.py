#!/usr/bin/env python3
"""
가중 격자 그래프와 체거 비율 테스트
"""
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from src.cheeger_graph import (WeightedGridGraph, bits_to_subset, brute_force_cheeger, build_graph,
                               calibrated, cheeger_ratio, reattach_isolated)
from src.error_handler import DegenerateGraphError, GridError, InvalidCutError
from src.models import TfGrid, WeightField


def _raises(exc_type, func, *args, **kwargs):
    try:
        func(*args, **kwargs)
    except exc_type as e:
        return e
    raise AssertionError(f"{exc_type.__name__}가 발생하지 않았습니다")


def _two_triangles(bridge: float) -> WeightedGridGraph:
    """삼각형 {0,1,2}, {3,4,5}를 가중치 bridge인 간선 2-3으로 연결"""
    u = [0, 1, 0, 3, 4, 3, 2]
    v = [1, 2, 2, 4, 5, 5, 3]
    w = [1, 1, 1, 1, 1, 1, bridge]
    return WeightedGridGraph.from_edges(6, u, v, w)


def test_uniform_grid_degrees():
    grid = TfGrid.centered(0.5, 4)
    g = build_graph(WeightField(grid, np.ones(grid.shape), 1.0))
    assert g.n_vertices == 16
    assert g.n_edges == 24
    deg = g.degrees.reshape(4, 4)
    assert deg[0, 0] == 2 and deg[0, 1] == 3 and deg[1, 1] == 4
    assert g.total_volume == 48
    assert not np.any(g.isolated)


def test_edge_weight_is_endpoint_mean():
    grid = TfGrid.centered(1.0, 4)
    w = np.arange(16, dtype=np.float64).reshape(4, 4)
    g = build_graph(WeightField(grid, w, 1.0))
    flat = w.ravel()
    assert np.allclose(g.edge_w, 0.5 * (flat[g.edge_u] + flat[g.edge_v]))
    A = g.adjacency()
    assert (A - A.T).nnz == 0


def test_domain_mask_restricts_vertices():
    grid = TfGrid.centered(0.25, 9)
    mask = grid.disc_mask(0.6)
    g = build_graph(WeightField(grid, np.ones(grid.shape), 1.0), mask)
    assert g.n_vertices == int(mask.sum())
    assert np.array_equal(g.subset_to_mask(np.ones(g.n_vertices, dtype=bool)), mask)
    assert np.all(np.hypot(g.coords[:, 0], g.coords[:, 1]) <= 0.6)
    assert np.allclose(g.coords, grid.coords(g.vertex_ij))
    _raises(GridError, build_graph, WeightField(grid, np.ones(grid.shape), 1.0), np.ones((3, 3), bool))


def test_cheeger_ratio_on_path():
    g = WeightedGridGraph.from_edges(4, [0, 1, 2], [1, 2, 3], [1.0, 1.0, 1.0])
    cut = cheeger_ratio(g, np.array([True, True, False, False]))
    assert cut.cut_weight == 1.0
    assert cut.vol_in == 3.0 and cut.vol_out == 3.0
    assert abs(cut.ratio - 1 / 3) < 1e-15
    # 여집합도 같은 비율
    assert cheeger_ratio(g, ~cut.subset).ratio == cut.ratio


def test_invalid_cuts_are_rejected():
    g = WeightedGridGraph.from_edges(3, [0, 1], [1, 2], [1.0, 1.0])
    _raises(InvalidCutError, cheeger_ratio, g, np.zeros(3, dtype=bool))
    _raises(InvalidCutError, cheeger_ratio, g, np.ones(3, dtype=bool))
    _raises(InvalidCutError, cheeger_ratio, g, np.ones(2, dtype=bool))


def test_from_edges_validation():
    _raises(DegenerateGraphError, WeightedGridGraph.from_edges, 2, [0], [0], [1.0])
    _raises(DegenerateGraphError, WeightedGridGraph.from_edges, 2, [0], [1], [-1.0])
    _raises(DegenerateGraphError, WeightedGridGraph.from_edges, 2, [0], [1], [0.0])


def test_brute_force_two_triangles():
    eps = 1e-3
    best = brute_force_cheeger(_two_triangles(eps))
    assert abs(best.ratio - eps / (6 + eps)) < 1e-15
    assert best.size == 3


def test_brute_force_matches_direct_enumeration():
    rng = np.random.default_rng(11)
    n = 7
    u, v = np.triu_indices(n, k=1)
    w = rng.uniform(0.1, 1.0, u.size)
    g = WeightedGridGraph.from_edges(n, u, v, w)
    ratios = [cheeger_ratio(g, bits_to_subset(code, n)).ratio for code in range(1, (1 << n) - 1)]
    assert abs(brute_force_cheeger(g).ratio - min(ratios)) < 1e-15


def test_brute_force_parallel_is_identical():
    rng = np.random.default_rng(5)
    grid = TfGrid.centered(1.0, 4)
    g = build_graph(WeightField(grid, rng.uniform(0.0, 1.0, grid.shape), 1.0))
    serial = brute_force_cheeger(g, workers=1, chunk=1 << 10)
    parallel = brute_force_cheeger(g, workers=4, chunk=1 << 10)
    assert serial.ratio == parallel.ratio
    assert np.array_equal(serial.subset, parallel.subset)


def test_brute_force_size_limit():
    n = 23
    g = WeightedGridGraph.from_edges(n, np.arange(n - 1), np.arange(1, n), np.ones(n - 1))
    err = _raises(DegenerateGraphError, brute_force_cheeger, g)
    assert "spectral" in str(err)


def test_degenerate_weights():
    grid = TfGrid.centered(1.0, 4)
    err = _raises(DegenerateGraphError, build_graph, WeightField(grid, np.zeros(grid.shape), 1.0))
    assert err.error_code == "degenerate_graph"


def test_reattach_isolated_uses_nearest_active():
    grid = TfGrid.centered(1.0, 6)
    w = np.ones(grid.shape)
    w[:, 4:] = 0.0
    g = build_graph(WeightField(grid, w, 1.0))
    active = ~g.isolated
    assert int(active.sum()) < g.n_vertices
    # 열 4는 열 3과의 간선으로 차수 0.5, 열 5만 고립
    assert np.array_equal(g.subset_to_mask(~active)[:, 5], np.ones(6, dtype=bool))
    subset = np.zeros(g.n_vertices, dtype=bool)
    subset[g.vertex_index[3:, :].ravel()] = True
    full = reattach_isolated(g, subset & active, active)
    as_grid = g.subset_to_mask(full)
    assert np.array_equal(as_grid[:, 5], np.arange(6) >= 3)
    assert np.array_equal(full[active], subset[active])


def test_calibration():
    assert abs(calibrated(0.01, 1 / 16) - 0.16) < 1e-15


TESTS = [
    test_uniform_grid_degrees,
    test_edge_weight_is_endpoint_mean,
    test_domain_mask_restricts_vertices,
    test_cheeger_ratio_on_path,
    test_invalid_cuts_are_rejected,
    test_from_edges_validation,
    test_brute_force_two_triangles,
    test_brute_force_matches_direct_enumeration,
    test_brute_force_parallel_is_identical,
    test_brute_force_size_limit,
    test_degenerate_weights,
    test_reattach_isolated_uses_nearest_active,
    test_calibration,
]


def main():
    """메인 함수"""
    print("=== 체거 그래프 테스트 ===")
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
