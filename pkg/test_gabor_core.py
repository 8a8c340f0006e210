#!/usr/bin/env python3
"""
가보 변환 핵심 연산 테스트
"""
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from src.error_handler import FieldKindError, GridError
from src.gabor_core import (PHI_NORM_SQ, ambiguity, cr_residual, dgt, gabor_closed_form,
                            gaussian_ambiguity_closed_form, gradient_field, holomorphic_lift,
                            magnitude_gradient_defect, weight_field, window_derivative_dgt)
from src.models import FieldKind, GaborField, SignalKind, TfGrid
from src.signal_io import gaussian_mixture, random_mixture, synthesize

GRID = TfGrid.centered(1 / 16, 257)


def _raises(exc_type, func, *args, **kwargs):
    try:
        func(*args, **kwargs)
    except exc_type as e:
        return e
    raise AssertionError(f"{exc_type.__name__}가 발생하지 않았습니다")


def _atom(a: float = 0.0, b: float = 0.0, phase: float = 0.0):
    """e^{iα}·M_b T_a φ"""
    return gaussian_mixture([a], [b], [np.exp(1j * phase)])


def test_gaussian_closed_form_magnitude():
    F = dgt(synthesize(SignalKind.GAUSSIAN), GRID)
    X, Y = GRID.mesh()
    expected = PHI_NORM_SQ * np.exp(-0.5 * np.pi * (X ** 2 + Y ** 2))
    err = np.max(np.abs(np.abs(F.values) - expected)) / expected.max()
    assert err <= 1e-4, err
    assert F.kind == FieldKind.GABOR


def test_shifted_modulated_atom_matches_closed_form():
    F = dgt(_atom(1.0, 0.5), GRID)
    G = gabor_closed_form(GRID, a=1.0, b=0.5)
    err = np.max(np.abs(F.values - G.values)) / np.max(np.abs(G.values))
    assert err <= 1e-6, err


def test_direct_path_matches_closed_form():
    # 1/(dt·Δ)가 정수가 아니면 직접 행렬곱 경로
    grid = TfGrid.centered(0.075, 41)
    F = dgt(_atom(0.3, -0.4), grid)
    G = gabor_closed_form(grid, a=0.3, b=-0.4)
    err = np.max(np.abs(F.values - G.values)) / np.max(np.abs(G.values))
    assert err <= 1e-6, err


def test_parseval_for_random_mixtures():
    rng = np.random.default_rng(2024)
    for _ in range(10):
        f = random_mixture(rng)
        F = dgt(f, GRID)
        lhs = float(np.sum(np.abs(F.values) ** 2)) * GRID.delta ** 2
        rhs = f.energy * PHI_NORM_SQ
        assert abs(lhs - rhs) <= 1e-4 * rhs, (lhs, rhs)


def test_dgt_commutes_with_global_phase():
    f = random_mixture(np.random.default_rng(12))
    F = dgt(f, GRID)
    for alpha in (0.3, np.pi / 2, 2.0):
        rotated = dgt(f.scaled(np.exp(1j * alpha)), GRID)
        err = np.max(np.abs(rotated.values - np.exp(1j * alpha) * F.values))
        assert err <= 1e-12 * np.abs(F.values).max(), (alpha, err)


def test_window_derivative_vanishes_at_origin_for_gaussian():
    Fp = window_derivative_dgt(synthesize(SignalKind.GAUSSIAN), GRID)
    i, j = GRID.index_of(0.0, 0.0)
    assert abs(Fp.values[i, j]) < 1e-12
    assert Fp.kind == FieldKind.GENERIC


def _gradient_identity_error(f, grid: TfGrid) -> float:
    F = dgt(f, grid)
    Fp = window_derivative_dgt(f, grid)
    mag = np.abs(F.values)
    gx, gy = gradient_field(mag, grid)
    grad = np.hypot(gx, gy)
    sel = np.zeros(grid.shape, dtype=bool)
    sel[1:-1, 1:-1] = True
    sel &= (mag >= 1e-2 * mag.max()) & (grad > 1e-8 * grad.max())
    return float(np.max(np.abs(np.abs(Fp.values[sel]) - grad[sel]) / grad[sel]))


def test_gradient_identity_single_atoms():
    signals = [_atom(), _atom(1.0), _atom(0.0, 1.0), _atom(-1.0, 0.5), _atom(1.0, phase=0.7)]
    for f in signals:
        err = _gradient_identity_error(f, GRID)
        assert err <= 2e-2, err


def test_gradient_identity_improves_with_finer_grid():
    fine = TfGrid.centered(1 / 32, 257)
    for f in (_atom(), _atom(1.0, 0.5)):
        coarse_err = _gradient_identity_error(f, GRID)
        fine_err = _gradient_identity_error(f, fine)
        assert coarse_err >= 3.0 * fine_err, (coarse_err, fine_err)


def test_ambiguity_of_gaussian_matches_closed_form():
    A = ambiguity(synthesize(SignalKind.GAUSSIAN), GRID)
    E = gaussian_ambiguity_closed_form(GRID)
    err = np.max(np.abs(A.values - E.values)) / np.max(np.abs(E.values))
    assert err <= 1e-6, err
    assert A.kind == FieldKind.AMBIGUITY


def test_ambiguity_requires_lags_on_sample_lattice():
    grid = TfGrid.centered(0.1, 21)
    _raises(GridError, ambiguity, synthesize(SignalKind.GAUSSIAN), grid)


def test_nyquist_violation_is_rejected():
    coarse = synthesize(SignalKind.GAUSSIAN, n=256, dt=0.125)
    _raises(GridError, dgt, coarse, GRID)


def test_holomorphic_lift_requires_gabor_field():
    A = ambiguity(synthesize(SignalKind.GAUSSIAN), GRID)
    err = _raises(FieldKindError, holomorphic_lift, A)
    assert err.error_code == "field_kind"


def test_cr_residual_gaussian_is_roundoff():
    F = dgt(synthesize(SignalKind.GAUSSIAN), GRID)
    # φ의 리프트는 상수
    G = holomorphic_lift(F).values
    i, j = GRID.index_of(0.0, 0.0)
    assert abs(G[i, j] - PHI_NORM_SQ) < 1e-10
    assert cr_residual(F) < 1e-5


def test_cr_residual_shrinks_with_grid():
    f = _atom(1.0)
    fine = TfGrid.centered(1 / 32, 257)
    coarse_res = cr_residual(dgt(f, GRID))
    fine_res = cr_residual(dgt(f, fine))
    assert coarse_res < 0.1, coarse_res
    assert coarse_res >= 3.0 * fine_res, (coarse_res, fine_res)


def test_magnitude_gradient_defect_small():
    assert magnitude_gradient_defect(dgt(_atom(1.0, 0.5), GRID)) < 0.05
    assert magnitude_gradient_defect(dgt(_atom(-0.5, 1.0), GRID)) < 0.05


def test_weight_field_power_and_degenerate():
    F = dgt(synthesize(SignalKind.GAUSSIAN), GRID)
    w = weight_field(F, 1.5)
    assert np.allclose(w.w, np.abs(F.values) ** 1.5)
    assert not w.degenerate
    zero = GaborField(GRID, np.zeros(GRID.shape), FieldKind.GABOR)
    assert weight_field(zero, 1.0).degenerate


TESTS = [
    test_gaussian_closed_form_magnitude,
    test_shifted_modulated_atom_matches_closed_form,
    test_direct_path_matches_closed_form,
    test_parseval_for_random_mixtures,
    test_dgt_commutes_with_global_phase,
    test_window_derivative_vanishes_at_origin_for_gaussian,
    test_gradient_identity_single_atoms,
    test_gradient_identity_improves_with_finer_grid,
    test_ambiguity_of_gaussian_matches_closed_form,
    test_ambiguity_requires_lags_on_sample_lattice,
    test_nyquist_violation_is_rejected,
    test_holomorphic_lift_requires_gabor_field,
    test_cr_residual_gaussian_is_roundoff,
    test_cr_residual_shrinks_with_grid,
    test_magnitude_gradient_defect_small,
    test_weight_field_power_and_degenerate,
]


def main():
    """메인 함수"""
    print("=== 가보 변환 테스트 ===")
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
