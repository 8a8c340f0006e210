"""
메인 애플리케이션 클래스

하위 명령마다 하나의 run_* 메서드가 있고, 모든 실행은 출력 디렉토리에
manifest.json과 logs/를 남깁니다.
"""
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .cheeger_graph import build_graph
from .config_manager import ConfigManager
from .error_handler import ConfigError, FieldKindError
from .gabor_core import (ambiguity, cr_residual, dgt, magnitude_gradient_defect, weight_field,
                         window_derivative_dgt)
from .logger import get_logger, get_logger_manager
from .models import (AnalysisConfig, FieldKind, GaborField, ReconstructionConfig, Regularization,
                     RunConfig, Signal, SignalKind, TfGrid, WeightField)
from .multicomponent import recursive_partition
from .plotting import plot_field_heatmap, plot_partition_overlay, plot_signal, plot_sweep
from .reconstruct import (add_spectrogram_noise, aligned_relative_error, default_tau_reg,
                          reconstruct_from_spectrogram, reconstruction_grid)
from .serialization import export_field_csv, export_graph, read_field, write_field, write_json, write_rows_csv
from .signal_io import load_signal, save_signal_csv, synthesize
from .spectral_cluster import estimate_cheeger
from .stability_lab import (EXPERIMENT_COLUMNS, DNormParams, compare_fields, concentration_epsilon,
                            count_zeros, empirical_constant, experiment_grid, instability_experiment,
                            jensen_zero_bound, log_derivative_growth, variation_comparison,
                            window_derivative_ratio)

FIELD_SUFFIXES = {".tfc"}


class StabilityApp:
    """CLI 하위 명령 실행기"""

    def __init__(self, config_manager: Optional[ConfigManager] = None):
        self.logger_manager = get_logger_manager()
        self.logger = get_logger("StabilityApp")
        self.config_manager = config_manager or ConfigManager()
        self.logger_manager.set_log_level(self.config.log_level)

    @property
    def config(self) -> AnalysisConfig:
        return self.config_manager.get_config()

    def run(self, run_config: RunConfig) -> Dict[str, Any]:
        """하위 명령 실행 후 결과 요약 반환"""
        handler = getattr(self, f"run_{run_config.subcommand}", None)
        if handler is None:
            raise ConfigError(f"알 수 없는 하위 명령: {run_config.subcommand}")

        out = Path(run_config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.logger_manager.enable_file_logging(str(out / "logs"))
        try:
            self.logger_manager.log_system_info()
            self.logger.debug(f"설정 요약: {self.config_manager.get_config_summary()}")
            self.config_manager.write_manifest(str(out), run_config)
            self.logger.info(f"'{run_config.subcommand}' 실행 시작 (출력: {out})")
            summary = handler(out, **run_config.options)
            self.logger.info(f"'{run_config.subcommand}' 실행 완료")
            return summary
        finally:
            self.logger_manager.close_file_logging()

    # ---- 입력 준비 ----

    def _signal(self, input_path: Optional[str] = None, synth: Optional[str] = None,
                a: float = 0.0, b: float = 0.0, n: Optional[int] = None, dt: Optional[float] = None,
                normalize: bool = False) -> Signal:
        cfg = self.config
        if input_path:
            return load_signal(input_path, normalize=normalize)
        kind = SignalKind(synth or SignalKind.GAUSSIAN.value)
        return synthesize(kind, a=a, b=b, n=n or cfg.signal_n, dt=dt or cfg.signal_dt)

    def _field(self, input_path: Optional[str] = None, **signal_options) -> Union[GaborField, WeightField]:
        """.tfc 파일이면 그대로 읽고, 아니면 신호를 가보 변환"""
        if input_path and Path(input_path).suffix.lower() in FIELD_SUFFIXES:
            return read_field(input_path)
        f = self._signal(input_path, **signal_options)
        return dgt(f, self.config.grid(), self.config.t_cut, self.config.workers)

    def _weights(self, field: Union[GaborField, WeightField], p: float) -> Tuple[WeightField, GaborField]:
        """가중치 필드와 분할 통계용 크기 필드"""
        if isinstance(field, WeightField):
            if p != field.p:
                self.logger.warning(f"파일의 p={field.p:g}를 사용합니다 (요청 p={p:g} 무시)")
            magnitude = field.w ** (1.0 / field.p)
            return field, GaborField(field.grid, magnitude.astype(np.complex128), FieldKind.GENERIC)
        return weight_field(field, p), field

    @staticmethod
    def _disc(grid: TfGrid, radius: Optional[float]) -> Optional[np.ndarray]:
        return None if radius is None else grid.disc_mask(radius)

    # ---- 하위 명령 ----

    def run_transform(self, out: Path, input_path: Optional[str] = None, synth: Optional[str] = None,
                      a: float = 0.0, b: float = 0.0, n: Optional[int] = None, dt: Optional[float] = None,
                      normalize: bool = False, kind: str = "gabor", csv: bool = False) -> Dict[str, Any]:
        """신호 → TFC1 필드 파일 + SVG 히트맵"""
        cfg = self.config
        f = self._signal(input_path, synth, a, b, n, dt, normalize)
        grid = cfg.grid()
        if kind == "gabor":
            field = dgt(f, grid, cfg.t_cut, cfg.workers)
        elif kind == "window-derivative":
            field = window_derivative_dgt(f, grid, cfg.t_cut, cfg.workers)
        elif kind == "ambiguity":
            field = ambiguity(f, grid, cfg.workers)
        else:
            raise FieldKindError(f"알 수 없는 변환 종류: {kind}")

        paths = [write_field(field, str(out / "field.tfc")),
                 plot_field_heatmap(field, str(out / "field.svg"), cfg.svg_floor_db, title=kind)]
        if csv:
            paths.append(export_field_csv(field, str(out / "field.csv")))
        summary = {"kind": kind, "grid": grid.to_dict(), "l2_norm": field.l2_norm(),
                   "signal_energy": f.energy, "files": sorted(p.name for p in paths)}
        write_json(summary, str(out / "transform.json"))
        return summary

    def run_cheeger(self, out: Path, input_path: Optional[str] = None, p: Optional[float] = None,
                    radius: Optional[float] = None, export_graph_files: bool = False,
                    **signal_options) -> Dict[str, Any]:
        """필드 또는 신호 → CheegerEstimate JSON"""
        cfg = self.config
        p = cfg.p if p is None else p
        field = self._field(input_path, **signal_options)
        w, _ = self._weights(field, p)
        mask = self._disc(w.grid, radius)
        est = estimate_cheeger(w, mask, tol=cfg.eig_tol, max_iter_factor=cfg.eig_max_iter_factor,
                               seed=cfg.seed, floor=cfg.degree_floor)
        result = est.to_dict()
        result.update({"p": w.p, "radius": radius})
        write_json(result, str(out / "cheeger.json"))
        if export_graph_files:
            export_graph(build_graph(w, mask, cfg.degree_floor), str(out), "graph")
        self.logger.info(f"h* = {est.h_star:.6g}, 보정 h = {est.h_calibrated:.6g}")
        return result

    def run_partition(self, out: Path, input_path: Optional[str] = None, p: Optional[float] = None,
                      tau: Optional[float] = None, radius: Optional[float] = None,
                      **signal_options) -> Dict[str, Any]:
        """필드 → PartitionReport JSON + SVG 오버레이"""
        cfg = self.config
        p = cfg.p if p is None else p
        tau = cfg.tau if tau is None else tau
        field = self._field(input_path, **signal_options)
        w, magnitude = self._weights(field, p)
        report = recursive_partition(w, magnitude, tau, max_depth=cfg.max_depth,
                                     min_vertices=cfg.min_vertices,
                                     domain_mask=self._disc(w.grid, radius), config=cfg)
        data = report.to_dict()
        write_json(data, str(out / "partition.json"))
        np.save(out / "labels.npy", report.label_image(), allow_pickle=False)
        plot_partition_overlay(magnitude, [leaf.mask for leaf in report.regions],
                               str(out / "partition.svg"), cfg.svg_floor_db)
        return {"n_leaves": data["n_leaves"], "B": report.B}

    def run_stability(self, out: Path, f_path: Optional[str] = None, g_path: Optional[str] = None,
                      a: float = 2.0, p: Optional[float] = None, q: Optional[float] = None,
                      s: float = 6.0) -> Dict[str, Any]:
        """두 신호 → ExperimentRow CSV (입력이 없으면 두 가우시안 쌍)"""
        cfg = self.config
        params = DNormParams(p=cfg.p if p is None else p, q=cfg.q if q is None else q, s=s)
        if bool(f_path) != bool(g_path):
            raise ConfigError("--f와 --g는 함께 지정해야 합니다")
        if f_path:
            f, g = load_signal(f_path), load_signal(g_path)
        else:
            f = synthesize(SignalKind.GAUSSIAN_PAIR_PLUS, a=a, n=cfg.signal_n, dt=cfg.signal_dt)
            g = synthesize(SignalKind.GAUSSIAN_PAIR_MINUS, a=a, n=cfg.signal_n, dt=cfg.signal_dt)
        grid = cfg.grid()
        F = dgt(f, grid, cfg.t_cut, cfg.workers)
        G = dgt(g, grid, cfg.t_cut, cfg.workers)
        row = compare_fields(F, G, params, cfg, a=a if not f_path else math.nan)
        write_rows_csv([row.to_dict()], EXPERIMENT_COLUMNS, str(out / "stability.csv"))
        return row.to_dict()

    def run_sweep(self, out: Path, a_list: Optional[List[float]] = None, p: Optional[float] = None,
                  q: Optional[float] = None, s: float = 6.0) -> Dict[str, Any]:
        """두 가우시안 쌍 불안정성 실험"""
        cfg = self.config
        a_values = a_list or [1.0, 1.5, 2.0, 2.5, 3.0]
        params = DNormParams(p=cfg.p if p is None else p, q=cfg.q if q is None else q, s=s)
        rows = instability_experiment(a_values, params, experiment_grid(), cfg, cfg.workers)
        write_rows_csv([row.to_dict() for row in rows], EXPERIMENT_COLUMNS, str(out / "sweep.csv"))
        plot_sweep([r.a for r in rows], [r.h_cal for r in rows], [r.ratio for r in rows],
                   str(out / "sweep.svg"))
        summary = {"n_rows": len(rows), "empirical_constant": empirical_constant(rows)}
        write_json(summary, str(out / "sweep.json"))
        return summary

    def _spectrogram(self, input_path: Optional[str], delta: float, noise: float,
                     signal_options: Dict[str, Any]) -> Tuple[np.ndarray, TfGrid, Optional[Signal]]:
        """재구성 입력 스펙트로그램 S와 격자, (합성이면) 기준 신호"""
        cfg = self.config
        if input_path and Path(input_path).suffix.lower() in FIELD_SUFFIXES:
            field = read_field(input_path)
            if isinstance(field, WeightField):
                S = field.w ** (2.0 / field.p)
            elif field.kind == FieldKind.GABOR:
                S = np.abs(field.values) ** 2
            else:
                raise FieldKindError("스펙트로그램 입력은 가보 필드나 가중치 필드여야 합니다")
            reference = None
            grid = field.grid
        else:
            reference = self._signal(input_path, **signal_options)
            grid = reconstruction_grid(delta)
            S = np.abs(dgt(reference, grid, cfg.t_cut, cfg.workers).values) ** 2
        if noise > 0:
            S = add_spectrogram_noise(S, noise, cfg.seed)
        return S, grid, reference

    def run_reconstruct(self, out: Path, input_path: Optional[str] = None, delta: float = 0.0625,
                        noise: float = 0.0, regularization: Optional[str] = None,
                        tau_reg: Optional[float] = None, reference_path: Optional[str] = None,
                        **signal_options) -> Dict[str, Any]:
        """스펙트로그램 (파일 또는 합성 신호) → 신호 CSV"""
        cfg = self.config
        S, grid, reference = self._spectrogram(input_path, delta, noise, signal_options)
        if tau_reg is None:
            tau_reg = default_tau_reg(noise) if noise > 0 else cfg.tau_reg
        rcfg = ReconstructionConfig(grid, Regularization(regularization or cfg.regularization),
                                    tau_reg, cfg.reconstruction_radius)
        recovered = reconstruct_from_spectrogram(S, rcfg, cfg.workers)
        save_signal_csv(recovered, str(out / "reconstructed.csv"))
        if reference_path:
            reference = load_signal(reference_path)

        summary: Dict[str, Any] = {"grid": grid.to_dict(), "regularization": rcfg.regularization.value,
                                   "tau_reg": tau_reg, "noise": noise}
        ref_on_grid = None
        if reference is not None:
            summary["relative_error"] = aligned_relative_error(recovered, reference)
            self.logger.info(f"정렬 상대 오차: {summary['relative_error']:.3e}")
            offset = int(round((recovered.t0 - reference.t0) / reference.dt))
            if 0 <= offset and offset + recovered.n <= reference.n and abs(reference.dt - recovered.dt) < 1e-12:
                ref_on_grid = reference.samples[offset:offset + recovered.n]
        plot_signal(recovered.times, recovered.samples, str(out / "reconstructed.svg"), ref_on_grid)
        write_json(summary, str(out / "reconstruct.json"))
        return summary

    def run_diagnose(self, out: Path, input_path: Optional[str] = None, radius: Optional[float] = None,
                     r: Optional[float] = None, **signal_options) -> Dict[str, Any]:
        """코시-리만 잔차, 영점 수, 로그 도함수 증가율 등 진단 보고"""
        cfg = self.config
        R = cfg.zero_radius if radius is None else radius
        r = cfg.log_derivative_r if r is None else r
        f = self._signal(input_path, **signal_options)
        grid = cfg.grid()
        F = dgt(f, grid, cfg.t_cut, cfg.workers)
        Fprime = window_derivative_dgt(f, grid, cfg.t_cut, cfg.workers)

        r_max = min(abs(v) for v in grid.extent)
        norms, spread = log_derivative_growth(F, r, [float(k) for k in range(1, 7) if k <= r_max])
        growth = [{"R": n.R, "norm": n.value, "growth_ratio": n.growth_ratio} for n in norms]

        est = estimate_cheeger(weight_field(F, cfg.p), grid.disc_mask(R), tol=cfg.eig_tol,
                               max_iter_factor=cfg.eig_max_iter_factor, seed=cfg.seed,
                               floor=cfg.degree_floor)
        n_zeros = count_zeros(F, R)
        report = {
            "R": R,
            "cr_residual": cr_residual(F),
            "magnitude_gradient_defect": magnitude_gradient_defect(F),
            "zero_count": n_zeros,
            "zero_bound": jensen_zero_bound(R),
            "log_derivative": {"r": r, "by_radius": growth, "growth_spread": spread},
            "concentration_epsilon": concentration_epsilon(F, R, cfg.p),
            "window_derivative_ratio": window_derivative_ratio(F, Fprime, R),
            "variation": variation_comparison(F, R, est.h_calibrated),
        }
        write_json(report, str(out / "diagnose.json"))
        self.logger.info(f"B_{R:g} 영점 {n_zeros}개 (상한 {report['zero_bound']:.1f})")
        return report
