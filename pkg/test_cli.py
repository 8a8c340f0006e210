#!/usr/bin/env python3
"""
명령행 인터페이스 테스트
"""
import contextlib
import csv
import io
import json
import sys
import tempfile
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

from main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main
from src.config_manager import ConfigManager

# 빠른 실행용 작은 격자
SMALL_CONFIG = {"grid_delta": 0.125, "grid_n": 65, "log_level": "WARNING"}


def _run(argv):
    """(종료 코드, stdout, stderr)"""
    stdout, stderr = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
        code = main(argv)
    return code, stdout.getvalue(), stderr.getvalue()


def _config(tmp: Path) -> str:
    path = tmp / "config.json"
    path.write_text(json.dumps(SMALL_CONFIG), encoding="utf-8")
    return str(path)


def _read_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


def _outputs(out: Path):
    """logs를 제외한 출력 파일 내용"""
    return {p.relative_to(out).as_posix(): p.read_bytes()
            for p in sorted(out.rglob("*")) if p.is_file() and "logs" not in p.parts}


def test_version_and_usage_errors():
    code, stdout, _ = _run(["--version"])
    assert code == EXIT_OK
    assert "tfstab" in stdout
    assert _run(["frobnicate"])[0] == EXIT_USAGE
    assert _run([])[0] == EXIT_USAGE
    assert _run(["sweep", "--a-list", "one,two"])[0] == EXIT_USAGE


def test_transform_writes_field_and_manifest():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        out = tmp / "out"
        code, _, stderr = _run(["--config", _config(tmp), "-o", str(out),
                                "transform", "--synth", "gaussian", "--csv"])
        assert code == EXIT_OK, stderr
        for name in ("field.tfc", "field.svg", "field.csv", "transform.json", "manifest.json"):
            assert (out / name).is_file(), name
        assert (out / "logs").is_dir()
        manifest = _read_json(out / "manifest.json")
        assert manifest["subcommand"] == "transform"
        assert manifest["analysis"]["grid_n"] == 65
        assert manifest["analysis"]["q"] == "inf"
        assert manifest["options"]["synth"] == "gaussian"
        summary = _read_json(out / "transform.json")
        assert summary["grid"]["nx"] == 65
        assert abs(summary["l2_norm"] ** 2 - 2 ** -0.5 * summary["signal_energy"]) < 1e-3


def test_cheeger_from_field_file():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        config = _config(tmp)
        assert _run(["--config", config, "-o", str(tmp / "t"), "transform", "--synth", "gaussian"])[0] == EXIT_OK
        out = tmp / "c"
        code, _, stderr = _run(["--config", config, "-o", str(out), "cheeger",
                                "--in", str(tmp / "t" / "field.tfc"), "--export-graph"])
        assert code == EXIT_OK, stderr
        result = _read_json(out / "cheeger.json")
        assert result["h_lower"] <= result["h_star"]
        assert 0.3 <= result["h_calibrated"] <= 0.6, result["h_calibrated"]
        assert (out / "graph_edges.txt").is_file()
        assert (out / "graph_vertices.txt").is_file()


def test_partition_of_gaussian_pair():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        out = tmp / "p"
        code, _, stderr = _run(["--config", _config(tmp), "-o", str(out), "partition",
                                "--synth", "gaussian_pair_plus", "--a", "2"])
        assert code == EXIT_OK, stderr
        report = _read_json(out / "partition.json")
        assert report["n_leaves"] >= 2
        labels = np.load(out / "labels.npy")
        assert labels.shape == (65, 65)
        assert labels.min() >= 0
        assert (out / "partition.svg").is_file()


def test_sweep_writes_rows():
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "s"
        code, _, stderr = _run(["--log-level", "WARNING", "-o", str(out), "sweep",
                                "--a-list", "1,1.5,2,2.5,3", "--p", "1", "--q", "inf"])
        assert code == EXIT_OK, stderr
        with open(out / "sweep.csv", newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 5
        assert list(rows[0].keys()) == ["a", "h_cal", "mismatch", "distance", "bound_rhs", "ratio"]
        summary = _read_json(out / "sweep.json")
        assert summary["empirical_constant"] == max(float(r["ratio"]) for r in rows)
        assert (out / "sweep.svg").is_file()


def test_stability_requires_both_files():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        signal = tmp / "f.csv"
        signal.write_text("dt=0.0625\n1.0\n0.5\n0.25\n", encoding="utf-8")
        code, _, stderr = _run(["-o", str(tmp / "out"), "stability", "--f", str(signal)])
        assert code == EXIT_FAILURE
        assert any(line.startswith("error: config:") for line in stderr.splitlines())


def test_reconstruct_reports_error():
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "r"
        code, _, stderr = _run(["--log-level", "WARNING", "-o", str(out), "reconstruct",
                                "--synth", "modulated_gaussian", "--b", "0.5"])
        assert code == EXIT_OK, stderr
        summary = _read_json(out / "reconstruct.json")
        assert summary["relative_error"] <= 1e-5, summary
        assert summary["regularization"] == "threshold"
        assert (out / "reconstructed.csv").is_file()
        assert (out / "reconstructed.svg").is_file()


def test_diagnose_report():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        out = tmp / "d"
        code, _, stderr = _run(["--config", _config(tmp), "-o", str(out), "diagnose", "--synth", "gaussian"])
        assert code == EXIT_OK, stderr
        report = _read_json(out / "diagnose.json")
        assert report["zero_count"] == 0
        assert report["zero_count"] <= report["zero_bound"]
        assert [item["R"] for item in report["log_derivative"]["by_radius"]] == [1.0, 2.0, 3.0, 4.0]
        assert report["cr_residual"] < 1e-3


def test_missing_input_exits_with_error_code():
    with tempfile.TemporaryDirectory() as tmp:
        code, _, stderr = _run(["-o", str(Path(tmp) / "x"), "cheeger", "--in", str(Path(tmp) / "none.csv")])
        assert code == EXIT_FAILURE
        lines = [line for line in stderr.splitlines() if line.startswith("error: ")]
        assert len(lines) == 1
        assert lines[0].startswith("error: signal_format:")


def test_outputs_are_byte_identical_across_runs():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        out = tmp / "out"
        argv = ["--config", _config(tmp), "-o", str(out), "transform", "--synth", "gaussian_pair_minus",
                "--a", "1.5", "--csv"]
        assert _run(argv)[0] == EXIT_OK
        first = _outputs(out)
        assert _run(argv)[0] == EXIT_OK
        second = _outputs(out)
        assert first.keys() == second.keys()
        for name in first:
            assert first[name] == second[name], name


def test_every_subcommand_is_deterministic():
    runs = {
        "cheeger": ["cheeger", "--synth", "gaussian_pair_plus", "--a", "1.5", "--export-graph"],
        "partition": ["partition", "--synth", "gaussian_pair_plus", "--a", "2"],
        "stability": ["stability", "--a", "1.5"],
        "sweep": ["sweep", "--a-list", "1,2"],
        "reconstruct": ["reconstruct", "--synth", "modulated_gaussian", "--b", "0.5", "--noise", "1e-4"],
        "diagnose": ["diagnose", "--synth", "modulated_gaussian", "--b", "0.5"],
    }
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        config = _config(tmp)
        for name, args in runs.items():
            out = tmp / name
            argv = ["--config", config, "-o", str(out)] + args
            code, _, stderr = _run(argv)
            assert code == EXIT_OK, (name, stderr)
            first = _outputs(out)
            assert _run(argv)[0] == EXIT_OK, name
            second = _outputs(out)
            assert first.keys() == second.keys(), name
            for path in first:
                assert first[path] == second[path], (name, path)


def test_config_summary_reflects_file():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        summary = ConfigManager(_config(tmp)).get_config_summary()
        assert summary["file_exists"] is True
        assert summary["settings"]["grid_n"] == 65
        assert summary["settings"]["grid_delta"] == 0.125
        missing = ConfigManager(str(tmp / "none.json")).get_config_summary()
        assert missing["file_exists"] is False
        assert missing["settings"]["grid_n"] == 257


TESTS = [
    test_version_and_usage_errors,
    test_transform_writes_field_and_manifest,
    test_cheeger_from_field_file,
    test_partition_of_gaussian_pair,
    test_sweep_writes_rows,
    test_stability_requires_both_files,
    test_reconstruct_reports_error,
    test_diagnose_report,
    test_missing_input_exits_with_error_code,
    test_outputs_are_byte_identical_across_runs,
    test_every_subcommand_is_deterministic,
    test_config_summary_reflects_file,
]


def run_all():
    """모든 테스트 실행"""
    print("=== 명령행 인터페이스 테스트 ===")
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
    sys.exit(run_all())
