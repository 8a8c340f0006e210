"""
SVG 그림 출력

같은 입력이면 바이트 단위로 같은 SVG가 나오도록 Agg 백엔드, 고정 해시 솔트,
날짜 메타데이터 제거를 사용합니다.
"""
from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .logger import get_logger  # noqa: E402
from .models import GaborField, WeightField  # noqa: E402

logger = get_logger("Plotting")

matplotlib.rcParams["svg.hashsalt"] = "tfstab"
matplotlib.rcParams["svg.fonttype"] = "none"

_SVG_METADATA = {"Date": None, "Creator": None}


def log_magnitude_db(values: np.ndarray, floor_db: float = 60.0) -> np.ndarray:
    """20·log10(|F| / max|F|)를 [-floor_db, 0]으로 자른 값"""
    mag = np.abs(values)
    peak = float(mag.max())
    if peak == 0:
        return np.full(mag.shape, -floor_db)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag / peak)
    return np.clip(db, -floor_db, 0.0)


def _save(fig, path: str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(target, format="svg", metadata=_SVG_METADATA)
    plt.close(fig)
    logger.debug(f"SVG 저장: {target}")
    return target


def _heatmap(ax, field: Union[GaborField, WeightField], floor_db: float):
    values = field.values if isinstance(field, GaborField) else field.w ** (1.0 / field.p)
    db = log_magnitude_db(values, floor_db)
    # values[i, j]는 (x_i, y_j): 가로축 시간, 세로축 주파수
    im = ax.imshow(db.T, origin="lower", extent=field.grid.extent, cmap="gray",
                   vmin=-floor_db, vmax=0.0, interpolation="nearest", aspect="equal")
    ax.set_xlabel("x (time)")
    ax.set_ylabel("y (frequency)")
    return im


def plot_field_heatmap(field, path: str, floor_db: float = 60.0, title: Optional[str] = None) -> Path:
    """로그 크기 흑백 히트맵"""
    fig, ax = plt.subplots(figsize=(6, 5))
    im = _heatmap(ax, field, floor_db)
    fig.colorbar(im, ax=ax, label="dB")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_partition_overlay(field, leaf_masks: Sequence[np.ndarray], path: str,
                           floor_db: float = 60.0, title: Optional[str] = None) -> Path:
    """히트맵 위에 잎 영역 경계선을 겹쳐 그림"""
    fig, ax = plt.subplots(figsize=(6, 5))
    _heatmap(ax, field, floor_db)
    grid = field.grid
    colors = plt.get_cmap("tab10")
    for k, mask in enumerate(leaf_masks):
        ax.contour(grid.x, grid.y, np.asarray(mask, dtype=np.float64).T, levels=[0.5],
                   colors=[colors(k % 10)], linewidths=1.0)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_sweep(a_values: Sequence[float], h_values: Sequence[float], ratios: Sequence[float],
               path: str) -> Path:
    """a에 따른 보정 체거 추정과 경험적 비율"""
    fig, (ax_h, ax_r) = plt.subplots(1, 2, figsize=(9, 4))
    ax_h.semilogy(a_values, h_values, "o-", color="black")
    ax_h.set_xlabel("a")
    ax_h.set_ylabel("h (calibrated)")
    ax_r.plot(a_values, ratios, "s-", color="black")
    ax_r.set_xlabel("a")
    ax_r.set_ylabel("distance / ((1 + 1/h) mismatch)")
    fig.tight_layout()
    return _save(fig, path)


def plot_signal(times: np.ndarray, samples: np.ndarray, path: str,
                reference: Optional[np.ndarray] = None) -> Path:
    """재구성 신호의 실수부/허수부 (기준 신호가 있으면 점선으로)"""
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(times, samples.real, color="black", label="Re")
    ax.plot(times, samples.imag, color="gray", label="Im")
    if reference is not None:
        ax.plot(times, np.abs(reference), "--", color="black", linewidth=0.8, label="|ref|")
    ax.set_xlabel("t")
    ax.legend(loc="upper right")
    fig.tight_layout()
    return _save(fig, path)

