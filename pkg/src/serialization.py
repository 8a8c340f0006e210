"""
필드/결과 직렬화

TFC1 바이너리 형식:
    헤더 {magic "TFC1", u32 nx, u32 ny, f64 delta, f64 x0, f64 y0, u8 kind}
    kind=3(가중치)이면 f64 p가 이어짐
    이후 행 우선(row-major) 리틀엔디언 데이터: 복소는 f64 (re, im) 쌍, 가중치는 f64
"""
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

import numpy as np

from .error_handler import SerializationError
from .logger import get_logger
from .models import FieldKind, GaborField, TfGrid, WeightField

logger = get_logger("Serialization")

MAGIC = b"TFC1"
HEADER_DTYPE = np.dtype([
    ("magic", "S4"),
    ("nx", "<u4"),
    ("ny", "<u4"),
    ("delta", "<f8"),
    ("x0", "<f8"),
    ("y0", "<f8"),
    ("kind", "u1"),
])
KIND_CODES = {FieldKind.GABOR: 0, FieldKind.AMBIGUITY: 1, FieldKind.GENERIC: 2}
WEIGHT_CODE = 3


def write_field(field: Union[GaborField, WeightField], path: str) -> Path:
    """TFC1 파일 기록"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = field.grid
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header["magic"] = MAGIC
    header["nx"] = grid.nx
    header["ny"] = grid.ny
    header["delta"] = grid.delta
    header["x0"] = grid.x0
    header["y0"] = grid.y0

    with open(path, "wb") as f:
        if isinstance(field, WeightField):
            header["kind"] = WEIGHT_CODE
            f.write(header.tobytes())
            f.write(np.array([field.p], dtype="<f8").tobytes())
            f.write(np.ascontiguousarray(field.w, dtype="<f8").tobytes())
        else:
            header["kind"] = KIND_CODES[field.kind]
            f.write(header.tobytes())
            f.write(np.ascontiguousarray(field.values, dtype="<c16").tobytes())
    logger.debug(f"TFC1 기록: {path} ({grid.nx}x{grid.ny})")
    return path


def read_field(path: str) -> Union[GaborField, WeightField]:
    """TFC1 파일 읽기"""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise SerializationError(f"파일을 읽을 수 없습니다: {e}")
    if len(raw) < HEADER_DTYPE.itemsize or raw[:4] != MAGIC:
        raise SerializationError(f"TFC1 파일이 아닙니다: {path}")

    header = np.frombuffer(raw, dtype=HEADER_DTYPE, count=1)[0]
    nx, ny = int(header["nx"]), int(header["ny"])
    grid = TfGrid(delta=float(header["delta"]), nx=nx, ny=ny,
                  x0=float(header["x0"]), y0=float(header["y0"]))
    kind = int(header["kind"])
    offset = HEADER_DTYPE.itemsize

    if kind == WEIGHT_CODE:
        expected = offset + 8 + nx * ny * 8
        if len(raw) != expected:
            raise SerializationError(f"파일 크기 불일치: {len(raw)} != {expected}")
        p = float(np.frombuffer(raw, dtype="<f8", count=1, offset=offset)[0])
        w = np.frombuffer(raw, dtype="<f8", count=nx * ny, offset=offset + 8).reshape(nx, ny)
        return WeightField(grid, w.copy(), p)

    codes = {code: k for k, code in KIND_CODES.items()}
    if kind not in codes:
        raise SerializationError(f"알 수 없는 필드 종류 코드: {kind}")
    expected = offset + nx * ny * 16
    if len(raw) != expected:
        raise SerializationError(f"파일 크기 불일치: {len(raw)} != {expected}")
    values = np.frombuffer(raw, dtype="<c16", count=nx * ny, offset=offset).reshape(nx, ny)
    return GaborField(grid, values.astype(np.complex128), codes[kind])


def export_field_csv(field: Union[GaborField, WeightField], path: str) -> Path:
    """플로팅용 CSV (x, y, re, im) 또는 (x, y, w)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    X, Y = field.grid.mesh()
    if isinstance(field, WeightField):
        data = np.column_stack([X.ravel(), Y.ravel(), field.w.ravel()])
        header = "x,y,w"
    else:
        data = np.column_stack([X.ravel(), Y.ravel(), field.values.real.ravel(), field.values.imag.ravel()])
        header = "x,y,re,im"
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=header, comments="")
    return path


def export_graph(graph, directory: str, stem: str = "graph") -> List[Path]:
    """간선 목록 'i j weight'와 정점 좌표표 'index i j x y' 기록"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    edges_path = directory / f"{stem}_edges.txt"
    vertices_path = directory / f"{stem}_vertices.txt"

    edges = np.column_stack([graph.edge_u, graph.edge_v, graph.edge_w])
    np.savetxt(edges_path, edges, fmt=["%d", "%d", "%.17g"], header="i j weight", comments="# ")

    index = np.arange(graph.n_vertices)
    if graph.vertex_ij is not None:
        table = np.column_stack([index, graph.vertex_ij, graph.coords])
        np.savetxt(vertices_path, table, fmt=["%d", "%d", "%d", "%.17g", "%.17g"],
                   header="index i j x y", comments="# ")
    else:
        np.savetxt(vertices_path, index, fmt="%d", header="index", comments="# ")
    return [edges_path, vertices_path]


def _clean(value: Any) -> Any:
    """JSON 기록용 정리 (numpy 스칼라, 무한대)"""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    return value


def write_json(data: Dict[str, Any], path: str) -> Path:
    """정렬된 키로 JSON 기록"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_clean(data), f, indent=2, ensure_ascii=False, sort_keys=True)
        f.write("\n")
    return path


def write_rows_csv(rows: Iterable[Dict[str, Any]], columns: Sequence[str], path: str) -> Path:
    """열 이름 헤더가 있는 CSV 기록 (실수는 repr 정밀도)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(_format_cell(row[c]) for c in columns) + "\n")
    return path


def _format_cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)
