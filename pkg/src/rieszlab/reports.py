"""Deterministic report writers: CSV with a comment header, JSON with an
embedded header record, whitespace plot data and the binary form-matrix cache.
Every write goes to a temporary file in the target directory and is renamed
into place."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import struct
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .errors import ParameterError, ValidationError

RZFM_MAGIC = b"RZFM"
RZFM_VERSION = 1
THREADS_ENV = "RIESZLAB_THREADS"


def config_hash(cfg: Any) -> str:
    text = json.dumps(cfg, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def header_line(cfg_hash: str) -> str:
    return f"rieszlab {__version__} config={cfg_hash}"


def write_atomic(path: str | Path, data: str | bytes) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def fmt(x) -> str:
    """Shortest round-trip text for a number; NaN and infinities spelled out."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def csv_text(columns: Sequence[str], rows: Iterable[Sequence], header: str | None = None) -> str:
    buf = io.StringIO(newline="")
    if header is not None:
        buf.write(f"# {header}\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence], header: str | None = None) -> Path:
    return write_atomic(path, csv_text(columns, rows, header))


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else fmt(v)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def json_text(obj: dict, header: str | None = None) -> str:
    payload = {"_header": header, **obj} if header is not None else obj
    return json.dumps(_clean(payload), indent=2, sort_keys=False, ensure_ascii=False) + "\n"


def write_json(path, obj: dict, header: str | None = None) -> Path:
    return write_atomic(path, json_text(obj, header))


def plot_text(xs, ys, header_lines: Sequence[str] = ()) -> str:
    out = [f"# {h}" for h in header_lines]
    out += [f"{fmt(x)} {fmt(y)}" for x, y in zip(xs, ys)]
    return "\n".join(out) + "\n"


def polyline_text(polylines: Sequence[Sequence[tuple[float, float]]], header_lines: Sequence[str] = ()) -> str:
    """Blank-line separated polylines, one ``x y`` pair per line."""
    out = [f"# {h}" for h in header_lines]
    for i, pl in enumerate(polylines):
        if i:
            out.append("")
        out += [f"{fmt(x)} {fmt(y)}" for x, y in pl]
    return "\n".join(out) + "\n"


def rzfm_bytes(entries: np.ndarray) -> bytes:
    """Magic, version byte, ``M`` as uint32, then row-major complex64 pairs, little-endian."""
    e = np.asarray(entries)
    M = e.shape[0]
    if e.shape != (M, M):
        raise ParameterError("form matrix must be square")
    body = np.ascontiguousarray(e, dtype="<c8").tobytes()
    return RZFM_MAGIC + struct.pack("<BI", RZFM_VERSION, M) + body


def read_rzfm(data: bytes) -> np.ndarray:
    if data[:4] != RZFM_MAGIC:
        raise ValidationError("not an RZFM cache")
    version, M = struct.unpack("<BI", data[4:9])
    if version != RZFM_VERSION:
        raise ValidationError(f"unsupported RZFM version {version}")
    body = data[9:]
    if len(body) != 8 * M * M:
        raise ValidationError("truncated RZFM cache")
    return np.frombuffer(body, dtype="<c8").reshape(M, M).astype(complex)


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise ValidationError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Order-preserving map over at most ``RIESZLAB_THREADS`` workers."""
    n = worker_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
