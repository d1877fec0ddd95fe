"""Atomic file output: CSV, P6 pixmaps and key=value manifests."""

from __future__ import annotations

import hashlib
import io
import os
import tempfile
from pathlib import Path

import numpy as np


def atomic_write(path, data: bytes) -> Path:
    """Write ``data`` to a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_bytes(header, rows) -> bytes:
    """CSV with ``%.17g`` floats (lossless round trip) and ``\\n`` line ends."""
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_cell(v) for v in row) + "\n")
    return buf.getvalue().encode("ascii")


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def write_csv(path, header, rows) -> Path:
    return atomic_write(path, csv_bytes(header, rows))


def read_csv(path):
    """``(header, rows)`` with every cell parsed as float."""
    with open(path, encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        rows = [[float(c) for c in line.strip().split(",")] for line in fh if line.strip()]
    return header, np.array(rows, dtype=float).reshape(-1, len(header))


def ppm_bytes(mask: np.ndarray) -> bytes:
    """Binary P6 image of a boolean mask: ``True`` is black, ``False`` white."""
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError("mask must be 2-d")
    h, w = mask.shape
    pixels = np.where(mask, 0, 255).astype(np.uint8)
    rgb = np.repeat(pixels[:, :, None], 3, axis=2)
    return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes()


def write_ppm(path, mask) -> Path:
    return atomic_write(path, ppm_bytes(mask))


def read_ppm(path) -> np.ndarray:
    """Inverse of :func:`ppm_bytes` for files it wrote; returns the mask."""
    data = Path(path).read_bytes()
    magic, dims, maxval, rest = data.split(b"\n", 3)
    if magic != b"P6" or maxval != b"255":
        raise ValueError("not an 8-bit P6 file")
    w, h = (int(v) for v in dims.split())
    rgb = np.frombuffer(rest, dtype=np.uint8).reshape(h, w, 3)
    return rgb[:, :, 0] == 0


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest_bytes(entries: dict) -> bytes:
    lines = [f"{k}={v}" for k, v in entries.items()]
    return ("\n".join(lines) + "\n").encode("utf-8")


def write_manifest(path, entries: dict) -> Path:
    return atomic_write(path, manifest_bytes(entries))


def read_manifest(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line:
                k, v = line.split("=", 1)
                out[k] = v
    return out
