"""Synthetic instances, recovery metrics, and matrix / frame-stack file I/O.

Random generation uses numpy's seedable PCG64 generator with a fixed draw
order (low-rank factors, support permutation, signs, noise), so instances are
bit-reproducible across runs and platforms for a fixed seed.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import linalg

__all__ = [
    "FormatError",
    "ParseError",
    "SyntheticInstance",
    "FrameStack",
    "gen_synthetic",
    "recovery_errors",
    "save_matrix",
    "load_matrix",
    "load_frame_stack",
    "stack_to_matrix",
    "unstack_column",
    "contrast_stretch",
    "save_pgm",
]

_MAGIC = b"SRPM"


class FormatError(ValueError):
    """Structurally invalid file (bad header, dimension mismatch, ...)."""


class ParseError(FormatError):
    """Unreadable token; the message names the offending location."""


class SyntheticInstance(NamedTuple):
    L0: np.ndarray
    S0: np.ndarray
    Z0: np.ndarray
    D: np.ndarray
    n: int
    r: int
    s: int
    sigma: float
    seed: int


class FrameStack(NamedTuple):
    """Equally sized 8-bit grayscale frames in display order."""

    height: int
    width: int
    frames: list


def gen_synthetic(n, r, s, sigma, seed) -> SyntheticInstance:
    """Low-rank + sparse + noise instance ``D = L0 + S0 + Z0``.

    ``L0 = X @ Y.T`` with i.i.d. ``N(0, 1/n)`` factor entries, ``S0`` has
    exactly ``s`` entries of random sign on a uniform support, and ``Z0`` is
    i.i.d. ``N(0, sigma^2)`` (exactly zero when ``sigma == 0``).
    """
    n, r, s = int(n), int(r), int(s)
    sigma = float(sigma)
    if not 0 < r <= n:
        raise ValueError(f"need 0 < r <= n, got r={r}, n={n}")
    if not 0 <= s <= n * n:
        raise ValueError(f"need 0 <= s <= n^2, got s={s}")
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")

    rng = np.random.default_rng(seed)
    scale = 1.0 / np.sqrt(n)
    X = rng.standard_normal((n, r)) * scale
    Y = rng.standard_normal((n, r)) * scale
    L0 = X @ Y.T

    S0 = np.zeros((n, n))
    if s > 0:
        support = rng.permutation(n * n)[:s]
        signs = rng.integers(0, 2, size=s) * 2.0 - 1.0
        S0.flat[support] = signs

    Z0 = rng.standard_normal((n, n)) * sigma if sigma > 0 else np.zeros((n, n))
    D = L0 + S0 + Z0
    return SyntheticInstance(L0, S0, Z0, D, n, r, s, sigma, int(seed))


def recovery_errors(L_hat, S_hat, instance: SyntheticInstance):
    """Relative recovery errors ``(eta_L, eta_S)`` against the ground truth."""
    L_hat = np.asarray(L_hat, dtype=np.float64)
    S_hat = np.asarray(S_hat, dtype=np.float64)
    if L_hat.shape != instance.L0.shape or S_hat.shape != instance.S0.shape:
        raise ValueError("estimate shapes do not match the instance")
    eta_L = np.linalg.norm(L_hat - instance.L0) / (1.0 + np.linalg.norm(instance.L0))
    eta_S = np.linalg.norm(S_hat - instance.S0) / (1.0 + np.linalg.norm(instance.S0))
    return float(eta_L), float(eta_S)


# --- dense matrix files ----------------------------------------------------

def save_matrix(path, A, format=None):
    """Write ``A`` as RawF64 (``.srpm``) or CSV; format inferred from suffix."""
    path = Path(path)
    A = linalg.as_matrix(A, "A")
    fmt = _resolve_format(path, format)
    if fmt == "rawf64":
        header = _MAGIC + struct.pack("<III", A.shape[0], A.shape[1], 0)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(A, dtype="<f8").tobytes())
    else:
        lines = [f"{A.shape[0]},{A.shape[1]}"]
        lines.extend(",".join(repr(float(x)) for x in row) for row in A)
        path.write_text("\n".join(lines) + "\n")


def load_matrix(path, format=None) -> np.ndarray:
    """Read a matrix written by ``save_matrix``."""
    path = Path(path)
    fmt = _resolve_format(path, format)
    if not path.exists():
        raise FileNotFoundError(path)
    return _load_rawf64(path) if fmt == "rawf64" else _load_csv(path)


def _resolve_format(path, format):
    if format is not None:
        fmt = format.lower()
        if fmt not in ("rawf64", "csv"):
            raise ValueError(f"unknown format {format!r}")
        return fmt
    return "rawf64" if path.suffix.lower() == ".srpm" else "csv"


def _load_rawf64(path) -> np.ndarray:
    blob = path.read_bytes()
    if len(blob) < 16:
        raise FormatError(f"{path}: truncated or empty RawF64 file")
    if blob[:4] != _MAGIC:
        raise FormatError(f"{path}: bad magic {blob[:4]!r}")
    rows, cols, _ = struct.unpack("<III", blob[4:16])
    expected = 16 + rows * cols * 8
    if rows < 1 or cols < 1 or len(blob) != expected:
        raise FormatError(
            f"{path}: header says {rows}x{cols} but payload is {len(blob) - 16} bytes"
        )
    return np.frombuffer(blob, dtype="<f8", offset=16).reshape(rows, cols).copy()


def _load_csv(path) -> np.ndarray:
    text = path.read_text()
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise FormatError(f"{path}: empty file")
    head = lines[0].split(",")
    if len(head) != 2:
        raise FormatError(f"{path}: first line must be 'rows,cols'")
    try:
        rows, cols = int(head[0]), int(head[1])
    except ValueError as exc:
        raise FormatError(f"{path}: bad dimension header {lines[0]!r}") from exc
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != rows:
        raise FormatError(f"{path}: expected {rows} data rows, found {len(body)}")
    out = np.empty((rows, cols))
    for i, line in enumerate(body):
        cells = line.split(",")
        if len(cells) != cols:
            raise FormatError(f"{path}: row {i + 1} has {len(cells)} cells, expected {cols}")
        for j, cell in enumerate(cells):
            try:
                out[i, j] = float(cell)
            except ValueError as exc:
                raise ParseError(
                    f"{path}: row {i + 1}, column {j + 1}: not a number: {cell.strip()!r}"
                ) from exc
    return out


# --- grayscale frame stacks ------------------------------------------------

def load_frame_stack(directory) -> FrameStack:
    """Read all ``.pgm`` files in ``directory`` in lexicographic order."""
    directory = Path(directory)
    paths = sorted(directory.glob("*.pgm"))
    if not paths:
        raise FormatError(f"{directory}: no .pgm frames found")
    frames = [_load_pgm(p) for p in paths]
    h, w = frames[0].shape
    for p, f in zip(paths, frames):
        if f.shape != (h, w):
            raise FormatError(f"{p}: frame is {f.shape}, expected {(h, w)}")
    return FrameStack(h, w, frames)


def _load_pgm(path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if blob[:2] != b"P5":
        raise ParseError(f"{path}: not a binary PGM (magic {blob[:2]!r})")
    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(blob):
            raise ParseError(f"{path}: truncated header")
        ch = blob[pos:pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            pos = blob.find(b"\n", pos)
            if pos < 0:
                raise ParseError(f"{path}: unterminated comment")
        else:
            end = pos
            while end < len(blob) and not blob[end:end + 1].isspace():
                end += 1
            token = blob[pos:end]
            if not token.isdigit():
                raise ParseError(f"{path}: bad header token {token!r}")
            fields.append(int(token))
            pos = end
    width, height, maxval = fields
    if maxval != 255:
        raise FormatError(f"{path}: maxval {maxval}, only 8-bit (255) supported")
    pos += 1  # single whitespace after maxval
    raster = blob[pos:pos + width * height]
    if len(raster) != width * height:
        raise FormatError(f"{path}: raster has {len(raster)} bytes, expected {width * height}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def save_pgm(path, image):
    """Quantize ``image`` (floats in [0, 1]) to 8 bits and write binary PGM."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    q = np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    h, w = q.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(q.tobytes())


def stack_to_matrix(stack: FrameStack) -> np.ndarray:
    """Stack frames as columns; within a column the row index varies fastest.

    Pixel values are scaled to [0, 1] by dividing by 255.
    """
    cols = [f.astype(np.float64).ravel(order="F") / 255.0 for f in stack.frames]
    return np.stack(cols, axis=1)


def unstack_column(matrix, index, height, width) -> np.ndarray:
    """Inverse of the stacking layout for one column."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if not 0 <= index < matrix.shape[1]:
        raise IndexError(f"column {index} out of range for {matrix.shape[1]} frames")
    if matrix.shape[0] != height * width:
        raise ValueError("height * width does not match the stacked row count")
    return matrix[:, index].reshape((height, width), order="F")


def contrast_stretch(image) -> np.ndarray:
    """Linearly map the [p1, p99] percentile range to [0, 1], clipping outside.

    Constant images are returned unchanged.
    """
    img = np.asarray(image, dtype=np.float64)
    lo, hi = np.percentile(img, [1.0, 99.0])
    if hi <= lo:
        return img.copy()
    return np.clip((img - lo) / (hi - lo), 0.0, 1.0)
