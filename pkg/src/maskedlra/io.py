"""On-disk formats: matrices (MLRA1), binary masks (MLRB1), order-3 tensors
(MLRT1), key-value mask descriptors, and partition dumps.

All binary formats are little-endian: a 5-byte ASCII magic, unsigned 64-bit
dimensions, then the payload in row-major (lexicographic) order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from . import masks, protocols
from .errors import ParameterError

_MAGIC_MATRIX = b"MLRA1"
_MAGIC_BITMAP = b"MLRB1"
_MAGIC_TENSOR = b"MLRT1"


def _read_header(raw: bytes, magic: bytes, ndims: int):
    if raw[:5] != magic:
        raise ParameterError(f"bad magic {raw[:5]!r}, expected {magic!r}")
    if len(raw) < 5 + 8 * ndims:
        raise ParameterError(f"{magic.decode()} header truncated")
    dims = struct.unpack_from(f"<{ndims}Q", raw, 5)
    return dims, 5 + 8 * ndims


def _payload(raw: bytes, off: int, dtype: str, count: int) -> np.ndarray:
    need = count * np.dtype(dtype).itemsize
    if len(raw) - off < need:
        raise ParameterError(
            f"payload truncated: need {need} bytes, have {len(raw) - off}"
        )
    return np.frombuffer(raw, dtype=dtype, count=count, offset=off)


def write_matrix(path, A) -> None:
    A = np.ascontiguousarray(A, dtype="<f8")
    if A.ndim != 2:
        raise ParameterError("MLRA1 stores 2-d matrices")
    with open(path, "wb") as f:
        f.write(_MAGIC_MATRIX)
        f.write(struct.pack("<2Q", *A.shape))
        f.write(A.tobytes())


def read_matrix(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    (rows, cols), off = _read_header(raw, _MAGIC_MATRIX, 2)
    data = _payload(raw, off, "<f8", rows * cols)
    return data.reshape(rows, cols).astype(np.float64)


def write_bitmap(path, W) -> None:
    B = np.asarray(getattr(W, "bitmap", W), dtype=np.uint8)
    if B.ndim != 2:
        raise ParameterError("MLRB1 stores 2-d bitmaps")
    with open(path, "wb") as f:
        f.write(_MAGIC_BITMAP)
        f.write(struct.pack("<2Q", *B.shape))
        f.write(np.ascontiguousarray(B).tobytes())


def read_bitmap(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    (rows, cols), off = _read_header(raw, _MAGIC_BITMAP, 2)
    data = _payload(raw, off, "u1", rows * cols)
    if not np.isin(data, (0, 1)).all():
        raise ParameterError("MLRB1 payload must be 0/1 bytes")
    return data.reshape(rows, cols).copy()


def write_tensor(path, T) -> None:
    T = np.ascontiguousarray(T, dtype="<f8")
    if T.ndim != 3:
        raise ParameterError("MLRT1 stores 3-d tensors")
    with open(path, "wb") as f:
        f.write(_MAGIC_TENSOR)
        f.write(struct.pack("<3Q", *T.shape))
        f.write(T.tobytes())


def read_tensor(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    dims, off = _read_header(raw, _MAGIC_TENSOR, 3)
    data = _payload(raw, off, "<f8", dims[0] * dims[1] * dims[2])
    return data.reshape(dims).astype(np.float64)


# ---------------------------------------------------------------------------
# mask descriptors

def _join_nested(groups) -> str:
    return "|".join(",".join(str(i) for i in g) for g in groups)


def _split_nested(text: str):
    if not text:
        return ()
    return tuple(
        tuple(int(v) for v in part.split(",") if v != "") for part in text.split("|")
    )


def write_mask_descriptor(path, mask: masks.Mask) -> None:
    p = mask.pattern
    lines = [f"pattern = {p.tag}", f"n = {mask.n}"]
    if isinstance(p, masks.BlockDiagonal):
        lines.append(f"blocks = {_join_nested(p.blocks)}")
    elif isinstance(p, masks.Sparse):
        lines.append(f"t = {p.t}")
        lines.append(f"zero_sets = {_join_nested(p.zero_sets)}")
    elif isinstance(p, masks.BlockSparse):
        lines.append(f"t = {p.t}")
        lines.append(f"row_blocks = {_join_nested(p.row_blocks)}")
        lines.append(f"col_blocks = {_join_nested(p.col_blocks)}")
        lines.append(f"block_zero_sets = {_join_nested(p.block_zero_sets)}")
    elif isinstance(p, (masks.ToeplitzModP, masks.Banded, masks.Banded2D)):
        lines.append(f"p = {p.p}")
    elif isinstance(p, masks.Monotone):
        lines.append(f"prefix_lengths = {','.join(str(v) for v in p.prefix_lengths)}")
    elif isinstance(p, masks.Explicit):
        raise ParameterError("explicit masks serialize as MLRB1 bitmaps, not descriptors")
    Path(path).write_text("\n".join(lines) + "\n")


def parse_kv(text: str) -> dict[str, str]:
    """Parse 'key = value' lines; '#' starts a comment."""
    out: dict[str, str] = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"line {ln}: expected 'key = value'")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def read_mask_descriptor(path) -> masks.Mask:
    kv = parse_kv(Path(path).read_text())
    try:
        tag = kv["pattern"]
        n = int(kv["n"])
    except KeyError as missing:
        raise ParameterError(f"descriptor missing {missing}")
    if tag == "all-ones":
        pattern = masks.AllOnes()
    elif tag == "diagonal":
        pattern = masks.Diagonal()
    elif tag == "block-diagonal":
        pattern = masks.BlockDiagonal(_split_nested(kv["blocks"]))
    elif tag == "sparse":
        pattern = masks.Sparse(_split_nested(kv["zero_sets"]), int(kv["t"]))
    elif tag == "block-sparse":
        pattern = masks.BlockSparse(
            _split_nested(kv["row_blocks"]),
            _split_nested(kv["col_blocks"]),
            _split_nested(kv["block_zero_sets"]),
            int(kv["t"]),
        )
    elif tag == "toeplitz-mod-p":
        pattern = masks.ToeplitzModP(int(kv["p"]))
    elif tag == "banded":
        pattern = masks.Banded(int(kv["p"]))
    elif tag == "banded-2d":
        pattern = masks.Banded2D(int(kv["p"]))
    elif tag == "monotone":
        pattern = masks.Monotone(tuple(int(v) for v in kv["prefix_lengths"].split(",")))
    else:
        raise ParameterError(f"unknown pattern tag {tag!r}")
    return masks.make_mask(pattern, n)


def load_mask(path) -> masks.Mask:
    """Mask from either a descriptor file or an MLRB1 bitmap."""
    raw = Path(path).read_bytes()
    if raw[:5] == _MAGIC_BITMAP:
        bitmap = read_bitmap(path)
        return masks.make_mask(masks.Explicit(bitmap), bitmap.shape[0])
    return read_mask_descriptor(path)


# ---------------------------------------------------------------------------
# partition dumps

def _fmt_idx(a) -> str:
    return ",".join(str(int(v)) for v in a)


def write_partition(path, sample: protocols.PartitionSample) -> None:
    # header fields are tab-separated; source strings may contain spaces
    head = "\t".join(
        (
            f"source={sample.source}",
            f"n={sample.n}",
            f"order={sample.order}",
            f"rectangles={len(sample.rectangles)}",
            f"one_count={sample.one_count}",
        )
    )
    lines = [f"# {head}"]
    for r in sample.rectangles:
        cols = [str(r.label), _fmt_idx(r.row_set), _fmt_idx(r.col_set)]
        if r.depth_set is not None:
            cols.append(_fmt_idx(r.depth_set))
        lines.append("\t".join(cols))
    Path(path).write_text("\n".join(lines) + "\n")


def read_partition(path) -> protocols.PartitionSample:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ParameterError("partition dump missing its header line")
    header = dict(
        item.strip().split("=", 1)
        for item in lines[0][1:].split("\t")
        if "=" in item
    )
    rects = []
    for line in lines[1:]:
        if not line.strip():
            continue
        parts = line.split("\t")
        label = int(parts[0])
        row_set = np.array([int(v) for v in parts[1].split(",")], dtype=np.int64)
        col_set = np.array([int(v) for v in parts[2].split(",")], dtype=np.int64)
        depth = None
        if len(parts) > 3:
            depth = np.array([int(v) for v in parts[3].split(",")], dtype=np.int64)
        rects.append(protocols.Rectangle(row_set, col_set, label, depth))
    ones = sum(1 for r in rects if r.label == 1)
    return protocols.PartitionSample(
        rects,
        int(header.get("n", 0)),
        header.get("source", "file"),
        ones,
        order=int(header.get("order", 2)),
    )
