"""Mask patterns and their rank budgets.

A mask is a binary n x n matrix W; the pattern names the zero structure
(diagonal, banded, ...) and rank_budget maps (pattern, k, eps) to the
factorization rank k' that the concrete partition constructions certify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError


@dataclass(frozen=True)
class AllOnes:
    tag = "all-ones"


@dataclass(frozen=True)
class Diagonal:
    tag = "diagonal"


@dataclass(frozen=True)
class BlockDiagonal:
    """Zeros exactly inside each diagonal block; blocks partition [n]."""

    blocks: tuple[tuple[int, ...], ...]
    tag = "block-diagonal"


@dataclass(frozen=True)
class Sparse:
    """Row i is zero exactly on zero_sets[i], each of size <= t."""

    zero_sets: tuple[tuple[int, ...], ...]
    t: int
    tag = "sparse"


@dataclass(frozen=True)
class BlockSparse:
    """Sparse at block granularity: row-block a is zero on <= t column blocks."""

    row_blocks: tuple[tuple[int, ...], ...]
    col_blocks: tuple[tuple[int, ...], ...]
    block_zero_sets: tuple[tuple[int, ...], ...]
    t: int
    tag = "block-sparse"


@dataclass(frozen=True)
class ToeplitzModP:
    p: int
    tag = "toeplitz-mod-p"


@dataclass(frozen=True)
class Banded:
    p: int
    tag = "banded"


@dataclass(frozen=True)
class Banded2D:
    """Zero iff the split indices are within L1 distance p.

    Index i maps to (i1, i2) by its high and low halves: i = i1*s + i2
    with s = sqrt(n), which splits the binary expansion in half whenever
    s is a power of two. Requires n to be a perfect square.
    """

    p: int
    tag = "banded-2d"


@dataclass(frozen=True)
class Monotone:
    """Row x is 1 on the first prefix_lengths[x] columns, 0 afterward."""

    prefix_lengths: tuple[int, ...]
    tag = "monotone"


@dataclass(eq=False, frozen=True)
class Explicit:
    bitmap: np.ndarray
    tag = "explicit"


MaskPattern = (
    AllOnes
    | Diagonal
    | BlockDiagonal
    | Sparse
    | BlockSparse
    | ToeplitzModP
    | Banded
    | Banded2D
    | Monotone
    | Explicit
)


@dataclass(frozen=True)
class ZeroCounts:
    rows: np.ndarray
    cols: np.ndarray

    @property
    def max_row(self) -> int:
        return int(self.rows.max()) if self.rows.size else 0

    @property
    def max_col(self) -> int:
        return int(self.cols.max()) if self.cols.size else 0


@dataclass(frozen=True)
class Mask:
    n: int
    pattern: MaskPattern
    bitmap: np.ndarray
    zero_counts: ZeroCounts

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)


def _check_partition(blocks, n: int, field: str) -> None:
    seen = sorted(i for blk in blocks for i in blk)
    if seen != list(range(n)):
        raise ParameterError(f"{field} must partition 0..{n - 1}")
    if any(len(blk) == 0 for blk in blocks):
        raise ParameterError(f"{field} contains an empty block")


def block_index_map(blocks, n: int) -> np.ndarray:
    """Array mapping each index to the id of its block."""
    out = np.empty(n, dtype=np.int64)
    for b, blk in enumerate(blocks):
        out[list(blk)] = b
    return out


def split_index(n: int) -> int:
    """Side length s of the 2-d index split; n must be a perfect square."""
    s = math.isqrt(n)
    if s * s != n:
        raise ParameterError(f"n={n} is not a perfect square")
    return s


def _bitmap_for(pattern: MaskPattern, n: int) -> np.ndarray:
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    if isinstance(pattern, AllOnes):
        return np.ones((n, n), dtype=np.uint8)
    if isinstance(pattern, Diagonal):
        return (i != j).astype(np.uint8)
    if isinstance(pattern, BlockDiagonal):
        _check_partition(pattern.blocks, n, "blocks")
        blk = block_index_map(pattern.blocks, n)
        return (blk[:, None] != blk[None, :]).astype(np.uint8)
    if isinstance(pattern, Sparse):
        if len(pattern.zero_sets) != n:
            raise ParameterError("zero_sets must have one entry per row")
        W = np.ones((n, n), dtype=np.uint8)
        for r, zs in enumerate(pattern.zero_sets):
            if len(zs) > pattern.t:
                raise ParameterError(f"row {r} has {len(zs)} zeros, t={pattern.t}")
            if any(not 0 <= c < n for c in zs):
                raise ParameterError(f"zero_sets[{r}] has an index outside 0..{n - 1}")
            W[r, list(zs)] = 0
        return W
    if isinstance(pattern, BlockSparse):
        _check_partition(pattern.row_blocks, n, "row_blocks")
        _check_partition(pattern.col_blocks, n, "col_blocks")
        if len(pattern.block_zero_sets) != len(pattern.row_blocks):
            raise ParameterError("block_zero_sets must have one entry per row block")
        rb = block_index_map(pattern.row_blocks, n)
        cb = block_index_map(pattern.col_blocks, n)
        zero = np.zeros((len(pattern.row_blocks), len(pattern.col_blocks)), dtype=bool)
        for a, zs in enumerate(pattern.block_zero_sets):
            if len(zs) > pattern.t:
                raise ParameterError(f"row block {a} has {len(zs)} zeros, t={pattern.t}")
            if any(not 0 <= c < len(pattern.col_blocks) for c in zs):
                raise ParameterError(f"block_zero_sets[{a}] names a missing column block")
            zero[a, list(zs)] = True
        return (~zero[rb[:, None], cb[None, :]]).astype(np.uint8)
    if isinstance(pattern, ToeplitzModP):
        if not 1 <= pattern.p <= n:
            raise ParameterError(f"p={pattern.p} out of range for n={n}")
        return ((i - j) % pattern.p != 0).astype(np.uint8)
    if isinstance(pattern, Banded):
        if not 1 <= pattern.p <= n:
            raise ParameterError(f"p={pattern.p} out of range for n={n}")
        return (np.abs(i - j) >= pattern.p).astype(np.uint8)
    if isinstance(pattern, Banded2D):
        s = split_index(n)
        if not 1 <= pattern.p <= n:
            raise ParameterError(f"p={pattern.p} out of range for n={n}")
        d = np.abs(i // s - j // s) + np.abs(i % s - j % s)
        return (d >= pattern.p).astype(np.uint8)
    if isinstance(pattern, Monotone):
        if len(pattern.prefix_lengths) != n:
            raise ParameterError("prefix_lengths must have one entry per row")
        px = np.asarray(pattern.prefix_lengths, dtype=np.int64)
        if px.min() < 0 or px.max() > n:
            raise ParameterError("prefix lengths must lie in 0..n")
        return (j < px[:, None]).astype(np.uint8)
    if isinstance(pattern, Explicit):
        B = np.asarray(pattern.bitmap)
        if B.shape != (n, n):
            raise ShapeError(f"explicit bitmap is {B.shape}, expected {(n, n)}")
        if not np.isin(B, (0, 1)).all():
            raise ParameterError("explicit bitmap must be binary")
        return B.astype(np.uint8)
    raise ParameterError(f"unknown pattern {pattern!r}")


def make_mask(pattern: MaskPattern, n: int) -> Mask:
    """Evaluate the pattern's defining predicate at every cell."""
    if n < 1:
        raise ParameterError(f"n={n} must be positive")
    bitmap = _bitmap_for(pattern, n)
    zeros = (bitmap == 0)
    counts = ZeroCounts(zeros.sum(axis=1), zeros.sum(axis=0))
    return Mask(n, pattern, bitmap, counts)


def complement(W: Mask) -> Mask:
    flipped = (1 - W.bitmap).astype(np.uint8)
    return make_mask(Explicit(flipped), W.n)


def rank_budget(pattern: MaskPattern, k: int, eps: float, n: int | None = None) -> int:
    """Rank k' certified by the concrete partition construction for the pattern.

    k' is k times the number of 1-labeled rectangles the construction can
    produce: one per hash bucket for the equality families, one per residue
    for toeplitz-mod-p, and the declared transcript caps for the
    greater-than compositions (which need n).
    """
    if k < 1:
        raise ParameterError(f"k={k} must be positive")
    if not 0 < eps <= 1:
        raise ParameterError(f"eps={eps} outside (0, 1]")
    if isinstance(pattern, AllOnes):
        return k
    if isinstance(pattern, (Diagonal, BlockDiagonal)):
        return k * math.ceil(1 / eps)
    if isinstance(pattern, (Sparse, BlockSparse)):
        return k * max(1, math.ceil(pattern.t / eps))
    if isinstance(pattern, ToeplitzModP):
        return min(k * pattern.p, k * math.ceil(1 / eps))
    from . import protocols

    if isinstance(pattern, Banded):
        if n is None:
            raise ParameterError("banded budget needs n for the transcript cap")
        spec = protocols.banded_gt(n, pattern.p, eps)
        return min(k * math.ceil(pattern.p / eps), k * protocols.transcript_cap(spec))
    if isinstance(pattern, Banded2D):
        if n is None:
            raise ParameterError("banded-2d budget needs n for the transcript cap")
        spec = protocols.banded2d_gt(n, pattern.p, eps)
        return k * protocols.transcript_cap(spec)
    if isinstance(pattern, Monotone):
        spec = protocols.monotone_gt(pattern.prefix_lengths, eps)
        return k * protocols.transcript_cap(spec)
    raise ParameterError(
        "explicit masks carry no construction; use k * one_count of a partition"
    )
