"""Communication protocols for mask predicates and their rectangle partitions.

Each randomized protocol is evaluated exhaustively on the full input grid
under seeded shared randomness; grouping cells by transcript yields a
partition into combinatorial rectangles, labeled with the protocol output.
Nondeterministic covers are built directly from their witness structure.

Families:
  equality-hash       not-equal via one hashed message (1-sided)
  eq-mod-p            residue equality, deterministic or hashed (1-sided)
  sparse-set-eq       membership of a column in a row's zero set (1-sided)
  greater-than        prefix binary search with hashed comparisons
  banded-gt           two greater-than calls, short-circuited
  banded2d-gt         three greater-than calls on split indices
  monotone-gt         one greater-than call on prefix lengths
  neq3-multiparty     order-3 not-all-equal (1-sided)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ResourceError
from . import masks

ENUM_CAP = 4096  # largest n for exhaustive order-2 transcript enumeration
ENUM_CAP_3 = 256  # largest n for order-3 enumeration

ONE_SIDED_FAMILIES = ("equality-hash", "eq-mod-p", "sparse-set-eq", "neq3-multiparty")

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


@dataclass(frozen=True)
class ProtocolSpec:
    family: str
    n: int
    delta: float = 1.0
    p: int | None = None
    t: int | None = None
    zero_sets: tuple[tuple[int, ...], ...] | None = None
    prefix_lengths: tuple[int, ...] | None = None
    groups: tuple[int, ...] | None = None
    col_groups: tuple[int, ...] | None = None

    def describe(self) -> str:
        parts = [f"n={self.n}", f"delta={self.delta:g}"]
        if self.p is not None:
            parts.append(f"p={self.p}")
        if self.t is not None:
            parts.append(f"t={self.t}")
        return f"{self.family}({', '.join(parts)})"


def _check_delta(delta: float) -> None:
    if not 0 < delta <= 1:
        raise ParameterError(f"delta={delta} outside (0, 1]")


def equality_hash(n: int, delta: float, groups=None) -> ProtocolSpec:
    _check_delta(delta)
    if groups is not None:
        groups = tuple(int(g) for g in groups)
        if len(groups) != n:
            raise ParameterError("groups must assign an id to every index")
    return ProtocolSpec("equality-hash", n, delta, groups=groups)


def eq_mod_p(n: int, p: int, delta: float | None = None) -> ProtocolSpec:
    if not 1 <= p <= n:
        raise ParameterError(f"p={p} out of range for n={n}")
    if delta is not None:
        _check_delta(delta)
    return ProtocolSpec("eq-mod-p", n, delta if delta is not None else 0.0, p=p)


def sparse_set_eq(n: int, zero_sets, t: int, delta: float, col_groups=None) -> ProtocolSpec:
    _check_delta(delta)
    zs = tuple(tuple(int(c) for c in row) for row in zero_sets)
    if len(zs) != n:
        raise ParameterError("zero_sets must have one entry per row")
    if any(len(row) > t for row in zs):
        raise ParameterError(f"a zero set exceeds t={t}")
    if col_groups is not None:
        col_groups = tuple(int(g) for g in col_groups)
        if len(col_groups) != n:
            raise ParameterError("col_groups must assign an id to every column")
    return ProtocolSpec("sparse-set-eq", n, delta, t=t, zero_sets=zs, col_groups=col_groups)


def greater_than(n: int, delta: float) -> ProtocolSpec:
    _check_delta(delta)
    return ProtocolSpec("greater-than", n, delta)


def banded_gt(n: int, p: int, delta: float) -> ProtocolSpec:
    _check_delta(delta)
    if not 1 <= p <= n:
        raise ParameterError(f"p={p} out of range for n={n}")
    return ProtocolSpec("banded-gt", n, delta, p=p)


def banded2d_gt(n: int, p: int, delta: float) -> ProtocolSpec:
    _check_delta(delta)
    masks.split_index(n)
    if not 1 <= p <= n:
        raise ParameterError(f"p={p} out of range for n={n}")
    return ProtocolSpec("banded2d-gt", n, delta, p=p)


def monotone_gt(prefix_lengths, delta: float) -> ProtocolSpec:
    _check_delta(delta)
    px = tuple(int(v) for v in prefix_lengths)
    n = len(px)
    if any(not 0 <= v <= n for v in px):
        raise ParameterError("prefix lengths must lie in 0..n")
    return ProtocolSpec("monotone-gt", n, delta, prefix_lengths=px)


def neq3_multiparty(n: int, delta: float) -> ProtocolSpec:
    _check_delta(delta)
    return ProtocolSpec("neq3-multiparty", n, delta)


# ---------------------------------------------------------------------------
# hashing

def _draw_key(rng) -> tuple[np.uint64, np.uint64]:
    a, b = rng.integers(0, 2**64, size=2, dtype=np.uint64)
    return np.uint64(a), np.uint64(b)


def _hash_buckets(vals: np.ndarray, key, buckets: int) -> np.ndarray:
    """Pairwise-independent multiply-shift hash of vals into [0, buckets).

    64-bit state; the high 32 bits of a*x+b feed a fixed-point range
    reduction, so collision probability is 1/buckets up to O(2^-32).
    The key components may be arrays broadcasting against vals, giving
    each entry its own independent hash function.
    """
    a, b = key
    v = vals.astype(np.uint64)
    h = (a * v + b) & _MASK64
    h32 = h >> np.uint64(32)
    return ((h32 * np.uint64(buckets)) >> np.uint64(32)).astype(np.int64)


def _draw_key_arrays(rng, count: int, size) -> tuple[np.ndarray, np.ndarray]:
    """count independent key pairs per sample: two (count,) + size arrays."""
    shape = (2, count) + tuple(size)
    ks = rng.integers(0, 2**64, size=shape, dtype=np.uint64)
    return ks[0], ks[1]


# ---------------------------------------------------------------------------
# greater-than engine

def _compact(codes: np.ndarray) -> tuple[np.ndarray, int]:
    """Re-index codes to small ids with a same-length sentinel bit."""
    _, inv = np.unique(codes, return_inverse=True)
    inv = inv.reshape(codes.shape).astype(np.int64)
    width = max(1, int(inv.max()).bit_length())
    return inv + (1 << width), width + 1


def _gt_grid(avals, bvals, m: int, delta: float, rng, direction: str = "a>b"):
    """Transcript codes and outputs for the hashed prefix binary search.

    Row player holds avals (one per row), column player holds bvals, all
    below 2^m. A full-prefix hash comparison either settles the answer
    ("equal", output 0) or starts a binary search for the most significant
    differing prefix; the final bit exchange decides the output. direction
    "a>b" outputs [a > b], "b>a" outputs [b > a].
    """
    avals = np.asarray(avals, dtype=np.int64)
    bvals = np.asarray(bvals, dtype=np.int64)
    rounds = 1 + (math.ceil(math.log2(m)) if m > 1 else 0)
    c = max(1, math.ceil(math.log2(rounds / delta)))
    nbuck = 1 << c
    keys = [_draw_key(rng) for _ in range(m + 1)]

    A = avals[:, None]
    B = bvals[None, :]
    shape = (len(avals), len(bvals))

    ha = _hash_buckets(np.broadcast_to(A, shape), keys[m], nbuck)
    hb = _hash_buckets(np.broadcast_to(B, shape), keys[m], nbuck)
    eq = ha == hb
    codes = (np.int64(1) << (c + 1)) | (ha << 1) | eq
    bits = c + 2
    out = np.zeros(shape, dtype=np.uint8)

    active = ~eq
    lo = np.zeros(shape, dtype=np.int64)
    hi = np.full(shape, m, dtype=np.int64)
    ka = np.array([k[0] for k in keys], dtype=np.uint64)
    kb = np.array([k[1] for k in keys], dtype=np.uint64)
    for _ in range(rounds):
        work = active & (hi - lo > 1)
        if not work.any():
            break
        if bits + c + 1 > 62:
            codes, bits = _compact(codes)
        mid = (lo + hi) >> 1
        pa = A >> (m - mid)
        pb = B >> (m - mid)
        hmid = ((ka[mid] * pa.astype(np.uint64) + kb[mid]) & _MASK64) >> np.uint64(32)
        ha = ((hmid * np.uint64(nbuck)) >> np.uint64(32)).astype(np.int64)
        hmid = ((ka[mid] * pb.astype(np.uint64) + kb[mid]) & _MASK64) >> np.uint64(32)
        hb = ((hmid * np.uint64(nbuck)) >> np.uint64(32)).astype(np.int64)
        eq = ha == hb
        codes = np.where(work, (codes << (c + 1)) | (ha << 1) | eq, codes)
        bits += c + 1
        lo = np.where(work & eq, mid, lo)
        hi = np.where(work & ~eq, mid, hi)

    if bits + 2 > 62:
        codes, bits = _compact(codes)
    d = m - 1 - lo
    xd = (A >> d) & 1
    yd = (B >> d) & 1
    if direction == "a>b":
        o = ((xd == 1) & (yd == 0)).astype(np.uint8)
    else:
        o = ((yd == 1) & (xd == 0)).astype(np.uint8)
    out = np.where(active, o, out).astype(np.uint8)
    codes = np.where(active, (codes << 2) | (xd << 1) | o, codes)
    return codes, out


def _gt_point(avals, bvals, m: int, delta: float, ka, kb, direction: str = "a>b"):
    """Outputs of the hashed prefix binary search on elementwise pairs.

    Same decision process as _gt_grid, but each sample carries its own key
    column (ka, kb have shape (m+1,) + sample shape), so samples are fully
    independent draws of the protocol. Transcript codes are not tracked.
    """
    a = np.asarray(avals, dtype=np.int64)
    b = np.asarray(bvals, dtype=np.int64)
    rounds = 1 + (math.ceil(math.log2(m)) if m > 1 else 0)
    c = max(1, math.ceil(math.log2(rounds / delta)))
    nbuck = 1 << c

    ha = _hash_buckets(a, (ka[m], kb[m]), nbuck)
    hb = _hash_buckets(b, (ka[m], kb[m]), nbuck)
    eq = ha == hb
    out = np.zeros(a.shape, dtype=np.uint8)
    active = ~eq
    lo = np.zeros(a.shape, dtype=np.int64)
    hi = np.full(a.shape, m, dtype=np.int64)
    pick = tuple(np.indices(a.shape))
    for _ in range(rounds):
        work = active & (hi - lo > 1)
        if not work.any():
            break
        mid = (lo + hi) >> 1
        key = (ka[(mid,) + pick], kb[(mid,) + pick])
        ha = _hash_buckets(a >> (m - mid), key, nbuck)
        hb = _hash_buckets(b >> (m - mid), key, nbuck)
        eq = ha == hb
        lo = np.where(work & eq, mid, lo)
        hi = np.where(work & ~eq, mid, hi)
    d = m - 1 - lo
    xd = (a >> d) & 1
    yd = (b >> d) & 1
    if direction == "a>b":
        o = ((xd == 1) & (yd == 0)).astype(np.uint8)
    else:
        o = ((yd == 1) & (xd == 0)).astype(np.uint8)
    return np.where(active, o, out).astype(np.uint8)


def _pair_codes(c1: np.ndarray, c2: np.ndarray) -> np.ndarray:
    """Injective combination of two compacted code grids."""
    _, i1 = np.unique(c1, return_inverse=True)
    _, i2 = np.unique(c2, return_inverse=True)
    i1 = i1.reshape(c1.shape).astype(np.int64)
    i2 = i2.reshape(c2.shape).astype(np.int64)
    return i1 * (int(i2.max()) + 1) + i2


def cap_gt(domain: int, delta: float) -> int:
    """Declared transcript-count cap for one greater-than call.

    Two parties exchange ceil(log2(m)) * ceil(log2(m/delta)) rounds of 2
    bits over m-bit inputs, m = ceil(log2 domain); the cap exponentiates
    the total.
    """
    m = max(1, math.ceil(math.log2(max(2, domain))))
    r = max(1, math.ceil(math.log2(max(2, m))))
    w = max(1, math.ceil(math.log2(m / delta)))
    return 2 ** (2 * r * w)


def transcript_cap(spec: ProtocolSpec) -> int:
    """Declared cap on the number of rectangles the family may produce."""
    f = spec.family
    if f == "equality-hash":
        return 2 * math.ceil(1 / spec.delta)
    if f == "eq-mod-p":
        return 2 * spec.p
    if f == "sparse-set-eq":
        return 2 * max(1, math.ceil(spec.t / spec.delta))
    if f == "neq3-multiparty":
        return 4 * (math.ceil(2 / spec.delta) if spec.delta < 1 else 1)
    if f == "greater-than":
        return cap_gt(spec.n, spec.delta)
    if f == "banded-gt":
        return cap_gt(spec.n + spec.p, spec.delta / 2) ** 2
    if f == "banded2d-gt":
        s = masks.split_index(spec.n)
        return cap_gt(2 * s + spec.p, spec.delta / 3) ** 3
    if f == "monotone-gt":
        return cap_gt(spec.n + 1, spec.delta)
    raise ParameterError(f"unknown family {f!r}")


# ---------------------------------------------------------------------------
# per-family transcript grids

def _eq_style_grid(vals: np.ndarray, buckets: int, rng):
    if buckets > 1:
        bx = _hash_buckets(vals, _draw_key(rng), buckets)
    else:
        bx = np.zeros(len(vals), dtype=np.int64)
    o = (bx[:, None] != bx[None, :]).astype(np.uint8)
    codes = bx[:, None] * 2 + o
    return codes, o


def _transcript_grid(spec: ProtocolSpec, seed: int):
    """(codes, labels) over the full n x n grid for an order-2 family."""
    n = spec.n
    if n > ENUM_CAP:
        raise ResourceError(f"n={n} exceeds the enumeration cap {ENUM_CAP}")
    rng = np.random.default_rng(seed)
    f = spec.family

    if f == "equality-hash":
        vals = np.asarray(spec.groups if spec.groups is not None else np.arange(n),
                          dtype=np.int64)
        return _eq_style_grid(vals, math.ceil(1 / spec.delta), rng)

    if f == "eq-mod-p":
        vals = np.arange(n, dtype=np.int64) % spec.p
        if spec.delta:
            return _eq_style_grid(vals, math.ceil(1 / spec.delta), rng)
        o = (vals[:, None] != vals[None, :]).astype(np.uint8)
        return vals[:, None] * 2 + o, o

    if f == "sparse-set-eq":
        cols = np.asarray(spec.col_groups if spec.col_groups is not None
                          else np.arange(n), dtype=np.int64)
        B = max(1, math.ceil(spec.t / spec.delta))
        key = _draw_key(rng)
        by = _hash_buckets(cols, key, B)
        member = np.zeros((n, B), dtype=bool)
        for r, zs in enumerate(spec.zero_sets):
            if zs:
                member[r, _hash_buckets(np.asarray(zs, dtype=np.int64), key, B)] = True
        o = (~member[np.arange(n)[:, None], by[None, :]]).astype(np.uint8)
        return by[None, :] * 2 + o, o

    if f == "greater-than":
        idx = np.arange(n, dtype=np.int64)
        m = max(1, int(n - 1).bit_length())
        return _gt_grid(idx, idx, m, spec.delta, rng)

    if f == "monotone-gt":
        px = np.asarray(spec.prefix_lengths, dtype=np.int64)
        idx = np.arange(n, dtype=np.int64)
        m = max(1, int(n).bit_length())
        return _gt_grid(px, idx, m, spec.delta, rng)

    if f == "banded-gt":
        p = spec.p
        idx = np.arange(n, dtype=np.int64)
        m = max(1, int(n + p - 2).bit_length())
        d = spec.delta / 2
        c1, o1 = _gt_grid(idx, idx + p - 1, m, d, np.random.default_rng(rng.integers(2**63)))
        c2, o2 = _gt_grid(idx + p - 1, idx, m, d, np.random.default_rng(rng.integers(2**63)),
                          direction="b>a")
        # short circuit: the second call only runs when the first said "no"
        _, i2 = np.unique(c2, return_inverse=True)
        i2 = i2.reshape(c2.shape).astype(np.int64)
        codes = _pair_codes(c1, np.where(o1 == 1, np.int64(0), i2 + 1))
        labels = np.where(o1 == 1, np.uint8(1), o2).astype(np.uint8)
        return codes, labels

    if f == "banded2d-gt":
        return _banded2d_grid(spec, rng)

    raise ParameterError(f"unknown or order-3 family {f!r}")


def _banded2d_grid(spec: ProtocolSpec, rng):
    n, p = spec.n, spec.p
    s = masks.split_index(n)
    idx = np.arange(n, dtype=np.int64)
    hi1, lo1 = idx // s, idx % s
    m1 = max(1, int(s - 1).bit_length())
    m3 = max(1, int(2 * s + p).bit_length())
    d = spec.delta / 3

    def sub():
        return np.random.default_rng(rng.integers(2**63))

    cA, oA = _gt_grid(hi1, hi1, m1, d, sub())
    cB, oB = _gt_grid(lo1, lo1, m1, d, sub())

    # third call per announced sign pattern; L1 distance >= p rewritten as
    # a single comparison of shifted sums/differences
    branches = {
        (1, 1): (hi1 + lo1, hi1 + lo1 + p - 1, "a>b"),
        (0, 0): (hi1 + lo1 + p - 1, hi1 + lo1, "b>a"),
        (1, 0): (hi1 - lo1 + s - 1, hi1 - lo1 + s - 1 + p - 1, "a>b"),
        (0, 1): (lo1 - hi1 + s - 1, lo1 - hi1 + s - 1 + p - 1, "a>b"),
    }
    codes3 = np.zeros((n, n), dtype=np.int64)
    out3 = np.zeros((n, n), dtype=np.uint8)
    for (ba, bb), (av, bv, direction) in branches.items():
        c3, o3 = _gt_grid(av, bv, m3, d, sub(), direction=direction)
        sel = (oA == ba) & (oB == bb)
        codes3 = np.where(sel, c3, codes3)
        out3 = np.where(sel, o3, out3)
    combined = _pair_codes(_pair_codes(cA, cB), codes3)
    return combined, out3


def _neq3_grid(spec: ProtocolSpec, seed: int):
    n = spec.n
    if n > ENUM_CAP_3:
        raise ResourceError(f"n={n} exceeds the order-3 enumeration cap {ENUM_CAP_3}")
    rng = np.random.default_rng(seed)
    B = math.ceil(2 / spec.delta) if spec.delta < 1 else 1
    if B > 1:
        h = _hash_buckets(np.arange(n, dtype=np.int64), _draw_key(rng), B)
    else:
        h = np.zeros(n, dtype=np.int64)
    b2 = (h[None, :, None] == h[:, None, None]).astype(np.int64)  # [x2 bucket == x1 bucket]
    b3 = (h[None, None, :] == h[:, None, None]).astype(np.int64)
    codes = (h[:, None, None] * 4 + b2 * 2 + b3).astype(np.int64)
    labels = (1 - (b2 & b3)).astype(np.uint8)
    return codes, labels


# ---------------------------------------------------------------------------
# partitions

@dataclass(frozen=True)
class Rectangle:
    row_set: np.ndarray
    col_set: np.ndarray
    label: int
    depth_set: np.ndarray | None = None

    @property
    def order(self) -> int:
        return 2 if self.depth_set is None else 3

    def cells(self) -> int:
        k = len(self.row_set) * len(self.col_set)
        return k if self.depth_set is None else k * len(self.depth_set)


@dataclass(frozen=True)
class PartitionSample:
    rectangles: list[Rectangle]
    n: int
    source: str
    one_count: int
    order: int = 2


@dataclass(frozen=True)
class Cover:
    rectangles: list[Rectangle]
    n: int


def _axis_sets(inv: np.ndarray, axis_index: np.ndarray, n_groups: int):
    """Per-group sorted unique coordinates along one axis."""
    pairs = np.unique(inv.astype(np.int64) * (axis_index.max() + 1) + axis_index)
    g = pairs // (axis_index.max() + 1)
    v = pairs % (axis_index.max() + 1)
    bounds = np.searchsorted(g, np.arange(n_groups + 1))
    return [v[bounds[i]:bounds[i + 1]] for i in range(n_groups)]


def _group_cells(codes: np.ndarray, labels: np.ndarray) -> list[Rectangle]:
    shape = codes.shape
    order = len(shape)
    flat = codes.ravel()
    uniq, first, inv = np.unique(flat, return_index=True, return_inverse=True)
    G = len(uniq)
    counts = np.bincount(inv, minlength=G)
    lab = labels.ravel()
    one_mass = np.bincount(inv, weights=lab.astype(np.float64), minlength=G)
    if not np.all((one_mass == 0) | (one_mass == counts)):
        raise RuntimeError("transcript class with mixed labels")

    grids = np.indices(shape).reshape(order, -1)
    axis_sets = [_axis_sets(inv, grids[a], G) for a in range(order)]
    rects = []
    for g in range(G):
        sets = [axis_sets[a][g] for a in range(order)]
        vol = math.prod(len(s) for s in sets)
        if vol != counts[g]:
            raise RuntimeError("transcript class is not a rectangle")
        depth = sets[2] if order == 3 else None
        rects.append(Rectangle(sets[0], sets[1], int(lab[first[g]]), depth))
    return rects


def sample_partition(spec: ProtocolSpec, seed: int = 0) -> PartitionSample:
    """Run the protocol on every cell and group by transcript."""
    if spec.family == "neq3-multiparty":
        return multiparty_partition(spec, seed)
    codes, labels = _transcript_grid(spec, seed)
    rects = _group_cells(codes, labels)
    ones = sum(1 for r in rects if r.label == 1)
    return PartitionSample(rects, spec.n, f"{spec.describe()}@{seed}", ones)


def multiparty_partition(spec: ProtocolSpec, seed: int = 0) -> PartitionSample:
    if spec.family != "neq3-multiparty":
        raise ParameterError(f"{spec.family} is not an order-3 family")
    codes, labels = _neq3_grid(spec, seed)
    rects = _group_cells(codes, labels)
    ones = sum(1 for r in rects if r.label == 1)
    return PartitionSample(rects, spec.n, f"{spec.describe()}@{seed}", ones, order=3)


def protocol_matrix(spec: ProtocolSpec, seed: int = 0) -> masks.Mask:
    """The protocol's output on every cell, as a mask W_pi."""
    if spec.family == "neq3-multiparty":
        raise ParameterError("order-3 output is a cube; use protocol_cube")
    _, labels = _transcript_grid(spec, seed)
    return masks.make_mask(masks.Explicit(labels), spec.n)


def protocol_cube(spec: ProtocolSpec, seed: int = 0) -> np.ndarray:
    _, labels = _neq3_grid(spec, seed)
    return labels


def partition_bitmap(sample: PartitionSample) -> np.ndarray:
    """Reassemble the label grid from a partition's rectangles."""
    shape = (sample.n,) * sample.order
    out = np.full(shape, 255, dtype=np.uint8)
    for r in sample.rectangles:
        if sample.order == 2:
            out[np.ix_(r.row_set, r.col_set)] = r.label
        else:
            out[np.ix_(r.row_set, r.col_set, r.depth_set)] = r.label
    if (out == 255).any():
        raise RuntimeError("partition does not tile the grid")
    return out


def target_bitmap(spec: ProtocolSpec) -> np.ndarray:
    """The mask the protocol family is meant to compute."""
    n = spec.n
    i = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    f = spec.family
    if f == "equality-hash":
        g = np.asarray(spec.groups if spec.groups is not None else np.arange(n))
        return (g[:, None] != g[None, :]).astype(np.uint8)
    if f == "eq-mod-p":
        return ((i - j) % spec.p != 0).astype(np.uint8)
    if f == "sparse-set-eq":
        cols = np.asarray(spec.col_groups if spec.col_groups is not None
                          else np.arange(n), dtype=np.int64)
        W = np.ones((n, n), dtype=np.uint8)
        for r, zs in enumerate(spec.zero_sets):
            if zs:
                W[r] &= (~np.isin(cols, np.asarray(zs))).astype(np.uint8)
        return W
    if f == "greater-than":
        return (i > j).astype(np.uint8)
    if f == "banded-gt":
        return (np.abs(i - j) >= spec.p).astype(np.uint8)
    if f == "banded2d-gt":
        s = masks.split_index(n)
        d = np.abs(i // s - j // s) + np.abs(i % s - j % s)
        return (d >= spec.p).astype(np.uint8)
    if f == "monotone-gt":
        px = np.asarray(spec.prefix_lengths)
        return (j < px[:, None]).astype(np.uint8)
    if f == "neq3-multiparty":
        x = np.arange(n)
        eq = (x[:, None, None] == x[None, :, None]) & (x[:, None, None] == x[None, None, :])
        return (~eq).astype(np.uint8)
    raise ParameterError(f"unknown family {f!r}")


def _point_outputs(spec: ProtocolSpec, idx, rng) -> np.ndarray:
    """Protocol outputs on sampled cells, one fresh seed per sample.

    Mirrors _transcript_grid / _neq3_grid decision for decision; kept in
    lockstep by the grid-consistency property checked in the test suite.
    """
    f = spec.family
    n = spec.n
    size = idx[0].shape

    if f in ("equality-hash", "eq-mod-p"):
        if f == "equality-hash":
            vals = np.asarray(
                spec.groups if spec.groups is not None else np.arange(n),
                dtype=np.int64,
            )
            buckets = math.ceil(1 / spec.delta)
        else:
            vals = np.arange(n, dtype=np.int64) % spec.p
            if not spec.delta:
                return (vals[idx[0]] != vals[idx[1]]).astype(np.uint8)
            buckets = math.ceil(1 / spec.delta)
        if buckets <= 1:
            return np.zeros(size, dtype=np.uint8)
        ka, kb = _draw_key_arrays(rng, 1, size)
        bx = _hash_buckets(vals[idx[0]], (ka[0], kb[0]), buckets)
        by = _hash_buckets(vals[idx[1]], (ka[0], kb[0]), buckets)
        return (bx != by).astype(np.uint8)

    if f == "sparse-set-eq":
        cols = np.asarray(
            spec.col_groups if spec.col_groups is not None else np.arange(n),
            dtype=np.int64,
        )
        B = max(1, math.ceil(spec.t / spec.delta))
        width = max(1, max(len(zs) for zs in spec.zero_sets))
        Z = np.zeros((n, width), dtype=np.int64)
        valid = np.zeros((n, width), dtype=bool)
        for r, zs in enumerate(spec.zero_sets):
            Z[r, : len(zs)] = zs
            valid[r, : len(zs)] = True
        ka, kb = _draw_key_arrays(rng, 1, size)
        by = _hash_buckets(cols[idx[1]], (ka[0], kb[0]), B)
        hz = _hash_buckets(Z[idx[0]], (ka[0][..., None], kb[0][..., None]), B)
        member = ((hz == by[..., None]) & valid[idx[0]]).any(axis=-1)
        return (~member).astype(np.uint8)

    if f == "greater-than":
        m = max(1, int(n - 1).bit_length())
        ka, kb = _draw_key_arrays(rng, m + 1, size)
        return _gt_point(idx[0], idx[1], m, spec.delta, ka, kb)

    if f == "monotone-gt":
        px = np.asarray(spec.prefix_lengths, dtype=np.int64)
        m = max(1, int(n).bit_length())
        ka, kb = _draw_key_arrays(rng, m + 1, size)
        return _gt_point(px[idx[0]], idx[1], m, spec.delta, ka, kb)

    if f == "banded-gt":
        p = spec.p
        m = max(1, int(n + p - 2).bit_length())
        d = spec.delta / 2
        x = np.asarray(idx[0], dtype=np.int64)
        y = np.asarray(idx[1], dtype=np.int64)
        ka, kb = _draw_key_arrays(rng, m + 1, size)
        o1 = _gt_point(x, y + p - 1, m, d, ka, kb)
        ka, kb = _draw_key_arrays(rng, m + 1, size)
        o2 = _gt_point(x + p - 1, y, m, d, ka, kb, direction="b>a")
        return np.where(o1 == 1, np.uint8(1), o2).astype(np.uint8)

    if f == "banded2d-gt":
        p = spec.p
        s = masks.split_index(n)
        x = np.asarray(idx[0], dtype=np.int64)
        y = np.asarray(idx[1], dtype=np.int64)
        ahi, alo = x // s, x % s
        bhi, blo = y // s, y % s
        m1 = max(1, int(s - 1).bit_length())
        m3 = max(1, int(2 * s + p).bit_length())
        d = spec.delta / 3
        ka, kb = _draw_key_arrays(rng, m1 + 1, size)
        oA = _gt_point(ahi, bhi, m1, d, ka, kb)
        ka, kb = _draw_key_arrays(rng, m1 + 1, size)
        oB = _gt_point(alo, blo, m1, d, ka, kb)
        branches = {
            (1, 1): (ahi + alo, bhi + blo + p - 1, "a>b"),
            (0, 0): (ahi + alo + p - 1, bhi + blo, "b>a"),
            (1, 0): (ahi - alo + s - 1, bhi - blo + s - 1 + p - 1, "a>b"),
            (0, 1): (alo - ahi + s - 1, blo - bhi + s - 1 + p - 1, "a>b"),
        }
        out = np.zeros(size, dtype=np.uint8)
        for (ba, bb), (av, bv, direction) in branches.items():
            ka, kb = _draw_key_arrays(rng, m3 + 1, size)
            o3 = _gt_point(av, bv, m3, d, ka, kb, direction=direction)
            sel = (oA == ba) & (oB == bb)
            out = np.where(sel, o3, out)
        return out.astype(np.uint8)

    if f == "neq3-multiparty":
        B = math.ceil(2 / spec.delta) if spec.delta < 1 else 1
        if B <= 1:
            return np.zeros(size, dtype=np.uint8)
        ka, kb = _draw_key_arrays(rng, 1, size)
        h1 = _hash_buckets(np.asarray(idx[0], np.int64), (ka[0], kb[0]), B)
        h2 = _hash_buckets(np.asarray(idx[1], np.int64), (ka[0], kb[0]), B)
        h3 = _hash_buckets(np.asarray(idx[2], np.int64), (ka[0], kb[0]), B)
        return (1 - ((h2 == h1) & (h3 == h1)).astype(np.uint8)).astype(np.uint8)

    raise ParameterError(f"unknown family {f!r}")


def empirical_error_rates(
    spec: ProtocolSpec, W, trials: int, seed: int = 0
) -> tuple[float, float]:
    """Monte Carlo disagreement rates of W_pi against W, split by W's value.

    Each of the trials samples an independent (cell, protocol seed) pair,
    so the two rates are plain binomial estimates of the per-cell error
    probabilities averaged over each side of the mask.
    """
    bitmap = np.asarray(getattr(W, "bitmap", W))
    rng = np.random.default_rng(seed)
    order = bitmap.ndim
    idx = tuple(rng.integers(0, spec.n, size=trials) for _ in range(order))
    out = _point_outputs(spec, idx, rng)
    w = bitmap[idx].astype(np.int64)
    disagree = out.astype(np.int64) != w
    rates = []
    for side in (1, 0):
        sel = w == side
        tot = int(sel.sum())
        rates.append(float(disagree[sel].sum() / tot) if tot else 0.0)
    return rates[0], rates[1]


# ---------------------------------------------------------------------------
# nondeterministic covers

def _bit_sets(m: int, values: np.ndarray):
    for i in range(m):
        bit = (values >> i) & 1
        yield i, bit


def nondet_cover(kind: str, n: int, blocks=None) -> Cover:
    """Overlapping 1-labeled rectangles witnessing f = 1.

    neq-bits guesses a differing bit position and its orientation;
    neq-blocks does the same over block ids; disj-coords guesses a shared
    coordinate of intersecting sets.
    """
    idx = np.arange(n, dtype=np.int64)
    rects = []
    if kind == "neq-bits":
        if n < 2 or n & (n - 1):
            raise ParameterError(f"n={n} must be a power of two")
        m = n.bit_length() - 1
        for i in range(m):
            bit = (idx >> i) & 1
            for b in (0, 1):
                rects.append(Rectangle(idx[bit == b], idx[bit != b], 1))
        target = (idx[:, None] != idx[None, :]).astype(np.uint8)
    elif kind == "neq-blocks":
        if blocks is None:
            raise ParameterError("neq-blocks needs the block partition")
        masks._check_partition(blocks, n, "blocks")
        blk = masks.block_index_map(blocks, n)
        nb = len(blocks)
        if nb < 2:
            raise ParameterError("need at least two blocks")
        m = (nb - 1).bit_length()
        for i in range(m):
            bit = (blk >> i) & 1
            for b in (0, 1):
                S, T = idx[bit == b], idx[bit != b]
                if len(S) and len(T):
                    rects.append(Rectangle(S, T, 1))
        target = (blk[:, None] != blk[None, :]).astype(np.uint8)
    elif kind == "disj-coords":
        if n < 2 or n & (n - 1):
            raise ParameterError(f"n={n} must be a power of two")
        m = n.bit_length() - 1
        for i in range(m):
            bit = (idx >> i) & 1
            S = idx[bit == 1]
            if len(S):
                rects.append(Rectangle(S, S.copy(), 1))
        target = ((idx[:, None] & idx[None, :]) != 0).astype(np.uint8)
    else:
        raise ParameterError(f"unknown cover kind {kind!r}")

    union = cover_bitmap(Cover(rects, n))
    if not np.array_equal(union, target):
        raise RuntimeError("cover does not match its target mask")
    return Cover(rects, n)


def cover_bitmap(cover: Cover) -> np.ndarray:
    out = np.zeros((cover.n, cover.n), dtype=np.uint8)
    for r in cover.rectangles:
        out[np.ix_(r.row_set, r.col_set)] = 1
    return out
