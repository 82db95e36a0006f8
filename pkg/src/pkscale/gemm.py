"""Blocked matrix multiplication, exact and projection-approximated.

The conventional kernel subdivides an M x K by K x W product into block x block
inner products over block-major-reordered operands. The projected kernels
compact the contracted dimension: projecting the left operand's rows and the
right operand's columns onto projection index ``l`` shrinks the inner
dimension by the projection size, and summing the partial products of the
first ``projections_used`` indices gives a result whose accuracy scales with
the number of indices kept (exact when all are kept).

Counters: functions accept an optional ``counter`` with an ``add(n)`` method
(see :class:`pkscale.costs.MacCounter`). One count is one multiply-accumulate.
Matrix projection passes charge every element of the (possibly padded)
operand; block products charge ``h*c*w``; accumulating an additional partial
result charges one count per output element.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DomainError
from .projection import project_cols, project_rows

DEFAULT_SIMD_BITS = 128


class Orientation(enum.Enum):
    ROW_WISE = "row"     # blocks scanned row-by-row, row-major inside a block
    COL_WISE = "col"     # blocks scanned column-by-column, column-major inside


def _as_float_2d(a, name):
    a = np.asarray(a)
    if a.dtype not in (np.float32, np.float64):
        a = a.astype(np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {a.shape}")
    return np.ascontiguousarray(a)


def _result_dtype(a, b):
    return np.float32 if (a.dtype == np.float32 and b.dtype == np.float32) else np.float64


@dataclass(frozen=True)
class GemmPlan:
    """Geometry of a blocked product: (m x k) by (k x w) in block x block tiles.

    ``simd_bits`` and ``repr_bits`` only feed the block-size advice: efficient
    vectorized inner kernels want ``block`` to be a positive multiple of
    ``2 * simd_bits / repr_bits``. Violating that is legal and merely warns.
    """

    m: int
    k: int
    w: int
    block: int
    simd_bits: int = DEFAULT_SIMD_BITS
    repr_bits: int = 32

    def __post_init__(self):
        if min(self.m, self.k, self.w) < 1:
            raise DomainError(f"matrix dims must be positive, got {self.m}x{self.k}x{self.w}")
        if self.block < 1:
            raise DomainError(f"block size must be positive, got {self.block}")
        if self.repr_bits not in (32, 64):
            raise DomainError(f"repr_bits must be 32 or 64, got {self.repr_bits}")
        step = 2 * self.simd_bits // self.repr_bits
        if self.block % step:
            warnings.warn(
                f"block size {self.block} is not a multiple of {step} "
                f"(= 2 * {self.simd_bits} SIMD bits / {self.repr_bits}-bit words); "
                "vectorized inner kernels prefer aligned blocks", stacklevel=2)

    def borders(self):
        """Leftover (rows, inner, cols) outside the full-block grid."""
        return (self.m % self.block, self.k % self.block, self.w % self.block)

    def describe(self):
        bm, bk, bw = self.borders()
        full = f"{self.m // self.block}x{self.k // self.block}x{self.w // self.block} full blocks of {self.block}"
        if bm or bk or bw:
            return f"{full}, cleanup borders {bm}x{bk}x{bw}"
        return full


@dataclass
class BlockedOperand:
    """A matrix stored as contiguous blocks plus cleanup borders.

    ``data`` concatenates every block in scan order (row-by-row of the block
    grid for ROW_WISE, column-by-column for COL_WISE); inside a block the
    elements are row-major for ROW_WISE and column-major for COL_WISE.
    ``index`` lists (row0, col0, height, width, offset) per stored block.
    ``projected`` optionally holds per-projection compacted blocks, in the
    same scan order, produced by the fused reorder-and-project path.
    """

    rows: int
    cols: int
    block: int
    orientation: Orientation
    data: np.ndarray
    index: list
    grid: tuple
    projected: list | None = None

    def _slot(self, bi, bj):
        if self.orientation is Orientation.ROW_WISE:
            return bi * self.grid[1] + bj
        return bj * self.grid[0] + bi

    def block_view(self, bi, bj):
        """The (height x width) array of grid block (bi, bj)."""
        r0, c0, h, w, off = self.index[self._slot(bi, bj)]
        order = "C" if self.orientation is Orientation.ROW_WISE else "F"
        return self.data[off:off + h * w].reshape((h, w), order=order)

    def projected_block(self, l, bi, bj):
        if self.projected is None:
            raise DomainError("operand was reordered without fused projection")
        return self.projected[l][self._slot(bi, bj)]


def _block_ranges(total, block):
    starts = range(0, total, block)
    return [(s, min(block, total - s)) for s in starts]


def reorder_block_major(matrix, block, orientation, pair=None, projections=0):
    """Copy ``matrix`` into block-major storage; optionally fuse projection.

    With ``pair`` given and ``projections >= 1``, the same pass also emits
    per-projection compacted blocks (rows projected for ROW_WISE operands,
    columns for COL_WISE). The fused path requires a grid without cleanup
    borders and a block size divisible by the pair size.
    """
    a = _as_float_2d(matrix, "operand")
    if block < 1:
        raise DomainError(f"block size must be positive, got {block}")
    rows, cols = a.shape
    fused = pair is not None and projections >= 1
    if fused:
        if rows % block or cols % block or block % pair.size:
            raise DomainError(
                "fused reorder-and-project needs border-free blocking and a block "
                f"size divisible by {pair.size}; got {rows}x{cols} in blocks of {block}")
    row_ranges = _block_ranges(rows, block)
    col_ranges = _block_ranges(cols, block)
    grid = (len(row_ranges), len(col_ranges))
    data = np.empty(rows * cols, dtype=a.dtype)
    index = []
    proj = [[] for _ in range(projections)] if fused else None
    if orientation is Orientation.ROW_WISE:
        scan = [(i, j) for i in range(grid[0]) for j in range(grid[1])]
    else:
        scan = [(i, j) for j in range(grid[1]) for i in range(grid[0])]
    off = 0
    for bi, bj in scan:
        r0, h = row_ranges[bi]
        c0, w = col_ranges[bj]
        blk = a[r0:r0 + h, c0:c0 + w]
        flat = blk.ravel(order="C" if orientation is Orientation.ROW_WISE else "F")
        data[off:off + h * w] = flat
        index.append((r0, c0, h, w, off))
        off += h * w
        if fused:
            for l in range(projections):
                if orientation is Orientation.ROW_WISE:
                    proj[l].append(project_rows(blk, pair, l))
                else:
                    proj[l].append(project_cols(blk, pair, l))
    return BlockedOperand(rows, cols, block, orientation, data, index, grid, proj)


def restore_block_major(operand):
    """Invert :func:`reorder_block_major`, reproducing the source exactly."""
    out = np.empty((operand.rows, operand.cols), dtype=operand.data.dtype)
    order = "C" if operand.orientation is Orientation.ROW_WISE else "F"
    for r0, c0, h, w, off in operand.index:
        out[r0:r0 + h, c0:c0 + w] = operand.data[off:off + h * w].reshape((h, w), order=order)
    return out


def gemm_conventional(a, b, block, counter=None):
    """Exact blocked product: accumulate block x block inner products.

    Operands are reordered block-major (rows of ``a`` row-wise, columns of
    ``b`` column-wise) and each output tile accumulates its chain of inner
    block products in ascending inner-index order.
    """
    a = _as_float_2d(a, "left operand")
    b = _as_float_2d(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"inner dims disagree: {a.shape} x {b.shape}")
    ra = reorder_block_major(a, block, Orientation.ROW_WISE)
    rb = reorder_block_major(b, block, Orientation.COL_WISE)
    out = np.zeros((a.shape[0], b.shape[1]), dtype=_result_dtype(a, b))
    inner_blocks = ra.grid[1]
    for bi in range(ra.grid[0]):
        r0, h = ra.index[ra._slot(bi, 0)][0], ra.index[ra._slot(bi, 0)][2]
        for bj in range(rb.grid[1]):
            acc = None
            for t in range(inner_blocks):
                left = ra.block_view(bi, t)
                right = rb.block_view(t, bj)
                prod = left @ right
                acc = prod if acc is None else acc + prod
                if counter is not None:
                    counter.add(left.shape[0] * left.shape[1] * right.shape[1])
            c0 = rb.index[rb._slot(0, bj)][1]
            out[r0:r0 + acc.shape[0], c0:c0 + acc.shape[1]] = acc
    return out


def gemm_partial(a, b, pair, l, counter=None):
    """One rank slice of the projected product: project both operands onto
    index ``l`` and multiply the compacted matrices.

    The inner dimension must be divisible by the pair size.
    """
    a = _as_float_2d(a, "left operand")
    b = _as_float_2d(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"inner dims disagree: {a.shape} x {b.shape}")
    ac = project_rows(a, pair, l)
    bd = project_cols(b, pair, l)
    if counter is not None:
        counter.add(a.size)
        counter.add(b.size)
        counter.add(ac.shape[0] * ac.shape[1] * bd.shape[1])
    return ac @ bd


def _pad_inner(a, b, size):
    k = a.shape[1]
    if k % size == 0:
        return a, b, k
    kp = ((k + size - 1) // size) * size
    ap = np.zeros((a.shape[0], kp), dtype=a.dtype)
    ap[:, :k] = a
    bp = np.zeros((kp, b.shape[1]), dtype=b.dtype)
    bp[:k, :] = b
    return ap, bp, kp


def project_right_operand(b, pair, projections, counter=None):
    """Precompute the right operand's column projections for reuse.

    Returns one compacted matrix per projection index; feed the list to
    :func:`gemm_projected` as ``right_cache`` when the right operand is fixed
    across many products. Pads the row count to a multiple of the pair size,
    mirroring what :func:`gemm_projected` does internally.
    """
    b = _as_float_2d(b, "right operand")
    rows = b.shape[0]
    if rows % pair.size:
        rp = ((rows + pair.size - 1) // pair.size) * pair.size
        bp = np.zeros((rp, b.shape[1]), dtype=b.dtype)
        bp[:rows, :] = b
        b = bp
    cache = []
    for l in range(projections):
        cache.append(project_cols(b, pair, l))
        if counter is not None:
            counter.add(b.size)
    return cache


def gemm_projected(a, b, pair, cfg, right_cache=None, counter=None):
    """Approximate product accumulating ``cfg.projections_used`` rank slices.

    Partial products are accumulated in ascending projection order. An inner
    dimension not divisible by the pair size is zero-padded (the padding stays
    confined to the contracted dimension, so the result needs no cropping).
    Exact when every projection index is used.
    """
    cfg.check_pair(pair)
    a = _as_float_2d(a, "left operand")
    b = _as_float_2d(b, "right operand")
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"inner dims disagree: {a.shape} x {b.shape}")
    a, b, _ = _pad_inner(a, b, pair.size)
    if right_cache is not None and len(right_cache) < cfg.projections_used:
        raise DomainError(
            f"right_cache holds {len(right_cache)} projections, need {cfg.projections_used}")
    acc = None
    for l in range(cfg.projections_used):
        ac = project_rows(a, pair, l)
        if counter is not None:
            counter.add(a.size)
        if right_cache is not None:
            bd = right_cache[l]
            if bd.shape != (a.shape[1] // pair.size, b.shape[1]):
                raise DimensionMismatch(
                    f"cached projection {l} has shape {bd.shape}, "
                    f"expected {(a.shape[1] // pair.size, b.shape[1])}")
        else:
            bd = project_cols(b, pair, l)
            if counter is not None:
                counter.add(b.size)
        if counter is not None:
            counter.add(ac.shape[0] * ac.shape[1] * bd.shape[1])
        part = ac @ bd
        if acc is None:
            acc = part
        else:
            acc += part
            if counter is not None:
                counter.add(acc.size)
    return acc
