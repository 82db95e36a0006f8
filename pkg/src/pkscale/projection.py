"""Invertible projection pairs and their application to matrices and signals.

A projection pair is a pair of L x L matrices (``forward``, ``inverse``) with
``forward @ inverse == I``. Column ``l`` of ``forward`` analyses length-L
groups of the left operand (or the input signal); row ``l`` of ``inverse``
plays the synthesis role on the right operand (or the kernel). Accumulating
the partial products of all L projection indices reproduces the plain result
exactly; truncating the accumulation trades accuracy for work, and the first
indices carry most of the energy for low-frequency data.

Two stock constructions are provided:

* a cosine basis  ``forward[i, j] = cos((pi/L) * (i + 1/2) * j)``, kept
  unnormalized with its inverse computed numerically, and
* the orthonormal Haar wavelet basis (power-of-two sizes), whose inverse is
  its transpose.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, DomainError, IndexOutOfRange, SingularMatrix

MIN_SIZE = 2
MAX_SIZE = 64
PIVOT_TOL = 1e-12        # smallest acceptable elimination pivot magnitude
CONDITION_LIMIT = 1e8    # infinity-norm condition estimate cutoff
INVERSE_TOL = 1e-10      # max-norm bound on forward @ inverse - I


class PairKind(enum.Enum):
    DCT = "dct"
    HAAR = "haar"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ProjectionPair:
    """An invertible projection basis of size L.

    ``forward`` holds the analysis vectors in its columns, ``inverse`` the
    synthesis vectors in its rows. Both arrays are read-only float64.
    """

    size: int
    forward: np.ndarray
    inverse: np.ndarray
    kind: PairKind
    condition_estimate: float

    def __post_init__(self):
        self.forward.setflags(write=False)
        self.inverse.setflags(write=False)


def _norm_inf(m):
    return float(np.abs(m).sum(axis=1).max())


def _invert_checked(c):
    """Invert via LU elimination with partial pivoting, double precision.

    Raises SingularMatrix when a pivot falls below PIVOT_TOL, when the
    infinity-norm condition estimate reaches CONDITION_LIMIT, or when the
    computed inverse fails the identity check.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(c)
    smallest = float(np.abs(np.diag(lu)).min())
    if smallest < PIVOT_TOL:
        raise SingularMatrix(f"elimination pivot {smallest:.3e} below {PIVOT_TOL:.0e}")
    inv = scipy.linalg.lu_solve((lu, piv), np.eye(c.shape[0]))
    cond = _norm_inf(c) * _norm_inf(inv)
    if cond >= CONDITION_LIMIT:
        raise SingularMatrix(f"condition estimate {cond:.3e} at or above {CONDITION_LIMIT:.0e}")
    residual = float(np.abs(c @ inv - np.eye(c.shape[0])).max())
    if residual > INVERSE_TOL:
        raise SingularMatrix(f"inverse verification failed, residual {residual:.3e}")
    return inv, cond


def _build_pair(c, kind):
    size = c.shape[0]
    inv, cond = _invert_checked(c)
    return ProjectionPair(
        size=size,
        forward=np.ascontiguousarray(c, dtype=np.float64),
        inverse=np.ascontiguousarray(inv, dtype=np.float64),
        kind=kind,
        condition_estimate=cond,
    )


def _check_size(size):
    if not (MIN_SIZE <= size <= MAX_SIZE):
        raise DomainError(f"projection size {size} outside [{MIN_SIZE}, {MAX_SIZE}]")


def make_dct_pair(size):
    """Unnormalized cosine pair: forward[i, j] = cos((pi/size)(i + 1/2) j).

    Column 0 is all ones, so index 0 captures the per-group mean (times the
    group length). The inverse is computed numerically, not transposed.
    """
    _check_size(size)
    i = np.arange(size, dtype=np.float64) + 0.5
    j = np.arange(size, dtype=np.float64)
    c = np.cos(np.pi / size * np.outer(i, j))
    return _build_pair(c, PairKind.DCT)


def make_haar_pair(size):
    """Orthonormal Haar wavelet pair; size must be a power of two.

    Built by the standard recursion with a 1/sqrt(2) factor per stage; the
    inverse equals the transpose.
    """
    _check_size(size)
    if size & (size - 1):
        raise DomainError(f"Haar pair needs a power-of-two size, got {size}")
    h = np.array([[1.0]])
    while h.shape[0] < size:
        top = np.kron(h, [1.0, 1.0])
        bottom = np.kron(np.eye(h.shape[0]), [1.0, -1.0])
        h = np.vstack([top, bottom]) / np.sqrt(2.0)
    c = h.T.copy()
    pair = ProjectionPair(
        size=size,
        forward=np.ascontiguousarray(c),
        inverse=np.ascontiguousarray(c.T),
        kind=PairKind.HAAR,
        condition_estimate=_norm_inf(c) * _norm_inf(c.T),
    )
    return pair


def make_custom_pair(matrix):
    """Wrap a caller-supplied square matrix as a projection pair.

    The matrix must be square, finite, of size in [2, 64], and invertible
    under the same pivot/condition thresholds as the stock pairs.
    """
    c = np.asarray(matrix, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise DimensionMismatch(f"projection matrix must be square, got {c.shape}")
    _check_size(c.shape[0])
    if not np.all(np.isfinite(c)):
        raise DomainError("projection matrix contains non-finite values")
    return _build_pair(c, PairKind.CUSTOM)


def _check_index(pair, l):
    if not (0 <= l < pair.size):
        raise IndexOutOfRange(f"projection index {l} outside [0, {pair.size})")


def _as_float(a):
    a = np.asarray(a)
    if a.dtype not in (np.float32, np.float64):
        a = a.astype(np.float64)
    return np.ascontiguousarray(a)


def project_rows(matrix, pair, l):
    """Project each row of ``matrix`` onto analysis vector ``l``, group-wise.

    ``matrix.shape[1]`` must be divisible by ``pair.size``; the result has
    shape (rows, cols / size) with
    ``out[i, g] = sum_t matrix[i, g*L + t] * forward[t, l]``.
    Rows are consumed in plain sequential order, which keeps the access
    pattern streaming-friendly.
    """
    a = _as_float(matrix)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D array, got shape {a.shape}")
    _check_index(pair, l)
    rows, cols = a.shape
    if cols % pair.size:
        raise DimensionMismatch(f"column count {cols} not divisible by projection size {pair.size}")
    coeff = pair.forward[:, l].astype(a.dtype, copy=False)
    return a.reshape(rows, cols // pair.size, pair.size) @ coeff


def project_cols(matrix, pair, l):
    """Project each column of ``matrix`` with synthesis row ``l``, group-wise.

    ``matrix.shape[0]`` must be divisible by ``pair.size``; the result has
    shape (rows / size, cols) with
    ``out[g, j] = sum_t inverse[l, t] * matrix[g*L + t, j]``.
    """
    b = _as_float(matrix)
    if b.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D array, got shape {b.shape}")
    _check_index(pair, l)
    rows, cols = b.shape
    if rows % pair.size:
        raise DimensionMismatch(f"row count {rows} not divisible by projection size {pair.size}")
    coeff = pair.inverse[l].astype(b.dtype, copy=False)
    return np.tensordot(coeff, b.reshape(rows // pair.size, pair.size, cols), axes=(0, 1))


def _grouped(signal, size, phase):
    """Group signal[phase:] into rows of length ``size``, zero-padding the tail."""
    s = _as_float(signal)
    if s.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D signal, got shape {s.shape}")
    if not (0 <= phase < size):
        raise IndexOutOfRange(f"phase {phase} outside [0, {size})")
    avail = s.shape[0] - phase
    if avail < size:
        raise DimensionMismatch(
            f"signal too short: {avail} samples past phase {phase}, need at least {size}")
    groups = -(-avail // size)
    seg = s[phase:]
    if groups * size != avail:
        seg = np.concatenate([seg, np.zeros(groups * size - avail, dtype=s.dtype)])
    return seg.reshape(groups, size)


def project_signal(signal, pair, l, phase=0):
    """Analysis projection of a 1-D signal with group offset ``phase``.

    ``out[i] = sum_t signal[phase + i*L + t] * forward[t, l]``; a trailing
    incomplete group is zero-padded.
    """
    _check_index(pair, l)
    g = _grouped(signal, pair.size, phase)
    return g @ pair.forward[:, l].astype(g.dtype, copy=False)


def project_signal_dual(signal, pair, l, phase=0):
    """Synthesis-side projection: uses row ``l`` of the inverse matrix.

    Identical to :func:`project_signal` for orthonormal pairs; for general
    pairs this is the projection the kernel side of a product needs so that
    full accumulation reproduces plain inner products.
    """
    _check_index(pair, l)
    g = _grouped(signal, pair.size, phase)
    return g @ pair.inverse[l].astype(g.dtype, copy=False)
