"""Demo pipelines: 2D-PCA recognition and cross-correlation matching.

Both pipelines run on either the conventional kernels or the projected ones,
selected through :class:`GemmMode` / :class:`ConvMode`. The contract that
matters downstream is the decision (matched index or entry id), not the raw
numbers: at full projections the decisions are identical by construction, and
at reduced precision the benchmarks report how often they still agree.
"""

from __future__ import annotations

import glob
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .conv import ConvVariant, conv_direct, conv_projected_blocked
from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    DomainError,
    EmptyDb,
    EmptyGallery,
    HeterogeneousDims,
    ParseError,
    ZeroEnergyEntry,
)
from .gemm import gemm_projected, project_right_operand
from .io import load_manifest, load_matrix, load_signal, read_pgm

JACOBI_TOL_FACTOR = 1e-10
JACOBI_MAX_SWEEPS = 100
DEFAULT_FEATURE_DIMS = 10


class ImageFormat(Enum):
    PGM = "pgm"
    PKM = "pkm"


def _mode_fields(pair, config):
    if (pair is None) != (config is None):
        raise DomainError("projected mode needs both a projection pair and a config")
    if pair is not None:
        config.check_pair(pair)


@dataclass(frozen=True)
class GemmMode:
    """Matrix-multiply selector: plain product, or projected at a given pair."""

    pair: object = None
    config: object = None

    def __post_init__(self):
        _mode_fields(self.pair, self.config)

    @property
    def is_projected(self):
        return self.pair is not None

    def label(self):
        if not self.is_projected:
            return "conventional"
        return f"projected-L{self.pair.size}-p{self.config.projections_used}"

    def multiply(self, a, b, right_cache=None, counter=None):
        a = np.asarray(a)
        b = np.asarray(b)
        if self.is_projected:
            return gemm_projected(a, b, self.pair, self.config,
                                  right_cache=right_cache, counter=counter)
        if a.shape[1] != b.shape[0]:
            raise DimensionMismatch(
                f"inner dimensions disagree: {a.shape} @ {b.shape}")
        if counter is not None:
            counter.add(a.shape[0] * a.shape[1] * b.shape[1])
        return a @ b

    def cache_right(self, b, counter=None):
        """Pre-project a fixed right operand; None in conventional mode."""
        if not self.is_projected:
            return None
        return project_right_operand(b, self.pair,
                                     self.config.projections_used, counter=counter)


@dataclass(frozen=True)
class ConvMode:
    """Cross-correlation selector: direct, or blocked projected convolution."""

    pair: object = None
    config: object = None

    def __post_init__(self):
        _mode_fields(self.pair, self.config)

    @property
    def is_projected(self):
        return self.pair is not None

    def label(self):
        if not self.is_projected:
            return "conventional"
        mode = self.config.sample_mode.value
        return f"projected-L{self.pair.size}-p{self.config.projections_used}-{mode}"

    def correlate(self, signal, kernel, counter=None):
        """Full linear cross-correlation of ``signal`` against ``kernel``."""
        kernel = np.asarray(kernel)
        if self.is_projected:
            # correlation == convolution with the kernel reversed
            return conv_projected_blocked(signal, kernel[::-1], self.pair,
                                          self.config, counter=counter)
        return conv_direct(signal, kernel, variant=ConvVariant.XCORR,
                           counter=counter)


def _offdiag_norm(a):
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def jacobi_eigh(matrix, tol_factor=JACOBI_TOL_FACTOR, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Returns (eigenvalues, eigenvectors) with eigenvalues descending and
    eigenvectors in the matching columns. Sweeps rotate every (p, q) pair in
    row order until the off-diagonal Frobenius norm drops below
    ``tol_factor`` times the Frobenius norm of the input.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"need a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix contains non-finite values")
    # iterate at O(1) magnitude so the norm-based convergence test neither
    # underflows (entries near 1e-300 square to zero) nor overflows
    scale = float(np.abs(a).max())
    if scale > 0.0:
        a = a / scale
    else:
        scale = 1.0
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-8 * (1.0 + _norm_f(a))):
        raise DomainError("matrix is not symmetric")
    a = (a + a.T) / 2.0
    n = a.shape[0]
    vectors = np.eye(n)
    tol = tol_factor * max(_norm_f(a), np.finfo(np.float64).tiny)
    sweeps = 0
    while _offdiag_norm(a) > tol:
        if sweeps >= max_sweeps:
            raise ConvergenceFailure(
                f"Jacobi stalled at off-diagonal norm {_offdiag_norm(a):.3e} "
                f"(tolerance {tol:.3e}) after {max_sweeps} sweeps")
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / 2.0
                denom = abs(theta) + np.hypot(theta, apq)
                t = apq / denom if theta >= 0.0 else -apq / denom
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rows = c * a[p, :] - s * a[q, :]
                a[q, :] = s * a[p, :] + c * a[q, :]
                a[p, :] = rows
                cols = c * a[:, p] - s * a[:, q]
                a[:, q] = s * a[:, p] + c * a[:, q]
                a[:, p] = cols
                vcols = c * vectors[:, p] - s * vectors[:, q]
                vectors[:, q] = s * vectors[:, p] + c * vectors[:, q]
                vectors[:, p] = vcols
        sweeps += 1
    values = np.diag(a) * scale
    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]


def _norm_f(a):
    return float(np.linalg.norm(a))


@dataclass(frozen=True)
class TrainingSet:
    """Zero-mean square images plus their subject labels."""

    images: np.ndarray        # (count, n, n)
    labels: tuple

    def __post_init__(self):
        if self.images.ndim != 3 or self.images.shape[1] != self.images.shape[2]:
            raise DimensionMismatch(
                f"expected a stack of square images, got shape {self.images.shape}")
        if len(self.labels) != self.images.shape[0]:
            raise DimensionMismatch(
                f"{self.images.shape[0]} images but {len(self.labels)} labels")

    @property
    def count(self):
        return self.images.shape[0]

    @property
    def dim(self):
        return self.images.shape[1]


@dataclass(frozen=True)
class EigenBasis:
    """Top eigenvectors (columns) of the image scatter matrix."""

    vectors: np.ndarray       # (n, dims)
    eigenvalues: np.ndarray   # descending, nonnegative

    @property
    def dims(self):
        return self.vectors.shape[1]


def pca_train(training, dims=DEFAULT_FEATURE_DIMS, mode=GemmMode(), counter=None):
    """Image-scatter eigenbasis plus per-image feature matrices.

    The scatter matrix is the sum of A @ A.T over the training images,
    accumulated through the selected multiply; features are A @ basis.
    """
    n = training.dim
    if not 1 <= dims <= n:
        raise DomainError(f"feature count must be in [1, {n}], got {dims}")
    scatter = np.zeros((n, n))
    for image in training.images:
        scatter += mode.multiply(image, image.T, counter=counter)
    scatter = (scatter + scatter.T) / 2.0
    values, vectors = jacobi_eigh(scatter)
    basis = EigenBasis(vectors=np.ascontiguousarray(vectors[:, :dims]),
                       eigenvalues=np.maximum(values[:dims], 0.0))
    cache = mode.cache_right(basis.vectors, counter=counter)
    features = np.stack([
        mode.multiply(image, basis.vectors, right_cache=cache, counter=counter)
        for image in training.images
    ])
    return basis, features


def pca_extract(image, basis, mode=GemmMode(), right_cache=None, counter=None):
    """Feature matrix of one image against a trained basis."""
    image = np.asarray(image)
    if image.ndim != 2 or image.shape[1] != basis.vectors.shape[0]:
        raise DimensionMismatch(
            f"image shape {image.shape} does not match basis rows "
            f"{basis.vectors.shape[0]}")
    return mode.multiply(image, basis.vectors, right_cache=right_cache,
                         counter=counter)


def pca_match(features, gallery):
    """Index of the gallery feature matrix nearest in Frobenius norm."""
    if len(gallery) == 0:
        raise EmptyGallery("cannot match against an empty gallery")
    features = np.asarray(features, dtype=np.float64)
    best = 0
    best_dist = np.inf
    for j, candidate in enumerate(gallery):
        candidate = np.asarray(candidate, dtype=np.float64)
        if candidate.shape != features.shape:
            raise DimensionMismatch(
                f"gallery entry {j} has shape {candidate.shape}, "
                f"query has {features.shape}")
        dist = _norm_f(features - candidate)
        if dist < best_dist:
            best = j
            best_dist = dist
    return best


def _crop_or_pad(image, n):
    rows, cols = image.shape
    out = np.zeros((n, n), dtype=np.float64)
    r0 = max((rows - n) // 2, 0)
    c0 = max((cols - n) // 2, 0)
    rt = max((n - rows) // 2, 0)
    ct = max((n - cols) // 2, 0)
    h = min(rows, n)
    w = min(cols, n)
    out[rt:rt + h, ct:ct + w] = image[r0:r0 + h, c0:c0 + w]
    return out


def ingest_images(pattern, crop=None, fmt=ImageFormat.PGM):
    """Training set from files matching a glob pattern (or an explicit list).

    Images are center-cropped or zero-padded to ``crop`` when given
    (otherwise all files must agree in size), then made zero-mean. Labels are
    the part of the file name before the first dot.
    """
    if isinstance(pattern, (str, Path)):
        paths = sorted(glob.glob(str(pattern)))
    else:
        paths = [Path(p) for p in pattern]
    if not paths:
        raise ParseError(f"no files match {pattern!r}")
    images = []
    labels = []
    for path in paths:
        path = Path(path)
        raw = read_pgm(path) if fmt is ImageFormat.PGM else load_matrix(path)
        if crop is not None:
            raw = _crop_or_pad(raw, crop)
        elif images and raw.shape != images[0].shape:
            raise HeterogeneousDims(
                f"{path}: shape {raw.shape} differs from {images[0].shape} "
                "and no crop size was given")
        images.append(raw - raw.mean())
        labels.append(path.name.split(".")[0])
    stack = np.stack(images)
    if stack.shape[1] != stack.shape[2]:
        raise HeterogeneousDims(
            f"images are {stack.shape[1]}x{stack.shape[2]}, need square "
            "(pass a crop size)")
    return TrainingSet(images=stack, labels=tuple(labels))


@dataclass(frozen=True)
class FeatureDb:
    """Reference signals to correlate queries against."""

    entries: tuple            # of (id, 1-D float array)

    def __post_init__(self):
        if not self.entries:
            raise EmptyDb("feature database has no entries")

    @classmethod
    def from_manifest(cls, path):
        rows = load_manifest(path)
        if not rows:
            raise EmptyDb(f"manifest {path} lists no entries")
        return cls(entries=tuple(
            (entry_id, load_signal(entry_path)) for entry_id, entry_path in rows))

    @classmethod
    def from_arrays(cls, pairs):
        return cls(entries=tuple(
            (str(entry_id), np.asarray(sig, dtype=np.float64))
            for entry_id, sig in pairs))


def xcorr_match(query, db, mode=ConvMode(), counter=None):
    """Best-matching database entry for a query signal.

    Each entry is scored by the peak absolute cross-correlation against the
    query, normalized by the entry's energy so a query equal to the entry
    scores 1. Returns (entry id, score); ties go to the lowest id.
    """
    query = np.asarray(query, dtype=np.float64)
    if query.ndim != 1:
        raise DimensionMismatch(f"query must be 1-D, got shape {query.shape}")
    best_id = None
    best_score = -np.inf
    for entry_id, signal in db.entries:
        signal = np.asarray(signal, dtype=np.float64)
        energy = float(np.sum(signal * signal))
        if energy == 0.0:
            warnings.warn(f"entry {entry_id!r} has zero energy, skipped",
                          ZeroEnergyEntry, stacklevel=2)
            continue
        padded = query
        if query.shape[0] < signal.shape[0]:
            padded = np.concatenate(
                [query, np.zeros(signal.shape[0] - query.shape[0])])
        corr = mode.correlate(padded, signal, counter=counter)
        score = float(np.max(np.abs(corr))) / energy
        if score > best_score or (score == best_score and
                                  best_id is not None and entry_id < best_id):
            best_id = entry_id
            best_score = score
    if best_id is None:
        raise EmptyDb("every database entry was skipped as zero-energy")
    return best_id, best_score
