"""LBG codebook training and nearest-centroid quantization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyData, TooManyCentroids


@dataclass(frozen=True)
class VQConfig:
    size: int = 64
    max_iters: int = 50
    tol: float = 1e-4
    split_eps: float = 1e-3


@dataclass(frozen=True, eq=False)
class Codebook:
    centroids: np.ndarray  # (M, Q)

    def __post_init__(self):
        c = np.array(self.centroids, dtype=float)
        if c.ndim != 2 or c.shape[0] < 1:
            raise ValueError("codebook needs at least one centroid")
        if not np.all(np.isfinite(c)):
            raise ValueError("codebook centroids must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "centroids", c)

    @property
    def size(self):
        return self.centroids.shape[0]

    @property
    def dim(self):
        return self.centroids.shape[1]


def _sq_dists(data, centroids):
    # exact differences rather than the |x|^2 - 2xc + |c|^2 expansion, so that
    # a point equal to a centroid gets distance exactly 0
    diff = data[:, None, :] - centroids[None, :, :]
    return np.einsum("tmq,tmq->tm", diff, diff)


def _assign(data, centroids, chunk=2048):
    idx = np.empty(len(data), dtype=np.int64)
    best = np.empty(len(data))
    for lo in range(0, len(data), chunk):
        d = _sq_dists(data[lo:lo + chunk], centroids)
        i = np.argmin(d, axis=1)  # first minimum = lowest index on ties
        idx[lo:lo + chunk] = i
        best[lo:lo + chunk] = d[np.arange(len(i)), i]
    return idx, best


def lloyd(data, centroids, max_iters, tol, history=None):
    """Lloyd iterations from the given centroids.

    Empty cells are re-seeded with the training point farthest from its
    centroid. The average distortion of every iteration is appended to
    ``history`` when given.
    """
    centroids = centroids.copy()
    prev = None
    for _ in range(max_iters):
        idx, dist = _assign(data, centroids)
        distortion = float(dist.mean())
        if history is not None:
            history.append(distortion)
        if prev is not None and prev - distortion <= tol * max(prev, 1e-300):
            break
        prev = distortion
        counts = np.bincount(idx, minlength=len(centroids))
        sums = np.zeros_like(centroids)
        np.add.at(sums, idx, data)
        filled = counts > 0
        centroids[filled] = sums[filled] / counts[filled, None]
        for j in np.flatnonzero(~filled):
            # farthest point from its current centroid takes over the empty cell
            idx, dist = _assign(data, centroids)
            far = int(np.argmax(dist))
            centroids[j] = data[far]
    return centroids


def train_codebook(data, M: int = 64, seed: int = 0, max_iters: int = 50,
                   tol: float = 1e-4, split_eps: float = 1e-3, history=None) -> Codebook:
    """Binary-splitting LBG: start at the global mean, split, refine, repeat.

    ``history``, if given, receives one list of per-iteration distortions
    for each splitting level.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None] if data.size else data.reshape(0, 1)
    if data.shape[0] == 0:
        raise EmptyData("cannot train a codebook on no data")
    if M < 1 or M & (M - 1):
        raise ValueError("codebook size must be a power of two")
    if M > data.shape[0]:
        raise TooManyCentroids(f"{M} centroids requested for {data.shape[0]} vectors")

    rng = np.random.default_rng(seed)
    scale = split_eps * data.std(axis=0)
    scale[scale == 0] = split_eps
    centroids = data.mean(axis=0, keepdims=True)
    while centroids.shape[0] < M:
        signs = rng.choice([-1.0, 1.0], size=centroids.shape)
        delta = signs * scale
        centroids = np.concatenate([centroids + delta, centroids - delta])
        level = []
        centroids = lloyd(data, centroids, max_iters, tol, level)
        if history is not None:
            history.append(level)
    return Codebook(centroids)


def quantize(cb: Codebook, v) -> int:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != cb.dim:
        raise DimensionMismatch(f"vector of dimension {v.size}, codebook dimension {cb.dim}")
    return int(_assign(v[None, :], cb.centroids)[0][0])


def quantize_sequence(cb: Codebook, fs) -> np.ndarray:
    vectors = getattr(fs, "vectors", fs)
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim != 2 or vectors.shape[1] != cb.dim:
        raise DimensionMismatch(f"feature vectors of shape {vectors.shape}, codebook dimension {cb.dim}")
    return _assign(vectors, cb.centroids)[0]
