"""Streaming k-means over topography vectors.

The streaming fit consumes small batches so a night-scale corpus never has to
sit in memory.  Two update rules are provided:

``literal``
    Each step replaces every center that received points with the centroid of
    the *current batch's* points assigned to it; centers with no points keep
    their previous position.  This rule has no memory of earlier batches, so
    on heterogeneous streams the centers track the most recent batch rather
    than the stream average.  It is the default.

``weighted``
    Keeps a persistent per-center assignment count and moves each center by
    ``sum(x - c) / count``, i.e. every center is the running mean of all
    points ever assigned to it.  Displacements shrink like ``1/count``, so
    this variant converges on stationary streams.

Neither variant is asserted to be "the right one"; they bracket the two
defensible readings of batchwise center replacement.  ``batch_kmeans`` is a
deliberately independent Lloyd's implementation kept as a test oracle: with a
single batch that covers the whole dataset, the literal rule degenerates to
Lloyd's algorithm exactly.

Distances are squared Euclidean throughout; topographies are not normalized
and polarity is respected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .errors import InsufficientDataError, ParameterError, ShapeError
from .validation import as_float_matrix, check_finite

_CHUNK = 1024  # points per distance block; bounds transient memory at k=1000


@dataclass
class Codebook:
    """A fitted set of centroid topographies.

    ``centroids`` is (k, n_channels) float32 in microvolts; the reserved
    padding token id equals ``k`` so real states occupy 0..k-1.  ``meta``
    records fit provenance (seed, mode, iterations, final shift, sampling
    rate, filter band) and travels with the on-disk representation.
    """

    centroids: np.ndarray
    channel_names: list[str] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.centroids = np.asarray(self.centroids, dtype=np.float32)
        if self.centroids.ndim != 2:
            raise ShapeError("centroids must be 2-D")
        if self.k < 2:
            raise ParameterError(f"a codebook needs k >= 2, got {self.k}")
        if not np.all(np.isfinite(self.centroids)):
            raise ParameterError("centroids contain non-finite values")
        if self.channel_names is not None and len(self.channel_names) != self.n_channels:
            raise ShapeError(
                f"{len(self.channel_names)} channel names for "
                f"{self.n_channels} centroid columns"
            )

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def n_channels(self) -> int:
        return self.centroids.shape[1]

    @property
    def pad_id(self) -> int:
        return self.k


@dataclass
class FitConfig:
    """Knobs for the streaming fit."""

    k: int = 1000
    batch_size: int = 50
    max_iter: int = 300
    tol: float = 1e-4
    mode: str = "literal"
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise ParameterError(f"k must be >= 2, got {self.k}")
        if self.batch_size < 1:
            raise ParameterError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_iter < 1:
            raise ParameterError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.tol > 0:
            raise ParameterError(f"tol must be > 0, got {self.tol}")
        if self.mode not in ("literal", "weighted"):
            raise ParameterError(f"mode must be 'literal' or 'weighted', got {self.mode!r}")


def _sq_dists(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, (m, k), via explicit differences.

    The expanded ||x||^2 - 2x.c + ||c||^2 form is faster but rounds
    differently; explicit differences keep assignments bit-for-bit
    reproducible against a brute-force check.
    """
    diff = points[:, None, :] - centers[None, :, :]
    return (diff**2).sum(axis=-1)


def assign(centroids, points) -> tuple[np.ndarray, float]:
    """Label each point with its nearest centroid.

    Returns ``(labels, inertia)`` where inertia is the summed squared
    distance to the winning centroids.  Ties go to the lowest index.
    """
    centroids = as_float_matrix(centroids, "centroids")
    points = as_float_matrix(points, "points")
    if centroids.shape[1] != points.shape[1]:
        raise ShapeError(
            f"points have width {points.shape[1]} but centroids have "
            f"width {centroids.shape[1]}"
        )
    m = points.shape[0]
    labels = np.empty(m, dtype=np.int64)
    inertia = 0.0
    for start in range(0, m, _CHUNK):
        block = points[start : start + _CHUNK]
        d2 = _sq_dists(block, centroids)
        idx = np.argmin(d2, axis=1)
        labels[start : start + _CHUNK] = idx
        inertia += float(d2[np.arange(len(block)), idx].sum())
    return labels, inertia


def kmeanspp_init(points, k: int, seed: int) -> np.ndarray:
    """Choose k starting centers by distance-squared weighted sampling.

    The first center is drawn uniformly; each subsequent center is drawn with
    probability proportional to the squared distance to the nearest center
    already chosen, which makes duplicates of chosen rows impossible.
    Deterministic for a given seed.
    """
    points = as_float_matrix(points, "points", allow_empty=False)
    check_finite("points", points)
    m = points.shape[0]
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if m < k:
        raise InsufficientDataError(f"need at least k={k} points, got {m}")

    rng = np.random.default_rng(seed)
    centers = np.empty((k, points.shape[1]))
    first = int(rng.integers(m))
    centers[0] = points[first]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            raise InsufficientDataError(
                f"only {j} distinct points available for k={k} centers"
            )
        idx = int(rng.choice(m, p=d2 / total))
        centers[j] = points[idx]
        d2 = np.minimum(d2, ((points - centers[j]) ** 2).sum(axis=1))
    return centers


def _update_centers(points, labels, old_centers) -> tuple[np.ndarray, np.ndarray]:
    """Per-cluster means of the assigned points; empty clusters keep ``old``."""
    k = old_centers.shape[0]
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    sums = np.empty_like(old_centers)
    for col in range(points.shape[1]):
        sums[:, col] = np.bincount(labels, weights=points[:, col], minlength=k)
    new = old_centers.copy()
    occupied = counts > 0
    new[occupied] = sums[occupied] / counts[occupied, None]
    return new, counts


@dataclass
class KMeansResult:
    centers: np.ndarray
    labels: np.ndarray
    inertia: float
    n_iter: int
    converged: bool
    inertia_trace: list[float]


def batch_kmeans(points, k=None, init_centers=None, max_iter=300, tol=1e-4, seed=0):
    """Plain Lloyd's algorithm, written independently of the streaming path.

    Kept as the reference the streaming fit is checked against, so it shares
    no kernels with it: distances and center updates are recomputed here from
    first principles.  The inertia recorded at each assignment step is
    non-increasing.
    """
    points = as_float_matrix(points, "points", allow_empty=False)
    check_finite("points", points)
    if init_centers is None:
        if k is None:
            raise ParameterError("either k or init_centers is required")
        init_centers = kmeanspp_init(points, k, seed)
    centers = np.array(init_centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[1] != points.shape[1]:
        raise ShapeError("init_centers must be (k, n_channels)")
    k = centers.shape[0]
    if points.shape[0] < k:
        raise InsufficientDataError(
            f"need at least k={k} points, got {points.shape[0]}"
        )
    if max_iter < 1:
        raise ParameterError(f"max_iter must be >= 1, got {max_iter}")

    trace: list[float] = []
    labels = np.zeros(points.shape[0], dtype=np.int64)
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        trace.append(float(d2[np.arange(len(labels)), labels].sum()))
        new = centers.copy()
        counts = np.zeros(k)
        np.add.at(counts, labels, 1.0)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, points)
        occupied = counts > 0
        new[occupied] = sums[occupied] / counts[occupied, None]
        shift = float(np.sqrt(((new - centers) ** 2).sum(axis=1)).max())
        centers = new
        if shift < tol:
            converged = True
            break

    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(len(labels)), labels].sum())
    return KMeansResult(centers, labels, inertia, n_iter, converged, trace)


def batch_stream(sources: Iterable[np.ndarray], batch_size: int) -> Iterator[np.ndarray]:
    """Re-chunk row matrices into consecutive batches of ``batch_size`` rows.

    Batches may span source boundaries; a final partial batch is yielded.
    """
    if batch_size < 1:
        raise ParameterError(f"batch_size must be >= 1, got {batch_size}")
    pending: list[np.ndarray] = []
    have = 0
    for block in sources:
        block = as_float_matrix(block, "stream block")
        if block.shape[0] == 0:
            continue
        pending.append(block)
        have += block.shape[0]
        while have >= batch_size:
            rows = np.concatenate(pending, axis=0) if len(pending) > 1 else pending[0]
            yield rows[:batch_size]
            rest = rows[batch_size:]
            pending = [rest] if rest.shape[0] else []
            have = rest.shape[0]
    if have:
        yield np.concatenate(pending, axis=0) if len(pending) > 1 else pending[0]


def init_reservoir_size(k: int, batch_size: int) -> int:
    """Rows buffered before k-means++ seeding: ten batch-aligned multiples of k."""
    per = -(-k // batch_size) * batch_size  # k rounded up to a batch multiple
    return max(k, 10 * per)


def streaming_fit(
    stream: Iterable[np.ndarray],
    config: FitConfig,
    init_centers=None,
    channel_names: list[str] | None = None,
) -> Codebook:
    """Fit a codebook from an iterator of (n, width) point batches.

    When ``init_centers`` is not supplied, the leading batches are buffered
    into a reservoir of :func:`init_reservoir_size` rows (or everything, if
    the stream is shorter) and seeded with k-means++; the buffered batches
    are then replayed through the update loop so no data is discarded.  One
    iteration consumes one batch; the loop stops at ``max_iter`` batches,
    when the largest center displacement falls below ``tol``, or when the
    stream ends.

    Returns a :class:`Codebook` whose ``meta`` records the seed, mode,
    iterations run, final shift, convergence flag, and per-batch inertia
    trace.  Identical seed and stream order give a bit-identical codebook.
    """
    it = iter(stream)
    buffered: list[np.ndarray] = []

    if init_centers is None:
        target = init_reservoir_size(config.k, config.batch_size)
        have = 0
        for batch in it:
            batch = as_float_matrix(batch, "batch")
            if batch.shape[0] == 0:
                continue
            buffered.append(batch)
            have += batch.shape[0]
            if have >= target:
                break
        if have < config.k:
            raise InsufficientDataError(
                f"stream yielded {have} rows; need at least k={config.k} "
                "to seed the centers"
            )
        reservoir = np.concatenate(buffered, axis=0)
        centers = kmeanspp_init(reservoir, config.k, config.seed)
    else:
        centers = np.array(init_centers, dtype=np.float64)
        if centers.ndim != 2:
            raise ShapeError("init_centers must be 2-D")
        if centers.shape[0] != config.k:
            raise ShapeError(
                f"init_centers has {centers.shape[0]} rows but config.k={config.k}"
            )

    width = centers.shape[1]
    counts = np.zeros(config.k)
    trace: list[float] = []
    iterations = 0
    shift = float("inf")
    converged = False

    def batches():
        yield from buffered
        yield from it

    for batch in batches():
        if iterations >= config.max_iter:
            break
        batch = as_float_matrix(batch, "batch")
        if batch.shape[0] == 0:
            continue
        if batch.shape[1] != width:
            raise ShapeError(
                f"batch width {batch.shape[1]} does not match centers "
                f"width {width}"
            )
        labels, inertia = assign(centers, batch)
        trace.append(inertia)
        if config.mode == "literal":
            new, _ = _update_centers(batch, labels, centers)
        else:
            new, batch_counts = _update_centers(batch, labels, centers)
            counts += batch_counts
            moved = batch_counts > 0
            step = np.zeros_like(centers)
            step[moved] = (
                batch_counts[moved, None]
                * (new[moved] - centers[moved])
                / counts[moved, None]
            )
            new = centers + step
        shift = float(np.sqrt(((new - centers) ** 2).sum(axis=1)).max())
        centers = new
        iterations += 1
        if shift < config.tol:
            converged = True
            break

    if iterations == 0:
        raise InsufficientDataError("stream yielded no batches to fit on")

    meta = {
        "k": config.k,
        "batch_size": config.batch_size,
        "mode": config.mode,
        "seed": config.seed,
        "tol": config.tol,
        "max_iter": config.max_iter,
        "iterations": iterations,
        "final_shift": shift,
        "converged": converged,
        "inertia_trace": trace,
    }
    return Codebook(
        centroids=centers.astype(np.float32),
        channel_names=list(channel_names) if channel_names else None,
        meta=meta,
    )


class StreamingKMeans(BaseEstimator):
    """Estimator facade over :func:`streaming_fit`.

    ``fit`` consumes a (m, n_features) matrix, re-chunks the rows in order
    into ``batch_size`` batches and runs the streaming update.  ``partial_fit``
    applies one update step per call; the first call must carry at least
    ``n_clusters`` rows to seed the centers.

    Attributes after fitting: ``cluster_centers_`` (float64 working copy),
    ``codebook_`` (the float32 artifact), ``n_iter_``, ``inertia_trace_``.
    """

    def __init__(
        self,
        n_clusters: int = 1000,
        batch_size: int = 50,
        max_iter: int = 300,
        tol: float = 1e-4,
        mode: str = "literal",
        random_state: int = 0,
    ):
        self.n_clusters = n_clusters
        self.batch_size = batch_size
        self.max_iter = max_iter
        self.tol = tol
        self.mode = mode
        self.random_state = random_state

    def _config(self) -> FitConfig:
        return FitConfig(
            k=self.n_clusters,
            batch_size=self.batch_size,
            max_iter=self.max_iter,
            tol=self.tol,
            mode=self.mode,
            seed=self.random_state,
        )

    def fit(self, X, y=None):
        X = as_float_matrix(X, "X", allow_empty=False)
        codebook = streaming_fit(batch_stream([X], self.batch_size), self._config())
        self._install(codebook)
        return self

    def partial_fit(self, X, y=None):
        X = as_float_matrix(X, "X", allow_empty=False)
        if not hasattr(self, "_centers"):
            config = self._config()
            if X.shape[0] < self.n_clusters:
                raise InsufficientDataError(
                    f"first partial_fit needs >= n_clusters={self.n_clusters} "
                    f"rows, got {X.shape[0]}"
                )
            self._centers = kmeanspp_init(X, self.n_clusters, self.random_state)
            self._counts = np.zeros(self.n_clusters)
            self.n_iter_ = 0
            self.inertia_trace_ = []
        labels, inertia = assign(self._centers, X)
        new, batch_counts = _update_centers(X, labels, self._centers)
        if self.mode == "weighted":
            self._counts += batch_counts
            moved = batch_counts > 0
            step = np.zeros_like(self._centers)
            step[moved] = (
                batch_counts[moved, None]
                * (new[moved] - self._centers[moved])
                / self._counts[moved, None]
            )
            new = self._centers + step
        self._centers = new
        self.n_iter_ += 1
        self.inertia_trace_.append(inertia)
        self.cluster_centers_ = self._centers
        self.codebook_ = Codebook(
            centroids=self._centers.astype(np.float32),
            meta={"mode": self.mode, "seed": self.random_state,
                  "iterations": self.n_iter_},
        )
        return self

    def _install(self, codebook: Codebook):
        self.codebook_ = codebook
        self._centers = codebook.centroids.astype(np.float64)
        self.cluster_centers_ = self._centers
        self.n_iter_ = codebook.meta.get("iterations", 0)
        self.inertia_trace_ = list(codebook.meta.get("inertia_trace", []))

    def predict(self, X):
        if not hasattr(self, "_centers"):
            raise NotFittedError("StreamingKMeans is not fitted yet")
        labels, _ = assign(self._centers, X)
        return labels

    def fit_predict(self, X, y=None):
        return self.fit(X).predict(X)

    def score(self, X, y=None):
        """Negative inertia, matching the scikit-learn k-means convention."""
        _, inertia = assign(self._centers, X)
        return -inertia
