"""Streaming k-means, the batch oracle, seeding, and assignment."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mstok.clustering import (
    Codebook,
    FitConfig,
    StreamingKMeans,
    assign,
    batch_kmeans,
    batch_stream,
    init_reservoir_size,
    kmeanspp_init,
    streaming_fit,
)
from mstok.errors import InsufficientDataError, ParameterError, ShapeError


def brute_force_assign(centroids, points):
    labels = []
    dists = []
    for p in points:
        best, best_d = 0, None
        for j, c in enumerate(centroids):
            d = float(((np.asarray(p) - np.asarray(c)) ** 2).sum())
            if best_d is None or d < best_d:
                best, best_d = j, d
        labels.append(best)
        dists.append(best_d)
    return np.asarray(labels), float(sum(dists))


# ---------------------------------------------------------------------------
# assign


def test_assign_exact_match_distance_zero():
    centroids = np.arange(30.0).reshape(10, 3)
    labels, inertia = assign(centroids, centroids[[7]])
    assert labels.tolist() == [7]
    assert inertia == 0.0


def test_assign_tie_breaks_low_index():
    centroids = np.array([[0.0], [2.0], [0.0], [2.0]])
    labels, _ = assign(centroids, np.array([[1.0]]))  # equidistant to all
    assert labels.tolist() == [0]
    labels, _ = assign(np.array([[5.0], [1.0], [3.0]]), np.array([[2.0]]))
    assert labels.tolist() == [1]


def test_assign_matches_brute_force():
    rng = np.random.default_rng(1)
    points = rng.normal(size=(100, 6))
    centroids = rng.normal(size=(10, 6))
    labels, inertia = assign(centroids, points)
    ref_labels, ref_inertia = brute_force_assign(centroids, points)
    np.testing.assert_array_equal(labels, ref_labels)
    assert inertia == pytest.approx(ref_inertia, rel=1e-12)


def test_assign_width_mismatch():
    with pytest.raises(ShapeError):
        assign(np.zeros((2, 3)), np.zeros((5, 4)))


def test_assign_empty_points():
    labels, inertia = assign(np.zeros((2, 3)), np.zeros((0, 3)))
    assert labels.size == 0
    assert inertia == 0.0


def test_assign_translation_equivariance():
    rng = np.random.default_rng(2)
    points = rng.normal(size=(50, 4))
    centroids = rng.normal(size=(6, 4))
    shift = rng.normal(size=4)
    base, _ = assign(centroids, points)
    moved, _ = assign(centroids + shift, points + shift)
    np.testing.assert_array_equal(base, moved)


# ---------------------------------------------------------------------------
# k-means++ seeding


def test_kmeanspp_m_equals_k_is_permutation():
    rng = np.random.default_rng(5)
    points = rng.normal(size=(7, 3))
    centers = kmeanspp_init(points, 7, seed=123)
    # every point appears exactly once
    matched = set()
    for c in centers:
        hits = np.where((points == c).all(axis=1))[0]
        assert hits.size == 1
        matched.add(int(hits[0]))
    assert matched == set(range(7))


def test_kmeanspp_deterministic():
    rng = np.random.default_rng(6)
    points = rng.normal(size=(40, 5))
    a = kmeanspp_init(points, 8, seed=9)
    b = kmeanspp_init(points, 8, seed=9)
    np.testing.assert_array_equal(a, b)


def test_kmeanspp_insufficient_points():
    with pytest.raises(InsufficientDataError):
        kmeanspp_init(np.zeros((3, 2)), 4, seed=0)


def test_kmeanspp_duplicate_points_cannot_seed():
    points = np.zeros((10, 2))  # a single distinct location
    with pytest.raises(InsufficientDataError):
        kmeanspp_init(points, 2, seed=0)


def test_kmeanspp_separated_blobs_get_one_center_each():
    # 4 points: two tight pairs 100 apart.  Exhaustive probability that the
    # second draw lands in the other blob:
    #   first pick uniform; D^2 weights then put ~(2*100^2)/(2*100^2+eps^2)
    #   mass on the far pair.  With eps=0.1 the cross-blob probability
    #   exceeds 1 - 1e-6, so every seed below must split the blobs.
    eps = 0.1
    points = np.array([[0.0], [eps], [100.0], [100.0 + eps]])
    # exact probability of a same-blob second pick, enumerated over the
    # uniform first choice (blobs are symmetric; condition on point 0):
    d2 = np.array([0.0, eps**2, 100.0**2, (100.0 + eps) ** 2])
    p_same = d2[1] / d2.sum()
    assert p_same < 1e-5
    for seed in range(200):
        centers = kmeanspp_init(points, 2, seed=seed)
        sides = sorted(int(c[0] > 50.0) for c in centers)
        assert sides == [0, 1], f"seed {seed} picked both centers in one blob"


# ---------------------------------------------------------------------------
# batch k-means (the oracle itself still has pinned examples)


def test_batch_kmeans_already_converged():
    centers = np.array([[0.0, 0.0], [10.0, 10.0]])
    points = np.vstack([centers, centers])
    result = batch_kmeans(points, init_centers=centers)
    assert result.inertia == 0.0
    assert result.converged
    assert result.n_iter == 1
    np.testing.assert_array_equal(result.centers, centers)


def test_batch_kmeans_rectangle():
    # corners of a 2 x 10 rectangle; the two stable partitions split either
    # the long or the short sides.  Splitting the long sides leaves centers
    # at the midpoints of the short sides with inertia 4 * 1^2 = 4; the other
    # partition costs 4 * 5^2 = 100, so the lower-inertia solution is the
    # short-side midpoints.
    pts = np.array([[0.0, 0.0], [0.0, 2.0], [10.0, 0.0], [10.0, 2.0]])
    best = None
    for init in ([[0.0, 0.0], [10.0, 2.0]], [[0.0, 2.0], [10.0, 0.0]],
                 [[0.0, 1.0], [10.0, 1.0]]):
        result = batch_kmeans(pts, init_centers=np.asarray(init))
        if best is None or result.inertia < best.inertia:
            best = result
    np.testing.assert_allclose(
        best.centers[np.argsort(best.centers[:, 0])],
        [[0.0, 1.0], [10.0, 1.0]],
    )
    assert best.inertia == pytest.approx(4.0)


def test_batch_kmeans_inertia_non_increasing():
    rng = np.random.default_rng(8)
    points = rng.normal(size=(200, 4))
    result = batch_kmeans(points, k=6, max_iter=50, seed=2)
    trace = np.asarray(result.inertia_trace)
    assert (np.diff(trace) <= 1e-9).all()


# ---------------------------------------------------------------------------
# streaming fit


def test_streaming_single_batch_each_cluster_one_point():
    points = np.array([[0.0], [10.0]])
    init = np.array([[1.0], [9.0]])
    config = FitConfig(k=2, batch_size=2, max_iter=1, mode="literal")
    codebook = streaming_fit(iter([points]), config, init_centers=init)
    np.testing.assert_array_equal(np.sort(codebook.centroids[:, 0]), [0.0, 10.0])


def test_streaming_full_coverage_batch_equals_lloyd():
    rng = np.random.default_rng(10)
    points = rng.normal(scale=5.0, size=(60, 3))
    init = kmeanspp_init(points, 4, seed=1)
    iterations = 7
    config = FitConfig(k=4, batch_size=60, max_iter=iterations, tol=1e-12)
    stream = iter([points.copy() for _ in range(iterations)])
    streamed = streaming_fit(stream, config, init_centers=init)
    reference = batch_kmeans(points, init_centers=init, max_iter=iterations, tol=1e-12)
    np.testing.assert_array_equal(
        streamed.centroids, reference.centers.astype(np.float32)
    )
    assert streamed.meta["iterations"] == reference.n_iter


def test_streaming_alternating_singletons_hand_iterated():
    """Six steps of the two update rules on batches {0}, {10}, {0}, ...

    With centers starting far away at {100, 200} every batch lands on the
    first center.  The literal rule snaps it to the batch point each step,
    oscillating 0, 10, 0, 10, 0, 10; the weighted rule keeps a count and
    produces running means 0, 5, 10/3, 5, 4, 5 with displacement ~ 1/count.
    """
    batches = [np.array([[float(v)]]) for v in (0, 10, 0, 10, 0, 10)]
    init = np.array([[100.0], [200.0]])

    config = FitConfig(k=2, batch_size=1, max_iter=6, tol=1e-12, mode="literal")
    literal = streaming_fit(iter(batches), config, init_centers=init)
    assert literal.centroids[0, 0] == 10.0  # last batch point
    assert literal.centroids[1, 0] == 200.0  # never assigned

    expected_path = [0.0, 5.0, 10.0 / 3.0, 5.0, 4.0, 5.0]
    config = FitConfig(k=2, batch_size=1, max_iter=6, tol=1e-12, mode="weighted")
    for steps in range(1, 7):
        partial = streaming_fit(
            iter(batches[:steps]), config, init_centers=init
        )
        assert partial.centroids[0, 0] == pytest.approx(
            expected_path[steps - 1], rel=1e-6
        )
    # displacement shrinks like 1/count: steps 4->5->6 move by 1, then 1
    shifts = [abs(expected_path[i + 1] - expected_path[i]) for i in range(5)]
    assert shifts[4] < shifts[2] < shifts[0] + 10.0


def test_streaming_reservoir_and_replay_no_data_lost():
    # 3 batches of 4 rows, k=2: the reservoir swallows everything (target is
    # 10*ceil(2/4)*4 = 40 > 12), then replays, so iterations == 3.
    rng = np.random.default_rng(3)
    batches = [rng.normal(size=(4, 2)) for _ in range(3)]
    config = FitConfig(k=2, batch_size=4, max_iter=100, tol=1e-15)
    codebook = streaming_fit(iter(batches), config)
    assert codebook.meta["iterations"] == 3
    assert len(codebook.meta["inertia_trace"]) == 3


def test_streaming_empty_stream():
    with pytest.raises(InsufficientDataError):
        streaming_fit(iter([]), FitConfig(k=2, batch_size=5))


def test_streaming_width_mismatch():
    config = FitConfig(k=2, batch_size=2)
    # the first batch moves the centers (no early convergence), the second
    # arrives with the wrong width
    batches = [np.ones((2, 3)), np.zeros((2, 4))]
    with pytest.raises(ShapeError):
        streaming_fit(iter(batches), config, init_centers=np.zeros((2, 3)))


def test_streaming_determinism_bit_identical():
    rng = np.random.default_rng(123)
    data = [rng.normal(size=(50, 6)) for _ in range(30)]
    config = FitConfig(k=8, batch_size=50, seed=77, mode="weighted")
    a = streaming_fit(iter([d.copy() for d in data]), config)
    b = streaming_fit(iter([d.copy() for d in data]), config)
    assert np.array_equal(a.centroids.view(np.uint32), b.centroids.view(np.uint32))
    assert a.meta == b.meta


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_literal_update_batch_permutation_invariant(seed):
    # integer-valued points make the centroid sums exact, so a permuted
    # batch must give bit-identical centers
    rng = np.random.default_rng(seed)
    batch = rng.integers(-8, 8, size=(20, 3)).astype(np.float64)
    init = rng.integers(-8, 8, size=(4, 3)).astype(np.float64)
    perm = rng.permutation(20)
    config = FitConfig(k=4, batch_size=20, max_iter=1)
    a = streaming_fit(iter([batch]), config, init_centers=init)
    b = streaming_fit(iter([batch[perm]]), config, init_centers=init)
    np.testing.assert_array_equal(a.centroids, b.centroids)


def test_batch_stream_rechunks_across_sources():
    sources = [np.arange(6.0).reshape(3, 2), np.arange(10.0, 18.0).reshape(4, 2)]
    batches = list(batch_stream(iter(sources), 2))
    assert [b.shape[0] for b in batches] == [2, 2, 2, 1]
    np.testing.assert_array_equal(
        np.concatenate(batches), np.concatenate(sources)
    )


def test_init_reservoir_size():
    assert init_reservoir_size(1000, 50) == 10_000
    assert init_reservoir_size(2, 50) == 500
    assert init_reservoir_size(7, 3) == 90


# ---------------------------------------------------------------------------
# Codebook type and estimator facade


def test_codebook_invariants():
    with pytest.raises(ParameterError):
        Codebook(centroids=np.zeros((1, 4)))  # k < 2
    with pytest.raises(ParameterError):
        Codebook(centroids=np.array([[np.nan, 0.0], [1.0, 2.0]]))
    cb = Codebook(centroids=np.array([[0.0, 1.0], [2.0, 3.0]]))
    assert cb.pad_id == cb.k == 2


def test_estimator_fit_predict_roundtrip():
    rng = np.random.default_rng(0)
    blob_a = rng.normal(loc=0.0, size=(60, 2))
    blob_b = rng.normal(loc=20.0, size=(60, 2))
    X = np.vstack([blob_a, blob_b])
    est = StreamingKMeans(n_clusters=2, batch_size=40, mode="weighted", random_state=1)
    est.fit(X)
    labels = est.predict(X)
    assert set(labels.tolist()) == {0, 1}
    # the two blobs end up in different clusters
    assert len(set(labels[:60].tolist())) == 1
    assert len(set(labels[60:].tolist())) == 1
    assert labels[0] != labels[60]
    assert est.get_params()["n_clusters"] == 2


def test_estimator_partial_fit_matches_streaming():
    rng = np.random.default_rng(4)
    batches = [rng.normal(size=(30, 3)) for _ in range(4)]
    est = StreamingKMeans(n_clusters=3, batch_size=30, mode="weighted", random_state=5)
    for b in batches:
        est.partial_fit(b)
    assert est.n_iter_ == 4
    assert est.codebook_.k == 3


def test_estimator_sklearn_clone_compatible():
    from sklearn.base import clone

    est = StreamingKMeans(n_clusters=4, mode="weighted")
    cloned = clone(est)
    assert cloned.get_params() == est.get_params()
