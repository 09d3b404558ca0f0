import os

import numpy as np
import pytest

from basin_atlas.dynamics import UNRESOLVED, AttractorClassifier, ModelParams
from basin_atlas.errors import BisectionError, EmptyCloudError, SamplingError
from basin_atlas.separatrix import (GridSpec, bisect, boundary_name, face_grid,
                                    pair_opposite_faces, sample_separatrices, straddles,
                                    thread_count)


@pytest.fixture(scope="module")
def default_cloud():
    return sample_separatrices(ModelParams.default(), GridSpec(15, 6.0), 1e-4, threads=1)


def step_classifier(x0=0.37):
    def classify(x):
        return "E1" if x[0] < x0 else "E2"
    return classify


@pytest.mark.parametrize("n, unique", [(2, 8), (3, 26), (15, 1178)])
def test_face_grid_counts(n, unique):
    g = face_grid(GridSpec(n, 6.0))
    assert g.shape == (6, n, n, 3)
    assert g.reshape(-1, 3).shape[0] == 6 * n * n
    # 6n^2 - 12n + 8 distinct points on the cube surface
    assert len(np.unique(g.reshape(-1, 3), axis=0)) == unique == 6 * n * n - 12 * n + 8


def test_face_grid_layout():
    g = face_grid(GridSpec(3, 2.0))
    assert np.all(g[0, ..., 2] == 0) and np.all(g[1, ..., 2] == 2)
    assert np.all(g[2, ..., 1] == 0) and np.all(g[3, ..., 1] == 2)
    assert np.all(g[4, ..., 0] == 0) and np.all(g[5, ..., 0] == 2)
    np.testing.assert_array_equal(g[0, :, 0, 0], [0, 1, 2])
    assert len(face_grid(GridSpec(15, 6.0)).reshape(-1, 3)) == 1350


@pytest.mark.parametrize("n, gamma", [(1, 6.0), (0, 6.0), (2.5, 6.0), (4, 0.0), (4, -1.0)])
def test_grid_spec_rejects_bad_values(n, gamma):
    with pytest.raises(SamplingError):
        GridSpec(n, gamma)


@pytest.mark.parametrize("n, count", [(2, 12), (15, 675)])
def test_opposite_face_segments(n, count):
    segs = pair_opposite_faces(face_grid(GridSpec(n, 6.0)))
    assert segs.shape == (count, 2, 3)
    d = segs[:, 1] - segs[:, 0]
    # each segment is parallel to one axis and spans the cube
    assert np.all(np.sort(np.abs(d), axis=1)[:, :2] == 0)
    np.testing.assert_array_equal(np.abs(d).max(axis=1), 6.0)


def test_bisect_step_function():
    p = bisect(step_classifier(0.37), (0, 0, 0), (1, 0, 0), tol=1e-6)
    assert abs(p.position[0] - 0.37) <= 1e-6
    assert p.width <= 1e-6
    assert p.boundary == ("E1", "E2")
    np.testing.assert_array_equal(p.direction, [1, 0, 0])


def test_bisect_reversed_segment_keeps_direction_convention():
    p = bisect(step_classifier(0.37), (1, 0, 0), (0, 0, 0), tol=1e-6)
    assert p.boundary == ("E1", "E2")
    # points into the basin of the second label of the pair
    np.testing.assert_array_equal(p.direction, [1, 0, 0])


def test_bisect_uses_given_labels_without_reclassifying_ends():
    calls = []

    def classify(x):
        calls.append(np.array(x))
        return "E1" if x[0] < 0.5 else "E3"

    bisect(classify, (0, 0, 0), (1, 0, 0), tol=0.1, la="E1", lb="E3")
    assert not any(np.array_equal(c, [0, 0, 0]) or np.array_equal(c, [1, 0, 0]) for c in calls)


def test_bisect_third_attractor_follows_first_crossing():
    def classify(x):
        return "E1" if x[0] < 0.3 else ("E2" if x[0] < 0.6 else "E3")

    p = bisect(classify, (0, 0, 0), (1, 0, 0), tol=1e-6)
    assert p.boundary == ("E1", "E2")
    assert abs(p.position[0] - 0.3) <= 1e-6


def test_bisect_same_attractor_is_error():
    with pytest.raises(BisectionError):
        bisect(lambda x: "E1", (0, 0, 0), (1, 0, 0))


def test_bisect_unresolved_endpoint_is_error():
    with pytest.raises(BisectionError):
        bisect(lambda x: UNRESOLVED if x[0] == 0 else "E1", (0, 0, 0), (1, 0, 0))


def test_real_segment_straddles_boundary():
    clf = AttractorClassifier(ModelParams.default())
    assert clf((1, 1, 0)) == "E2" and clf((1, 1, 6)) == "E3"
    p = bisect(clf, (1, 1, 0), (1, 1, 6), tol=1e-4)
    assert p.boundary == ("E2", "E3")
    assert p.width <= 1e-4
    assert straddles(clf, p, 1e-4)


def test_cloud_points_lie_on_their_segments(default_cloud):
    segs = pair_opposite_faces(face_grid(GridSpec(15, 6.0)))
    for p in default_cloud.points:
        a, b = segs[p.segment]
        d = b - a
        t = (p.position - a) @ d / (d @ d)
        assert 0 < t < 1
        np.testing.assert_allclose(a + t * d, p.position, atol=1e-12)
        np.testing.assert_allclose(np.abs(p.direction), np.abs(d) / np.linalg.norm(d))


def test_cloud_widths_and_bounds(default_cloud):
    P = default_cloud.positions()
    assert np.all(P >= 0) and np.all(P <= 6.0)
    assert all(p.width <= 1e-4 for p in default_cloud.points)


def test_cloud_groups_partition_points(default_cloud):
    groups = default_cloud.groups
    assert sum(len(v) for v in groups.values()) == len(default_cloud)
    assert set(groups) <= {("E1", "E2"), ("E1", "E3"), ("E2", "E3")}
    assert list(groups) == sorted(groups)
    for pair, pts in groups.items():
        assert all(p.boundary == pair for p in pts)
    assert [boundary_name(k) for k in groups] == ["E1-E2", "E1-E3", "E2-E3"]


def test_cloud_stats(default_cloud):
    s = default_cloud.stats
    assert s["grid_points"] == 1350 and s["segments"] == 675
    assert s["segments_bracketed"] - s["segments_discarded"] == len(default_cloud)
    assert s["basins_on_grid"] == ["E1", "E2", "E3"]


def test_sampled_points_straddle(default_cloud):
    clf = AttractorClassifier(ModelParams.default())
    pts = default_cloud.points[::20]
    assert all(straddles(clf, p, 1e-4) for p in pts)


def test_sampling_deterministic_across_threads(default_cloud):
    other = sample_separatrices(ModelParams.default(), GridSpec(15, 6.0), 1e-4, threads=4)
    assert len(other) == len(default_cloud)
    for a, b in zip(other.points, default_cloud.points):
        assert a.segment == b.segment and a.boundary == b.boundary
        np.testing.assert_array_equal(a.position, b.position)


def test_single_attractor_system_gives_empty_cloud():
    weak = ModelParams(p=1, q=1, r=1, a=0.1, b=0.1, c=0.1, e=0.1, f=0.1, g=0.1, u=1, v=1, w=1)
    with pytest.raises(EmptyCloudError):
        sample_separatrices(weak, GridSpec(4, 1.5), threads=1)


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("BASIN_ATLAS_THREADS", "3")
    assert thread_count() == min(3, os.cpu_count() or 1)
    assert thread_count(8) == 3
    assert thread_count(1) == 1
    assert thread_count(0) == 1
    monkeypatch.delenv("BASIN_ATLAS_THREADS")
    assert thread_count(8) == 8
