import json
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import topf.features as features_mod
from conftest import circle_points, closure_snapshot
from topf.features import (DegenerateChainError, FeatureError, TopfConfig, aggregate_to_points,
                           normalize_threshold, topf)
from topf.harmonic import ConvergenceError, embed_generator, harmonic_project
from topf.pointcloud import PointCloud
from topf.selection import FeatureSet


def test_normalize_examples():
    e = np.array([1.0, 0.07, 0.035, -0.035, 0.0])
    out = normalize_threshold(e, 0.07)
    assert np.allclose(out, [1.0, 1.0, 0.5, 0.5, 0.0], atol=1e-12)
    with pytest.raises(DegenerateChainError):
        normalize_threshold(np.zeros(4))
    with pytest.raises(ValueError):
        normalize_threshold(e, 0.0)


def test_aggregate_examples():
    simp = np.array([[0, 1], [0, 2]])
    out = aggregate_to_points(np.array([1.0, 0.5]), simp, 4)
    assert out.tolist() == [0.75, 1.0, 0.5, 0.0]


def test_hollow_triangle_feature_is_one_everywhere():
    _, sc = closure_snapshot([(0, 1), (1, 2), (0, 2)], 3)
    e = embed_generator((np.array([0, 1, 2]), np.array([1, 2, 1])), sc, 1)
    ne = normalize_threshold(harmonic_project(e, sc, 1))
    assert np.allclose(aggregate_to_points(ne, sc.simplices(1), 3), 1.0)


def test_defaults():
    c = TopfConfig()
    assert (c.lam, c.delta, c.beta, c.weights, c.complex) == (0.3, 0.07, 0.0, "triangle", "auto")
    assert (c.min_rel_quot, c.max_total_quot, c.min_0_ratio) == (0.1, 10.0, 5.0)
    assert c.resolved_max_dim(PointCloud(np.zeros((3, 3)))) == 2
    with pytest.raises(ValueError):
        TopfConfig(delta=1.5)


def two_circles(seed=0):
    a = circle_points(60, seed=seed)
    b = circle_points(60, centre=(5.0, 0.0), seed=seed + 1)
    return PointCloud(np.vstack([a, b]))


def test_two_circles_give_two_loop_columns():
    fm = topf(two_circles())
    loops = [j for j, m in enumerate(fm.meta) if m["dim"] == 1]
    assert len(loops) == 2
    v = fm.values[:, loops]
    hi = v >= 0.99
    lo = v <= 1e-6
    assert np.all(hi.sum(axis=1) == 1) and np.all(lo.sum(axis=1) == 1)
    assert set(np.argmax(v[:60], axis=1)) != set(np.argmax(v[60:], axis=1))


def test_blob_has_one_component_column():
    pc = PointCloud(np.random.default_rng(3).normal(size=(150, 2)))
    for weights in ("unweighted", "triangle"):
        fm = topf(pc, TopfConfig(weights=weights))
        ess = [j for j, m in enumerate(fm.meta) if m["essential"]]
        assert len(ess) == 1 and fm.meta[ess[0]]["dim"] == 0
        assert np.all(fm.values[:, ess[0]] > 0.99)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(8, 60), st.sampled_from([2, 3]),
       st.sampled_from(["unweighted", "triangle", "effective_resistance"]))
def test_values_in_unit_interval(seed, n, dim, weights):
    pc = PointCloud(np.random.default_rng(seed).normal(size=(n, dim)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        fm = topf(pc, TopfConfig(weights=weights))
    assert fm.values.shape[0] == n
    assert np.all(np.isfinite(fm.values))
    assert np.all((fm.values >= 0) & (fm.values <= 1))


def test_permutation_equivariance():
    pc = PointCloud(np.vstack([circle_points(40, seed=4), np.random.default_rng(1).normal(size=(20, 2)) * 0.2 + [4, 0]]))
    perm = np.random.default_rng(7).permutation(len(pc))
    a = topf(pc).values
    b = topf(PointCloud(pc.points[perm])).values
    assert a.shape == b.shape
    assert np.allclose(a[perm], b, atol=1e-6)


def test_rigid_motion_invariance():
    rng = np.random.default_rng(2)
    pts = np.vstack([circle_points(50, seed=2), circle_points(30, 0.5, (3.0, 0.0), seed=3)])
    th = 0.7
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    a = topf(PointCloud(pts)).values
    b = topf(PointCloud(pts @ rot.T + [10.0, -3.0])).values
    assert a.shape == b.shape
    assert np.max(np.abs(a - b)) <= 1e-6


def test_empty_selection_gives_empty_matrix(monkeypatch):
    monkeypatch.setattr(features_mod, "select_features", lambda *a, **k: FeatureSet([]))
    with pytest.warns(RuntimeWarning):
        fm = topf(two_circles())
    assert fm.values.shape == (120, 0)


def test_module_errors_name_the_feature(monkeypatch):
    def boom(*a, **k):
        raise ConvergenceError("no luck", 1.0, 2.0)
    monkeypatch.setattr(features_mod, "harmonic_project", boom)
    with pytest.raises(FeatureError, match="H0 class"):
        topf(two_circles())


def test_no_feature_column():
    pts = np.vstack([circle_points(60, seed=0), np.random.default_rng(0).uniform(-0.3, 0.3, (30, 2)) + [4, 0]])
    fm = topf(PointCloud(pts), TopfConfig(no_feature_column=True))
    assert fm.meta[-1].get("no_feature")
    extra = fm.values[:, -1]
    assert np.all(extra[:60] < 0.01) and np.all(extra[60:] > 0.99)


def test_csv_and_metadata(tmp_path):
    pc = two_circles()
    fm = topf(pc)
    fm.to_csv(tmp_path / "f.csv", pc.points)
    lines = (tmp_path / "f.csv").read_text().splitlines()
    ncol = fm.values.shape[1]
    assert lines[0] == ",".join(["x0", "x1"] + [f"f{j}" for j in range(ncol)])
    assert len(lines) == 121
    back = np.loadtxt(tmp_path / "f.csv", delimiter=",", skiprows=1)
    assert np.array_equal(back[:, :2], pc.points) and np.array_equal(back[:, 2:], fm.values)
    meta = json.loads(fm.meta_json(tmp_path / "f.json"))
    assert len(meta["columns"]) == ncol
    assert {"dim", "birth", "death", "t"} <= set(meta["columns"][0])


def test_chain_dump(tmp_path):
    topf(two_circles(), dump_dir=tmp_path)
    dumped = sorted(p.name for p in tmp_path.iterdir())
    assert "chain_f0.csv" in dumped and "chain_f1.csv" in dumped
