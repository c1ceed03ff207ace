import math

import numpy as np
import pytest

from topf.complex import build_alpha_filtration, boundary_matrix, snapshot
from topf.harmonic import (ConvergenceError, HarmonicError, WeightBudgetError, coface_counts,
                           dump_chain, embed_generator, harmonic_project, hodge_decompose,
                           interpolation_time, simplicial_weights, weighted_operators)
from topf.persistence import betti_numbers
from conftest import closure_snapshot
from topf.pointcloud import PointCloud


def dense_harmonic(e, sc, k, w):
    down, up = weighted_operators(sc, k, w)
    ew = e / np.sqrt(w)
    h = ew.copy()
    if down is not None:
        dt = down.T.toarray()
        h -= dt @ np.linalg.pinv(dt) @ ew
    if up is not None:
        u = up.toarray()
        h -= u @ np.linalg.pinv(u) @ ew
    return h


def test_interpolation_examples():
    assert interpolation_time(1.0, 1.0, 1, 0.7) == 1.0
    assert abs(interpolation_time(0.5, 2.0, 1) - 0.7578582832551991) < 1e-12
    assert abs(interpolation_time(0.0, 2.0, 0) - 0.6) < 1e-12
    assert abs(interpolation_time(0.0, 2.0, 2) - 0.6) < 1e-12
    assert abs(interpolation_time(0.5, 2.0, 1, mode="linear") - (0.15 + 1.4)) < 1e-12
    with pytest.raises(ValueError):
        interpolation_time(2.0, 1.0, 1)
    with pytest.raises(ValueError):
        interpolation_time(0.0, math.inf, 1)
    with pytest.raises(ValueError):
        interpolation_time(0.1, 1.0, 1, lam=1.0)


def test_interpolation_within_interval():
    rng = np.random.default_rng(0)
    for b, d, lam in zip(rng.uniform(0.01, 1, 50), rng.uniform(1, 5, 50), rng.uniform(0, 0.99, 50)):
        assert b <= interpolation_time(b, d, 1, lam) <= d


def test_embed_generator():
    _, sc = closure_snapshot([(0, 1), (1, 2), (0, 2)], 3)
    e = embed_generator((np.array([0, 1, 2]), np.array([1, 2, 1])), sc, 1)
    assert e.tolist() == [1.0, -1.0, 1.0]
    with pytest.raises(HarmonicError):
        embed_generator((np.array([5]), np.array([1])), sc, 1)


def test_triangle_weights():
    # edge (0, 1) lies in three triangles, edge (3, 4) is isolated
    _, sc = closure_snapshot([(0, 1, 2), (0, 1, 3), (0, 1, 4), (5, 6)], 7)
    w = simplicial_weights(sc, 1, "triangle")
    edges = [tuple(r) for r in sc.simplices(1).tolist()]
    assert w[edges.index((0, 1))] == 1 / 16
    assert w[edges.index((5, 6))] == 1.0
    assert w[edges.index((0, 2))] == 1 / 4
    assert coface_counts(sc, 2).tolist() == [0, 0, 0]


def test_effective_resistance_weights():
    _, sc = closure_snapshot([(0, 1)], 2)
    assert np.allclose(simplicial_weights(sc, 1, "effective_resistance"), [1.0])
    assert np.allclose(simplicial_weights(sc, 0, "effective_resistance"), [1.0, 1.0])
    # projector onto the row space of B_0 via SVD
    fc = build_alpha_filtration(PointCloud(np.random.default_rng(2).normal(size=(15, 2))))
    sc = snapshot(fc, np.median(fc.values[1]))
    b = boundary_matrix(sc, 0).toarray().astype(float)
    u, s, vt = np.linalg.svd(b)
    v = vt[: int(np.sum(s > 1e-10))]
    want = np.einsum("ij,ij->j", v, v) ** 2
    assert np.allclose(simplicial_weights(sc, 1, "effective_resistance"), want, atol=1e-12)
    with pytest.raises(WeightBudgetError):
        simplicial_weights(sc, 1, "effective_resistance", budget=3)
    with pytest.raises(ValueError):
        simplicial_weights(sc, 1, "bogus")


def test_hollow_triangle_is_harmonic():
    _, sc = closure_snapshot([(0, 1), (1, 2), (0, 2)], 3)
    e = np.array([1.0, -1.0, 1.0])   # [01] - [02] + [12]
    assert np.allclose(harmonic_project(e, sc, 1), e, atol=1e-9)


def test_filled_triangle_boundary_is_curl():
    _, sc = closure_snapshot([(0, 1, 2)], 3)
    e = boundary_matrix(sc, 1).toarray()[:, 0].astype(float)
    assert np.linalg.norm(harmonic_project(e, sc, 1)) < 1e-9


def test_four_cycle_with_chord_free_projection_is_uniform():
    # a 4-cycle; start from a chain on only two edges
    _, sc = closure_snapshot([(0, 1), (1, 2), (2, 3), (0, 3)], 4)
    edges = [tuple(r) for r in sc.simplices(1).tolist()]
    e = np.zeros(4)
    e[edges.index((0, 1))] = 1.0
    h = harmonic_project(e, sc, 1)
    assert np.allclose(np.abs(h), 0.25, atol=1e-9)


def test_exact_real_cycle_has_no_gradient():
    _, sc = closure_snapshot([(0, 1), (1, 2), (2, 3), (0, 3)], 4)
    edges = [tuple(r) for r in sc.simplices(1).tolist()]
    e = np.zeros(4)
    for s, c in [((0, 1), 1), ((1, 2), 1), ((2, 3), 1), ((0, 3), -1)]:
        e[edges.index(s)] = c
    parts = hodge_decompose(e, sc, 1)
    assert np.linalg.norm(parts.gradient) <= 1e-8 * np.linalg.norm(e)


def random_snapshot(seed, n=40, dim=2):
    rng = np.random.default_rng(seed)
    fc = build_alpha_filtration(PointCloud(rng.normal(size=(n, dim))))
    return rng, snapshot(fc, np.quantile(fc.values[1], 0.4))


@pytest.mark.parametrize("scheme", ["unweighted", "triangle", "effective_resistance"])
@pytest.mark.parametrize("seed", range(4))
def test_matches_dense_projection(seed, scheme):
    rng, sc = random_snapshot(seed, dim=2 + seed % 2)
    for k in range(sc.dim):
        e = rng.normal(size=sc.count(k))
        w = simplicial_weights(sc, k, scheme)
        h = harmonic_project(e, sc, k, w)
        assert np.allclose(h, dense_harmonic(e, sc, k, w), atol=1e-6 * max(1, np.linalg.norm(h)))


@pytest.mark.parametrize("scheme", ["unweighted", "triangle"])
def test_idempotent_and_orthogonal(scheme):
    rng, sc = random_snapshot(11, n=50, dim=3)
    k = 1
    w = simplicial_weights(sc, k, scheme)
    e = rng.normal(size=sc.count(k))
    h = harmonic_project(e, sc, k, w)
    # feed h back in original coordinates
    h2 = harmonic_project(h * np.sqrt(w), sc, k, w)
    assert np.linalg.norm(h2 - h) <= 1e-6 * np.linalg.norm(h)
    down, up = weighted_operators(sc, k, w)
    for _ in range(10):
        x = rng.normal(size=down.shape[0])
        y = rng.normal(size=up.shape[1])
        gx, cy = down.T @ x, up @ y
        assert abs(h @ gx) <= 1e-6 * np.linalg.norm(h) * np.linalg.norm(gx)
        assert abs(h @ cy) <= 1e-6 * np.linalg.norm(h) * np.linalg.norm(cy)


@pytest.mark.parametrize("seed", range(3))
def test_kernel_dimension_equals_betti(seed):
    _, sc = random_snapshot(seed + 20, n=25, dim=3)
    betti = betti_numbers(sc, 2)
    for k in range(3):
        down, up = weighted_operators(sc, k)
        lap = np.zeros((sc.count(k), sc.count(k)))
        if down is not None:
            lap += (down.T @ down).toarray()
        if up is not None:
            lap += (up @ up.T).toarray()
        ev = np.linalg.eigvalsh(lap) if lap.size else np.zeros(0)
        assert int(np.sum(ev < 1e-9)) == betti[k]


def test_convergence_error_carries_residuals():
    rng, sc = random_snapshot(5, n=60)
    e = rng.normal(size=sc.count(1))
    with pytest.raises(ConvergenceError) as err:
        hodge_decompose(e, sc, 1, maxiter=1, refinements=0)
    assert err.value.grad_residual > 0 or err.value.curl_residual > 0


def test_rejects_bad_weights():
    _, sc = closure_snapshot([(0, 1)], 2)
    with pytest.raises(HarmonicError):
        weighted_operators(sc, 1, np.array([0.0]))


def test_dump_chain(tmp_path):
    _, sc = closure_snapshot([(0, 1), (1, 2)], 3)
    dump_chain(tmp_path / "c.csv", sc, 1, np.array([0.5, -1.0]))
    assert (tmp_path / "c.csv").read_text() == "v0,v1,value\n0,1,0.5\n1,2,-1.0\n"
