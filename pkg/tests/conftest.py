import itertools
import math

import numpy as np
import pytest

from topf.complex import assemble_filtration, snapshot
from topf.pointcloud import PointCloud


def circle_points(n, radius=1.0, centre=(0.0, 0.0), seed=0, uniform=False):
    if uniform:
        a = np.linspace(0, 2 * np.pi, n, endpoint=False)
    else:
        a = np.random.default_rng(seed).uniform(0, 2 * np.pi, n)
    return np.asarray(centre) + radius * np.c_[np.cos(a), np.sin(a)]


def sphere_points(n, radius=1.0, seed=0):
    x = np.random.default_rng(seed).normal(size=(n, 3))
    return radius * x / np.linalg.norm(x, axis=1)[:, None]


def far_points(n, dim, seed=0, lo=2.5, hi=4.0):
    """Points at distance in [lo, hi] from the origin."""
    rng = np.random.default_rng(seed + 1000)
    x = rng.normal(size=(n, dim))
    x /= np.linalg.norm(x, axis=1)[:, None]
    return x * rng.uniform(lo, hi, (n, 1))


@pytest.fixture
def square():
    return PointCloud([[0, 0], [1, 0], [1, 1], [0, 1]])


def closure_snapshot(tops, n):
    """Snapshot of the full complex generated by the given simplices."""
    dim = max(len(s) for s in tops) - 1
    by_k = [set() for _ in range(dim + 1)]
    for s in tops:
        for k in range(len(s)):
            by_k[k].update(itertools.combinations(sorted(s), k + 1))
    by_k[0].update((v,) for v in range(n))
    simp = [np.array(sorted(b), dtype=np.int64).reshape(-1, k + 1) for k, b in enumerate(by_k)]
    vals = [np.full(len(s), float(k)) for k, s in enumerate(simp)]
    fc = assemble_filtration(simp, vals, n)
    return fc, snapshot(fc, math.inf)
