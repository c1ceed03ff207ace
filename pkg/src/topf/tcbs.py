"""Generators for the seven labelled point clouds of the topological clustering benchmark.

The exact geometry of the original clouds is unpublished; these are
parametric reconstructions with matching ambient dimension, point counts and
cluster structure. All constants live in the ``_SHAPES`` table below. Each
cloud is a pure function of ``(name, seed, scale)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .pointcloud import PointCloud


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    seed: int = 0
    scale: float = 1.0


def _n(count: int, scale: float) -> int:
    return max(int(round(count * scale)), 4)


def _circle(rng, n, centre, radius, axes=(0, 1), dim=2, ax_scale=(1.0, 1.0)):
    a = rng.uniform(0.0, 2 * np.pi, n)
    out = np.zeros((n, dim))
    out[:, axes[0]] = radius * ax_scale[0] * np.cos(a)
    out[:, axes[1]] = radius * ax_scale[1] * np.sin(a)
    return out + np.asarray(centre, dtype=float)


def _sphere(rng, n, centre, radius, semi=(1.0, 1.0, 1.0)):
    x = rng.normal(size=(n, 3))
    x /= np.linalg.norm(x, axis=1)[:, None]
    return np.asarray(centre, dtype=float) + radius * x * np.asarray(semi)


def _segment(rng, n, a, b):
    s = rng.uniform(0.0, 1.0, n)[:, None]
    return np.asarray(a, float) + s * (np.asarray(b, float) - np.asarray(a, float))


def _four_spheres(rng, scale):
    # four circles of different size on a line
    parts = [((0.0, 0.0), 1.0, 200), ((3.0, 0.0), 0.8, 164),
             ((6.6, 0.0), 1.3, 172), ((9.7, 0.0), 0.6, 120)]
    pts = [_circle(rng, _n(n, scale), c, r) for c, r, n in parts]
    return pts, 0.02


def _ellipses(rng, scale):
    parts = [((0.0, 0.0), (1.0, 0.5), 56), ((2.6, 0.0), (0.7, 0.35), 52),
             ((4.8, 0.0), (0.5, 0.8), 50)]
    pts = [_circle(rng, _n(n, scale), c, 1.0, ax_scale=s) for c, s, n in parts]
    return pts, 0.01


def _spheres_grid(rng, scale):
    side = max(int(round(24 * np.sqrt(scale))), 2)
    g = np.linspace(0.0, 4.6, side)
    grid = np.stack(np.meshgrid(g, g), axis=-1).reshape(-1, 2)
    grid = grid + rng.normal(0.0, 0.01, grid.shape)
    pts = [grid, _circle(rng, _n(145, scale), (6.5, 2.3), 1.0),
           _circle(rng, _n(145, scale), (9.3, 2.3), 1.0)]
    return pts, 0.015


def _halved_circle(rng, scale):
    # a circle cut by a diameter: upper arc, lower arc, chord
    nu, nl, nc = _n(100, scale), _n(100, scale), _n(49, scale)
    up = rng.uniform(0.0, np.pi, nu)
    lo = rng.uniform(np.pi, 2 * np.pi, nl)
    pts = [np.c_[np.cos(up), np.sin(up)], np.c_[np.cos(lo), np.sin(lo)],
           _segment(rng, nc, (-0.97, 0.0), (0.97, 0.0))]
    return pts, 0.01


def _two_spheres_two_circles(rng, scale):
    pts = [_sphere(rng, _n(1800, scale), (0.0, 0.0, 0.0), 1.0),
           _sphere(rng, _n(1800, scale), (3.0, 0.0, 0.0), 1.0),
           _circle(rng, _n(500, scale), (6.0, 0.0, 0.0), 1.0, dim=3),
           _circle(rng, _n(500, scale), (9.0, 0.0, 0.0), 1.0, dim=3)]
    return pts, 0.02


def _sphere_in_circle(rng, scale):
    pts = [_sphere(rng, _n(167, scale), (0.0, 0.0, 0.0), 1.0),
           _circle(rng, _n(100, scale), (0.0, 0.0, 0.0), 2.5, dim=3)]
    return pts, 0.02


def _spaceship(rng, scale):
    # hollow hull with two engine rings behind and in front, all on the x-axis
    pts = [_sphere(rng, _n(350, scale), (0.0, 0.0, 0.0), 1.0, semi=(2.0, 1.0, 1.0)),
           _circle(rng, _n(150, scale), (-3.3, 0.0, 0.0), 0.9, axes=(1, 2), dim=3),
           _circle(rng, _n(150, scale), (3.3, 0.0, 0.0), 0.9, axes=(1, 2), dim=3)]
    return pts, 0.02


# name -> (generator, ambient dim, cluster count, point count at scale 1)
_SHAPES: dict[str, tuple[Callable, int, int, int]] = {
    "4Spheres": (_four_spheres, 2, 4, 656),
    "Ellipses": (_ellipses, 2, 3, 158),
    "SpheresGrid": (_spheres_grid, 2, 3, 866),
    "HalvedCircle": (_halved_circle, 2, 3, 249),
    "TwoSpheresTwoCircles": (_two_spheres_two_circles, 3, 4, 4600),
    "SphereInCircle": (_sphere_in_circle, 3, 2, 267),
    "Spaceship": (_spaceship, 3, 3, 650),
}

BENCHMARKS = tuple(_SHAPES)

_ALIASES = {
    "2spheres2circles": "TwoSpheresTwoCircles",
    "spheres+grid": "SpheresGrid",
    "halved circle": "HalvedCircle",
}


def canonical_name(name: str) -> str:
    key = name.strip().lower()
    for canon in _SHAPES:
        if canon.lower() == key:
            return canon
    if key in _ALIASES:
        return _ALIASES[key]
    raise KeyError(f"unknown benchmark {name!r}; choose from {', '.join(BENCHMARKS)}")


def cluster_count(name: str) -> int:
    return _SHAPES[canonical_name(name)][2]


def point_count(name: str) -> int:
    return _SHAPES[canonical_name(name)][3]


def generate_benchmark(spec: BenchmarkSpec | str, seed: int = 0, scale: float = 1.0) -> PointCloud:
    """Labelled benchmark cloud; labels are 0..clusters-1 in component order."""
    if isinstance(spec, str):
        spec = BenchmarkSpec(spec, seed, scale)
    if not spec.scale > 0:
        raise ValueError("scale must be positive")
    name = canonical_name(spec.name)
    gen, dim, _, _ = _SHAPES[name]
    idx = BENCHMARKS.index(name)
    rng = np.random.default_rng(np.random.SeedSequence(int(spec.seed), spawn_key=(idx,)))
    parts, noise = gen(rng, spec.scale)
    pts = np.vstack(parts)
    pts = pts + rng.normal(0.0, noise, pts.shape)
    labels = np.concatenate([np.full(len(p), i, dtype=np.int64) for i, p in enumerate(parts)])
    assert pts.shape[1] == dim
    return PointCloud(pts, labels)
