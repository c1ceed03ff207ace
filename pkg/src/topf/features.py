"""Per-point topological features from harmonic representatives.

Pipeline: filtration, persistence, selection of significant classes, then
for every selected class a snapshot at the interpolated time, a weighted
harmonic projection of its generator, thresholding and averaging over the
simplices incident to each point.
"""
from __future__ import annotations

import json
import logging
import os
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .complex import FilteredComplex, build_filtration, snapshot
from .harmonic import (dump_chain, embed_generator, harmonic_project, interpolation_time,
                       simplicial_weights)
from .persistence import PersistenceDiagram, compute_persistence
from .pointcloud import EmptyInputError, PointCloud
from .selection import Feature, FeatureSet, SelectionParams, select_features

log = logging.getLogger(__name__)


class FeatureError(RuntimeError):
    pass


class DegenerateChainError(FeatureError):
    pass


@dataclass(frozen=True)
class TopfConfig:
    max_dim: Optional[int] = None        # ambient dimension - 1 when None
    complex: str = "auto"
    max_radius: Optional[float] = None
    lam: float = 0.3
    delta: float = 0.07
    beta: float = 0.0
    min_rel_quot: float = 0.1
    max_total_quot: float = 10.0
    min_0_ratio: float = 5.0
    weights: str = "triangle"
    interpolation: str = "geometric"
    alpha_values: str = "gabriel"
    no_feature_column: bool = False
    tol: float = 1e-8

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if not 0 <= self.lam < 1:
            raise ValueError("lambda must lie in [0, 1)")
        if self.max_dim is not None and self.max_dim < 0:
            raise ValueError("max_dim must be non-negative")

    @property
    def selection(self) -> SelectionParams:
        return SelectionParams(self.beta, self.min_rel_quot, self.max_total_quot, self.min_0_ratio)

    def resolved_max_dim(self, pc: PointCloud) -> int:
        return max(self.max_dim if self.max_dim is not None else pc.ambient_dim - 1, 0)


@dataclass(eq=False)
class FeatureMatrix:
    """``|X| x |F|`` matrix with entries in [0, 1] plus per-column metadata."""

    values: np.ndarray
    meta: list[dict] = field(default_factory=list)
    diagram: Optional[PersistenceDiagram] = field(default=None, repr=False)

    @property
    def shape(self):
        return self.values.shape

    def to_csv(self, path, points: np.ndarray) -> None:
        points = np.asarray(points, dtype=float)
        if points.shape[0] != self.values.shape[0]:
            raise ValueError("point count does not match the feature matrix")
        head = [f"x{i}" for i in range(points.shape[1])] + \
               [f"f{j}" for j in range(self.values.shape[1])]
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(head) + "\n")
            for x, f in zip(points.tolist(), self.values.tolist()):
                fh.write(",".join(repr(v) for v in x + f) + "\n")

    def meta_json(self, path=None) -> str:
        text = json.dumps({"columns": self.meta}, indent=2, allow_nan=False)
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text + "\n")
        return text


def normalize_threshold(e_hat: np.ndarray, delta: float = 0.07) -> np.ndarray:
    """``min(|e| / (delta * max|e|), 1)`` entrywise."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    a = np.abs(np.asarray(e_hat, dtype=float))
    m = a.max() if a.size else 0.0
    if not m > 0:
        raise DegenerateChainError("harmonic representative vanishes")
    return np.minimum(a / (delta * m), 1.0)


def aggregate_to_points(ne: np.ndarray, simplices: np.ndarray, n_points: int) -> np.ndarray:
    """Mean of the chain values over the simplices incident to each point.

    ``simplices`` holds one k-simplex per row (vertex indices); points in
    no simplex get 0.
    """
    simplices = np.asarray(simplices, dtype=np.int64)
    ne = np.asarray(ne, dtype=float)
    if simplices.shape[0] != ne.shape[0]:
        raise ValueError("chain length does not match the simplex list")
    flat = simplices.ravel()
    tot = np.bincount(flat, weights=np.repeat(ne, simplices.shape[1]), minlength=n_points)
    cnt = np.bincount(flat, minlength=n_points)
    return tot / np.maximum(cnt, 1)


def feature_column(feat: Feature, fc: FilteredComplex, config: TopfConfig,
                   dump_dir=None, column: int = 0):
    """Point values of one selected class; returns ``(column, snapshot time)``."""
    k = feat.dim
    t = interpolation_time(feat.birth, feat.death, k, config.lam, config.interpolation)
    sc = snapshot(fc, t)
    e = embed_generator(feat.generator, sc, k)
    w = simplicial_weights(sc, k, config.weights)
    h = harmonic_project(e, sc, k, w, tol=config.tol)
    ne = normalize_threshold(h, config.delta)
    if dump_dir is not None:
        dump_chain(os.path.join(dump_dir, f"chain_f{column}.csv"), sc, k, h)
    return aggregate_to_points(ne, sc.simplices(k), fc.n_points), t


def topf(pc: PointCloud, config: TopfConfig = TopfConfig(), dump_dir=None) -> FeatureMatrix:
    """Topological point features of ``pc``; one column per selected class."""
    if len(pc) == 0:
        raise EmptyInputError("empty point cloud")
    n = len(pc)
    max_dim = config.resolved_max_dim(pc)
    t0 = time.perf_counter()
    fc = build_filtration(pc, max_dim, config.complex, config.max_radius,
                          alpha_values=config.alpha_values)
    max_dim = min(max_dim, fc.dim - 1)
    t1 = time.perf_counter()
    diag = compute_persistence(fc, max_dim) if max_dim >= 0 else None
    t2 = time.perf_counter()
    log.info("filtration: %s simplices per dimension (%.2fs), persistence %.2fs",
             [fc.count(k) for k in range(fc.dim + 1)], t1 - t0, t2 - t1)
    feats = select_features(diag, config.selection) if diag is not None else FeatureSet([])

    cols, meta = [], []
    for feat in feats:
        try:
            col, t = feature_column(feat, fc, config, dump_dir, len(cols))
        except DegenerateChainError:
            warnings.warn(f"dropping H{feat.dim} class ({feat.birth:g}, {feat.death:g}): "
                          "vanishing harmonic representative", RuntimeWarning)
            continue
        except Exception as exc:
            raise FeatureError(f"H{feat.dim} class born {feat.birth:g}, dying "
                               f"{feat.death:g}: {exc}") from exc
        cols.append(col)
        meta.append({"dim": feat.dim, "birth": feat.birth, "death": feat.death,
                     "lifetime": feat.lifetime, "essential": feat.essential,
                     "quotient": feat.quotient, "t": t})
        log.info("H%d feature %d: birth %.4g death %.4g snapshot %.4g",
                 feat.dim, feat.index, feat.birth, feat.death, t)
    if not cols:
        warnings.warn("no topological features selected", RuntimeWarning)
    values = np.column_stack(cols) if cols else np.zeros((n, 0))
    if config.no_feature_column:
        values = with_no_feature_column(values, meta)
        meta.append({"dim": None, "no_feature": True})
    log.info("features computed in %.2fs", time.perf_counter() - t0)
    return FeatureMatrix(np.clip(values, 0.0, 1.0), meta, diag)


def with_no_feature_column(values: np.ndarray, meta: list[dict]) -> np.ndarray:
    """Append ``1 - max`` over the non-essential columns of each row.

    Essential classes span whole components and say nothing about which
    finer structure a point belongs to, so they do not count here.
    """
    idx = [j for j, m in enumerate(meta) if not m.get("essential")]
    top = values[:, idx].max(axis=1) if idx else np.zeros(values.shape[0])
    return np.column_stack([values, 1.0 - top])
