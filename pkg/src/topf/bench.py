"""Clustering benchmark on topological point features and robustness sweeps."""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import comb
from sklearn.cluster import KMeans

from .features import TopfConfig, topf
from .pointcloud import OUTLIER_LABEL, PointCloud, add_gaussian_noise, add_outliers
from .tcbs import canonical_name, cluster_count, generate_benchmark

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, *path: int) -> int:
    """Child seed of ``master`` along ``path``: splitmix64 applied per step, 31-bit result."""
    s = int(master) & MASK64
    for p in path:
        s = splitmix64(s ^ splitmix64(int(p) & MASK64))
    return s & 0x7FFFFFFF


def kmeans(features: np.ndarray, k: int, seed: int = 0, restarts: int = 10) -> np.ndarray:
    """k-means++ seeded Lloyd iterations, best of ``restarts`` by inertia."""
    x = np.asarray(features, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if k < 1:
        raise ValueError("k must be positive")
    if k > x.shape[0]:
        raise ValueError(f"k={k} exceeds the number of points ({x.shape[0]})")
    if x.shape[1] == 0:
        x = np.zeros((x.shape[0], 1))
    km = KMeans(n_clusters=k, init="k-means++", n_init=restarts, algorithm="lloyd",
                random_state=seed)
    return km.fit_predict(x).astype(np.int64)


def adjusted_rand_index(a, b) -> float:
    """Chance-corrected pair-counting agreement of two labelings."""
    a = np.asarray(a).ravel()
    b = np.asarray(b).ravel()
    if a.shape != b.shape:
        raise ValueError("labelings differ in length")
    n = a.size
    if n < 2:
        return 1.0
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    sum_ij = comb(table, 2).sum()
    sum_a = comb(table.sum(axis=1), 2).sum()
    sum_b = comb(table.sum(axis=0), 2).sum()
    total = comb(n, 2)
    expected = sum_a * sum_b / total
    top = 0.5 * (sum_a + sum_b)
    if top == expected:
        return 1.0
    return float((sum_ij - expected) / (top - expected))


@dataclass
class ClusteringResult:
    labels: np.ndarray
    ari: float
    runtime_seconds: float
    n_features: int = 0


def cluster_cloud(pc: PointCloud, k: int, config: TopfConfig, seed: int,
                  restarts: int = 10, truth: Optional[np.ndarray] = None,
                  mask: Optional[np.ndarray] = None) -> ClusteringResult:
    """TOPF features plus k-means; ARI against ``truth`` restricted to ``mask``."""
    cfg = replace(config, no_feature_column=True)
    t0 = time.perf_counter()
    fm = topf(pc, cfg)
    labels = kmeans(fm.values, k, seed, restarts)
    elapsed = time.perf_counter() - t0
    truth = pc.labels if truth is None else truth
    sel = slice(None) if mask is None else mask
    ari = adjusted_rand_index(truth[sel], labels[sel]) if truth is not None else float("nan")
    return ClusteringResult(labels, ari, elapsed, fm.values.shape[1] - 1)


@dataclass
class BenchmarkRow:
    dataset: str
    repeats: int
    aris: list = field(default_factory=list)
    runtimes: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    n_features: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    @property
    def mean_ari(self) -> float:
        return float(np.mean(self.aris)) if self.aris else float("nan")

    @property
    def std_ari(self) -> float:
        return float(np.std(self.aris)) if self.aris else float("nan")

    @property
    def mean_runtime(self) -> float:
        return float(np.mean(self.runtimes)) if self.runtimes else float("nan")


def run_benchmark(names: Sequence[str], config: TopfConfig = TopfConfig(), repeats: int = 20,
                  seed: int = 0, scale: float = 1.0, restarts: int = 10) -> list[BenchmarkRow]:
    """Generate, featurize, cluster and score each dataset ``repeats`` times.

    Repeat ``r`` of dataset ``d`` uses seed ``derive_seed(seed, d, r)`` for
    both the cloud and k-means. Failures are recorded per repeat.
    """
    if repeats < 1:
        raise ValueError("repeats must be positive")
    rows = []
    for d, name in enumerate(names):
        canon = canonical_name(name)
        row = BenchmarkRow(canon, repeats)
        for r in range(repeats):
            s = derive_seed(seed, d, r)
            try:
                pc = generate_benchmark(canon, s, scale)
                res = cluster_cloud(pc, cluster_count(canon), config, s, restarts)
            except Exception as exc:  # keep going, report per cell
                log.error("%s repeat %d failed: %s", canon, r, exc)
                row.errors.append(f"repeat {r} (seed {s}): {exc}")
                continue
            row.seeds.append(s)
            row.aris.append(res.ari)
            row.runtimes.append(res.runtime_seconds)
            row.n_features.append(res.n_features)
            log.info("%s repeat %d: ARI %.3f, %d features, %.2fs", canon, r, res.ari,
                     res.n_features, res.runtime_seconds)
        rows.append(row)
    return rows


def _fmt(x) -> str:
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))


def write_benchmark(rows: list[BenchmarkRow], csv_path, json_path=None,
                    timing: bool = False) -> None:
    """Write the report; wall-clock columns stay ``nan`` unless ``timing`` is set,
    which keeps reruns byte-identical."""
    nan = float("nan")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "repeats", "mean_ari", "std_ari", "mean_runtime_s", "errors"])
        for r in rows:
            w.writerow([r.dataset, r.repeats, _fmt(r.mean_ari), _fmt(r.std_ari),
                        _fmt(r.mean_runtime if timing else nan), len(r.errors)])
    if json_path is not None:
        recs = [{"dataset": r.dataset, "repeats": r.repeats,
                 "mean_ari": _nan_none(r.mean_ari), "std_ari": _nan_none(r.std_ari),
                 "mean_runtime_s": _nan_none(r.mean_runtime) if timing else None,
                 "per_repeat": [{"seed": s, "ari": a, "runtime_s": t if timing else None,
                                 "n_features": f}
                                for s, a, t, f in zip(r.seeds, r.aris, r.runtimes, r.n_features)],
                 "errors": r.errors} for r in rows]
        with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(recs, indent=2, allow_nan=False) + "\n")


def _nan_none(x):
    return None if isinstance(x, float) and math.isnan(x) else x


@dataclass
class SweepReport:
    dataset: str
    kind: str
    grid: list
    aris: list           # per grid cell, list over repeats
    errors: list

    @property
    def mean(self) -> np.ndarray:
        return np.array([np.mean(a) if a else np.nan for a in self.aris])

    @property
    def ci95(self) -> np.ndarray:
        """Half-width of the normal-approximation 95% interval of each cell mean."""
        out = []
        for a in self.aris:
            out.append(1.96 * np.std(a, ddof=1) / np.sqrt(len(a)) if len(a) > 1 else 0.0)
        return np.array(out)

    def write(self, csv_path, json_path=None) -> None:
        col = "sigma" if self.kind == "gaussian" else "outliers"
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["dataset", col, "repeats", "mean_ari", "ci95", "errors"])
            for g, a, m, c, e in zip(self.grid, self.aris, self.mean, self.ci95, self.errors):
                w.writerow([self.dataset, g, len(a), _fmt(m), _fmt(c), len(e)])
        if json_path is not None:
            recs = {"dataset": self.dataset, "kind": self.kind,
                    "cells": [{col: g, "aris": a, "mean_ari": _nan_none(float(m)),
                               "ci95": float(c), "errors": e}
                              for g, a, m, c, e in zip(self.grid, self.aris, self.mean,
                                                       self.ci95, self.errors)]}
            with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(json.dumps(recs, indent=2, allow_nan=False) + "\n")


def robustness_sweep(dataset: str, kind: str, grid: Sequence[float], repeats: int = 5,
                     config: TopfConfig = TopfConfig(), seed: int = 0, scale: float = 1.0,
                     restarts: int = 10) -> SweepReport:
    """ARI under increasing Gaussian noise (``sigma``) or outlier counts.

    Repeat ``r`` uses the same clean cloud in every cell, so cells differ
    only in the perturbation. For outliers the ARI covers the original
    points only.
    """
    if kind not in ("gaussian", "outliers"):
        raise ValueError("kind must be 'gaussian' or 'outliers'")
    if len(grid) == 0:
        raise ValueError("grid must be nonempty")
    if repeats < 1:
        raise ValueError("repeats must be positive")
    name = canonical_name(dataset)
    k = cluster_count(name)
    aris, errors = [], []
    for c, g in enumerate(grid):
        cell, errs = [], []
        for r in range(repeats):
            s = derive_seed(seed, r)
            try:
                clean = generate_benchmark(name, s, scale)
                ps = derive_seed(seed, r, c + 1)
                if kind == "gaussian":
                    pc = add_gaussian_noise(clean, float(g), ps)
                    res = cluster_cloud(pc, k, config, s, restarts)
                else:
                    pc = add_outliers(clean, int(g), ps)
                    mask = pc.labels != OUTLIER_LABEL
                    res = cluster_cloud(pc, k, config, s, restarts, mask=mask)
            except Exception as exc:
                log.error("%s %s=%s repeat %d failed: %s", name, kind, g, r, exc)
                errs.append(f"repeat {r}: {exc}")
                continue
            cell.append(res.ari)
        log.info("%s %s=%s: mean ARI %s", name, kind, g, np.mean(cell) if cell else "n/a")
        aris.append(cell)
        errors.append(errs)
    return SweepReport(name, kind, list(grid), aris, errors)
