"""Point clouds: container type, delimited-text I/O and perturbations."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

OUTLIER_LABEL = -1


class PointCloudError(ValueError):
    """Base class for malformed point-cloud input."""


class ParseError(PointCloudError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class FormatError(PointCloudError):
    pass


class EmptyInputError(PointCloudError):
    pass


@dataclass(frozen=True, eq=False)
class PointCloud:
    """A finite set of points in R^n with optional integer labels.

    The coordinate and label arrays are copied and made read-only on
    construction, so instances can be shared freely.
    """

    points: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1) if pts.size else pts.reshape(0, 1)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise FormatError(f"points must be a 2-d array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise PointCloudError("coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.array(self.labels, dtype=np.int64).reshape(-1)
            if lab.shape[0] != pts.shape[0]:
                raise FormatError(
                    f"{lab.shape[0]} labels given for {pts.shape[0]} points")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        if self.points.shape != other.points.shape:
            return False
        if not np.array_equal(self.points, other.points):
            return False
        if (self.labels is None) != (other.labels is None):
            return False
        return self.labels is None or np.array_equal(self.labels, other.labels)

    __hash__ = None

    def with_labels(self, labels) -> "PointCloud":
        return PointCloud(self.points, labels)


def _split(line: str, fmt: str) -> list[str]:
    if fmt == "csv":
        return [tok.strip() for tok in line.split(",")]
    return line.split()


def load_point_cloud(path: str | os.PathLike, format: str = "csv",
                     labels: bool = False) -> PointCloud:
    """Read one point per row from a delimited text file.

    With ``labels=True`` the last column is parsed as an integer cluster
    label. Blank lines and lines starting with ``#`` are skipped.
    """
    if format not in ("csv", "whitespace"):
        raise ValueError(f"unknown format {format!r}")
    rows: list[list[float]] = []
    labs: list[int] = []
    ncols = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            toks = _split(line, format)
            if ncols is None:
                ncols = len(toks)
                if labels and ncols < 2:
                    raise FormatError(f"line {lineno}: a label column needs at least one coordinate")
            elif len(toks) != ncols:
                raise FormatError(
                    f"line {lineno}: expected {ncols} columns, found {len(toks)}")
            coord_toks = toks[:-1] if labels else toks
            try:
                vals = [float(t) for t in coord_toks]
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            if not all(math.isfinite(v) for v in vals):
                raise ParseError("non-finite coordinate", lineno)
            rows.append(vals)
            if labels:
                try:
                    labs.append(int(toks[-1]))
                except ValueError:
                    raise ParseError(f"label {toks[-1]!r} is not an integer", lineno) from None
    if not rows:
        raise EmptyInputError(f"{os.fspath(path)} contains no points")
    return PointCloud(np.asarray(rows), np.asarray(labs) if labels else None)


def save_point_cloud(pc: PointCloud, path: str | os.PathLike, format: str = "csv",
                     labels: Optional[bool] = None) -> None:
    """Write ``pc`` so that :func:`load_point_cloud` reproduces it exactly.

    Floats are written with ``repr`` (shortest round-trip form). Labels are
    written as a trailing column when present unless ``labels=False``.
    """
    if format not in ("csv", "whitespace"):
        raise ValueError(f"unknown format {format!r}")
    sep = "," if format == "csv" else " "
    write_labels = pc.labels is not None if labels is None else labels
    if write_labels and pc.labels is None:
        raise ValueError("point cloud has no labels to write")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, row in enumerate(pc.points):
            toks = [repr(float(v)) for v in row]
            if write_labels:
                toks.append(str(int(pc.labels[i])))
            fh.write(sep.join(toks) + "\n")


def add_gaussian_noise(pc: PointCloud, sigma: float, seed: int) -> PointCloud:
    """Perturb every coordinate independently by N(0, sigma^2)."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return pc
    rng = np.random.default_rng(seed)
    noisy = pc.points + rng.normal(0.0, sigma, size=pc.points.shape)
    return PointCloud(noisy, pc.labels)


def add_outliers(pc: PointCloud, count: int, seed: int) -> PointCloud:
    """Append ``count`` Gaussian outliers matched to the cloud's spread.

    Outliers are centred at the centroid with the per-axis standard
    deviation of the input and carry :data:`OUTLIER_LABEL`. Unlabelled
    input points receive label 0.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if len(pc) == 0:
        raise EmptyInputError("cannot add outliers to an empty point cloud")
    if count == 0:
        return pc
    rng = np.random.default_rng(seed)
    centre = pc.points.mean(axis=0)
    std = pc.points.std(axis=0)
    extra = rng.normal(centre, std, size=(count, pc.ambient_dim))
    base = pc.labels if pc.labels is not None else np.zeros(len(pc), dtype=np.int64)
    labels = np.concatenate([base, np.full(count, OUTLIER_LABEL, dtype=np.int64)])
    return PointCloud(np.vstack([pc.points, extra]), labels)


def generate_benchmark(spec, seed: int = 0, scale: float = 1.0) -> PointCloud:
    """Labelled benchmark cloud by name; see :mod:`topf.tcbs`."""
    from .tcbs import generate_benchmark as _gen
    return _gen(spec, seed, scale)
