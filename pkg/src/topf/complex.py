"""Filtered simplicial complexes: Vietoris-Rips and alpha filtrations,
sublevel snapshots and signed boundary matrices.

Simplices are stored per dimension as integer arrays of shape
``(n_k, k + 1)`` with strictly increasing vertex indices. Within a
dimension, simplices are sorted by ``(value, lexicographic vertices)``;
the global total order is ``(value, dim, lex)``, so every sublevel set is a
prefix of each per-dimension list. A simplex's *rank* is its position in
its dimension's list, and snapshots reuse those ranks as dense indices.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
import scipy.sparse as sp
from scipy.spatial import Delaunay, QhullError
from scipy.spatial.distance import pdist, squareform

from .pointcloud import PointCloud

DEFAULT_MAX_SIMPLICES = 2_000_000


class ComplexError(ValueError):
    pass


class SimplexBudgetError(ComplexError):
    pass


class DegenerateInputError(ComplexError):
    pass


def _row_keys(rows: np.ndarray, base: int) -> Optional[np.ndarray]:
    """Encode integer rows as base-``base`` int64 keys, or None on overflow."""
    width = rows.shape[1]
    if width * math.log2(max(base, 2)) >= 62:
        return None
    keys = np.zeros(rows.shape[0], dtype=np.int64)
    for j in range(width):
        keys = keys * base + rows[:, j]
    return keys


def _lookup_rows(table: np.ndarray, queries: np.ndarray, base: int) -> np.ndarray:
    """Return the row index in ``table`` of every row of ``queries``.

    Raises ComplexError if any query row is missing (downward closure).
    """
    shape = queries.shape[:-1]
    q = queries.reshape(-1, queries.shape[-1])
    tkeys = _row_keys(table, base)
    if tkeys is not None:
        qkeys = _row_keys(q, base)
        order = np.argsort(tkeys, kind="stable")
        pos = np.searchsorted(tkeys[order], qkeys)
        pos = np.minimum(pos, len(order) - 1) if len(order) else pos
        if len(order) == 0 or np.any(tkeys[order][pos] != qkeys):
            raise ComplexError("complex is not closed under taking faces")
        return order[pos].reshape(shape)
    index = {tuple(r): i for i, r in enumerate(table.tolist())}
    try:
        out = np.array([index[tuple(r)] for r in q.tolist()], dtype=np.int64)
    except KeyError:
        raise ComplexError("complex is not closed under taking faces") from None
    return out.reshape(shape)


@dataclass(eq=False)
class FilteredComplex:
    """A simplicial filtration sorted by (value, dim, lex).

    ``simplices[k]`` holds the k-simplices, ``values[k]`` their filtration
    values and ``faces[k]`` (k >= 1) the ranks of their codimension-1 faces:
    column ``i`` is the face omitting the ``i``-th smallest vertex.
    """

    simplices: list[np.ndarray]
    values: list[np.ndarray]
    n_points: int
    kind: str = "custom"
    faces: list[Optional[np.ndarray]] = field(default_factory=list)

    @property
    def dim(self) -> int:
        """Dimension the complex was built to (may exceed the top non-empty one)."""
        return len(self.simplices) - 1

    def count(self, k: int) -> int:
        return self.simplices[k].shape[0] if 0 <= k <= self.dim else 0

    def __len__(self) -> int:
        return sum(s.shape[0] for s in self.simplices)

    @property
    def max_value(self) -> float:
        vals = [v.max() for v in self.values if v.size]
        return float(max(vals)) if vals else 0.0

    def rank_of(self, simplex) -> int:
        s = np.array(sorted(simplex), dtype=np.int64)
        k = s.size - 1
        hits = np.flatnonzero(np.all(self.simplices[k] == s, axis=1))
        if hits.size == 0:
            raise KeyError(tuple(s.tolist()))
        return int(hits[0])

    def value_of(self, simplex) -> float:
        k = len(simplex) - 1
        return float(self.values[k][self.rank_of(simplex)])

    def iter_ordered(self) -> Iterator[tuple[tuple[int, ...], float]]:
        """Yield ``(vertices, value)`` for every simplex in the total order."""
        vals = np.concatenate(self.values)
        dims = np.concatenate([np.full(v.size, k) for k, v in enumerate(self.values)])
        ranks = np.concatenate([np.arange(v.size) for v in self.values])
        for g in np.lexsort((ranks, dims, vals)):
            k, r = int(dims[g]), int(ranks[g])
            yield tuple(self.simplices[k][r].tolist()), float(self.values[k][r])

    def dump(self, path) -> None:
        """Write one simplex per line as ``v0 v1 ... vk : value``."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for verts, val in self.iter_ordered():
                fh.write(" ".join(map(str, verts)) + f" : {val!r}\n")


def assemble_filtration(simplices: list[np.ndarray], values: list[np.ndarray],
                        n_points: int, kind: str = "custom") -> FilteredComplex:
    """Sort per-dimension simplex arrays into filtration order and link faces.

    Rows are sorted internally; the result satisfies downward closure or a
    :class:`ComplexError` is raised.
    """
    out_s, out_v = [], []
    for k, (s, v) in enumerate(zip(simplices, values)):
        s = np.sort(np.asarray(s, dtype=np.int64).reshape(-1, k + 1), axis=1)
        v = np.asarray(v, dtype=np.float64).reshape(-1)
        if s.shape[0] != v.shape[0]:
            raise ComplexError(f"dimension {k}: {s.shape[0]} simplices but {v.shape[0]} values")
        keys = [s[:, j] for j in range(k, -1, -1)] + [v]
        order = np.lexsort(keys)
        out_s.append(np.ascontiguousarray(s[order]))
        out_v.append(v[order])
    faces: list[Optional[np.ndarray]] = [None]
    for k in range(1, len(out_s)):
        s = out_s[k]
        if s.shape[0] == 0:
            faces.append(np.zeros((0, k + 1), dtype=np.int64))
            continue
        drop = np.stack([np.delete(s, i, axis=1) for i in range(k + 1)], axis=1)
        f = _lookup_rows(out_s[k - 1], drop, max(n_points, 2))
        faces.append(f)
    return FilteredComplex(out_s, out_v, n_points, kind, faces)


# --------------------------------------------------------------------------
# Vietoris-Rips


def build_vr_filtration(pc: PointCloud, max_dim: int, max_radius: Optional[float] = None,
                        max_simplices: int = DEFAULT_MAX_SIMPLICES) -> FilteredComplex:
    """Vietoris-Rips filtration with simplices up to dimension ``max_dim + 1``.

    A simplex enters at the largest pairwise distance among its vertices;
    with ``max_radius`` only simplices of diameter ``<= max_radius`` are kept.
    """
    if max_dim < 0:
        raise ComplexError("max_dim must be non-negative")
    if max_radius is not None and not max_radius > 0:
        raise ComplexError("max_radius must be positive")
    n = len(pc)
    top = max_dim + 1
    dist = squareform(pdist(pc.points)) if n > 1 else np.zeros((n, n))
    radius = np.inf if max_radius is None else float(max_radius)
    adj = dist <= radius
    np.fill_diagonal(adj, False)

    simplices = [np.arange(n, dtype=np.int64).reshape(-1, 1)]
    values = [np.zeros(n)]
    total = n
    if total > max_simplices:
        raise SimplexBudgetError(f"more than {max_simplices} simplices")
    upper = np.triu(adj, 1)
    for k in range(1, top + 1):
        prev, pvals = simplices[-1], values[-1]
        new_s, new_v = [], []
        chunk = max(1, 2_000_000 // max(n, 1))
        for lo in range(0, prev.shape[0], chunk):
            block = prev[lo:lo + chunk]
            if k == 1:
                cand = upper[block[:, 0]]
            else:
                cand = upper[block[:, -1]].copy()
                for j in range(block.shape[1] - 1):
                    cand &= adj[block[:, j]]
            rows, cols = np.nonzero(cand)
            if rows.size == 0:
                continue
            grown = np.column_stack([block[rows], cols])
            diam = dist[block[rows], cols[:, None]].max(axis=1)
            new_s.append(grown)
            new_v.append(np.maximum(pvals[lo:lo + chunk][rows], diam))
            total += rows.size
            if total > max_simplices:
                raise SimplexBudgetError(
                    f"Vietoris-Rips complex exceeds {max_simplices} simplices; "
                    "lower max_dim or set a max_radius")
        simplices.append(np.vstack(new_s) if new_s else np.zeros((0, k + 1), dtype=np.int64))
        values.append(np.concatenate(new_v) if new_v else np.zeros(0))
    return assemble_filtration(simplices, values, n, kind="vr")


# --------------------------------------------------------------------------
# Delaunay / alpha


def delaunay(pc: PointCloud) -> np.ndarray:
    """Top-dimensional simplices of a Delaunay triangulation (2-d or 3-d).

    Returns an ``(m, d + 1)`` array with sorted rows. Qhull's triangulated
    output resolves cospherical ties deterministically.
    """
    d = pc.ambient_dim
    if d not in (2, 3):
        raise ComplexError(f"Delaunay triangulation is only supported in 2-d and 3-d, got {d}-d")
    if len(pc) < d + 1:
        raise DegenerateInputError(f"need at least {d + 1} points, got {len(pc)}")
    try:
        tri = Delaunay(pc.points)
    except QhullError as exc:
        raise DegenerateInputError(f"degenerate point configuration: {str(exc).splitlines()[0]}") from None
    simp = np.sort(tri.simplices.astype(np.int64), axis=1)
    return simp[np.lexsort(simp.T[::-1])]


def circumspheres(points: np.ndarray, simplices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centres and radii of the smallest circumspheres of ``simplices``.

    The centre lies in the affine hull of each simplex. Degenerate simplices
    get an infinite radius.
    """
    m, kp1 = simplices.shape
    if kp1 == 1:
        return points[simplices[:, 0]].copy(), np.zeros(m)
    p0 = points[simplices[:, 0]]
    a = points[simplices[:, 1:]] - p0[:, None, :]
    gram = np.einsum("mid,mjd->mij", a, a)
    rhs = 0.5 * np.einsum("mii->mi", gram)
    lam = np.full((m, kp1 - 1), np.nan)
    ok = np.abs(np.linalg.det(gram)) > 1e-300
    if np.any(ok):
        lam[ok] = np.linalg.solve(gram[ok], rhs[ok][..., None])[..., 0]
    centres = p0 + np.einsum("mi,mid->md", np.nan_to_num(lam), a)
    radii = np.linalg.norm(centres - p0, axis=1)
    bad = ~ok | ~np.isfinite(radii)
    radii[bad] = np.inf
    return centres, radii


def build_alpha_filtration(pc: PointCloud, max_dim: Optional[int] = None,
                           values: str = "gabriel") -> FilteredComplex:
    """Alpha filtration on the Delaunay triangulation of a 2-d or 3-d cloud.

    ``values="gabriel"`` assigns each simplex the radius of its smallest
    empty circumsphere: its own circumradius when no vertex of a coface lies
    strictly inside that sphere, otherwise the smallest value among its
    cofaces. ``values="circumradius"`` uses the plain circumradius of every
    simplex. In both cases values are then raised to the maximum over faces
    so the filtration is monotone. Vertices enter at 0.

    With ``max_dim`` given, simplices above dimension ``max_dim + 1`` are
    dropped after the values have been computed.
    """
    if values not in ("gabriel", "circumradius"):
        raise ValueError(f"unknown alpha value rule {values!r}")
    d = pc.ambient_dim
    top = delaunay(pc)
    if max_dim is not None and max_dim + 1 > d:
        raise ComplexError(
            f"max_dim={max_dim} needs {max_dim + 1}-simplices but a {d}-d Delaunay "
            f"triangulation has none")
    n = len(pc)
    base = max(n, 2)
    simp: list[np.ndarray] = [None] * (d + 1)
    simp[d] = top
    for k in range(d - 1, -1, -1):
        faces = np.vstack([top[:, list(c)] for c in itertools.combinations(range(d + 1), k + 1)])
        simp[k] = np.unique(faces, axis=0)
    # vertices that qhull left out (duplicates) still exist as 0-simplices
    simp[0] = np.arange(n, dtype=np.int64).reshape(-1, 1)
    links = [None] + [
        _lookup_rows(simp[k - 1], np.stack([np.delete(simp[k], i, axis=1) for i in range(k + 1)], axis=1), base)
        for k in range(1, d + 1)
    ]
    centres, radii = [], []
    for k in range(d + 1):
        c, r = circumspheres(pc.points, simp[k])
        centres.append(c)
        radii.append(r)

    vals: list[np.ndarray] = [None] * (d + 1)
    vals[d] = radii[d].copy()
    for k in range(d, 0, -1):
        nf = simp[k - 1].shape[0]
        if k - 1 == 0:
            vals[0] = np.zeros(nf)
            break
        if values == "circumradius":
            vals[k - 1] = radii[k - 1].copy()
            continue
        face_idx = links[k].ravel()
        opposite = simp[k].ravel()
        diff = pc.points[opposite] - centres[k - 1][face_idx]
        d2 = np.einsum("ij,ij->i", diff, diff)
        r2 = radii[k - 1][face_idx] ** 2
        inside = (r2 - d2) > 1e-10 * r2
        attached = np.bincount(face_idx, weights=inside, minlength=nf) > 0
        cmin = np.full(nf, np.inf)
        np.minimum.at(cmin, face_idx, np.repeat(vals[k], k + 1))
        vals[k - 1] = np.where(attached, cmin, radii[k - 1])
    if d >= 1 and vals[0] is None:
        vals[0] = np.zeros(n)
    for k in range(1, d + 1):
        vals[k] = np.maximum(vals[k], vals[k - 1][links[k]].max(axis=1))
    keep = d + 1 if max_dim is None else max_dim + 2
    return assemble_filtration(simp[:keep], vals[:keep], n, kind="alpha")


def build_filtration(pc: PointCloud, max_dim: int, complex: str = "auto",
                     max_radius: Optional[float] = None, **kwargs) -> FilteredComplex:
    """Alpha for ambient dimension <= 3, Vietoris-Rips otherwise (``complex="auto"``)."""
    if complex == "auto":
        complex = "alpha" if pc.ambient_dim in (2, 3) else "vr"
    if complex == "alpha":
        fc = build_alpha_filtration(pc, max_dim, values=kwargs.get("alpha_values", "gabriel"))
        if max_radius is not None:
            fc = truncate(fc, max_radius)
        return fc
    if complex == "vr":
        return build_vr_filtration(pc, max_dim, max_radius,
                                   kwargs.get("max_simplices", DEFAULT_MAX_SIMPLICES))
    raise ValueError(f"unknown complex type {complex!r}")


def truncate(fc: FilteredComplex, t: float) -> FilteredComplex:
    """Sub-filtration of simplices with value <= t (same ranks, fewer rows)."""
    m = [int(np.searchsorted(v, t, side="right")) for v in fc.values]
    faces = [None] + [fc.faces[k][:m[k]] for k in range(1, fc.dim + 1)]
    return FilteredComplex([s[:c] for s, c in zip(fc.simplices, m)],
                           [v[:c] for v, c in zip(fc.values, m)], fc.n_points, fc.kind, faces)


# --------------------------------------------------------------------------
# Snapshots and boundary matrices


@dataclass(eq=False)
class SnapshotComplex:
    """The sublevel set ``{sigma : value(sigma) <= threshold}`` of a filtration.

    Local indices coincide with parent ranks: the k-simplices of the
    snapshot are the first ``counts[k]`` k-simplices of ``parent``.
    """

    parent: FilteredComplex
    threshold: float
    counts: tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.parent.dim

    def count(self, k: int) -> int:
        return self.counts[k] if 0 <= k < len(self.counts) else 0

    def simplices(self, k: int) -> np.ndarray:
        return self.parent.simplices[k][:self.count(k)]

    def values(self, k: int) -> np.ndarray:
        return self.parent.values[k][:self.count(k)]

    def parent_index(self, k: int) -> np.ndarray:
        return np.arange(self.count(k))

    def faces(self, k: int) -> np.ndarray:
        return self.parent.faces[k][:self.count(k)]

    def __len__(self) -> int:
        return sum(self.counts)


def snapshot(fc: FilteredComplex, t: float) -> SnapshotComplex:
    if t < 0:
        raise ComplexError("snapshot threshold must be non-negative")
    counts = tuple(int(np.searchsorted(v, t, side="right")) for v in fc.values)
    return SnapshotComplex(fc, float(t), counts)


def boundary_matrix(sc: SnapshotComplex | FilteredComplex, k: int) -> sp.csc_matrix:
    """Signed boundary matrix from (k+1)-chains to k-chains.

    Entry ``(rho, sigma)`` is ``(-1)**i`` when ``rho`` is ``sigma`` with its
    ``i``-th smallest vertex removed.
    """
    if isinstance(sc, FilteredComplex):
        sc = snapshot(sc, np.inf)
    if not 0 <= k < sc.dim:
        raise ComplexError(f"boundary matrix B_{k} undefined for a {sc.dim}-dimensional complex")
    faces = sc.faces(k + 1)
    ncol = faces.shape[0]
    signs = np.tile((-1) ** np.arange(k + 2), ncol).astype(np.int64)
    cols = np.repeat(np.arange(ncol), k + 2)
    return sp.csc_matrix((signs, (faces.ravel(), cols)), shape=(sc.count(k), ncol))
