"""Persistent homology over F3 = Z/3Z with representative cycles.

Coefficients are the integers 0, 1, 2 with 2 playing the role of -1, the
smallest field in which a simplex and its reverse orientation differ.

Pairs in dimension k >= 1 come from reducing the boundary columns of the
(k+1)-simplices, highest dimension first so that positive columns can be
cleared. Dimension 0 uses union-find with the elder rule, which yields the
same pairing as reducing the edge columns. The representative of a finite
class is the reduced column of its destroyer: a cycle made of simplices
that precede the creator, so it already lives in the complex at birth.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .complex import ComplexError, FilteredComplex, SnapshotComplex, boundary_matrix

Chain = tuple[np.ndarray, np.ndarray]  # (ranks, coefficients in {1, 2})


def f3(x) -> np.ndarray:
    """Reduce integers to their F3 representatives in {0, 1, 2}."""
    return np.mod(np.asarray(x, dtype=np.int64), 3)


@dataclass(eq=False)
class PersistencePair:
    dim: int
    birth: float
    death: float
    creator: int
    destroyer: Optional[int]
    generator: Chain = field(repr=False)

    @property
    def lifetime(self) -> float:
        return self.death - self.birth

    @property
    def essential(self) -> bool:
        return math.isinf(self.death)

    @property
    def zero_persistence(self) -> bool:
        return self.death == self.birth


@dataclass(eq=False)
class PersistenceDiagram:
    pairs: list[PersistencePair]
    complex: FilteredComplex = field(repr=False)
    max_dim: int = 0

    def in_dim(self, k: int, include_zero: bool = True) -> list[PersistencePair]:
        return [p for p in self.pairs
                if p.dim == k and (include_zero or not p.zero_persistence)]

    def intervals(self, k: int) -> np.ndarray:
        """(birth, death) rows of the positive-persistence pairs in dimension k."""
        rows = [(p.birth, p.death) for p in self.in_dim(k, include_zero=False)]
        return np.array(rows, dtype=float).reshape(-1, 2)

    def alive_at(self, k: int, t: float) -> int:
        return sum(1 for p in self.in_dim(k) if p.birth <= t < p.death)

    def to_records(self) -> list[dict]:
        out = []
        for p in self.pairs:
            verts = self.complex.simplices[p.dim][p.generator[0]]
            gen = [[v.tolist(), int(c)] for v, c in zip(verts, p.generator[1])]
            out.append({
                "dim": p.dim,
                "birth": p.birth,
                "death": None if p.essential else p.death,
                "generator": gen,
            })
        return out

    def to_json(self, path=None, indent: Optional[int] = None) -> str:
        """Serialise as a JSON array; infinite deaths become ``null``."""
        text = json.dumps(self.to_records(), indent=indent, allow_nan=False)
        if path is not None:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text + "\n")
        return text


# --------------------------------------------------------------------------
# column arithmetic: a column is a pair of sets (rows with coeff 1, rows with coeff 2)


def _add(col, other, factor):
    """Return ``col + factor * other`` over F3."""
    p, m = col
    if factor == 1:
        q, n = other
    else:
        n, q = other
    both_p = p & q
    both_m = m & n
    cancel = (p & n) | (m & q)
    touched = both_p | both_m | cancel
    new_p = ((p | q) - touched) | both_m
    new_m = ((m | n) - touched) | both_p
    return new_p, new_m


def _pivot(col) -> int:
    p, m = col
    if p:
        return max(max(p), max(m)) if m else max(p)
    return max(m) if m else -1


def _coeff(col, row) -> int:
    return 1 if row in col[0] else 2


def _boundary_columns(faces: np.ndarray):
    """Boundary columns of all simplices whose face ranks are ``faces``."""
    width = faces.shape[1]
    plus = [i for i in range(width) if i % 2 == 0]
    minus = [i for i in range(width) if i % 2 == 1]
    fp = faces[:, plus].tolist()
    fm = faces[:, minus].tolist()
    return fp, fm


def _to_chain(col) -> Chain:
    rows = sorted(col[0] | col[1])
    coeffs = [1 if r in col[0] else 2 for r in rows]
    return np.array(rows, dtype=np.int64), np.array(coeffs, dtype=np.int64)


def _reduce_columns(faces: np.ndarray, clear: set[int]):
    """Reduce boundary columns left to right, skipping cleared ones.

    Returns ``(pairs, zero_cols)`` where ``pairs`` maps a pivot row to
    ``(column, reduced chain)`` and ``zero_cols`` lists columns that reduced
    to zero.
    """
    fp, fm = _boundary_columns(faces)
    lookup: dict[int, tuple[int, tuple[set, set]]] = {}
    zero = []
    for j in range(faces.shape[0]):
        if j in clear:
            continue
        col = (set(fp[j]), set(fm[j]))
        piv = _pivot(col)
        while piv >= 0:
            hit = lookup.get(piv)
            if hit is None:
                break
            other = hit[1]
            # eliminate pivot: c_j + f * c_i = 0, inverse of c in F3 is c
            f = (-_coeff(col, piv) * _coeff(other, piv)) % 3
            col = _add(col, other, f)
            piv = _pivot(col)
        if piv < 0:
            zero.append(j)
        else:
            lookup[piv] = (j, col)
    return lookup, zero


def _kernel_cycles(faces: np.ndarray, targets: Iterable[int]) -> dict[int, Chain]:
    """Cycles ``V e_j`` (with ``B V`` reduced) for columns reducing to zero.

    Used for essential classes, where no destroyer column exists.
    """
    targets = set(targets)
    if not targets:
        return {}
    fp, fm = _boundary_columns(faces)
    lookup = {}
    out = {}
    for j in range(max(targets) + 1):
        col = (set(fp[j]), set(fm[j]))
        vec = ({j}, set())
        piv = _pivot(col)
        while piv >= 0:
            hit = lookup.get(piv)
            if hit is None:
                break
            ocol, ovec = hit
            f = (-_coeff(col, piv) * _coeff(ocol, piv)) % 3
            col = _add(col, ocol, f)
            vec = _add(vec, ovec, f)
            piv = _pivot(col)
        if piv >= 0:
            lookup[piv] = (col, vec)
        elif j in targets:
            out[j] = _to_chain(vec)
    return out


def _find(parent: list[int], x: int) -> int:
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def compute_persistence(fc: FilteredComplex, max_dim: int) -> PersistenceDiagram:
    """Persistence pairs in dimensions ``0..max_dim`` with F3 generators.

    The filtration must contain simplices of dimension ``max_dim + 1``.
    Zero-persistence pairs are kept; see :attr:`PersistencePair.zero_persistence`.
    """
    if max_dim < 0:
        raise ComplexError("max_dim must be non-negative")
    if max_dim + 1 > fc.dim:
        raise ComplexError(
            f"homology up to dimension {max_dim} needs {max_dim + 1}-simplices; "
            f"the filtration only reaches dimension {fc.dim}")
    pairs: list[PersistencePair] = []
    vals = fc.values
    clear: set[int] = set()
    for k in range(max_dim + 1, 1, -1):
        lookup, zero = _reduce_columns(fc.faces[k], clear)
        for piv, (j, col) in lookup.items():
            pairs.append(PersistencePair(k - 1, float(vals[k - 1][piv]), float(vals[k][j]),
                                         piv, j, _to_chain(col)))
        if k <= max_dim:
            essential = [j for j in zero]
            cycles = _kernel_cycles(fc.faces[k], essential)
            for j in essential:
                pairs.append(PersistencePair(k, float(vals[k][j]), math.inf, j, None, cycles[j]))
        clear = set(lookup.keys())

    # dimension 0 via union-find on vertex ranks
    nv = fc.count(0)
    parent = list(range(nv))
    positive_edges = []
    edge_faces = fc.faces[1].tolist() if fc.dim >= 1 else []
    for e, (a, b) in enumerate(edge_faces):
        ra, rb = _find(parent, a), _find(parent, b)
        if ra == rb:
            positive_edges.append(e)
            continue
        young, old = (ra, rb) if ra > rb else (rb, ra)
        parent[young] = old
        gen = (np.array([old, young], dtype=np.int64), np.array([2, 1], dtype=np.int64))
        pairs.append(PersistencePair(0, float(vals[0][young]), float(vals[1][e]), young, e, gen))
    for v in range(nv):
        if _find(parent, v) == v:
            pairs.append(PersistencePair(0, float(vals[0][v]), math.inf, v, None,
                                         (np.array([v], dtype=np.int64), np.array([1], dtype=np.int64))))
    if max_dim >= 1:
        essential = [e for e in positive_edges if e not in clear]
        cycles = _kernel_cycles(fc.faces[1], essential)
        for e in essential:
            pairs.append(PersistencePair(1, float(vals[1][e]), math.inf, e, None, cycles[e]))

    pairs.sort(key=lambda p: (p.dim, p.birth, p.death, p.creator))
    return PersistenceDiagram(pairs, fc, max_dim)


# --------------------------------------------------------------------------
# Betti numbers by rank computation (independent of the reduction above)


def rank_mod_p(matrix, p: int = 3) -> int:
    """Rank of an integer matrix over Z/pZ by dense Gaussian elimination."""
    a = np.mod(np.asarray(matrix.toarray() if hasattr(matrix, "toarray") else matrix,
                          dtype=np.int64), p)
    if a.size == 0:
        return 0
    rank = 0
    rows, cols = a.shape
    for c in range(cols):
        if rank == rows:
            break
        nz = np.flatnonzero(a[rank:, c])
        if nz.size == 0:
            continue
        r = rank + nz[0]
        if r != rank:
            a[[rank, r]] = a[[r, rank]]
        inv = pow(int(a[rank, c]), p - 2, p)
        a[rank] = (a[rank] * inv) % p
        others = np.flatnonzero(a[:, c])
        others = others[others != rank]
        if others.size:
            a[others] = (a[others] - np.outer(a[others, c], a[rank])) % p
        rank += 1
    return rank


def betti_numbers(sc: SnapshotComplex, max_dim: int) -> list[int]:
    """Betti numbers over F3: ``dim ker B_{k-1} - rank B_k`` for k <= max_dim."""
    ranks = []
    for k in range(0, max_dim + 1):
        ranks.append(rank_mod_p(boundary_matrix(sc, k)) if k < sc.dim else 0)
    out = []
    for k in range(max_dim + 1):
        kernel = sc.count(k) - (ranks[k - 1] if k >= 1 else 0)
        out.append(kernel - ranks[k])
    return out


def is_cycle(fc: FilteredComplex, k: int, chain: Chain) -> bool:
    """True when the F3 chain has zero boundary (every 0-chain is a cycle)."""
    if k == 0:
        return True
    ranks, coeffs = chain
    faces = fc.faces[k][ranks]
    signs = np.where(np.arange(k + 1) % 2 == 0, 1, -1)
    acc = np.zeros(fc.count(k - 1), dtype=np.int64)
    np.add.at(acc, faces.ravel(), (coeffs[:, None] * signs[None, :]).ravel())
    return not np.any(acc % 3)
