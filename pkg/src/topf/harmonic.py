"""Harmonic representatives of homology classes.

A persistence generator is embedded as a real k-chain in a snapshot of the
filtration and stripped of its gradient and curl components with two
sparse least-squares solves. Optional simplex weights enter through the
symmetric weighted Hodge Laplacian

    L_k^w = W^{1/2} B_{k-1}^T B_{k-1} W^{1/2} + W^{-1/2} B_k B_k^T W^{-1/2},

i.e. the weighted operators are ``B_{k-1} W^{1/2}`` and ``W^{-1/2} B_k``, and
the chain is rescaled to ``W^{-1/2} e`` before projecting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.linalg import lsmr

from .complex import SnapshotComplex, boundary_matrix

WEIGHT_SCHEMES = ("unweighted", "triangle", "effective_resistance")
EFFRES_BUDGET = 5000


class HarmonicError(RuntimeError):
    pass


class ConvergenceError(HarmonicError):
    def __init__(self, message, grad_residual, curl_residual):
        super().__init__(f"{message} (gradient residual {grad_residual:.3e}, "
                         f"curl residual {curl_residual:.3e})")
        self.grad_residual = grad_residual
        self.curl_residual = curl_residual


class WeightBudgetError(HarmonicError):
    pass


def interpolation_time(birth: float, death: float, k: int, lam: float = 0.3,
                       mode: str = "geometric") -> float:
    """Filtration step at which a class is turned into a harmonic chain.

    ``geometric``: ``birth**(1-lam) * death**lam`` for k >= 1 and
    ``lam * death`` for k = 0. ``linear``: ``lam * birth + (1-lam) * death``.
    A zero birth in positive dimension falls back to ``lam * death``.
    """
    if not 0 <= lam < 1:
        raise ValueError("lambda must lie in [0, 1)")
    if not (0 <= birth <= death) or math.isinf(death) or death <= 0:
        raise ValueError(f"invalid interval ({birth}, {death})")
    if mode == "linear":
        return lam * birth + (1 - lam) * death
    if mode != "geometric":
        raise ValueError(f"unknown interpolation mode {mode!r}")
    if k == 0 or birth == 0:
        return lam * death
    return birth ** (1 - lam) * death ** lam


def embed_generator(generator, sc: SnapshotComplex, k: int) -> np.ndarray:
    """Lift an F3 chain to a real vector over the k-simplices of ``sc``.

    Coefficient 1 maps to +1 and 2 to -1.
    """
    ranks, coeffs = generator
    n = sc.count(k)
    if ranks.size and ranks.max() >= n:
        raise HarmonicError(
            f"generator uses a {k}-simplex absent from the snapshot at t={sc.threshold}")
    e = np.zeros(n)
    e[ranks] = np.where(np.asarray(coeffs) % 3 == 1, 1.0, -1.0)
    return e


def coface_counts(sc: SnapshotComplex, k: int) -> np.ndarray:
    if k + 1 > sc.dim or sc.count(k + 1) == 0:
        return np.zeros(sc.count(k), dtype=np.int64)
    return np.bincount(sc.faces(k + 1).ravel(), minlength=sc.count(k))


def simplicial_weights(sc: SnapshotComplex, k: int, scheme: str = "triangle",
                       budget: int = EFFRES_BUDGET) -> np.ndarray:
    """Positive weights on the k-simplices of ``sc``.

    ``triangle``: ``1 / (number of (k+1)-cofaces + 1)**2``.
    ``effective_resistance``: squared diagonal of ``pinv(B_{k-1}) @ B_{k-1}``,
    computed densely, so limited to ``budget`` k-simplices. There is no
    lower boundary in dimension 0 and unit weights are returned there.
    """
    n = sc.count(k)
    if scheme in ("unweighted", "none"):
        return np.ones(n)
    if scheme == "triangle":
        return 1.0 / (coface_counts(sc, k) + 1.0) ** 2
    if scheme == "effective_resistance":
        if k == 0:
            return np.ones(n)
        if n > budget:
            raise WeightBudgetError(
                f"effective-resistance weights need a dense pseudoinverse over {n} "
                f"{k}-simplices (budget {budget}); use the triangle scheme instead")
        b = boundary_matrix(sc, k - 1).toarray().astype(float)
        pinv = np.linalg.pinv(b)
        diag = np.einsum("ij,ji->i", pinv, b)
        return diag ** 2
    raise ValueError(f"unknown weight scheme {scheme!r}")


def weighted_operators(sc: SnapshotComplex, k: int, w: Optional[np.ndarray] = None):
    """Return ``(B_{k-1} W^{1/2}, W^{-1/2} B_k)``; either may be None."""
    n = sc.count(k)
    if w is None:
        w = np.ones(n)
    w = np.asarray(w, dtype=float)
    if w.shape != (n,) or np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise HarmonicError("weights must be finite and strictly positive")
    down = up = None
    if k >= 1 and sc.count(k - 1) > 0:
        down = (boundary_matrix(sc, k - 1).astype(float) @ sp.diags(np.sqrt(w))).tocsr()
    if k + 1 <= sc.dim and sc.count(k + 1) > 0:
        up = (sp.diags(1.0 / np.sqrt(w)) @ boundary_matrix(sc, k).astype(float)).tocsr()
    return down, up


@dataclass
class HodgeParts:
    harmonic: np.ndarray
    gradient: np.ndarray
    curl: np.ndarray
    grad_residual: float
    curl_residual: float


def _lsq_image(a, rhs, tol, maxiter):
    """Orthogonal projection of ``rhs`` onto the column space of ``a``."""
    if a is None or a.shape[1] == 0 or not np.any(rhs):
        return np.zeros_like(rhs)
    it = maxiter if maxiter is not None else 10 * (a.shape[0] + a.shape[1])
    # lsmr stops on ||A^T r|| <= atol ||A|| ||r||; divide out ||A|| so the
    # tolerance bounds ||A^T r|| / ||r|| directly
    scale = max(1.0, spla.norm(a))
    x = lsmr(a, rhs, atol=tol / scale, btol=tol / scale, conlim=1e12, maxiter=it)[0]
    return a @ x


def hodge_decompose(e: np.ndarray, sc: SnapshotComplex, k: int,
                    w: Optional[np.ndarray] = None, tol: float = 1e-8,
                    contract: float = 1e-7, maxiter: Optional[int] = None,
                    refinements: int = 4) -> HodgeParts:
    """Split ``W^{-1/2} e`` into gradient, harmonic and curl parts.

    Both least-squares stages always run. If the harmonic part misses the
    residual contract ``||B_{k-1,w} h|| <= contract * ||h||`` (and the same
    for ``B_{k,w}^T``), the remaining components are projected out again
    with a tolerance 100 times tighter per pass;
    after ``refinements`` extra passes a :class:`ConvergenceError` is raised.
    """
    down, up = weighted_operators(sc, k, w)
    ew = np.asarray(e, dtype=float)
    if w is not None:
        ew = ew / np.sqrt(w)
    scale = np.linalg.norm(ew)
    grad = np.zeros_like(ew)
    curl = np.zeros_like(ew)
    h = ew.copy()
    for attempt in range(refinements + 1):
        t = max(tol * 0.01 ** attempt, 1e-15)
        g = _lsq_image(down.T if down is not None else None, h, t, maxiter)
        h = h - g
        c = _lsq_image(up, h, t, maxiter)
        h = h - c
        grad += g
        curl += c
        gres = float(np.linalg.norm(down @ h)) if down is not None else 0.0
        cres = float(np.linalg.norm(up.T @ h)) if up is not None else 0.0
        bound = contract * np.linalg.norm(h) + 1e-12 * scale
        if gres <= bound and cres <= bound:
            return HodgeParts(h, grad, curl, gres, cres)
    raise ConvergenceError("harmonic projection did not converge", gres, cres)


def harmonic_project(e: np.ndarray, sc: SnapshotComplex, k: int,
                     w: Optional[np.ndarray] = None, **kwargs) -> np.ndarray:
    """Harmonic part of the (rescaled) chain ``e`` in the weighted Hodge decomposition."""
    return hodge_decompose(e, sc, k, w, **kwargs).harmonic


def dump_chain(path, sc: SnapshotComplex, k: int, values: np.ndarray) -> None:
    """Write a real k-chain as CSV rows ``v0,...,vk,value``."""
    simp = sc.simplices(k)
    values = np.asarray(values, dtype=float)
    if values.shape != (simp.shape[0],):
        raise HarmonicError("chain length does not match the snapshot")
    head = ",".join(f"v{i}" for i in range(k + 1)) + ",value\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(head)
        for row, val in zip(simp.tolist(), values.tolist()):
            fh.write(",".join(map(str, row)) + f",{val!r}\n")
