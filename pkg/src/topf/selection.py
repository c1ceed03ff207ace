"""Selection of significant persistence classes via drop-off quotients.

Within each dimension the finite, positive lifetimes are sorted in
non-increasing order ``l_1 >= l_2 >= ...`` and the cut ``N`` is placed at a
steep drop of the quotient ``q_i = l_{i+1} / l_i * (1 + beta / i)``.
Guards, applied in this order:

1. only cuts ``i`` with ``l_i >= L / max_total_quot`` are eligible, where
   ``L`` is the largest lifetime over all requested dimensions;
2. among eligible cuts with ``q_i <= min_rel_quot`` the last one wins,
   otherwise the smallest quotient does;
3. a dimension holding a single class selects it if it is eligible;
4. finite 0-dimensional classes must be ``min_0_ratio`` times more
   persistent than the least persistent selected higher-dimensional class.

Essential classes (infinite death) are always selected. They are excluded
from the quotients and guards and get ``death = max filtration value``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .persistence import PersistenceDiagram, PersistencePair

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SelectionParams:
    beta: float = 0.0
    min_rel_quot: float = 0.1
    max_total_quot: float = 10.0
    min_0_ratio: float = 5.0

    def __post_init__(self):
        if self.beta < 0:
            raise ValueError("beta must be non-negative")
        for name in ("min_rel_quot", "max_total_quot", "min_0_ratio"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(eq=False)
class Feature:
    dim: int
    index: int
    birth: float
    death: float
    pair: PersistencePair = field(repr=False)
    quotient: Optional[float] = None

    @property
    def lifetime(self) -> float:
        return self.death - self.birth

    @property
    def essential(self) -> bool:
        return self.pair.essential

    @property
    def generator(self):
        return self.pair.generator


@dataclass(eq=False)
class FeatureSet:
    features: list[Feature]

    def __len__(self):
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    def in_dim(self, k: int) -> list[Feature]:
        return [f for f in self.features if f.dim == k]


def drop_off_quotients(lifetimes, beta: float = 0.0) -> np.ndarray:
    """``q_i = l_{i+1} / l_i * (1 + beta / i)`` for i = 1..n-1 (1-indexed)."""
    l = np.asarray(lifetimes, dtype=float)
    if l.size < 2:
        return np.zeros(0)
    i = np.arange(1, l.size)
    return l[1:] / l[:-1] * (1.0 + beta / i)


def choose_cut(lifetimes, params: SelectionParams = SelectionParams(),
               floor: float = 0.0) -> tuple[int, Optional[float]]:
    """Number of leading classes to keep from sorted lifetimes, and the cut quotient.

    ``floor`` is the eligibility threshold on ``l_i`` for a cut at ``i``.
    Returns ``(0, None)`` when no cut is eligible.
    """
    l = np.asarray(lifetimes, dtype=float)
    if l.size == 0 or l[0] < floor:
        return 0, None
    if l.size == 1:
        return 1, None
    q = drop_off_quotients(l, params.beta)
    eligible = np.flatnonzero(l[:-1] >= floor)
    qe = q[eligible]
    steep = eligible[qe <= params.min_rel_quot]
    cut = int(steep[-1]) if steep.size else int(eligible[np.argmin(qe)])
    return cut + 1, float(q[cut])


def simple_cut(lifetimes) -> int:
    """Unguarded cut: argmin of ``l_{i+1} / l_i``."""
    l = np.asarray(lifetimes, dtype=float)
    if l.size < 2:
        return int(l.size)
    return int(np.argmin(l[1:] / l[:-1])) + 1


def _sorted_finite(diag: PersistenceDiagram, k: int) -> list[PersistencePair]:
    pairs = [p for p in diag.in_dim(k) if not p.essential and p.lifetime > 0]
    return sorted(pairs, key=lambda p: (-p.lifetime, p.birth, p.creator))


def select_features(diag: PersistenceDiagram, params: SelectionParams = SelectionParams(),
                    dims: Optional[Iterable[int]] = None,
                    end_value: Optional[float] = None) -> FeatureSet:
    """Pick the significant classes of ``diag`` in the requested dimensions.

    ``end_value`` replaces the infinite death of essential classes; it
    defaults to the largest filtration value of the diagram's complex.
    """
    dims = sorted(set(range(diag.max_dim + 1) if dims is None else dims))
    if end_value is None:
        end_value = diag.complex.max_value
    finite = {k: _sorted_finite(diag, k) for k in dims}
    top = max((ps[0].lifetime for ps in finite.values() if ps), default=0.0)
    floor = top / params.max_total_quot if params.max_total_quot > 0 else 0.0

    chosen: dict[int, list[Feature]] = {}
    for k in dims:
        ps = finite[k]
        n, q = choose_cut([p.lifetime for p in ps], params, floor)
        chosen[k] = [Feature(k, i + 1, p.birth, p.death, p, q) for i, p in enumerate(ps[:n])]
        log.debug("dimension %d: %d finite classes, keeping %d (cut quotient %s)",
                  k, len(ps), n, q)

    higher = [f.lifetime for k, fs in chosen.items() if k > 0 for f in fs]
    if 0 in chosen and higher:
        bar = params.min_0_ratio * min(higher)
        chosen[0] = [f for f in chosen[0] if f.lifetime >= bar]

    out: list[Feature] = []
    for k in dims:
        ess = sorted((p for p in diag.in_dim(k) if p.essential), key=lambda p: (p.birth, p.creator))
        for p in ess:
            death = max(end_value, p.birth)
            out.append(Feature(k, 0, p.birth, death, p, None))
        out.extend(chosen[k])
    return FeatureSet(out)
