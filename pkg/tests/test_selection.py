import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from topf.persistence import PersistenceDiagram, PersistencePair
from topf.selection import (SelectionParams, choose_cut, drop_off_quotients, select_features,
                            simple_cut)

EMPTY = (np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
PURE = SelectionParams(min_rel_quot=0.0)


def diagram(by_dim, essential=(0,)):
    pairs, c = [], 0
    for k, lifes in by_dim.items():
        for l in lifes:
            pairs.append(PersistencePair(k, 1.0, 1.0 + l, c, c, EMPTY))
            c += 1
    for k in essential:
        pairs.append(PersistencePair(k, 0.0, math.inf, c, None, EMPTY))
        c += 1
    return PersistenceDiagram(pairs, None, max(by_dim) if by_dim else 0)


def finite_counts(fs, dims):
    return [sum(1 for f in fs.in_dim(k) if not f.essential) for k in dims]


def test_quotients_example():
    q = drop_off_quotients([8, 4, 0.4, 0.3])
    assert np.allclose(q, [0.5, 0.1, 0.75], rtol=0, atol=1e-12)
    assert choose_cut([8, 4, 0.4, 0.3])[0] == 2


def test_beta_term_is_one_indexed():
    q = drop_off_quotients([4, 2, 1], beta=1.0)
    assert np.allclose(q, [0.5 * 2, 0.5 * 1.5])


def test_single_class_is_kept():
    assert choose_cut([3.0]) == (1, None)
    fs = select_features(diagram({0: [], 1: [0.7]}), end_value=5.0)
    assert finite_counts(fs, [1]) == [1]


def test_no_steep_drop_falls_back_to_argmin():
    n, q = choose_cut([10, 9.5, 9, 8.8], SelectionParams(min_rel_quot=0.1))
    assert n == 2 and abs(q - 9 / 9.5) < 1e-12


def test_last_steep_drop_wins():
    # two steep drops: [5, 0.4] and [0.35, 0.01]; both are eligible
    assert choose_cut([5, 0.4, 0.35, 0.01], floor=0.0)[0] == 3
    # with the lifetime floor the second drop starts too low
    assert choose_cut([5, 0.4, 0.35, 0.01], floor=0.5)[0] == 1


def test_lifetime_floor_across_dimensions():
    fs = select_features(diagram({0: [0.01, 0.005], 1: [2.0, 1.9, 0.02], 2: [0.1, 0.09, 0.001]}),
                         end_value=10.0)
    assert finite_counts(fs, [0, 1, 2]) == [0, 2, 0]


def test_min_0_ratio():
    d = diagram({0: [9.0, 4.0, 0.01], 1: [1.0, 0.9, 0.001]})
    fs = select_features(d, end_value=20.0)
    # H0 cut keeps two classes; only 9.0 >= 5 * 0.9
    assert [f.lifetime for f in fs.in_dim(0) if not f.essential] == [9.0]
    fs = select_features(d, SelectionParams(min_0_ratio=1.0), end_value=20.0)
    assert finite_counts(fs, [0]) == [2]


def test_dimension_zero_unguarded_without_higher_features():
    fs = select_features(diagram({0: [3.0, 2.9, 0.01], 1: []}), end_value=10.0)
    assert finite_counts(fs, [0, 1]) == [2, 0]


def test_essential_classes_always_selected():
    fs = select_features(diagram({0: [0.0, 0.0], 1: [0.0]}, essential=(0, 1)), end_value=7.0)
    ess = [f for f in fs if f.essential]
    assert len(fs) == 2 and len(ess) == 2
    assert all(f.death == 7.0 for f in ess)


def test_zero_persistence_only_gives_no_finite_features():
    fs = select_features(diagram({0: [0.0, 0.0], 1: [0.0, 0.0]}, essential=()), end_value=1.0)
    assert len(fs) == 0


def test_invalid_params():
    with pytest.raises(ValueError):
        SelectionParams(beta=-1)
    with pytest.raises(ValueError):
        SelectionParams(min_0_ratio=-1)


lifetimes = st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=30)


@settings(max_examples=200, deadline=None)
@given(st.dictionaries(st.integers(0, 2), lifetimes, min_size=1), st.floats(1e-3, 1e3))
def test_scale_invariance(by_dim, c):
    d1 = diagram(by_dim)
    d2 = diagram({k: [c * l for l in v] for k, v in by_dim.items()})
    f1 = select_features(d1, end_value=1e6)
    f2 = select_features(d2, end_value=1e6)
    assert [(f.dim, f.pair.creator) for f in f1] == [(f.dim, f.pair.creator) for f in f2]


@settings(max_examples=200, deadline=None)
@given(lifetimes)
def test_beta_zero_is_simplified_heuristic(lifes):
    lifes = sorted(lifes, reverse=True)
    assert choose_cut(lifes, PURE)[0] == simple_cut(lifes)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(1e-3, 1e3), min_size=2, max_size=30, unique=True),
       st.floats(0, 5), st.floats(0, 5))
def test_beta_monotone_for_argmin(lifes, b1, b2):
    lifes = sorted(lifes, reverse=True)
    q1 = drop_off_quotients(lifes, min(b1, b2))
    q2 = drop_off_quotients(lifes, max(b1, b2))
    assume(np.unique(q1).size == q1.size and np.unique(q2).size == q2.size)
    lo = choose_cut(lifes, SelectionParams(beta=min(b1, b2), min_rel_quot=0.0))[0]
    hi = choose_cut(lifes, SelectionParams(beta=max(b1, b2), min_rel_quot=0.0))[0]
    assert hi >= lo


def test_beta_monotonicity_can_fail_with_steep_drop_rule():
    # raising beta lifts the last steep quotient above min_rel_quot
    lifes = [1.0, 0.09, 0.05, 0.0049]
    assert choose_cut(lifes, SelectionParams(beta=0.0))[0] == 3
    assert choose_cut(lifes, SelectionParams(beta=0.1))[0] == 1


@settings(max_examples=100, deadline=None)
@given(st.dictionaries(st.integers(0, 2), lifetimes, min_size=1))
def test_lifetimes_non_increasing_within_dimension(by_dim):
    fs = select_features(diagram(by_dim), end_value=1e6)
    for k in by_dim:
        l = [f.lifetime for f in fs.in_dim(k) if not f.essential]
        assert all(a >= b for a, b in zip(l, l[1:]))
