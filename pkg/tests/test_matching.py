import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import all_stable_matchings, best_assignment_lex, best_assignment_total
from v2xsched.matching import (
    DUMMY,
    PreferenceInstance,
    blocking_pairs,
    count_proposals,
    gale_shapley,
    hungarian,
    pad_square,
    prefs_from_weights,
    total_weight,
)


def random_instance(rng, n):
    a = np.array([rng.permutation(n) for _ in range(n)]).reshape(n, n)
    b = np.array([rng.permutation(n) for _ in range(n)]).reshape(n, n)
    return PreferenceInstance(a, b, np.zeros(n, bool), np.zeros(n, bool))


def test_identical_rankings():
    # proposers A, B, C all rank 1 > 2 > 3; proposees all rank A > B > C
    prefs = np.tile(np.arange(3), (3, 1))
    inst = PreferenceInstance(prefs, prefs, np.zeros(3, bool), np.zeros(3, bool))
    assert gale_shapley(inst).tolist() == [0, 1, 2]
    assert len(all_stable_matchings(prefs, prefs)) == 1


def test_single_pair_and_empty():
    one = PreferenceInstance(np.array([[0]]), np.array([[0]]), np.zeros(1, bool), np.zeros(1, bool))
    assert gale_shapley(one).tolist() == [0]
    empty = prefs_from_weights(np.zeros((0, 0)))
    assert gale_shapley(empty).size == 0


def test_prefs_from_weights_rules():
    inst = prefs_from_weights(np.array([[3.0, 9.0, 1.0], [5, 5, 5], [-np.inf, DUMMY, 0.0]]))
    assert inst.proposer_prefs[0].tolist() == [1, 0, 2]
    assert inst.proposer_prefs[1].tolist() == [0, 1, 2]
    assert inst.proposer_prefs[2].tolist() == [2, 1, 0]
    with pytest.raises(ValueError):
        prefs_from_weights(np.ones((2, 3)))
    with pytest.raises(ValueError):
        prefs_from_weights(np.array([[np.nan]]))


def test_malformed_preferences_rejected():
    with pytest.raises(ValueError):
        PreferenceInstance(np.array([[0, 0], [0, 1]]), np.array([[0, 1], [0, 1]]), np.zeros(2, bool), np.zeros(2, bool))


def test_gale_shapley_stable_and_proposer_optimal():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(1, 7))
        inst = random_instance(rng, n)
        match = gale_shapley(inst)
        assert blocking_pairs(inst, match) == []
        stable = all_stable_matchings(inst.proposer_prefs, inst.proposee_prefs)
        assert any((s == match).all() for s in stable)
        rank = np.argsort(inst.proposer_prefs, axis=1)
        best = rank[np.arange(n)[None, :], stable].min(axis=0)
        assert np.array_equal(rank[np.arange(n), match], best)


def test_blocking_pair_scanner_detects_instability():
    prefs = np.tile(np.arange(2), (2, 1))
    inst = PreferenceInstance(prefs, prefs, np.zeros(2, bool), np.zeros(2, bool))
    assert blocking_pairs(inst, np.array([1, 0])) == [(0, 0)]


def test_hungarian_examples():
    w = np.array([[1, 2, 3], [2, 4, 6], [3, 6, 9]], float)
    m = hungarian(w)
    assert total_weight(w, m) == 14 and m.tolist() == [0, 1, 2]
    eye = np.eye(5) * 100 + np.random.default_rng(1).random((5, 5))
    assert hungarian(eye).tolist() == list(range(5))
    assert hungarian(np.zeros((0, 0))).size == 0
    assert hungarian(np.array([[1.0, 5.0], [2.0, 7.0]]), maximize=False).tolist() == [1, 0]


def test_hungarian_matches_brute_force_7x7():
    rng = np.random.default_rng(2)
    for _ in range(500):
        w = rng.normal(size=(7, 7)) * rng.choice([1, 1e3])
        assert total_weight(w, hungarian(w)) == pytest.approx(best_assignment_total(w), rel=1e-9, abs=1e-9)


def test_hungarian_uses_sentinels_only_when_forced():
    rng = np.random.default_rng(3)
    for _ in range(300):
        r, c = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        w = rng.random((r, c)) * 10
        w[rng.random((r, c)) < 0.3] = -np.inf
        sq, _, _ = pad_square(w)
        m = hungarian(sq)
        cells = sq[np.arange(len(sq)), m]
        got = (np.isneginf(cells).sum(), (cells == DUMMY).sum(),
               np.where(np.isneginf(cells) | (cells == DUMMY), 0, cells).sum())
        want = best_assignment_lex(sq, DUMMY)
        assert got[:2] == tuple(want[:2])
        assert got[2] == pytest.approx(want[2])


def test_hungarian_rejects_bad_input():
    with pytest.raises(ValueError):
        hungarian(np.ones((2, 3)))
    with pytest.raises(ValueError):
        hungarian(np.array([[np.inf]]))


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_optimal_dominates_stable(n, seed):
    w = np.random.default_rng(seed).random((n, n))
    inst = prefs_from_weights(w)
    gs = gale_shapley(inst)
    assert total_weight(w, hungarian(w)) >= total_weight(w, gs) - 1e-12
    assert blocking_pairs(inst, gs) == []


@given(st.integers(1, 30), st.integers(0, 2**32 - 1))
def test_proposals_bounded_by_n_squared(n, seed):
    inst = prefs_from_weights(np.random.default_rng(seed).random((n, n)))
    assert n <= count_proposals(inst) <= n * n


def test_deterministic_ties():
    w = np.ones((4, 4))
    assert gale_shapley(prefs_from_weights(w)).tolist() == [0, 1, 2, 3]
    assert np.array_equal(hungarian(w), hungarian(w))
