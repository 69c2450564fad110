"""Assignment kernels: proposer-optimal Gale-Shapley and the Hungarian method.

Both work on square instances. Rectangular problems are padded with dummy
participants whose weights equal :data:`DUMMY`, which sits below every
real weight but above ``-inf``; ``-inf`` marks a forbidden pairing. A
participant therefore prefers staying unmatched (a dummy partner) over a
forbidden partner, and both solvers use forbidden cells only when forced.

Ties in preference lists are broken by ascending index.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np

DUMMY = -sys.float_info.max


@dataclass(frozen=True)
class PreferenceInstance:
    proposer_prefs: np.ndarray  # (n, n): row i lists proposees, most preferred first
    proposee_prefs: np.ndarray  # (n, n): row j lists proposers, most preferred first
    proposer_dummy: np.ndarray  # (n,) bool
    proposee_dummy: np.ndarray  # (n,) bool

    def __post_init__(self):
        a, b = np.asarray(self.proposer_prefs), np.asarray(self.proposee_prefs)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
            raise ValueError("preference lists must form two square n x n tables")
        ref = np.arange(a.shape[0])
        for name, table in (("proposer", a), ("proposee", b)):
            if a.size and not np.all(np.sort(table, axis=1) == ref):
                raise ValueError(f"every {name} list must be a permutation of the other side")

    @property
    def n(self) -> int:
        return len(self.proposer_prefs)


def pad_square(w, fill: float = DUMMY) -> tuple[np.ndarray, int, int]:
    """Pad an (r, c) weight matrix to square with ``fill``; returns (W, r, c)."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 2:
        raise ValueError("weights must be a 2-D matrix")
    r, c = w.shape
    n = max(r, c)
    out = np.full((n, n), fill)
    out[:r, :c] = w
    return out, r, c


def prefs_from_weights(w, n_rows: int | None = None, n_cols: int | None = None) -> PreferenceInstance:
    """Rank both sides of a square weight matrix by descending weight.

    Rows are proposers, columns proposees. Rows at index ``>= n_rows`` and
    columns ``>= n_cols`` are flagged as dummies.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("prefs_from_weights needs a square matrix; pad it first")
    if np.any(np.isnan(w)) or np.any(w == np.inf):
        raise ValueError("weights must be finite or -inf")
    n = w.shape[0]
    n_rows = n if n_rows is None else n_rows
    n_cols = n if n_cols is None else n_cols
    idx = np.arange(n)
    # stable sort of -w: descending weight, ties by ascending index, -inf last
    rows = np.argsort(-w, axis=1, kind="stable")
    cols = np.argsort(-w.T, axis=1, kind="stable")
    return PreferenceInstance(rows, cols, idx >= n_rows, idx >= n_cols)


def _deferred_acceptance(prefs: np.ndarray, proposee_prefs: np.ndarray) -> tuple[np.ndarray, int]:
    n = len(prefs)
    rank = np.empty((n, n), dtype=int)
    rows = np.arange(n)[:, None]
    rank[rows, proposee_prefs] = np.arange(n)[None, :]
    prefs_l = prefs.tolist()
    rank_l = rank.tolist()

    nxt = [0] * n
    holder = [-1] * n
    free = list(range(n - 1, -1, -1))
    proposals = 0
    while free:
        i = free.pop()
        j = prefs_l[i][nxt[i]]
        nxt[i] += 1
        proposals += 1
        cur = holder[j]
        if cur < 0:
            holder[j] = i
        elif rank_l[j][i] < rank_l[j][cur]:
            holder[j] = i
            free.append(cur)
        else:
            free.append(i)

    match = np.empty(n, dtype=int)
    for j, i in enumerate(holder):
        match[i] = j
    return match, proposals


def gale_shapley(inst: PreferenceInstance) -> np.ndarray:
    """Proposer-optimal stable matching; ``match[i]`` is proposer i's partner."""
    if inst.n == 0:
        return np.zeros(0, dtype=int)
    return _deferred_acceptance(np.asarray(inst.proposer_prefs), np.asarray(inst.proposee_prefs))[0]


def count_proposals(inst: PreferenceInstance) -> int:
    if inst.n == 0:
        return 0
    return _deferred_acceptance(np.asarray(inst.proposer_prefs), np.asarray(inst.proposee_prefs))[1]


def blocking_pairs(inst: PreferenceInstance, match) -> list[tuple[int, int]]:
    """All (proposer, proposee) pairs that would both rather be together."""
    n = inst.n
    match = np.asarray(match)
    partner_of = np.empty(n, dtype=int)
    partner_of[match] = np.arange(n)
    p_rank = np.empty((n, n), dtype=int)
    q_rank = np.empty((n, n), dtype=int)
    for i in range(n):
        p_rank[i, inst.proposer_prefs[i]] = np.arange(n)
        q_rank[i, inst.proposee_prefs[i]] = np.arange(n)
    out = []
    for i in range(n):
        for j in range(n):
            if p_rank[i, j] < p_rank[i, match[i]] and q_rank[j, i] < q_rank[j, partner_of[j]]:
                out.append((i, j))
    return out


def _finite_costs(w: np.ndarray) -> np.ndarray:
    """Map DUMMY / -inf to finite penalties that keep their ordering strict.

    Any assignment using fewer forbidden cells beats one using more, and
    with equal forbidden counts fewer dummy cells win.
    """
    n = len(w)
    forbidden = np.isneginf(w)
    dummy = w == DUMMY
    real = ~(forbidden | dummy)
    if real.any():
        lo, hi = float(w[real].min()), float(w[real].max())
    else:
        lo = hi = 0.0
    span = hi - lo + 1.0
    dummy_w = lo - (n + 1) * span
    forbid_w = dummy_w - (n + 1) * (hi - dummy_w + 1.0)
    out = w.copy()
    out[dummy] = dummy_w
    out[forbidden] = forbid_w
    return out


def hungarian(w, maximize: bool = True) -> np.ndarray:
    """Optimal perfect assignment of a square matrix; ``match[i]`` = column of row i.

    Shortest-augmenting-path form of the Kuhn-Munkres method with row/column
    potentials, O(n^3).
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("hungarian needs a square matrix; pad it first")
    n = len(w)
    if n == 0:
        return np.zeros(0, dtype=int)
    if np.any(np.isnan(w)) or np.any(w == np.inf):
        raise ValueError("weights must be finite or -inf")
    cost = _finite_costs(w)
    if maximize:
        cost = -cost
    a = cost.tolist()

    inf = float("inf")
    u = [0.0] * (n + 1)
    v = [0.0] * (n + 1)
    p = [0] * (n + 1)  # p[j]: row (1-based) holding column j, 0 if free
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = a[i0 - 1]
            ui0 = u[i0]
            delta = inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    match = np.empty(n, dtype=int)
    for j in range(1, n + 1):
        match[p[j] - 1] = j - 1
    return match


def total_weight(w, match) -> float:
    w = np.asarray(w, dtype=float)
    return float(w[np.arange(len(match)), match].sum())
