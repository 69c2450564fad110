"""CUE/VUE transmit power under the VUE outage constraint.

With Rayleigh fading on both the VUE link and the CUE -> VUE-receiver
interference link, the VUE SINR is ``p_v a_v X / (s2 + p_c a_cv Y)`` with
``X, Y ~ Exp(1)`` independent, and its outage has a closed form. Outage
grows with ``p_c`` and falls with ``p_v``.

The CUE SINR ``p_c A / (s2 + p_v B)`` rises when both powers are scaled up
by the same factor, and so does the outage margin, so the optimum has
``p_c = P_c_max`` or ``p_v = P_v_max``:

* if ``(P_c_max, P_v_max)`` meets the outage target, keep ``P_c_max`` and
  lower ``p_v`` to the smallest value that still meets it (less
  interference at the gNB);
* otherwise keep ``P_v_max`` and raise ``p_c`` to the largest value that
  meets it.

Both boundary points are found by bisection. Neither depends on the
CUE's own gains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def outage_probability(p_c, p_v, alpha_v, alpha_cv, gamma0, sigma2):
    """Pr{SINR_v < gamma0}; arrays broadcast. ``p_v == 0`` gives outage 1."""
    p_c, p_v, alpha_v, alpha_cv = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (p_c, p_v, alpha_v, alpha_cv))
    )
    signal = p_v * alpha_v
    with np.errstate(divide="ignore", invalid="ignore"):
        no_outage = np.exp(-gamma0 * sigma2 / signal) * signal / (signal + gamma0 * p_c * alpha_cv)
    out = np.where(signal > 0, 1.0 - no_outage, 1.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PowerSolution:
    p_c: float
    p_v: float
    feasible: bool
    outage: float
    achieved_rate: float = float("nan")


def max_cue_power(alpha_v, alpha_cv, p_c_max, p_v_max, gamma0, sigma2, p0, rtol=1e-6, max_iter=200):
    """Vectorised bisection for the largest feasible CUE power.

    Returns ``(p_c, feasible)`` arrays. Where the constraint is inactive the
    answer is ``p_c_max``; where even ``p_c = 0`` violates it, ``feasible``
    is False and ``p_c`` is 0.
    """
    alpha_v, alpha_cv = np.broadcast_arrays(np.asarray(alpha_v, float), np.asarray(alpha_cv, float))
    shape = alpha_v.shape
    av, acv = alpha_v.ravel(), alpha_cv.ravel()

    def out(pc, idx=slice(None)):
        return outage_probability(pc, p_v_max, av[idx], acv[idx], gamma0, sigma2)

    feasible = out(np.zeros_like(av)) <= p0
    at_cap = out(np.full_like(av, p_c_max)) <= p0
    p_c = np.where(at_cap, p_c_max, 0.0)

    active = np.flatnonzero(feasible & ~at_cap)
    if active.size:
        lo = np.zeros(active.size)
        hi = np.full(active.size, float(p_c_max))
        for _ in range(max_iter):
            # converged entries are frozen so a result never depends on its batch
            run = hi - lo > rtol * lo
            if not run.any():
                break
            mid = 0.5 * (lo + hi)
            ok = out(mid, active) <= p0
            lo = np.where(run & ok, mid, lo)
            hi = np.where(run & ~ok, mid, hi)
        p_c[active] = lo
    return p_c.reshape(shape), feasible.reshape(shape)


def min_vue_power(alpha_v, alpha_cv, p_c, p_v_max, gamma0, sigma2, p0, rtol=1e-6, max_iter=200):
    """Vectorised bisection for the smallest VUE power meeting the outage target at CUE power ``p_c``.

    Returns ``(p_v, feasible)``; infeasible entries (even ``p_v_max`` fails)
    get ``p_v = p_v_max``.
    """
    alpha_v, alpha_cv, p_c = np.broadcast_arrays(
        np.asarray(alpha_v, float), np.asarray(alpha_cv, float), np.asarray(p_c, float))
    shape = alpha_v.shape
    av, acv, pc = alpha_v.ravel(), alpha_cv.ravel(), p_c.ravel()
    feasible = outage_probability(pc, p_v_max, av, acv, gamma0, sigma2) <= p0
    p_v = np.full(av.shape, float(p_v_max))
    idx = np.flatnonzero(feasible)
    if idx.size:
        lo = np.zeros(idx.size)
        hi = np.full(idx.size, float(p_v_max))
        for _ in range(max_iter):
            run = hi - lo > rtol * hi
            if not run.any():
                break
            mid = 0.5 * (lo + hi)
            ok = outage_probability(pc[idx], mid, av[idx], acv[idx], gamma0, sigma2) <= p0
            hi = np.where(run & ok, mid, hi)
            lo = np.where(run & ~ok, mid, lo)
        p_v[idx] = hi
    return p_v.reshape(shape), feasible.reshape(shape)


def optimal_powers(alpha_v, alpha_cv, p_c_max, p_v_max, gamma0, sigma2, p0, rtol=1e-6, adaptive_vue=True):
    """Rate-maximising ``(p_c, p_v, feasible)`` arrays for CUE/VUE pairs sharing a chunk.

    With ``adaptive_vue=False`` the VUE always sends at ``p_v_max`` and only
    the CUE power is searched.
    """
    alpha_v, alpha_cv = np.broadcast_arrays(np.asarray(alpha_v, float), np.asarray(alpha_cv, float))
    corner_ok = outage_probability(p_c_max, p_v_max, alpha_v, alpha_cv, gamma0, sigma2) <= p0
    corner_ok = np.asarray(corner_ok, dtype=bool) & adaptive_vue
    p_c, feasible = max_cue_power(alpha_v, alpha_cv, p_c_max, p_v_max, gamma0, sigma2, p0, rtol)
    p_v = np.full(alpha_v.shape, float(p_v_max))
    if corner_ok.any():
        pv_min, _ = min_vue_power(alpha_v[corner_ok], alpha_cv[corner_ok], p_c_max, p_v_max,
                                  gamma0, sigma2, p0, rtol)
        p_v[corner_ok] = pv_min
    p_c = np.where(feasible, p_c, 0.0)
    p_v = np.where(feasible, p_v, 0.0)
    return p_c, p_v, feasible


def allocate_power(alpha_v: float, alpha_cv: float, *, p_c_max: float, p_v_max: float,
                   gamma0: float, sigma2: float, p0: float, rtol: float = 1e-6,
                   adaptive_vue: bool = True) -> PowerSolution:
    """Single-pair form of :func:`optimal_powers`.

    ``achieved_rate`` is left NaN; the scheduler fills it in once the RC is known.
    """
    p_c, p_v, feasible = optimal_powers(alpha_v, alpha_cv, p_c_max, p_v_max, gamma0, sigma2, p0, rtol,
                                        adaptive_vue)
    p_c, p_v, feasible = float(p_c), float(p_v), bool(feasible)
    outage = outage_probability(p_c, p_v, alpha_v, alpha_cv, gamma0, sigma2) if feasible else 1.0
    return PowerSolution(p_c=p_c, p_v=p_v, feasible=feasible, outage=float(outage))


def _power_grid(p_max: float, points: int, decades: float = 12.0) -> np.ndarray:
    """Zero plus ``points - 1`` log-spaced powers up to ``p_max``: constant relative resolution."""
    return np.concatenate([[0.0], np.geomspace(p_max * 10.0 ** -decades, p_max, points - 1)])


def power_grid_search(alpha_v, alpha_cv, p_c_max, p_v_max, gamma0, sigma2, p0, points: int = 1_000_000):
    """Brute-force reference: largest feasible ``p_c`` on a grid at ``p_v = p_v_max``.

    The grid is log-spaced, so its relative resolution (about 3e-5 for the
    default size) is the same for small and large answers. Returns NaN when
    no grid point is feasible.
    """
    pcs = _power_grid(p_c_max, points)
    ok = outage_probability(pcs, p_v_max, alpha_v, alpha_cv, gamma0, sigma2) <= p0
    return float(pcs[np.flatnonzero(ok).max()]) if ok.any() else float("nan")


def power_grid_search_2d(alpha_v, alpha_cv, signal_gain, interference_gain, p_c_max, p_v_max,
                         gamma0, sigma2, p0, points: int = 2001):
    """Brute-force reference over both powers maximising ``p_c S / (s2 + p_v I)``.

    Both axes use the log-spaced grid of :func:`power_grid_search`.
    Returns ``(p_c, p_v, sinr)``; NaNs when no grid point is feasible.
    """
    pc = _power_grid(p_c_max, points)[:, None]
    pv = _power_grid(p_v_max, points)[None, :]
    ok = outage_probability(pc, pv, alpha_v, alpha_cv, gamma0, sigma2) <= p0
    if not ok.any():
        return float("nan"), float("nan"), float("nan")
    sinr = np.where(ok, pc * signal_gain / (sigma2 + pv * interference_gain), -np.inf)
    i, j = np.unravel_index(np.argmax(sinr), sinr.shape)
    return float(pc[i, 0]), float(pv[0, j]), float(sinr[i, j])
