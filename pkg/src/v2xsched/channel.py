"""Large-scale link budgets and block Rayleigh fading with CSI aging.

Every link gain is ``alpha * |h|^2`` with ``alpha`` the linear large-scale
gain (path loss, log-normal shadowing, antenna gains, receiver noise
figure) and ``h ~ CN(0, 1)`` drawn per RB. Links terminating at the gNB
are redrawn every TTI and are known exactly at decision time. Links
terminating at a vehicle (VUE pair link, CUE -> VUE receiver) follow a
first-order Gauss-Markov process ``h = eps * h_prev + e`` and the gNB
only sees ``h_prev``.

Link budget accounting, all in dB on top of ``-PL``:

=================  ==========  ==============================  ============
link               path loss   gains                           shadow std
=================  ==========  ==============================  ============
CUE -> gNB         V2I, f1     G_gNB + G_veh - NF_gNB           V2I
BUE -> gNB         V2I, f2     G_gNB + G_veh - NF_gNB           V2I
VUE tx -> gNB      V2I, f1     G_gNB + G_veh - NF_gNB           V2I
VUE tx -> VUE rx   V2V, f1     2 G_veh - NF_veh                 V2V
CUE -> VUE rx      V2V, f1     2 G_veh - NF_veh                 V2V
=================  ==========  ==============================  ============
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .scenario import ScenarioConfig
from .topology import DistanceTable, UserSet, distances

SPEED_OF_LIGHT = 3e8


def path_loss_v2i(d, fc_ghz):
    """Uplink path loss in dB, ``d`` in metres, ``fc_ghz`` in GHz."""
    return 32.4 + 20.0 * np.log10(fc_ghz) + 30.0 * np.log10(d)


def path_loss_v2v(d, fc_ghz):
    return 36.85 + 30.0 * np.log10(d) + 18.9 * np.log10(fc_ghz)


def bessel_j0(x: float) -> float:
    """J0 by its Maclaurin series; accurate to ~1e-12 for |x| < 12."""
    x = float(x)
    if abs(x) >= 12.0:
        raise ValueError(f"series J0 used outside its accurate range: x={x}")
    q = -(x * x) / 4.0
    term, total, k = 1.0, 1.0, 0
    while True:
        k += 1
        term *= q / (k * k)
        total += term
        if abs(term) < 1e-17 * max(1.0, abs(total)) and k > 2:
            return total


def jakes_epsilon(speed_kmph: float, fc_ghz: float, period_ms: float) -> float:
    """Correlation of consecutive fading samples, ``J0(2 pi f_d T)`` clamped to [0, 1]."""
    if speed_kmph < 0 or fc_ghz < 0 or period_ms < 0:
        raise ValueError("speed, carrier and period must be nonnegative")
    f_d = (speed_kmph / 3.6) * fc_ghz * 1e9 / SPEED_OF_LIGHT
    eps = bessel_j0(2.0 * math.pi * f_d * period_ms * 1e-3)
    return min(1.0, max(0.0, eps))


# ---------------------------------------------------------------------------
# large-scale gains


@dataclass(frozen=True)
class Shadowing:
    """Per-link shadowing draws in dB, fixed for the lifetime of a drop."""

    cue_gnb: np.ndarray
    bue_gnb: np.ndarray
    vue_link: np.ndarray
    vue_gnb: np.ndarray
    cue_vue: np.ndarray


@dataclass(frozen=True)
class LargeScaleGain:
    cue_gnb: np.ndarray  # (C,)
    bue_gnb: np.ndarray  # (M,)
    vue_link: np.ndarray  # (V,)
    vue_gnb: np.ndarray  # (V,)
    cue_vue: np.ndarray  # (C, V)
    shadowing: Shadowing


def draw_shadowing(users: UserSet, cfg: ScenarioConfig, rng: np.random.Generator) -> Shadowing:
    C, M, V = users.num_cues, users.num_bues, users.num_vue_pairs
    s_i, s_v = cfg.shadow_std_v2i_db, cfg.shadow_std_v2v_db
    return Shadowing(
        cue_gnb=rng.normal(0.0, s_i, C),
        bue_gnb=rng.normal(0.0, s_i, M),
        vue_link=rng.normal(0.0, s_v, V),
        vue_gnb=rng.normal(0.0, s_i, V),
        cue_vue=rng.normal(0.0, s_v, (C, V)),
    )


def large_scale(
    users: UserSet,
    cfg: ScenarioConfig,
    rng: np.random.Generator | None = None,
    shadowing: Shadowing | None = None,
    dist: DistanceTable | None = None,
) -> LargeScaleGain:
    """Linear large-scale gain of every link.

    Pass ``shadowing`` to re-evaluate path loss after mobility while keeping
    the drop's shadowing; otherwise fresh shadowing is drawn from ``rng``.
    """
    if shadowing is None:
        if rng is None:
            raise ValueError("need rng or shadowing")
        shadowing = draw_shadowing(users, cfg, rng)
    d = dist if dist is not None else distances(users, cfg.min_distance_m)
    f1, f2 = cfg.carrier_freq_bwp1_ghz, cfg.carrier_freq_bwp2_ghz
    to_gnb = cfg.gnb_antenna_gain_dbi + cfg.vehicle_antenna_gain_dbi - cfg.gnb_noise_figure_db
    to_veh = 2 * cfg.vehicle_antenna_gain_dbi - cfg.vehicle_noise_figure_db

    def lin(db):
        return 10.0 ** (np.asarray(db, dtype=float) / 10.0)

    return LargeScaleGain(
        cue_gnb=lin(-path_loss_v2i(d.cue_gnb, f1) + to_gnb + shadowing.cue_gnb),
        bue_gnb=lin(-path_loss_v2i(d.bue_gnb, f2) + to_gnb + shadowing.bue_gnb),
        vue_link=lin(-path_loss_v2v(d.vue_link, f1) + to_veh + shadowing.vue_link),
        vue_gnb=lin(-path_loss_v2i(d.vue_gnb, f1) + to_gnb + shadowing.vue_gnb),
        cue_vue=lin(-path_loss_v2v(d.cue_vue, f1) + to_veh + shadowing.cue_vue),
        shadowing=shadowing,
    )


# ---------------------------------------------------------------------------
# small-scale fading


def complex_normal(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """Circularly-symmetric CN(0, var) samples."""
    z = rng.standard_normal((2,) + tuple(np.atleast_1d(shape)))
    return np.sqrt(var / 2.0) * (z[0] + 1j * z[1])


def gauss_markov_step(h_prev: np.ndarray, eps: float, rng: np.random.Generator) -> np.ndarray:
    if eps >= 1.0:
        return h_prev.copy()
    return eps * h_prev + complex_normal(rng, h_prev.shape, 1.0 - eps * eps)


class AgedField:
    """Gauss-Markov fading on a (rows, cols) grid of links, sampled on demand.

    The CUE -> VUE-receiver field is C x V x N coefficients, of which only a
    handful are looked at per TTI. Each link keeps its last two samples and
    the TTI they belong to; a query at TTI ``t`` jumps straight there with
    the exact ``k``-step transition ``h_t = eps^k h_{t-k} + CN(0, 1 - eps^{2k})``,
    so the sampled values have the same law as stepping every TTI.

    The object is mutable and owned by one simulation run.
    """

    def __init__(self, rows: int, cols: int, n: int, eps: float, rng: np.random.Generator):
        self.eps = float(eps)
        self.rng = rng
        self.prev = complex_normal(rng, (rows, cols, n))
        self.cur = gauss_markov_step(self.prev, eps, rng)
        self.t_last = np.zeros((rows, cols), dtype=np.int64)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.cur.shape

    def _jump(self, h: np.ndarray, k: np.ndarray) -> np.ndarray:
        a = self.eps ** k.astype(float)
        noise = complex_normal(self.rng, h.shape)
        return a[:, None] * h + np.sqrt(np.maximum(1.0 - a * a, 0.0))[:, None] * noise

    def at(self, t: int, rows, cols) -> tuple[np.ndarray, np.ndarray]:
        """``(h_{t-1}, h_t)`` for the links ``(rows, cols)`` (broadcast), shape ``(..., n)``."""
        rows, cols = np.broadcast_arrays(np.asarray(rows, dtype=int), np.asarray(cols, dtype=int))
        flat = np.unique(np.ravel_multi_index((rows.ravel(), cols.ravel()), self.t_last.shape))
        r, c = np.unravel_index(flat, self.t_last.shape)
        stale = self.t_last[r, c] < t
        if stale.any():
            r, c = r[stale], c[stale]
            k = t - self.t_last[r, c]
            prev = self._jump(self.cur[r, c], k - 1)
            self.cur[r, c] = self._jump(prev, np.ones_like(k))
            self.prev[r, c] = prev
            self.t_last[r, c] = t
        return self.prev[rows, cols], self.cur[rows, cols]


@dataclass(frozen=True)
class ChannelState:
    """Fading coefficients for TTI ``t``.

    ``vue_link_prev`` holds the previous-TTI coefficient of the VUE pair
    links (what the gNB knows); ``vue_link`` is the current truth. The
    CUE -> VUE-receiver links live in a lazily sampled :class:`AgedField`.
    """

    eps: float
    cue_gnb: np.ndarray  # (C, N1)
    vue_gnb: np.ndarray  # (V, N1)
    bue_gnb: np.ndarray  # (M, N2)
    vue_link_prev: np.ndarray  # (V, N1)
    vue_link: np.ndarray  # (V, N1)
    cue_vue: AgedField
    t: int = 0

    def expected_gain(self, h_prev) -> np.ndarray:
        """Decision-time ``E[|h|^2 | h_prev] = eps^2 |h_prev|^2 + 1 - eps^2``."""
        e2 = self.eps * self.eps
        return e2 * np.abs(h_prev) ** 2 + (1.0 - e2)

    def expected_vue_link_gain(self) -> np.ndarray:
        return self.expected_gain(self.vue_link_prev)

    def cue_vue_at(self, cues, vues) -> tuple[np.ndarray, np.ndarray]:
        """``(previous, current)`` CUE -> VUE-receiver coefficients for broadcast index arrays."""
        return self.cue_vue.at(self.t, cues, vues)


def init_fading(
    num_cues: int, num_vues: int, num_bues: int, n1: int, n2: int, eps: float, rng: np.random.Generator
) -> ChannelState:
    vl = complex_normal(rng, (num_vues, n1))
    return ChannelState(
        eps=eps,
        cue_gnb=complex_normal(rng, (num_cues, n1)),
        vue_gnb=complex_normal(rng, (num_vues, n1)),
        bue_gnb=complex_normal(rng, (num_bues, n2)),
        vue_link_prev=vl,
        vue_link=gauss_markov_step(vl, eps, rng),
        cue_vue=AgedField(num_cues, num_vues, n1, eps, rng),
    )


def evolve_fading(state: ChannelState, rng: np.random.Generator, redraw_bue: bool = True) -> ChannelState:
    """Advance one TTI.

    gNB-terminated links are redrawn i.i.d.; the VUE pair links take one
    Gauss-Markov step with the current coefficient becoming ``vue_link_prev``.
    BUE fading is only redrawn when ``redraw_bue`` (BWP-2 TTI boundaries).
    """
    return replace(
        state,
        cue_gnb=complex_normal(rng, state.cue_gnb.shape),
        vue_gnb=complex_normal(rng, state.vue_gnb.shape),
        bue_gnb=complex_normal(rng, state.bue_gnb.shape) if redraw_bue else state.bue_gnb,
        vue_link_prev=state.vue_link,
        vue_link=gauss_markov_step(state.vue_link, state.eps, rng),
        t=state.t + 1,
    )
