"""Per-TTI resource allocation: GSRAGS and the HRAHS / GSRAHS baselines.

Pipeline (identical for all three, only the two assignment solvers change):

1. take the first ``C_t`` CUEs in TTL order, padding with null users;
2. interference-free chunk rates ``R'[c, i]`` at full CUE power;
3. CUE -> RC assignment on ``R'``;
4. per scheduled CUE and backlogged VUE: rate-maximising outage-safe
   powers (see :mod:`v2xsched.power`), then the shared-chunk rate
   ``R[c, v]``; pairs below the rate floor or without a feasible power
   become ``-inf``;
5. CUE -> VUE pairing on ``R``.

GSRAGS uses Gale-Shapley in steps 3 and 5, HRAHS uses Hungarian in both,
GSRAHS uses Gale-Shapley then Hungarian.

Rates are Shannon rates over the chunk's ``eta`` RBs evaluated at the
minimum per-RB SINR after a fixed link-adaptation backoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelState, LargeScaleGain
from .grid import ResourceGrid
from .matching import DUMMY, gale_shapley, hungarian, pad_square, prefs_from_weights
from .power import optimal_powers, outage_probability
from .scenario import ScenarioConfig

SOLVERS = {
    "gsrags": ("gs", "gs"),
    "hrahs": ("hungarian", "hungarian"),
    "gsrahs": ("gs", "hungarian"),
}


def sinr_cue(p_c, alpha_c, fading_c, sigma2, p_v=0.0, alpha_vg=0.0, fading_vg=0.0):
    """CUE uplink SINR per RB; ``fading_*`` are power gains ``|h|^2``."""
    return p_c * alpha_c * fading_c / (sigma2 + p_v * alpha_vg * fading_vg)


def sinr_vue(p_v, alpha_v, fading_v, sigma2, p_c=0.0, alpha_cv=0.0, fading_cv=0.0):
    """VUE SINR per RB.

    Pass the drawn ``|h|^2`` for the realised value, or the decision-time
    expectation ``eps^2 |h_prev|^2 + 1 - eps^2`` (see
    :meth:`ChannelState.expected_vue_link_gain`) for the gNB's view.
    """
    return p_v * alpha_v * fading_v / (sigma2 + p_c * alpha_cv * fading_cv)


def rate_from_sinr(sinr_rbs, rb_bandwidth_hz: float, backoff: float = 1.0):
    """``eta * B * log2(1 + backoff * min_n sinr_n)`` over the last axis (bps)."""
    sinr_rbs = np.asarray(sinr_rbs, dtype=float)
    eta = sinr_rbs.shape[-1]
    return eta * rb_bandwidth_hz * np.log2(1.0 + backoff * sinr_rbs.min(axis=-1))


def spectral_efficiency(rate_bps, eta: int, rb_bandwidth_hz: float):
    return np.asarray(rate_bps) / (eta * rb_bandwidth_hz)


@dataclass
class TTIInput:
    cfg: ScenarioConfig
    grid: ResourceGrid
    cues: list[int]  # CUEs with traffic, TTL order
    vues: list[int]  # VUE pairs with traffic, TTL order
    gains: LargeScaleGain
    channel: ChannelState


@dataclass
class AllocationDecision:
    rc_of: dict[int, int] = field(default_factory=dict)  # CUE -> RC
    pairing: dict[int, int] = field(default_factory=dict)  # CUE -> VUE
    powers: dict[int, tuple[float, float]] = field(default_factory=dict)  # CUE -> (p_c, p_v)
    rates: dict[int, float] = field(default_factory=dict)  # CUE -> planned bps
    prime_rates: dict[int, float] = field(default_factory=dict)  # CUE -> interference-free bps
    vue_outage: dict[int, float] = field(default_factory=dict)  # CUE -> outage of its VUE at decision
    scheduled: list[int] = field(default_factory=list)
    num_null: int = 0
    step1_total: float = 0.0
    bue_alloc: np.ndarray | None = None
    bue_rates: np.ndarray | None = None

    @property
    def zeta(self) -> dict[int, int]:
        """RC -> CUE."""
        return {rc: c for c, rc in self.rc_of.items()}


def _assign(weights: np.ndarray, solver: str) -> np.ndarray:
    """Row -> column assignment of a rectangular matrix, -1 for unassigned rows."""
    r, c = weights.shape
    if r == 0:
        return np.zeros(0, dtype=int)
    if c == 0:
        return np.full(r, -1)
    sq, _, _ = pad_square(weights)
    if solver == "gs":
        match = gale_shapley(prefs_from_weights(sq, r, c))
    elif solver == "hungarian":
        match = hungarian(sq, maximize=True)
    else:
        raise ValueError(f"unknown solver {solver!r}")
    match = match[:r].copy()
    match[match >= c] = -1
    return match


def prime_rate_matrix(inp: TTIInput, cues) -> np.ndarray:
    """Interference-free rates ``R'[k, i]`` for the listed CUEs on every RC."""
    cfg, grid = inp.cfg, inp.grid
    cues = np.asarray(cues, dtype=int)
    fading = np.abs(inp.channel.cue_gnb[cues]) ** 2
    s = sinr_cue(cfg.p_cue_max_w, inp.gains.cue_gnb[cues, None], fading, cfg.noise_w)
    s = s.reshape(len(cues), grid.num_rcs, grid.rbs_per_rc)
    return rate_from_sinr(s, grid.bwp1.rb_bandwidth_hz, cfg.bler_backoff)


def sharing_matrix(inp: TTIInput, cues, rcs, vues):
    """Power allocation and shared-chunk rates for every (scheduled CUE, VUE).

    Returns ``(R, p_c, p_v, outage)`` arrays of shape (len(cues), len(vues));
    ``R`` holds ``-inf`` for infeasible pairs and pairs under the rate floor.
    """
    cfg, grid, ch, g = inp.cfg, inp.grid, inp.channel, inp.gains
    cues = np.asarray(cues, dtype=int)
    vues = np.asarray(vues, dtype=int)
    n, m = len(cues), len(vues)
    if n == 0 or m == 0:
        empty = np.zeros((n, m))
        return np.full((n, m), -np.inf), empty, empty, empty
    rbs = grid.rc_slices[np.asarray(rcs, dtype=int)]  # (n, eta)
    sigma2 = cfg.noise_w
    alpha_v = g.vue_link[vues][None, :]  # (1, m)
    alpha_cv = g.cue_vue[cues[:, None], vues[None, :]]  # (n, m)
    power = dict(p_c_max=cfg.p_cue_max_w, p_v_max=cfg.p_vue_max_w, gamma0=cfg.gamma0, sigma2=sigma2, p0=cfg.p0)
    if cfg.outage_csi == "estimated":
        ev = ch.expected_vue_link_gain()[vues[None, :, None], rbs[:, None, :]]  # (n, m, eta)
        cv_prev, _ = ch.cue_vue_at(cues[:, None], vues[None, :])  # (n, m, N1)
        ecv = ch.expected_gain(np.take_along_axis(cv_prev, rbs[:, None, :], axis=-1))
        # outage falls with a_v and rises with a_cv, so the weakest signal
        # paired with the strongest interference bounds every RB at once
        a_v = (alpha_v[..., None] * ev).min(axis=-1)
        a_cv = (alpha_cv[..., None] * ecv).max(axis=-1)
    else:
        a_v, a_cv = np.broadcast_arrays(alpha_v, alpha_cv)
    p_c, p_v, feasible = optimal_powers(a_v, a_cv, **power, adaptive_vue=cfg.vue_power == "adaptive")
    outage = outage_probability(p_c, p_v, a_v, a_cv, cfg.gamma0, sigma2)

    h_c = np.abs(ch.cue_gnb[cues[:, None], rbs]) ** 2  # (n, eta)
    h_vg = np.abs(ch.vue_gnb[vues[None, :, None], rbs[:, None, :]]) ** 2  # (n, m, eta)
    s = sinr_cue(p_c[..., None], g.cue_gnb[cues][:, None, None], h_c[:, None, :], sigma2,
                 p_v[..., None], g.vue_gnb[vues][None, :, None], h_vg)
    rate = rate_from_sinr(s, grid.bwp1.rb_bandwidth_hz, cfg.bler_backoff)
    se = spectral_efficiency(rate, grid.rbs_per_rc, grid.bwp1.rb_bandwidth_hz)
    rate = np.where(feasible & (se >= cfg.r0), rate, -np.inf)
    return rate, p_c, p_v, outage


def allocate(inp: TTIInput, step1: str = "gs", step2: str = "gs") -> AllocationDecision:
    cfg, grid = inp.cfg, inp.grid
    c_t = cfg.max_sched_per_tti
    cues = list(inp.cues[:c_t])
    n = len(cues)
    dec = AllocationDecision(num_null=c_t - n)
    if n == 0:
        return dec

    r_prime = prime_rate_matrix(inp, cues)
    w1 = np.full((c_t, grid.num_rcs), DUMMY)
    w1[:n] = r_prime
    match1 = _assign(w1, step1)[:n]

    sched_idx = [k for k in range(n) if match1[k] >= 0]
    for k in sched_idx:
        c, rc = cues[k], int(match1[k])
        dec.rc_of[c] = rc
        dec.prime_rates[c] = float(r_prime[k, rc])
        dec.rates[c] = float(r_prime[k, rc])
        dec.powers[c] = (cfg.p_cue_max_w, 0.0)
        dec.scheduled.append(c)
    dec.step1_total = float(sum(dec.prime_rates.values()))

    vues = list(inp.vues)
    if not vues or not sched_idx:
        return dec
    s_cues = [cues[k] for k in sched_idx]
    s_rcs = [int(match1[k]) for k in sched_idx]
    rate, p_c, p_v, outage = sharing_matrix(inp, s_cues, s_rcs, vues)
    match2 = _assign(rate, step2)
    for k, j in enumerate(match2):
        if j < 0 or not np.isfinite(rate[k, j]):
            continue
        c = s_cues[k]
        dec.pairing[c] = vues[j]
        dec.powers[c] = (float(p_c[k, j]), float(p_v[k, j]))
        dec.rates[c] = float(rate[k, j])
        dec.vue_outage[c] = float(outage[k, j])
    return dec


def gsrags_tti(inp: TTIInput) -> AllocationDecision:
    return allocate(inp, "gs", "gs")


def hrahs_tti(inp: TTIInput) -> AllocationDecision:
    return allocate(inp, "hungarian", "hungarian")


def gsrahs_tti(inp: TTIInput) -> AllocationDecision:
    return allocate(inp, "gs", "hungarian")


def schedule(inp: TTIInput, algorithm: str | None = None) -> AllocationDecision:
    algorithm = (algorithm or inp.cfg.algorithm).lower()
    if algorithm not in SOLVERS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return allocate(inp, *SOLVERS[algorithm])


def max_ci_bue(cfg: ScenarioConfig, grid: ResourceGrid, gains: LargeScaleGain, channel: ChannelState):
    """Give every BWP-2 RB to the BUE with the highest rate on it (ties: lowest index).

    Returns ``(owner, rate_bps)`` per RB; owner is -1 when there are no BUEs.
    """
    n2 = grid.bwp2.rb_count
    if gains.bue_gnb.size == 0 or n2 == 0:
        return np.full(n2, -1), np.zeros(n2)
    snr = cfg.p_bue_w * gains.bue_gnb[:, None] * np.abs(channel.bue_gnb) ** 2 / cfg.noise_w
    rates = grid.bwp2.rb_bandwidth_hz * np.log2(1.0 + cfg.bler_backoff * snr)  # (M, N2)
    owner = np.argmax(rates, axis=0)
    return owner, rates[owner, np.arange(n2)]


def check_decision(dec: AllocationDecision, cfg: ScenarioConfig, grid: ResourceGrid, tol: float = 1e-9) -> list[str]:
    """Constraint violations of a decision (empty list when clean)."""
    bad = []
    rcs = list(dec.rc_of.values())
    if len(set(rcs)) != len(rcs):
        bad.append("RC assigned to more than one CUE")
    if any(not 0 <= rc < grid.num_rcs for rc in rcs):
        bad.append("RC index out of range")
    if len(dec.scheduled) > cfg.max_sched_per_tti:
        bad.append(f"{len(dec.scheduled)} CUEs scheduled, cap is {cfg.max_sched_per_tti}")
    if len(set(dec.scheduled)) != len(dec.scheduled):
        bad.append("CUE scheduled twice")
    vues = list(dec.pairing.values())
    if len(set(vues)) != len(vues):
        bad.append("VUE paired with more than one CUE")
    for c in dec.pairing:
        if c not in dec.rc_of:
            bad.append(f"CUE {c} paired without an RC")
    floor = cfg.r0 * grid.rbs_per_rc * grid.bwp1.rb_bandwidth_hz
    for c, (p_c, p_v) in dec.powers.items():
        if not -tol <= p_c <= cfg.p_cue_max_w * (1 + tol):
            bad.append(f"CUE {c} power {p_c} outside [0, {cfg.p_cue_max_w}]")
        if not -tol <= p_v <= cfg.p_vue_max_w * (1 + tol):
            bad.append(f"VUE power {p_v} outside [0, {cfg.p_vue_max_w}]")
    for c in dec.pairing:
        if dec.rates[c] < floor * (1 - 1e-12):
            bad.append(f"paired CUE {c} rate {dec.rates[c]:.6g} below floor {floor:.6g}")
        if dec.vue_outage.get(c, 1.0) > cfg.p0 * (1 + 1e-9):
            bad.append(f"VUE sharing with CUE {c} has outage {dec.vue_outage.get(c)} > p0")
    return bad
