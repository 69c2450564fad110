"""Slot loop, multi-run campaigns and the matching complexity benchmark."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import evolve_fading, init_fading, jakes_epsilon, large_scale
from .grid import build_grid
from .matching import gale_shapley, hungarian, prefs_from_weights
from .metrics import MetricsLedger, Report, summarize
from .scenario import ScenarioConfig, derived_rng
from .scheduler import TTIInput, check_decision, max_ci_bue, schedule
from .topology import advance, distances, drop_users
from .traffic import Buffer, generate_cue_arrivals, generate_vue_arrivals

log = logging.getLogger(__name__)


def run_once(cfg: ScenarioConfig, run_index: int = 0) -> MetricsLedger:
    """Simulate ``cfg.num_slots`` BWP-1 TTIs of one independent drop."""
    grid = build_grid(cfg)
    ledger = MetricsLedger(cfg.num_cues, cfg.num_vue_pairs, cfg.ttl_cue_ms, cfg.ttl_vue_ms)
    if cfg.num_slots == 0:
        return ledger

    seed = cfg.base_seed
    users = drop_users(cfg, derived_rng(seed, run_index, "topology"))
    gains = large_scale(users, cfg, derived_rng(seed, run_index, "shadowing"))
    shadowing = gains.shadowing
    eps = jakes_epsilon(cfg.vehicle_speed_kmph, cfg.carrier_freq_bwp1_ghz, cfg.feedback_period_ms)
    fading_rng = derived_rng(seed, run_index, "fading")
    traffic_rng = derived_rng(seed, run_index, "traffic")
    chan = init_fading(cfg.num_cues, cfg.num_vue_pairs, cfg.num_bues, grid.bwp1.rb_count,
                       grid.bwp2.rb_count, eps, fading_rng)

    tti_ms = grid.bwp1.tti_ms
    tti_s = tti_ms * 1e-3
    ratio = grid.tti_ratio
    eta = grid.rbs_per_rc
    b1 = grid.bwp1.rb_bandwidth_hz
    rc_rbs = grid.rc_slices
    cue_buf, vue_buf = Buffer(tti_ms), Buffer(tti_ms)
    c_t = cfg.max_sched_per_tti
    sigma2, gamma0, backoff = cfg.noise_w, cfg.gamma0, cfg.bler_backoff

    for t in range(cfg.num_slots):
        if t > 0:
            users = advance(users, tti_s)
            gains = large_scale(users, cfg, shadowing=shadowing, dist=distances(users, cfg.min_distance_m))
            chan = evolve_fading(chan, fading_rng, redraw_bue=(t % ratio == 0))

        new_c = generate_cue_arrivals(cfg, t, traffic_rng)
        new_v = generate_vue_arrivals(cfg, t)
        cue_buf.extend(new_c)
        vue_buf.extend(new_v)
        ledger.record_generated("cue", new_c)
        ledger.record_generated("vue", new_v)
        ledger.record_dropped("cue", cue_buf.expire(t))
        ledger.record_dropped("vue", vue_buf.expire(t))

        cues = cue_buf.head_owners(c_t)
        ledger.cue_backlogged.append(len(cue_buf.owners()))
        inp = TTIInput(cfg, grid, cues, vue_buf.head_owners(), gains, chan)
        dec = schedule(inp)
        if t % ratio == 0:
            owner, rb_rates = max_ci_bue(cfg, grid, gains, chan)
            dec.bue_alloc, dec.bue_rates = owner, rb_rates
            ledger.bue_rbs.append(int(np.count_nonzero(owner >= 0)))
            ledger.bue_sum_rate.append(float(rb_rates.sum()))
        ledger.record_violations(check_decision(dec, cfg, grid))

        for c in dec.scheduled:
            ledger.record_completed("cue", cue_buf.serve(c, dec.rates[c] * tti_s, t))
        for c, v in dec.pairing.items():
            rbs = rc_rbs[dec.rc_of[c]]
            p_c, p_v = dec.powers[c]
            # realised SINR uses the true (not the gNB's aged) coefficients
            h_cv = chan.cue_vue_at(c, v)[1][rbs]
            s = p_v * gains.vue_link[v] * np.abs(chan.vue_link[v, rbs]) ** 2 / (
                sigma2 + p_c * gains.cue_vue[c, v] * np.abs(h_cv) ** 2)
            ledger.vue_sinr[v].extend(s.tolist())
            good = s >= gamma0
            bits = float(np.sum(b1 * np.log2(1.0 + backoff * s[good]))) * tti_s
            ledger.record_completed("vue", vue_buf.serve(v, bits, t))

        ledger.cue_rbs.append(len(dec.scheduled) * eta)
        ledger.vue_rbs.append(len(dec.pairing) * eta)
        ledger.cue_sum_rate.append(float(sum(dec.rates[c] for c in dec.scheduled)))

    ledger.residual_cue = len(cue_buf)
    ledger.residual_vue = len(vue_buf)
    ledger.num_slots = cfg.num_slots
    return ledger


def _run_job(args):
    cfg, k = args
    return run_once(cfg, k)


def run_runs(cfg: ScenarioConfig, workers: int = 1) -> list[MetricsLedger]:
    jobs = [(cfg, k) for k in range(cfg.num_runs)]
    if workers <= 1 or cfg.num_runs == 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves job order, so results do not depend on completion order
        return list(pool.map(_run_job, jobs))


def run_campaign(cfg: ScenarioConfig, out_dir=None, workers: int = 1) -> Report:
    """All runs of ``cfg``, merged; writes the metric files when ``out_dir`` is given."""
    ledgers = run_runs(cfg, workers)
    report = summarize(ledgers, cfg.algorithm, cfg.gamma0, cfg.max_sched_per_tti)
    if out_dir is not None:
        from .report import write_outputs

        write_outputs(report, out_dir, cfg)
    return report


# ---------------------------------------------------------------------------
# complexity benchmark


def correlated_instance(n: int, rng: np.random.Generator, noise: float = 0.2) -> np.ndarray:
    """Random weights with a shared row and column quality plus idiosyncratic noise.

    Mirrors the scheduler's matrices, where a CUE's large-scale gain and an
    RC's (or VUE's) overall quality shift whole rows and columns.
    """
    return rng.random((n, 1)) + rng.random((1, n)) + noise * rng.random((n, n))


@dataclass(frozen=True)
class BenchRow:
    n: int
    gs_seconds: float
    hungarian_seconds: float
    gs_proposals: int


def _best_time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_matching(n_values, repeats: int = 3, seed: int = 0, hungarian_max_repeats_n: int = 128):
    """Time both solvers on the same random instances.

    Gale-Shapley timing includes building the preference lists from the
    weights. Returns ``(rows, gs_exponent, hungarian_exponent)`` where the
    exponents are log-log least-squares slopes (NaN with fewer than 2 sizes).
    """
    from .matching import _deferred_acceptance

    rng = np.random.default_rng(seed)
    rows = []
    for n in n_values:
        w = correlated_instance(int(n), rng)

        def run_gs():
            inst = prefs_from_weights(w)
            return gale_shapley(inst)

        gs_t = _best_time(run_gs, repeats)
        h_t = _best_time(lambda: hungarian(w), repeats if n <= hungarian_max_repeats_n else 1)
        inst = prefs_from_weights(w)
        props = _deferred_acceptance(inst.proposer_prefs, inst.proposee_prefs)[1]
        rows.append(BenchRow(int(n), gs_t, h_t, props))
        log.info("n=%d gs=%.4fs hungarian=%.4fs proposals=%d", n, gs_t, h_t, props)
    return rows, *fitted_exponents(rows)


def fitted_exponents(rows) -> tuple[float, float]:
    if len(rows) < 2:
        return float("nan"), float("nan")
    ln = np.log([r.n for r in rows])
    gs = np.polyfit(ln, np.log([r.gs_seconds for r in rows]), 1)[0]
    hu = np.polyfit(ln, np.log([r.hungarian_seconds for r in rows]), 1)[0]
    return float(gs), float(hu)
