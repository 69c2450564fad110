"""Per-run accumulators and cross-run summaries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ClassCounters:
    generated: np.ndarray
    completed: np.ndarray
    dropped: np.ndarray
    delay_sum: np.ndarray  # ms, completed packets only
    delays: list[float] = field(default_factory=list)

    @classmethod
    def zeros(cls, n: int) -> "ClassCounters":
        z = lambda: np.zeros(n, dtype=np.int64)  # noqa: E731
        return cls(z(), z(), z(), np.zeros(n))

    def mean_delay_per_user(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.completed > 0, self.delay_sum / np.maximum(self.completed, 1), np.nan)

    def plr_per_user(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.generated > 0, self.dropped / np.maximum(self.generated, 1), 0.0)


@dataclass
class MetricsLedger:
    num_cues: int
    num_vues: int
    ttl_cue_ms: float = 50.0
    ttl_vue_ms: float = 10.0
    cue: ClassCounters = None
    vue: ClassCounters = None
    vue_sinr: list[list[float]] = None  # realised per-RB SINR samples (linear) per VUE
    cue_rbs: list[int] = field(default_factory=list)  # per BWP-1 TTI
    vue_rbs: list[int] = field(default_factory=list)
    cue_backlogged: list[int] = field(default_factory=list)  # CUEs with traffic at decision time
    cue_sum_rate: list[float] = field(default_factory=list)  # bps per BWP-1 TTI
    bue_rbs: list[int] = field(default_factory=list)  # per BWP-2 TTI
    bue_sum_rate: list[float] = field(default_factory=list)  # bps per BWP-2 TTI
    violations: list[str] = field(default_factory=list)
    num_violations: int = 0
    residual_cue: int = 0
    residual_vue: int = 0
    num_slots: int = 0

    def __post_init__(self):
        if self.cue is None:
            self.cue = ClassCounters.zeros(self.num_cues)
        if self.vue is None:
            self.vue = ClassCounters.zeros(self.num_vues)
        if self.vue_sinr is None:
            self.vue_sinr = [[] for _ in range(self.num_vues)]

    def counters(self, user_class: str) -> ClassCounters:
        if user_class not in ("cue", "vue"):
            raise ValueError(f"user class must be 'cue' or 'vue', got {user_class!r}")
        return self.cue if user_class == "cue" else self.vue

    def residual(self, user_class: str) -> int:
        return self.residual_cue if user_class == "cue" else self.residual_vue

    def record_generated(self, user_class: str, packets) -> None:
        cnt = self.counters(user_class)
        for p in packets:
            cnt.generated[p.owner] += 1

    def record_dropped(self, user_class: str, packets) -> None:
        cnt = self.counters(user_class)
        for p in packets:
            cnt.dropped[p.owner] += 1

    def record_completed(self, user_class: str, done) -> None:
        cnt = self.counters(user_class)
        for p, delay in done:
            cnt.completed[p.owner] += 1
            cnt.delay_sum[p.owner] += delay
            cnt.delays.append(delay)

    def record_violations(self, msgs: list[str], keep: int = 50) -> None:
        self.num_violations += len(msgs)
        room = keep - len(self.violations)
        if room > 0:
            self.violations.extend(msgs[:room])

    def conservation_ok(self) -> bool:
        for cls in ("cue", "vue"):
            c = self.counters(cls)
            if int(c.generated.sum()) != int(c.completed.sum() + c.dropped.sum()) + self.residual(cls):
                return False
        return True


def plr(ledger: MetricsLedger, user_class: str) -> float:
    """Dropped over generated packets of one class; 0 when nothing was generated."""
    c = ledger.counters(user_class)
    gen = int(c.generated.sum())
    return float(c.dropped.sum()) / gen if gen else 0.0


def empirical_cdf(values) -> tuple[np.ndarray, np.ndarray]:
    """Sorted sample values and their CDF levels ``k/n``."""
    x = np.sort(np.asarray(values, dtype=float))
    n = len(x)
    return x, np.arange(1, n + 1) / n if n else np.zeros(0)


def vue_outage(samples_per_vue, gamma0: float) -> np.ndarray:
    """Fraction of realised SINR samples below ``gamma0`` per VUE (NaN with no samples)."""
    out = np.full(len(samples_per_vue), np.nan)
    for v, s in enumerate(samples_per_vue):
        s = np.asarray(s, dtype=float)
        if s.size:
            out[v] = np.count_nonzero(s < gamma0) / s.size
    return out


def vue_outage_cdf(ledger_or_samples, gamma0: float):
    """Per-VUE empirical outage and the CDF of outage across VUEs.

    Accepts a :class:`MetricsLedger` or a per-VUE list of SINR samples.
    VUEs without samples are left out of the CDF.
    """
    samples = ledger_or_samples.vue_sinr if isinstance(ledger_or_samples, MetricsLedger) else ledger_or_samples
    per_vue = vue_outage(samples, gamma0)
    x, f = empirical_cdf(per_vue[~np.isnan(per_vue)])
    return per_vue, x, f


def satisfied_fraction(ledger: MetricsLedger, plr_target: float = 0.02) -> float:
    """Share of CUEs with PLR below target and mean delay within the CUE TTL.

    A CUE that generated nothing counts as satisfied.
    """
    c = ledger.cue
    if ledger.num_cues == 0:
        return 1.0
    mean_d = c.mean_delay_per_user()
    ok_delay = np.where(np.isnan(mean_d), True, mean_d <= ledger.ttl_cue_ms)
    ok = (c.plr_per_user() < plr_target) & ok_delay
    return float(np.mean(ok))


def qos_capacity(table, threshold: float = 0.95) -> int:
    """Largest swept CUE count whose satisfied fraction reaches ``threshold``; 0 if none.

    ``table`` maps CUE count -> satisfied fraction (or is an iterable of pairs).
    """
    items = table.items() if hasattr(table, "items") else table
    ok = [int(c) for c, frac in items if frac >= threshold]
    return max(ok) if ok else 0


@dataclass
class Report:
    algorithm: str
    num_runs: int
    num_cues: int
    plr: dict[str, float]
    plr_per_run: dict[str, list[float]]
    mean_delay_ms: dict[str, float]
    delay_samples: dict[str, np.ndarray]
    vue_outage: np.ndarray  # pooled per VUE index
    vue_mean_delay_ms: np.ndarray
    mean_rbs: dict[str, float]
    cue_rbs_when_saturated: np.ndarray  # distinct CUE RB counts in TTIs with >= C_t backlogged CUEs
    cue_sum_rate_bps: float
    bue_sum_rate_samples: np.ndarray
    satisfied_fraction: float
    violations: int
    conservation_ok: bool

    @classmethod
    def empty(cls, algorithm: str = "") -> "Report":
        """A report with no runs and no samples."""
        nan = float("nan")
        return cls(algorithm=algorithm, num_runs=0, num_cues=0, plr={}, plr_per_run={},
                   mean_delay_ms={}, delay_samples={}, vue_outage=np.zeros(0),
                   vue_mean_delay_ms=np.zeros(0), mean_rbs={}, cue_rbs_when_saturated=np.zeros(0, int),
                   cue_sum_rate_bps=nan, bue_sum_rate_samples=np.zeros(0), satisfied_fraction=nan,
                   violations=0, conservation_ok=True)

    def summary_dict(self) -> dict:
        f = lambda x: None if x is None or not np.isfinite(x) else float(x)  # noqa: E731
        return {
            "algorithm": self.algorithm,
            "num_runs": self.num_runs,
            "num_cues": self.num_cues,
            "plr": {k: f(v) for k, v in self.plr.items()},
            "mean_delay_ms": {k: f(v) for k, v in self.mean_delay_ms.items()},
            "vue_outage_max": f(np.nanmax(self.vue_outage)) if np.any(~np.isnan(self.vue_outage)) else None,
            "mean_rbs": {k: f(v) for k, v in self.mean_rbs.items()},
            "cue_sum_rate_bps": f(self.cue_sum_rate_bps),
            "bue_sum_rate_mean_bps": f(np.mean(self.bue_sum_rate_samples)) if self.bue_sum_rate_samples.size else None,
            "satisfied_fraction": f(self.satisfied_fraction),
            "violations": int(self.violations),
            "conservation_ok": bool(self.conservation_ok),
        }


def _nanmean(x) -> float:
    x = np.asarray(x, dtype=float)
    x = x[~np.isnan(x)]
    return float(x.mean()) if x.size else float("nan")


def summarize(ledgers: list[MetricsLedger], algorithm: str = "", gamma0: float = 10 ** 0.5,
              c_t: int | None = None) -> Report:
    """Cross-run means (each run weighted equally) and pooled sample sets."""
    if not ledgers:
        raise ValueError("need at least one ledger")
    classes = ("cue", "vue")
    plr_runs = {k: [plr(l, k) for l in ledgers] for k in classes}
    delay_runs = {
        k: [_nanmean(l.counters(k).delays) for l in ledgers] for k in classes
    }
    n_v = ledgers[0].num_vues
    pooled = [[s for l in ledgers for s in l.vue_sinr[v]] for v in range(n_v)]
    vue_delay = np.full(n_v, np.nan)
    for v in range(n_v):
        comp = sum(int(l.vue.completed[v]) for l in ledgers)
        if comp:
            vue_delay[v] = sum(float(l.vue.delay_sum[v]) for l in ledgers) / comp

    sat_rbs = []
    if c_t is not None:
        for l in ledgers:
            b = np.asarray(l.cue_backlogged)
            sat_rbs.extend(np.asarray(l.cue_rbs)[b >= c_t].tolist())

    def run_mean(attr):
        return _nanmean([_nanmean(getattr(l, attr)) for l in ledgers])

    return Report(
        algorithm=algorithm,
        num_runs=len(ledgers),
        num_cues=ledgers[0].num_cues,
        plr={k: float(np.mean(v)) for k, v in plr_runs.items()},
        plr_per_run=plr_runs,
        mean_delay_ms={k: _nanmean(v) for k, v in delay_runs.items()},
        delay_samples={k: np.concatenate([np.asarray(l.counters(k).delays, float) for l in ledgers]) for k in classes},
        vue_outage=vue_outage(pooled, gamma0),
        vue_mean_delay_ms=vue_delay,
        mean_rbs={"cue": run_mean("cue_rbs"), "vue": run_mean("vue_rbs"), "bue": run_mean("bue_rbs")},
        cue_rbs_when_saturated=np.unique(np.asarray(sat_rbs, dtype=int)),
        cue_sum_rate_bps=run_mean("cue_sum_rate"),
        bue_sum_rate_samples=np.concatenate([np.asarray(l.bue_sum_rate, float) for l in ledgers]),
        satisfied_fraction=float(np.mean([satisfied_fraction(l) for l in ledgers])),
        violations=sum(l.num_violations for l in ledgers),
        conservation_ok=all(l.conservation_ok() for l in ledgers),
    )
