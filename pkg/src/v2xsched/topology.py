"""User placement and vehicle mobility.

Lanes are horizontal strips stacked directly south of the gNB, i.e. lane
``k`` spans ``y in [gy - (k+1)*w, gy - k*w]`` over the full area width.
The lower half of the lanes (by index) carries eastbound traffic, the
rest westbound. Vehicles wrap around on the lane axis.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

from .scenario import ScenarioConfig


@dataclass(frozen=True)
class UserSet:
    gnb: np.ndarray  # (2,)
    cues: np.ndarray  # (C, 2)
    bues: np.ndarray  # (M, 2)
    vue_tx: np.ndarray  # (V, 2)
    vue_rx: np.ndarray  # (V, 2)
    vue_lane: np.ndarray  # (V,) int
    vue_dir: np.ndarray  # (V,) +1 east, -1 west
    area_side_m: float
    lane_width_m: float
    lane_count: int
    speed_mps: float
    pair_separation_m: float

    @property
    def num_cues(self) -> int:
        return len(self.cues)

    @property
    def num_bues(self) -> int:
        return len(self.bues)

    @property
    def num_vue_pairs(self) -> int:
        return len(self.vue_tx)

    def lane_bounds(self, lane: int) -> tuple[float, float]:
        """(y_low, y_high) of ``lane``."""
        top = self.gnb[1] - lane * self.lane_width_m
        return top - self.lane_width_m, top


def lane_rectangles(cfg: ScenarioConfig) -> list[tuple[float, float, float, float]]:
    """(x0, x1, y0, y1) for every lane."""
    gy = cfg.area_side_m / 2
    out = []
    for k in range(cfg.lane_count):
        top = gy - k * cfg.lane_width_m
        out.append((0.0, cfg.area_side_m, top - cfg.lane_width_m, top))
    return out


def in_lanes(points: np.ndarray, cfg: ScenarioConfig) -> np.ndarray:
    points = np.atleast_2d(points)
    gy = cfg.area_side_m / 2
    y = points[:, 1]
    return (y >= gy - cfg.lane_count * cfg.lane_width_m) & (y <= gy) & (cfg.lane_count > 0)


def _uniform_outside_lanes(n: int, cfg: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    out = np.empty((0, 2))
    while len(out) < n:
        # lanes cover a small fraction of the area, so one oversampled batch almost always suffices
        batch = rng.uniform(0.0, cfg.area_side_m, size=(int(1.2 * (n - len(out))) + 8, 2))
        out = np.vstack([out, batch[~in_lanes(batch, cfg)]])
    return out[:n]


def drop_users(cfg: ScenarioConfig, rng: np.random.Generator) -> UserSet:
    side = cfg.area_side_m
    gnb = np.array([side / 2, side / 2])
    cues = _uniform_outside_lanes(cfg.num_cues, cfg, rng)
    bues = _uniform_outside_lanes(cfg.num_bues, cfg, rng)

    V = cfg.num_vue_pairs
    if V and cfg.lane_count == 0:
        raise ValueError("VUE pairs need at least one lane")
    lanes = rng.integers(0, max(cfg.lane_count, 1), size=V)
    direction = np.where(lanes < cfg.lane_count // 2 + cfg.lane_count % 2, 1, -1) if V else np.zeros(0, int)
    x_tx = rng.uniform(0.0, side, size=V)
    top = gnb[1] - lanes * cfg.lane_width_m
    y = top - rng.uniform(0.0, cfg.lane_width_m, size=V)
    vue_tx = np.column_stack([x_tx, y]) if V else np.zeros((0, 2))
    x_rx = np.mod(x_tx + direction * cfg.vue_pair_separation_m, side)
    vue_rx = np.column_stack([x_rx, y]) if V else np.zeros((0, 2))

    return UserSet(
        gnb=gnb,
        cues=cues,
        bues=bues,
        vue_tx=vue_tx,
        vue_rx=vue_rx,
        vue_lane=lanes.astype(int),
        vue_dir=np.asarray(direction, dtype=int),
        area_side_m=side,
        lane_width_m=cfg.lane_width_m,
        lane_count=cfg.lane_count,
        speed_mps=cfg.vehicle_speed_kmph / 3.6,
        pair_separation_m=cfg.vue_pair_separation_m,
    )


def advance(users: UserSet, dt: float) -> UserSet:
    """Move every VUE pair ``speed * dt`` metres along its lane (``dt`` in seconds)."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if users.num_vue_pairs == 0:
        return users
    shift = users.vue_dir * users.speed_mps * dt
    tx = users.vue_tx.copy()
    rx = users.vue_rx.copy()
    tx[:, 0] = np.mod(tx[:, 0] + shift, users.area_side_m)
    rx[:, 0] = np.mod(rx[:, 0] + shift, users.area_side_m)
    return replace(users, vue_tx=tx, vue_rx=rx)


@dataclass(frozen=True)
class DistanceTable:
    cue_gnb: np.ndarray  # (C,)
    bue_gnb: np.ndarray  # (M,)
    vue_link: np.ndarray  # (V,) VUE tx -> its own rx
    vue_gnb: np.ndarray  # (V,) VUE tx -> gNB
    cue_vue: np.ndarray  # (C, V) CUE -> VUE rx


def _dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum((a - b) ** 2, axis=-1))


def distances(users: UserSet, min_distance: float = 1.0) -> DistanceTable:
    """Euclidean link lengths clamped below at ``min_distance``.

    The VUE pair link measures the gap along the lane on the torus, so a
    pair straddling the wrap point keeps its true separation.
    """
    dx = np.abs(users.vue_tx[:, 0] - users.vue_rx[:, 0])
    dx = np.minimum(dx, users.area_side_m - dx)
    dy = users.vue_tx[:, 1] - users.vue_rx[:, 1]
    clamp = lambda d: np.maximum(d, min_distance)  # noqa: E731
    return DistanceTable(
        cue_gnb=clamp(_dist(users.cues, users.gnb)),
        bue_gnb=clamp(_dist(users.bues, users.gnb)),
        vue_link=clamp(np.hypot(dx, dy)),
        vue_gnb=clamp(_dist(users.vue_tx, users.gnb)),
        cue_vue=clamp(_dist(users.cues[:, None, :], users.vue_rx[None, :, :])),
    )


def topology_csv(users: UserSet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "index", "x_m", "y_m", "lane", "direction"])
    w.writerow(["gnb", 0, f"{users.gnb[0]:.6g}", f"{users.gnb[1]:.6g}", "", ""])
    for i, (x, y) in enumerate(users.cues):
        w.writerow(["cue", i, f"{x:.6g}", f"{y:.6g}", "", ""])
    for i, (x, y) in enumerate(users.bues):
        w.writerow(["bue", i, f"{x:.6g}", f"{y:.6g}", "", ""])
    for i in range(users.num_vue_pairs):
        for kind, pos in (("vue_tx", users.vue_tx[i]), ("vue_rx", users.vue_rx[i])):
            w.writerow([kind, i, f"{pos[0]:.6g}", f"{pos[1]:.6g}", int(users.vue_lane[i]), int(users.vue_dir[i])])
    return buf.getvalue()
