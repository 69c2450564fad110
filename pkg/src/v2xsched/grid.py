"""Two orthogonal bandwidth parts and the resource-chunk layout of BWP-1."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import ConfigError, ScenarioConfig, numerology_params


@dataclass(frozen=True)
class BandwidthPart:
    numerology: int
    rb_count: int
    carrier_ghz: float
    first_rb: int  # offset in a global RB index space shared by both BWPs

    @property
    def scs_khz(self) -> float:
        return numerology_params(self.numerology)[0]

    @property
    def rb_bandwidth_hz(self) -> float:
        return numerology_params(self.numerology)[1] * 1e3

    @property
    def tti_ms(self) -> float:
        return numerology_params(self.numerology)[2]

    @property
    def global_rbs(self) -> range:
        return range(self.first_rb, self.first_rb + self.rb_count)


@dataclass(frozen=True)
class ResourceGrid:
    bwp1: BandwidthPart
    bwp2: BandwidthPart
    rbs_per_rc: int
    num_rcs: int

    def rbs_of(self, rc_index: int) -> list[int]:
        """BWP-1 RB indices of chunk ``rc_index``: ``[eta*i, eta*(i+1))``."""
        if not 0 <= rc_index < self.num_rcs:
            raise IndexError(f"RC index {rc_index} out of range 0..{self.num_rcs - 1}")
        start = rc_index * self.rbs_per_rc
        return list(range(start, start + self.rbs_per_rc))

    @property
    def rc_slices(self) -> np.ndarray:
        """(num_rcs, eta) array of RB indices, row i = ``rbs_of(i)``."""
        return np.arange(self.num_rcs * self.rbs_per_rc).reshape(self.num_rcs, self.rbs_per_rc)

    @property
    def tti_ratio(self) -> int:
        """BWP-1 TTIs per BWP-2 TTI."""
        return int(round(self.bwp2.tti_ms / self.bwp1.tti_ms))


def build_grid(cfg: ScenarioConfig) -> ResourceGrid:
    n1 = cfg.num_rcs * cfg.rbs_per_rc
    bw1 = n1 * numerology_params(cfg.numerology_bwp1)[1]
    if bw1 > cfg.system_bandwidth_mhz * 1e3:
        raise ConfigError(f"{cfg.num_rcs} RCs of {cfg.rbs_per_rc} RBs exceed BWP-1 capacity")
    return ResourceGrid(
        bwp1=BandwidthPart(cfg.numerology_bwp1, n1, cfg.carrier_freq_bwp1_ghz, 0),
        bwp2=BandwidthPart(cfg.numerology_bwp2, cfg.bwp2_rb_count, cfg.carrier_freq_bwp2_ghz, n1),
        rbs_per_rc=cfg.rbs_per_rc,
        num_rcs=cfg.num_rcs,
    )


def rbs_of(grid: ResourceGrid, rc_index: int) -> list[int]:
    return grid.rbs_of(rc_index)
