"""Builders for hand-made scheduler inputs."""

import numpy as np

from v2xsched.channel import AgedField, ChannelState, LargeScaleGain, Shadowing, init_fading, large_scale
from v2xsched.grid import build_grid
from v2xsched.scheduler import TTIInput
from v2xsched.topology import drop_users


def unit_channel(C, V, M, n1, n2, eps=0.757):
    """Every fading coefficient equal to 1 (|h|^2 = 1)."""
    ones = lambda *s: np.ones(s, complex)  # noqa: E731
    field = AgedField(C, V, n1, eps, np.random.default_rng(0))
    field.prev[:] = 1.0
    field.cur[:] = 1.0
    return ChannelState(eps, ones(C, n1), ones(V, n1), ones(M, n2), ones(V, n1), ones(V, n1), field)


def gains(cue_gnb, vue_link, vue_gnb, cue_vue, bue_gnb=()):
    z = np.zeros(0)
    arr = lambda x: np.atleast_1d(np.asarray(x, float))  # noqa: E731
    return LargeScaleGain(arr(cue_gnb), arr(bue_gnb), arr(vue_link), arr(vue_gnb),
                          np.atleast_2d(np.asarray(cue_vue, float)), Shadowing(z, z, z, z, z))


def random_input(cfg, seed, n_cues=None, n_vues=None):
    """A TTI drawn from the simulator's own models with the first CUEs/VUEs backlogged."""
    rng = np.random.default_rng(seed)
    grid = build_grid(cfg)
    users = drop_users(cfg, rng)
    g = large_scale(users, cfg, rng)
    ch = init_fading(cfg.num_cues, cfg.num_vue_pairs, cfg.num_bues, grid.bwp1.rb_count, grid.bwp2.rb_count,
                     0.757, rng)
    cues = list(range(cfg.num_cues if n_cues is None else n_cues))
    vues = list(range(cfg.num_vue_pairs if n_vues is None else n_vues))
    return TTIInput(cfg, grid, cues, vues, g, ch)


def crafted_input(cfg, g, cues, vues, channel=None):
    grid = build_grid(cfg)
    ch = channel or unit_channel(len(g.cue_gnb), len(g.vue_link), len(g.bue_gnb),
                                 grid.bwp1.rb_count, grid.bwp2.rb_count)
    return TTIInput(cfg, grid, list(cues), list(vues), g, ch)
