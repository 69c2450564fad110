import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from v2xsched.scenario import (
    ConfigError,
    ScenarioConfig,
    config_from_mapping,
    dbm_to_watt,
    derived_rng,
    dump_config,
    load_config,
    numerology_params,
    parse_override,
)


def test_empty_document_gives_defaults():
    cfg = load_config("")
    assert cfg == ScenarioConfig()
    # default table values
    assert (cfg.area_side_m, cfg.lane_count, cfg.lane_width_m) == (1000, 4, 4)
    assert (cfg.num_vue_pairs, cfg.num_bues, cfg.vehicle_speed_kmph) == (10, 10, 50)
    assert (cfg.carrier_freq_bwp1_ghz, cfg.carrier_freq_bwp2_ghz) == (28, 2)
    assert (cfg.numerology_bwp1, cfg.numerology_bwp2, cfg.rbs_per_rc, cfg.num_rcs) == (3, 0, 4, 8)
    assert (cfg.max_sched_per_tti, cfg.noise_power_dbm, cfg.p_cue_max_dbm, cfg.p_vue_max_dbm) == (8, -114, 23, 23)
    assert (cfg.r0, cfg.gamma0_db, cfg.p0) == (0.5, 5, 1e-3)
    assert (cfg.ttl_cue_ms, cfg.ttl_vue_ms, cfg.packet_bytes_cue, cfg.packet_bytes_vue) == (50, 10, 50, 10)
    assert (cfg.cue_period_divisor, cfg.feedback_period_ms) == (20, 0.125)
    assert (cfg.shadow_std_v2v_db, cfg.shadow_std_v2i_db) == (4, 7.8)
    assert (cfg.num_slots, cfg.num_runs) == (5000, 10)


def test_probability_out_of_range():
    with pytest.raises(ConfigError, match="probability out of range"):
        load_config("p0: 1.5")


def test_error_names_key_and_value():
    with pytest.raises(ConfigError) as exc:
        load_config("rbs_per_rc: 0")
    assert "rbs_per_rc" in str(exc.value) and "0" in str(exc.value)


def test_cues_and_algorithm():
    cfg = load_config("num_cues: 172\nalgorithm: GSRAGS\n")
    assert cfg.num_cues == 172 and cfg.algorithm == "gsrags"
    assert cfg.replace(num_cues=ScenarioConfig().num_cues) == ScenarioConfig()


@pytest.mark.parametrize("doc", ["bogus_key: 1", "num_cues: [1, 2]", "num_cues: 2.5", "algorithm: foo",
                                 "p0: 0", "numerology_bwp1: 5", "max_sched_per_tti: 0", ": :", "- 1\n- 2"])
def test_bad_documents_rejected(doc):
    with pytest.raises(ConfigError):
        load_config(doc)


def test_rcs_must_fit_bwp1():
    with pytest.raises(ConfigError):
        load_config("num_rcs: 40")


def test_scientific_notation_strings_accepted():
    # YAML 1.1 reads "1e-3" as a string
    assert load_config("p0: 1e-3").p0 == 1e-3


def test_numerology_table():
    assert numerology_params(3) == (120.0, 1440.0, 0.125)
    assert numerology_params(0) == (15.0, 180.0, 1.0)
    for mu in range(5):
        scs, rb, tti = numerology_params(mu)
        assert scs == 15 * 2**mu and rb == 12 * scs and tti == 1 / 2**mu
    with pytest.raises(ConfigError):
        numerology_params(5)
    with pytest.raises(ConfigError):
        numerology_params(-1)


def test_derived_quantities():
    cfg = ScenarioConfig(num_cues=172)
    assert cfg.lambda_cue == pytest.approx(8.6)
    assert cfg.bwp1_rbs == 32
    # 50 MHz minus 32 x 1.44 MHz leaves 3.92 MHz, i.e. 21 RBs of 180 kHz
    assert cfg.bwp2_rb_count == 21
    assert cfg.noise_w == pytest.approx(10 ** (-14.4) * 1e-3 * 1e3 / 1e3)
    assert float(dbm_to_watt(23)) == pytest.approx(0.19953, rel=1e-4)
    assert cfg.gamma0 == pytest.approx(10**0.5)


def test_derived_rng_streams():
    a = derived_rng(42, 0, "fading").random(5)
    assert np.array_equal(a, derived_rng(42, 0, "fading").random(5))
    assert not np.array_equal(a, derived_rng(42, 1, "fading").random(5))
    assert not np.array_equal(a, derived_rng(42, 0, "shadowing").random(5))


def test_parse_override():
    assert parse_override("num_cues=100") == ("num_cues", 100)
    assert parse_override("algorithm=hrahs") == ("algorithm", "hrahs")
    with pytest.raises(ConfigError):
        parse_override("num_cues")


@given(
    num_cues=st.integers(0, 400),
    p0=st.floats(1e-6, 0.5),
    gamma0_db=st.floats(-10, 30),
    speed=st.floats(0, 200),
    seed=st.integers(0, 2**31),
    algorithm=st.sampled_from(["gsrags", "hrahs", "gsrahs"]),
)
def test_config_roundtrip(num_cues, p0, gamma0_db, speed, seed, algorithm):
    cfg = ScenarioConfig(num_cues=num_cues, p0=p0, gamma0_db=gamma0_db, vehicle_speed_kmph=speed,
                         base_seed=seed, algorithm=algorithm)
    back = load_config(dump_config(cfg))
    assert back == cfg
    assert config_from_mapping(cfg.to_dict()) == cfg
    assert math.isclose(back.p0, p0, rel_tol=0, abs_tol=0)
