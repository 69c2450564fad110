"""Metric file rendering. Regenerate goldens with ``V2X_REGEN_GOLDEN=1 pytest tests/test_report.py``."""

import json
import os
from pathlib import Path

import numpy as np
import pytest

from v2xsched.metrics import Report
from v2xsched.report import METRIC_FILES, SCHEMA_LINE, render_files, summary_table, sweep_csv, write_outputs
from v2xsched.scenario import ScenarioConfig

GOLDEN = Path(__file__).parent / "golden"


def synthetic_report() -> Report:
    return Report(
        algorithm="gsrags",
        num_runs=2,
        num_cues=3,
        plr={"cue": 0.0125, "vue": 0.5},
        plr_per_run={"cue": [0.02, 0.005], "vue": [0.5, 0.5]},
        mean_delay_ms={"cue": 3.3333333333, "vue": float("nan")},
        delay_samples={"cue": np.array([0.125, 5.0, 0.125, 1 / 3]), "vue": np.zeros(0)},
        vue_outage=np.array([0.002, np.nan, 0.0]),
        vue_mean_delay_ms=np.array([1.0, np.nan, 2.5]),
        mean_rbs={"cue": 31.5, "vue": 4.0, "bue": 21.0},
        cue_rbs_when_saturated=np.array([32]),
        cue_sum_rate_bps=2.3456789e7,
        bue_sum_rate_samples=np.array([1e6, 2e6, 1e6]),
        satisfied_fraction=2 / 3,
        violations=0,
        conservation_ok=True,
    )


def _cfg():
    return ScenarioConfig(num_cues=3, num_vue_pairs=3, num_bues=2)


def test_golden_files():
    files = render_files(synthetic_report(), _cfg())
    if os.environ.get("V2X_REGEN_GOLDEN"):
        GOLDEN.mkdir(exist_ok=True)
        for name, text in files.items():
            (GOLDEN / name).write_text(text, newline="\n")
    for name, text in files.items():
        assert (GOLDEN / name).read_text() == text, name


def test_hand_checked_rows():
    files = render_files(synthetic_report())
    assert files["delay_cdf.csv"].splitlines()[2:] == ["cue,0.125,0.5", "cue,0.333333,0.75", "cue,5,1"]
    assert files["outage_cdf.csv"].splitlines()[2:] == ["2,0,0.5", "0,0.002,1"]
    assert files["bue_rate_cdf.csv"].splitlines()[2:] == ["1e+06,0.666667", "2e+06,1"]
    assert "cue,mean,0.0125" in files["plr.csv"]
    doc = json.loads(files["summary.json"])
    assert doc["mean_delay_ms"] == {"cue": 3.33333, "vue": None}
    assert "config" not in doc


def test_empty_report_gives_header_only_files(tmp_path):
    paths = write_outputs(Report.empty(), tmp_path)
    assert sorted(p.name for p in paths) == sorted([*METRIC_FILES, "summary.json"])
    for name in METRIC_FILES:
        lines = (tmp_path / name).read_text().splitlines()
        assert len(lines) == 2 and lines[0] == SCHEMA_LINE
    json.loads((tmp_path / "summary.json").read_text())
    assert "algorithm" in summary_table(Report.empty())


def test_rerender_is_byte_identical(tmp_path):
    write_outputs(synthetic_report(), tmp_path / "a", _cfg())
    write_outputs(synthetic_report(), tmp_path / "b", _cfg())
    for p in (tmp_path / "a").iterdir():
        assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()


def test_unwritable_directory_names_the_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match=str(blocker)):
        write_outputs(synthetic_report(), blocker / "out")


def test_summary_table_and_sweep():
    text = summary_table(synthetic_report())
    assert "0.0125" in text and "23.46" in text
    csv = sweep_csv([(100, 1.0, 0.0, 0.5), (108, 0.96, 0.011, 1.25)])
    assert csv.splitlines() == [SCHEMA_LINE, "num_cues,satisfied_fraction,cue_plr,cue_mean_delay_ms",
                                "100,1,0,0.5", "108,0.96,0.011,1.25"]
