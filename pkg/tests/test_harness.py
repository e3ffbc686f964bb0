"""Monte-Carlo harness: seeding, sweeps, CSV output, verification checks."""

import os
import re

import numpy as np
import pytest

from ddce.channel import ChannelProfile
from ddce.config import SystemConfig, default_config, with_overrides
from ddce.errors import ContractViolationError
from ddce.harness import (
    CSV_HEADER,
    SweepRow,
    SweepTable,
    check_ongrid_exact_recovery,
    child_seed,
    format_csv,
    run_trial,
    snr_sweep,
    verify_suite,
    write_csv,
)

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def small_cfg(threads=1):
    prof = ChannelProfile((0.0, 4166.666666666667), (0.0, -3.0), v_kmh=250.0, f_c_hz=2.1e9)
    return SystemConfig(
        M=32, N=16, delta_f_hz=15e3, f_c_hz=2.1e9, v_kmh=250.0, d_t=4, d_f=4,
        profile=prof, threads=threads,
    ).validated()


def test_child_seed_frozen_values():
    assert child_seed(20250819, 0, 0) == 9548409564415120031
    assert child_seed(20250819, 0, 1) == 10067703819366171528
    assert child_seed(20250819, 1, 0) == 11126366754928455177
    assert child_seed(20250819, 3, 7) == 376338864837177921


def test_child_seeds_do_not_collide():
    seeds = {child_seed(1, i, j) for i in range(20) for j in range(50)}
    assert len(seeds) == 1000


def test_run_trial_is_deterministic():
    cfg = small_cfg()
    a = run_trial(cfg, cfg.profile, 15.0, "csf-offgrid", seed=99)
    b = run_trial(cfg, cfg.profile, 15.0, "csf-offgrid", seed=99)
    assert a == b
    assert a.n_bits == 2 * (32 * 16 - 8 * 4)
    assert 0.0 <= a.ber <= 1.0
    assert a.seed == 99 and a.estimator == "csf-offgrid"


def test_run_trial_rejects_unknown_estimator():
    cfg = small_cfg()
    with pytest.raises(ContractViolationError, match="unknown estimator"):
        run_trial(cfg, cfg.profile, 10.0, "zero-forcing", seed=1)


def test_ideal_estimator_has_zero_mse():
    cfg = small_cfg()
    res = run_trial(cfg, cfg.profile, 5.0, "ideal", seed=5)
    assert res.mse == 0.0 and res.nmse == 0.0
    assert res.ber > 0.0  # noise still flips bits


def test_offgrid_trial_reports_detection_failure():
    cfg = small_cfg()
    res = run_trial(cfg, cfg.profile, -60.0, "csf-offgrid", seed=2)
    assert res.failed
    assert res.nmse == pytest.approx(1.0)  # all-zero estimate
    assert res.ber > 0.4


def test_sweep_is_paired_with_run_trial():
    cfg = small_cfg()
    table = snr_sweep(cfg, cfg.profile, (12.0,), ("ideal", "ls-interp"), 1, 777)
    seed = child_seed(777, 0, 0)
    for name in ("ideal", "ls-interp"):
        row = table.by(12.0, name)
        single = run_trial(cfg, cfg.profile, 12.0, name, seed)
        assert row.mean_mse == single.mse
        assert row.mean_ber == single.ber
        assert row.ci95_ber == 0.0


def test_sweep_reduction_matches_hand_average():
    cfg = small_cfg()
    n_trials = 3
    table = snr_sweep(cfg, cfg.profile, (20.0,), ("ls-interp",), n_trials, 31)
    singles = [
        run_trial(cfg, cfg.profile, 20.0, "ls-interp", child_seed(31, 0, j))
        for j in range(n_trials)
    ]
    row = table.by(20.0, "ls-interp")
    bers = np.array([s.ber for s in singles])
    assert row.mean_mse == pytest.approx(np.mean([s.mse for s in singles]), abs=1e-15)
    assert row.mean_ber == pytest.approx(bers.mean(), abs=1e-15)
    assert row.ci95_ber == pytest.approx(1.96 * bers.std(ddof=1) / np.sqrt(n_trials), abs=1e-15)


def test_sweep_validates_inputs():
    cfg = small_cfg()
    with pytest.raises(ContractViolationError):
        snr_sweep(cfg, cfg.profile, (10.0,), ("nope",), 1, 0)
    with pytest.raises(ContractViolationError):
        snr_sweep(cfg, cfg.profile, (), ("ideal",), 1, 0)
    with pytest.raises(ContractViolationError):
        snr_sweep(cfg, cfg.profile, (10.0,), ("ideal",), 0, 0)


def test_threading_does_not_change_results():
    single = small_cfg(threads=1)
    pooled = small_cfg(threads=4)
    t1 = snr_sweep(single, single.profile, (8.0, 18.0), single.estimators, 3, 5150)
    t4 = snr_sweep(pooled, pooled.profile, (8.0, 18.0), pooled.estimators, 3, 5150)
    assert format_csv(t1) == format_csv(t4)


def test_sweep_matches_golden_csv(tmp_path):
    cfg = small_cfg()
    table = snr_sweep(cfg, cfg.profile, (10.0, 30.0), cfg.estimators, 2, 424242)
    out = tmp_path / "sweep.csv"
    write_csv(table, str(out))
    golden = open(os.path.join(DATA_DIR, "golden_small.csv"), "rb").read()
    assert out.read_bytes() == golden


def test_csv_formatting_rules():
    rows = (
        SweepRow(10.0, "ideal", 0.125, 0.25, 0.0009765625, 4, 0.0001220703125),
        SweepRow(-2.5, "ls-interp", 1.0 / 3.0, 0.0, 1.0, 1, 0.0),
    )
    text = format_csv(SweepTable(rows))
    lines = text.splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1] == "10,ideal,0.125,0.25,0.0009765625,4,0.0001220703125"
    assert lines[2] == "-2.5,ls-interp,0.3333333333,0,1,1,0"
    assert text.endswith("\n") and "\r" not in text


def test_write_csv_uses_unix_line_endings(tmp_path):
    rows = (SweepRow(0.0, "ideal", 0.0, 0.0, 0.5, 1, 0.0),)
    path = tmp_path / "t.csv"
    write_csv(SweepTable(rows), str(path))
    raw = path.read_bytes()
    assert raw.endswith(b"\n") and b"\r" not in raw


def test_table_lookup_errors():
    rows = (SweepRow(0.0, "ideal", 0.0, 0.0, 0.5, 1, 0.0),)
    table = SweepTable(rows)
    assert table.by(0.0, "ideal") is rows[0]
    with pytest.raises(KeyError):
        table.by(5.0, "ideal")


def test_verify_suite_all_green_and_report_shape():
    report = verify_suite(default_config())
    assert report.all_pass
    lines = report.render().splitlines()
    assert len(lines) == 7
    names = []
    for line in lines:
        m = re.fullmatch(r"CHECK ([a-z_]+) (PASS|FAIL) max_err=(\S+)", line)
        assert m, line
        names.append(m.group(1))
        assert m.group(2) == "PASS"
    assert names == [
        "transform_roundtrip",
        "lattice_kernel_ongrid",
        "period_is_periodic",
        "alias_difference",
        "ongrid_exact_recovery",
        "offgrid_recovery_sweep",
        "perfect_csi_ber",
    ]
    assert report.render().endswith("\n")


def test_verify_catches_out_of_support_placement():
    # Doppler +4 lies outside the centered period of a 16x16, spacing-2 grid
    res = check_ongrid_exact_recovery(placements=[(4, 0)])
    assert not res.passed
    assert res.max_err > 1e-6
