import math

import numpy as np
import pytest

from mimo_noma_ee.allocator import RATE_TOL, solve
from mimo_noma_ee.channel import UserGeometry, generate_user_geometry
from mimo_noma_ee.config import SystemConfig, dbm_to_watt
from mimo_noma_ee.experiments import (
    aggregate,
    brute_force_oracle,
    config_at,
    grid_levels,
    high_sinr_ee,
    q_trace_monotone,
    resolve_axis,
    run_trial,
    run_trials,
    snap_to_grid,
    sweep,
)
from mimo_noma_ee.metrics import bound_sinr_all


def test_aggregate_single_value():
    s = aggregate([4.2])
    assert (s.mean, s.sd, s.ci95, s.n) == (4.2, 0.0, 0.0, 1)


def test_aggregate_pair():
    s = aggregate([4.0, 6.0])
    assert s.mean == 5.0
    assert s.sd == pytest.approx(math.sqrt(2))
    assert s.ci95 == pytest.approx(1.96 * math.sqrt(2) / math.sqrt(2))
    assert (s.min, s.max) == (4.0, 6.0)


def test_aggregate_identical_and_empty():
    assert aggregate([3.0] * 5).sd == 0.0
    with pytest.raises(ValueError):
        aggregate([])


def test_run_trial_deterministic(config):
    assert run_trial(config, 17) == run_trial(config, 17)


def test_run_trials_seed_layout(config):
    batch = run_trials(config.replace(seed=40), 3)
    assert [t.seed for t in batch] == [40, 41, 42]
    assert batch[1] == run_trial(config, 41)


def test_trial_invariants(config):
    for t in run_trials(config, 20):
        for name in ("proposed", "baseline", "equal"):
            assert t[name].ee >= 0
            assert t[name].power <= config.P_T + 1e-9


def test_single_user_proposed_equals_baseline(config):
    t = run_trial(config.replace(K=1), 3)
    assert t["proposed"].ee == t["baseline"].ee


def test_exact_rate_diagnostic(config):
    t = run_trial(config, 1, exact_draws=50)
    assert set(t.exact_ee) == {"proposed", "baseline", "equal"}
    # MRT exact rates sit close to the large-antenna bound at M=128
    assert t.exact_ee["proposed"] == pytest.approx(t["proposed"].ee, rel=0.05)


def test_sweep_single_value_single_trial(config):
    res = sweep(config, "pt", [1.0], 1, keep_trials=True)
    assert res.axis == "P_T" and len(res.rows) == 1
    assert len(res.trial_results) == 1 and len(res.trial_results[0]) == 1
    assert res.rows[0].trials == 1 and res.rows[0].ee_proposed.ci95 == 0.0


def test_sweep_rows_and_shared_seeds(config):
    res = sweep(config, "P_T", [1.0, 2.0], 4, keep_trials=True)
    assert [r.axis_value for r in res.rows] == [1.0, 2.0]
    assert all(r.trials == 4 for r in res.rows)
    digests = [[t.geometry_digest for t in trials] for trials in res.trial_results]
    assert digests[0] == digests[1]


def test_axis_handling(config):
    assert resolve_axis("pc") == "P_c"
    assert config_at(config, "pc", 10).P_c == pytest.approx(dbm_to_watt(10))
    assert config_at(config, "m", 64.0).M == 64
    with pytest.raises(ValueError):
        sweep(config, "theta1", [0.1], 1)
    with pytest.raises(ValueError):
        sweep(config, "P_T", [1.0], 0)


def test_grid_levels():
    np.testing.assert_allclose(grid_levels(2.0, 0.25), [0.5, 1.0, 1.5, 2.0])
    lg = grid_levels(1.0, 0.01, "log")
    assert len(lg) == 100 and lg[0] == pytest.approx(1e-7) and lg[-1] == pytest.approx(1.0)


def test_oracle_single_user_scan():
    cfg = SystemConfig(K=1, M=1, P_c=0.1, R_T=0.0)
    geo = UserGeometry(np.array([178.0]), np.zeros(1), np.array([1e-9]))
    orc = brute_force_oracle(geo, cfg, resolution=0.005, zones="single")
    grid = 0.005 * np.arange(1, 201)
    a = cfg.M * 1e-9 / cfg.noise_power
    ee = cfg.B * np.log2(a * grid) / (grid + cfg.circuit_power)
    assert orc.p[0] == pytest.approx(grid[np.argmax(ee)])
    assert orc.ee == pytest.approx(ee.max(), rel=1e-12)
    # continuous optimum within one grid step
    fine = np.linspace(1e-4, 1.0, 200_001)
    p_star = fine[np.argmax(np.log2(a * fine) / (fine + cfg.circuit_power))]
    assert abs(orc.p[0] - p_star) <= 0.005


def test_oracle_symmetric_pair(config):
    cfg = config.replace(K=2, P_c=0.05)
    geo = UserGeometry.from_distances([300, 300], cfg)
    orc = brute_force_oracle(geo, cfg, resolution=0.01)
    assert orc.feasible
    assert abs(orc.p[0] - orc.p[1]) <= 0.01 * cfg.P_T + 1e-12


def test_oracle_guards(config):
    cfg = config.replace(K=5)
    geo = generate_user_geometry(cfg, np.random.default_rng(0))
    with pytest.raises(ValueError):
        brute_force_oracle(geo, cfg)
    geo3 = generate_user_geometry(config, np.random.default_rng(0))
    with pytest.raises(ValueError):
        brute_force_oracle(geo3, config, resolution=0.2)


def test_oracle_infeasible_report(config):
    cfg = config.replace(M=8, R_T=7.0)
    geo = generate_user_geometry(cfg, np.random.default_rng(1))
    orc = brute_force_oracle(geo, cfg, resolution=0.05)
    assert not orc.feasible and orc.p is None


@pytest.mark.slow
def test_solver_brackets_log_grid_oracle(config):
    for seed in (0, 1):
        geo = generate_user_geometry(config, np.random.default_rng(seed))
        res = solve(geo, config)
        orc = brute_force_oracle(geo, config, resolution=0.005, spacing="log")
        assert orc.feasible
        assert res.ee >= orc.ee * 0.99 and orc.ee >= res.ee * 0.99


def test_snapped_solution_never_beats_oracle(config):
    geo = generate_user_geometry(config, np.random.default_rng(4))
    res = solve(geo, config)
    snapped = snap_to_grid(res.p, geo, config, 0.005)
    se = np.log2(1 + bound_sinr_all(snapped, geo.betas, config))
    assert np.all(se >= config.R_T - RATE_TOL)
    orc = brute_force_oracle(geo, config, resolution=0.005)
    assert high_sinr_ee(snapped, geo, config) <= orc.ee * (1 + 1e-12)


def test_q_trace_monotone_helper(config):
    res = solve(generate_user_geometry(config, np.random.default_rng(9)), config)
    assert q_trace_monotone(res.q_trace) == res.q_monotone
    assert q_trace_monotone([5.0, 1.0, 2.0, 3.0])
    assert not q_trace_monotone([1.0, 2.0, 3.0, 2.5])
