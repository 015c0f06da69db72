import numpy as np
import pytest

from cedcurve.domain import validate_dataset
from cedcurve.errors import CedError
from cedcurve.rankstats import nbs_two_sample
from cedcurve.simlab import (REPORT_COLUMNS, ScenarioConfig, _potential_outcomes, generate_scenario_dataset,
                             oracle_true_theta, run_replication_study)


@pytest.mark.parametrize("censoring,target", [("low", 0.10), ("high", 0.25)])
def test_censoring_fraction(censoring, target):
    ds = generate_scenario_dataset(ScenarioConfig.scenario(1, censoring, 1_000_000), np.random.default_rng(1))
    assert abs(ds.event_censored.mean() - target) < 0.01


def test_treatment_prevalence():
    ds = generate_scenario_dataset(ScenarioConfig.scenario(2, "low", 1_000_000), np.random.default_rng(2))
    assert abs(ds.treatment.mean() - 0.5) < 0.005


def test_generated_dataset_is_valid_and_consistent():
    ds = generate_scenario_dataset(ScenarioConfig.scenario(2, "high", 2000), np.random.default_rng(3))
    assert validate_dataset(ds) is ds
    np.testing.assert_array_equal(ds.cost_censored, ds.event_censored)
    assert np.all(np.isnan(ds.cost) == (ds.cost_censored == 1))
    assert ds.tau == np.inf


def test_same_seed_same_dataset():
    cfg = ScenarioConfig.scenario(2, "low", 100, seed=9)
    a, b = generate_scenario_dataset(cfg), generate_scenario_dataset(cfg)
    assert a.observed_time.tobytes() == b.observed_time.tobytes()
    np.testing.assert_array_equal(a.cost, b.cost)


def test_config_checks():
    with pytest.raises(ValueError):
        ScenarioConfig(4.5, 0, 0, 5.65, sigma_cost=0)
    with pytest.raises(ValueError):
        ScenarioConfig(4.5, 0, 0, 5.65, n=1)
    with pytest.raises(ValueError):
        oracle_true_theta(ScenarioConfig.scenario(1), 2.0, m_oracle=1000)


def test_oracle_null_scenario():
    theta = oracle_true_theta(ScenarioConfig.scenario(1), np.array([0.0, 2.0, 12.0]), 200_000,
                              np.random.default_rng(4))
    assert np.all(np.abs(theta - 0.5) < 0.005)


def test_oracle_zero_lambda_compares_costs():
    cfg = ScenarioConfig.scenario(2)
    theta = oracle_true_theta(cfg, 0.0, 100_000, np.random.default_rng(5))
    # replay the same stream and compare costs directly
    rng = np.random.default_rng(5)
    y = []
    for a in (0.0, 1.0):
        l1 = rng.standard_normal(100_000)
        l2 = rng.binomial(1, 0.5, 100_000).astype(float)
        y.append(_potential_outcomes(cfg, l1, l2, np.full(100_000, a), rng)[1])
    assert theta == nbs_two_sample(y[1], y[0]).theta


def test_report_layout_and_parallel_determinism():
    cfgs = [ScenarioConfig.scenario(2, "low", 200), ScenarioConfig.scenario(2, "high", 200)]
    kw = dict(lambdas=(2.0, 12.0), n_replicates=6, k_boot=3, k_draws=300, seed=8, theta_true=[[0.74, 0.78]] * 2)
    one = run_replication_study(cfgs, threads=1, **kw)
    two = run_replication_study(cfgs, threads=2, **kw)
    assert one.to_csv() == two.to_csv()
    lines = one.to_csv().splitlines()
    assert tuple(lines[0].split(",")) == REPORT_COLUMNS
    assert len(lines) == 1 + 4
    row = one.row("high", 200, 12.0)
    assert row.n_ok == 6 and row.n_failed == 0 and row.ese >= 0 and row.mean_se >= 0


def test_null_scenario_means_close_to_half():
    n_rep = 40
    report = run_replication_study(ScenarioConfig.scenario(1, "low", 300), (2.0, 12.0), n_rep, k_boot=0,
                                   k_draws=2000, seed=1, theta_true=[[0.5, 0.5]])
    for r in report.rows:
        assert abs(r.mean_est - 0.5) < 3 * r.ese / np.sqrt(n_rep)
        assert np.isnan(r.mean_se)


def test_failure_ceiling(monkeypatch):
    from cedcurve import simlab

    def broken(*args, **kwargs):
        raise CedError("NONCONVERGENCE", stage="fit.weibull")

    monkeypatch.setattr(simlab, "estimate_curves", broken)
    with pytest.raises(CedError) as exc:
        run_replication_study(ScenarioConfig.scenario(1, "low", 50), (2.0,), 5, k_boot=0, theta_true=[[0.5]])
    assert exc.value.code == "TOO_MANY_FAILURES"
