import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cedcurve.domain import WtpGrid
from cedcurve.errors import CedError
from cedcurve.models import CostModelFit, CostVariant, WeibullAftFit
from cedcurve.rankstats import individual_net_benefit, nbs_two_sample
from cedcurve.simlab import ScenarioConfig, generate_scenario_dataset, replication_model_spec
from cedcurve.standardize import (EmpiricalCovariateDistribution, ModelSpec, PotentialDrawSet, ced_curve,
                                  estimate_curves, fit_models, nbs_from_draws, nmb_from_draws,
                                  standardized_draws)

from conftest import make_dataset

GRID = WtpGrid((0.0, 2.0, 12.0, 50.0))


def null_fits():
    surv = WeibullAftFit(2.0, np.array([1.0, 0.3, 0.0]), 0.0, 0, 0.0, covariate_names=("x",))
    cost = CostModelFit(CostVariant.LOG_NORMAL, np.array([3.0, 0.2, 0.0, 0.01]), 0.5, covariate_names=("x",))
    return surv, cost


def dist(rng, n=300):
    return EmpiricalCovariateDistribution(rng.standard_normal((n, 1)), ("x",))


def ks_two_sample(a, b):
    a, b = np.sort(a), np.sort(b)
    pooled = np.concatenate([a, b])
    return np.max(np.abs(np.searchsorted(a, pooled, "right") / a.size - np.searchsorted(b, pooled, "right") / b.size))


def random_draws(rng, k=200):
    return PotentialDrawSet((rng.exponential(5, k), rng.exponential(6, k)),
                            (rng.lognormal(3, 1, k), rng.lognormal(3.2, 1, k)))


def test_null_fits_give_identically_distributed_arms(rng):
    surv, cost = null_fits()
    draws = standardized_draws(surv, cost, dist(rng), 100_000, np.random.default_rng(1))
    assert ks_two_sample(draws.inb(0, 12.0), draws.inb(1, 12.0)) < 0.01


def test_k_one_deterministic(rng):
    surv, cost = null_fits()
    d = dist(rng)
    a = standardized_draws(surv, cost, d, 1, np.random.default_rng(5))
    b = standardized_draws(surv, cost, d, 1, np.random.default_rng(5))
    assert a.k == 1
    assert a.survival[0].tolist() == b.survival[0].tolist() and a.cost[1].tolist() == b.cost[1].tolist()


def test_covariate_draws_are_observed_rows(rng):
    d = dist(rng, 20)
    idx = d.sample_index(1000, rng)
    assert set(d.columns(idx, ("x",)).ravel()) <= set(d.rows.ravel())


def test_cost_conditions_on_truncated_survival(rng):
    surv, _ = null_fits()
    cost = CostModelFit(CostVariant.LOG_NORMAL, np.array([0.0, 0.0, 0.0, 1.0]), 0.0, covariate_names=("x",))
    with pytest.warns(RuntimeWarning):
        draws = standardized_draws(surv, cost, dist(rng), 1000, np.random.default_rng(0), tau=1.5)
    for arm in (0, 1):
        np.testing.assert_allclose(draws.cost[arm], np.exp(np.minimum(draws.survival[arm], 1.5)), rtol=1e-14)


def test_paired_toggle_reuses_covariate_rows():
    rows = np.arange(50, dtype=float)[:, None]
    d = EmpiricalCovariateDistribution(rows, ("x",))
    surv = WeibullAftFit(1e6, np.array([0.0, 1.0, 0.0]), 0.0, 0, 0.0, covariate_names=("x",))
    cost = CostModelFit(CostVariant.LOG_NORMAL, np.array([1.0, 0.0, 0.0, 0.0]), 0.1, covariate_names=("x",))
    paired = standardized_draws(surv, cost, d, 500, np.random.default_rng(2), paired=True)
    np.testing.assert_allclose(paired.survival[0], paired.survival[1], rtol=1e-4)
    unpaired = standardized_draws(surv, cost, d, 500, np.random.default_rng(2))
    assert not np.allclose(unpaired.survival[0], unpaired.survival[1], rtol=1e-4)


def test_dominating_arm_gives_one():
    draws = PotentialDrawSet((np.ones(10), np.full(10, 5.0)), (np.full(10, 100.0), np.full(10, 10.0)))
    assert [p.estimate for p in nbs_from_draws(draws, GRID)] == [1.0] * 4


def test_identical_arms_give_half(rng):
    s, y = rng.exponential(3, 100), rng.lognormal(2, 1, 100)
    draws = PotentialDrawSet((s, s.copy()), (y, y.copy()))
    assert [p.estimate for p in nbs_from_draws(draws, GRID)] == [0.5] * 4
    assert [p.estimate for p in nmb_from_draws(draws, GRID)] == [0.0] * 4


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_nbs_from_draws_equals_two_sample(seed):
    draws = random_draws(np.random.default_rng(seed))
    for p in nbs_from_draws(draws, GRID):
        assert p.estimate == nbs_two_sample(draws.inb(0, p.lam), draws.inb(1, p.lam)).theta
        assert 0.0 <= p.estimate <= 1.0


def test_zero_lambda_compares_negated_costs(rng):
    draws = random_draws(rng)
    theta0 = nbs_from_draws(draws, WtpGrid((0.0,)))[0].estimate
    assert theta0 == nbs_two_sample(-draws.cost[0], -draws.cost[1]).theta


def test_nmb_formula(rng):
    draws = random_draws(rng)
    nmb = nmb_from_draws(draws, GRID)
    ds = draws.survival[1].mean() - draws.survival[0].mean()
    dy = draws.cost[1].mean() - draws.cost[0].mean()
    assert nmb[0].estimate == -dy
    for p in nmb:
        assert p.estimate == pytest.approx(p.lam * ds - dy, rel=1e-12, abs=1e-9)


def test_nmb_crosses_zero_at_icer():
    draws = PotentialDrawSet((np.array([1.0, 3.0]), np.array([2.0, 4.0])),
                             (np.array([100.0, 100.0]), np.array([150.0, 150.0])))
    nmb = nmb_from_draws(draws, WtpGrid((40.0, 50.0, 60.0)))
    assert nmb[0].estimate < 0 and nmb[1].estimate == 0.0 and nmb[2].estimate > 0


def test_unadjusted_reduces_to_two_sample(rng):
    n = 100
    a = rng.integers(0, 2, n)
    s, y = rng.exponential(5, n), rng.lognormal(3, 1, n)
    ds = make_dataset(a, s, np.zeros(n), y)
    pts = ced_curve(ds, ModelSpec(method="unadjusted"), GRID)
    for p in pts:
        ref = nbs_two_sample(individual_net_benefit(s[a == 0], y[a == 0], p.lam),
                             individual_net_benefit(s[a == 1], y[a == 1], p.lam)).theta
        assert p.estimate == ref


def test_unadjusted_rejects_censoring():
    ds = make_dataset([0, 1, 0], [1.0, 2.0, 3.0], [0, 1, 0], [1.0, np.nan, 3.0])
    with pytest.raises(CedError) as exc:
        estimate_curves(ds, ModelSpec(method="unadjusted"), GRID)
    assert exc.value.code == "CENSORED_DATA"


@pytest.fixture(scope="module")
def scenario2():
    return generate_scenario_dataset(ScenarioConfig.scenario(2, "low", 500), np.random.default_rng(11))


def test_determinism(scenario2):
    spec = replication_model_spec()
    a = estimate_curves(scenario2, spec, GRID, 2000, np.random.default_rng(3))
    b = estimate_curves(scenario2, spec, GRID, 2000, np.random.default_rng(3))
    assert a.theta.tobytes() == b.theta.tobytes() and a.nmb.tobytes() == b.nmb.tobytes()
    assert np.all((a.theta >= 0) & (a.theta <= 1))


def test_fitted_models_and_weights(scenario2):
    fits = fit_models(scenario2, replication_model_spec())
    assert fits.survival.coef.size == 4  # intercept, L1, L2, A
    assert fits.cost.coef.size == 3  # intercept, A, S
    assert np.array_equal(fits.weights.present, scenario2.cost_censored == 0)
    diag = fits.diagnostics()
    assert diag["survival"]["grad_norm"] < 1e-8


def test_cox_censoring_pipeline(scenario2):
    spec = ModelSpec(survival_covariates=("L1", "L2"), censoring_model="cox", censoring_strata=("L2",),
                     censoring_covariates=("L1",))
    est = estimate_curves(scenario2, spec, GRID, 1000, np.random.default_rng(0))
    assert est.diagnostics["censoring"]["kind"] == "CoxFit"


def test_two_part_pipeline(scenario2):
    spec = ModelSpec(survival_covariates=("L1", "L2"), cost_variant="two_part", censoring_strata=("L2",))
    est = estimate_curves(scenario2, spec, GRID, 1000, np.random.default_rng(0))
    assert np.all((est.theta >= 0) & (est.theta <= 1))


def test_errors_carry_stage(scenario2):
    dup = scenario2.take(np.arange(scenario2.n))
    spec = ModelSpec(censoring_model="cox", censoring_covariates=("L2", "L2"))
    with pytest.raises(CedError) as exc:
        estimate_curves(dup, spec, GRID, 10, np.random.default_rng(0))
    assert str(exc.value).startswith("fit.cox: SINGULAR_INFORMATION")


def test_unseen_stratum_reported(scenario2):
    # strata levels unseen by the censoring fit surface from the weighting stage
    from cedcurve.ipcw import compute_censoring_weights, fit_censoring_model
    fit = fit_censoring_model(scenario2.take(np.flatnonzero(scenario2.column("L2") == 0)), "km", ("L2",))
    with pytest.raises(CedError) as exc:
        compute_censoring_weights(scenario2, fit)
    assert exc.value.code == "STRATUM_MISMATCH"


def test_null_scenario_large_n_near_half():
    ds = generate_scenario_dataset(ScenarioConfig.scenario(1, "low", 5000), np.random.default_rng(21))
    est = estimate_curves(ds, replication_model_spec(), WtpGrid((2.0, 12.0)), 10_000, np.random.default_rng(22))
    assert np.all((est.theta > 0.48) & (est.theta < 0.52))
