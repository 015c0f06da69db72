import math

import numpy as np
import pytest

from cedcurve.domain import WtpGrid
from cedcurve.errors import CedError
from cedcurve.inference import (BootstrapResult, asymptotic_null_test, bootstrap_curves, cea_curve,
                                resample_index)
from cedcurve.simlab import ScenarioConfig, generate_scenario_dataset, replication_model_spec
from cedcurve.standardize import ModelSpec

from conftest import make_dataset

GRID = WtpGrid((0.0, 5.0, 20.0))
UNADJUSTED = ModelSpec(method="unadjusted")


def randomized(rng, n=120, effect=0.0):
    a = rng.integers(0, 2, n)
    return make_dataset(a, rng.exponential(5 + effect * a, n), np.zeros(n), rng.lognormal(3, 0.5, n))


def nmb_result(reps):
    reps = np.asarray(reps, float)
    return BootstrapResult(np.arange(reps.shape[1], dtype=float), reps.mean(0), reps, np.arange(len(reps)), 0.05)


def test_constant_outcomes_give_degenerate_interval():
    n = 40
    ds = make_dataset(np.tile([0, 1], n // 2), np.full(n, 3.0), np.zeros(n), np.full(n, 10.0))
    boot = bootstrap_curves(ds, UNADJUSTED, GRID, 50, seed=1)
    assert np.all(boot.nbs.replicates == 0.5)
    assert np.all(boot.nbs.lower == 0.5) and np.all(boot.nbs.upper == 0.5)


def test_percentile_interval_and_se(rng):
    boot = bootstrap_curves(randomized(rng), UNADJUSTED, GRID, 200, seed=2)
    reps = boot.nbs.replicates
    assert reps.shape == (200, 3)
    np.testing.assert_array_equal(boot.nbs.lower, np.quantile(reps, 0.025, axis=0))
    np.testing.assert_array_equal(boot.nbs.upper, np.quantile(reps, 0.975, axis=0))
    np.testing.assert_allclose(boot.nbs.se, reps.std(0, ddof=1))
    for p in boot.nbs.points() + boot.nmb.points():
        assert p.ci_lower <= p.estimate <= p.ci_upper
    assert np.all((reps >= 0) & (reps <= 1))


def test_bootstrap_deterministic_across_threads():
    ds = generate_scenario_dataset(ScenarioConfig.scenario(2, "low", 300), np.random.default_rng(3))
    spec = replication_model_spec()
    one = bootstrap_curves(ds, spec, GRID, 8, 500, seed=42, threads=1)
    two = bootstrap_curves(ds, spec, GRID, 8, 500, seed=42, threads=2)
    assert one.nbs.replicates.tobytes() == two.nbs.replicates.tobytes()
    assert one.nmb.replicates.tobytes() == two.nmb.replicates.tobytes()
    assert one.nbs.estimate.tobytes() == two.nbs.estimate.tobytes()
    other = bootstrap_curves(ds, spec, GRID, 8, 500, seed=43)
    assert other.nbs.replicates.tobytes() != one.nbs.replicates.tobytes()


def test_failed_replicates_dropped_then_ceiling():
    # one subject in arm 1: about a third of resamples lose that arm entirely
    n = 3
    ds = make_dataset([0, 0, 1], [1.0, 2.0, 3.0], np.zeros(n), [1.0, 2.0, 3.0])
    with pytest.raises(CedError) as exc:
        bootstrap_curves(ds, UNADJUSTED, GRID, 40, seed=0)
    assert exc.value.code == "TOO_MANY_FAILURES"


def test_few_failures_are_tolerated(rng):
    ds = randomized(rng, n=60)
    ds = ds.take(np.r_[np.flatnonzero(ds.treatment == 0), np.flatnonzero(ds.treatment == 1)[:4]])
    boot = bootstrap_curves(ds, UNADJUSTED, GRID, 100, seed=5)
    assert boot.n_failed <= 5
    assert boot.nbs.replicates.shape[0] == 100 - boot.n_failed
    assert all(b not in boot.nbs.replicate_ids for b, _ in boot.nbs.failures)


def test_stratified_resampling_keeps_arm_sizes(rng):
    ds = randomized(rng)
    idx = resample_index(ds, rng, stratified=True)
    assert ds.take(idx).arm_sizes() == ds.arm_sizes()


def test_argument_checks(rng):
    with pytest.raises(ValueError):
        bootstrap_curves(randomized(rng), UNADJUSTED, GRID, 1)
    with pytest.raises(ValueError):
        bootstrap_curves(randomized(rng), UNADJUSTED, GRID, 10, alpha=1.0)


def test_cea_all_positive():
    cea = cea_curve(nmb_result([[1.0, 2.0], [0.5, 3.0]]))
    assert cea.values.tolist() == [1.0, 1.0]


def test_cea_symmetric_replicates():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((10_000, 1))
    cea = cea_curve(nmb_result(np.vstack([x, -x])))
    assert cea.values[0] == pytest.approx(0.5, abs=1e-12)


def test_cea_strict_inequality():
    assert cea_curve(nmb_result([[0.0], [0.0], [1.0], [-1.0]])).values[0] == 0.25


def test_null_test_examples():
    t = asymptotic_null_test(0.5, 10, 10)
    assert t.z == 0.0 and t.p_value == 1.0
    assert t.variance == pytest.approx(1 / 6)
    t = asymptotic_null_test(0.55, 600, 600)
    assert t.z == pytest.approx(3.0, abs=1e-12)
    assert t.p_value == pytest.approx(0.0026997960632601866, rel=1e-10)


def test_null_test_unequal_arms():
    t = asymptotic_null_test(0.6, 200, 100)
    r = 2.0
    assert t.z == pytest.approx(math.sqrt(100) * 0.1 / math.sqrt((r + 1) / (12 * r)))


def test_null_coverage_of_percentile_interval():
    # randomized null data, unadjusted estimator: the 95% interval should cover 0.5 most of the time
    rng = np.random.default_rng(77)
    covered = 0
    outer = 200
    for i in range(outer):
        n = 100
        a = np.tile([0, 1], n // 2)
        ds = make_dataset(a, rng.exponential(5, n), np.zeros(n), rng.lognormal(3, 0.5, n))
        boot = bootstrap_curves(ds, UNADJUSTED, WtpGrid((5.0,)), 100, seed=i)
        covered += boot.nbs.lower[0] <= 0.5 <= boot.nbs.upper[0]
    assert 0.90 <= covered / outer <= 0.99
