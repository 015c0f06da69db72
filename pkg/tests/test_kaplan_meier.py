import numpy as np
import pytest
from hypothesis import given, strategies as st

from cedcurve.errors import FitError
from cedcurve.models import fit_kaplan_meier


def hand_product_limit(times, events, t):
    """Closed-form product over distinct event times <= t."""
    s = 1.0
    for u in sorted(set(np.asarray(times)[np.asarray(events) == 1])):
        if u <= t:
            at_risk = np.sum(times >= u)
            d = np.sum((times == u) & (events == 1))
            s *= 1 - d / at_risk
    return s


def test_three_events():
    fit = fit_kaplan_meier([1, 2, 3], [1, 1, 1])
    assert fit.evaluate([0.5, 1, 2, 3]).tolist() == [1.0, 2 / 3, 1 / 3, 0.0]


def test_censored_middle():
    fit = fit_kaplan_meier([1, 2, 3], [1, 0, 1])
    assert fit.evaluate(1.0) == 2 / 3
    assert fit.evaluate(2.5) == 2 / 3
    assert fit.evaluate(3.0) == 0.0


def test_all_censored_is_one():
    fit = fit_kaplan_meier([1, 2, 3], [0, 0, 0])
    assert fit.evaluate([0, 1, 100]).tolist() == [1.0, 1.0, 1.0]


def test_left_limits():
    fit = fit_kaplan_meier([1, 2, 3], [1, 1, 1])
    assert fit.evaluate([1, 2, 3], left=True).tolist() == [1.0, 2 / 3, 1 / 3]


def test_strata_fitted_separately():
    t = np.array([1, 2, 3, 1, 2, 3.0])
    e = np.array([1, 1, 1, 0, 1, 0])
    fit = fit_kaplan_meier(t, e, strata=[0, 0, 0, 1, 1, 1], strata_names=("g",))
    assert fit.evaluate(2, label=(0.0,)) == 1 / 3
    assert fit.evaluate(2, label=(1.0,)) == 0.5
    with pytest.raises(FitError) as exc:
        fit.stratum((7.0,))
    assert exc.value.code == "STRATUM_MISMATCH"


def test_empty_input():
    with pytest.raises(FitError) as exc:
        fit_kaplan_meier([], [])
    assert exc.value.code == "EMPTY_STRATUM"


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_kaplan_meier([-1, 2], [1, 1])
    with pytest.raises(ValueError):
        fit_kaplan_meier([1, 2], [1, 2])


@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 1)), min_size=1, max_size=10))
def test_matches_hand_oracle_and_is_monotone(rows):
    t = np.array([r[0] for r in rows], float)
    e = np.array([r[1] for r in rows])
    fit = fit_kaplan_meier(t, e)
    grid = np.arange(0, 8, 0.5)
    s = fit.evaluate(grid)
    assert fit.evaluate(0.0 - 1e-9) == 1.0
    assert np.all(np.diff(s) <= 0)
    expected = [hand_product_limit(t, e, g) for g in grid]
    np.testing.assert_allclose(s, expected, rtol=0, atol=1e-15)
