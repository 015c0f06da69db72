"""Inverse probability of censoring weights.

Each subject with observed cost is weighted by 1 / G(S*-), the chance of
remaining uncensored until just before its cost-accrual end point.
"""

import math

import numpy as np

from cedcurve.domain import CostEffectivenessDataset
from cedcurve.ipcw import compute_censoring_weights, fit_censoring_model
from cedcurve.simlab import ScenarioConfig, generate_scenario_dataset

# three subjects, one censored at t = 1
tiny = CostEffectivenessDataset(
    ids=["a", "b", "c"], treatment=[0, 1, 1], observed_time=[1.0, 2.0, 3.0],
    event_censored=[1, 0, 0], cost_censored=[1, 0, 0], cost=[np.nan, 10.0, 20.0],
    covariates=np.zeros((3, 0)), covariate_names=(),
)
for kind in ("km", "cox"):
    w = compute_censoring_weights(tiny, fit_censoring_model(tiny, kind))
    print(kind, w.weights)          # NaN marks the censored cost
print("e^(1/3) =", math.exp(1 / 3))

# simulated study with 25% censoring, weights stratified by L2
data = generate_scenario_dataset(ScenarioConfig.scenario(2, "high", 2000), np.random.default_rng(2))
km = compute_censoring_weights(data, fit_censoring_model(data, "km", strata=("L2",)))
cox = compute_censoring_weights(data, fit_censoring_model(data, "cox", strata=("L2",), covariates=("L1",)))
print("censored fraction:", data.cost_censored.mean())
print("KM weights  min/mean/max:", np.nanmin(km.weights), np.nanmean(km.weights), np.nanmax(km.weights))
print("Cox weights min/mean/max:", np.nanmin(cox.weights), np.nanmean(cox.weights), np.nanmax(cox.weights))
