"""Bootstrap intervals for the CED curve and the acceptability (CEA) curve.

The CEA curve is the share of bootstrap NMB estimates above zero.  With a
known ICER of 50 it jumps from 0 to 1 around lambda = 50 as N grows, while
the CED curve keeps describing how the net-benefit distributions overlap.
"""

import numpy as np

from cedcurve.domain import CostEffectivenessDataset, WtpGrid
from cedcurve.inference import asymptotic_null_test, bootstrap_curves, cea_curve
from cedcurve.standardize import ModelSpec

rng = np.random.default_rng(6)
n = 4000
a = rng.permutation(np.repeat([0, 1], n // 2))
s = rng.gamma(2.0, np.where(a == 1, 2.5, 2.0))              # mean 4 vs 5
y = rng.lognormal(np.log(np.where(a == 1, 250.0, 200.0)) - 0.125, 0.5)  # mean 200 vs 250
data = CostEffectivenessDataset(ids=np.arange(n), treatment=a, observed_time=s, event_censored=np.zeros(n),
                                cost_censored=np.zeros(n), cost=y, covariates=np.zeros((n, 0)),
                                covariate_names=())

grid = WtpGrid.from_range(0, 100, 10)
boot = bootstrap_curves(data, ModelSpec(method="unadjusted"), grid, k_boot=300, seed=7)
cea = cea_curve(boot.nmb)

print(f"{'lambda':>6} {'theta':>7} {'95% CI':>17} {'NMB':>8} {'CEA':>6} {'z':>6}")
for p, q, c in zip(boot.nbs.points(), boot.nmb.points(), cea.values):
    z = asymptotic_null_test(p.estimate, *data.arm_sizes()).z
    print(f"{p.lam:6.0f} {p.estimate:7.4f} [{p.ci_lower:.4f}, {p.ci_upper:.4f}] {q.estimate:8.2f} {c:6.3f} {z:6.2f}")
