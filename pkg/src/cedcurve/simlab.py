"""Simulation scenarios, the true-NBS oracle and the replication harness.

Data-generating process (all subjects)::

    L1 ~ N(0, 1),  L2 ~ Bernoulli(0.5),  A ~ Bernoulli(expit(L1))
    S  ~ Weibull(shape 2, scale exp(alpha0 + 0.2 L1 + 0.2 L2 + alpha_A A))
    C  ~ Weibull(shape 2, scale exp(beta0 + 0.1 L2))
    log Y ~ N(4.2 + 0.002 S + gamma_A A, 0.4)

Cost accrues over the whole survival time (no horizon), so the cost is
censored exactly when the survival time is.
"""

from __future__ import annotations

import csv
import functools
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import child_rng, child_sequence, map_chunks, seed_sequence
from .domain import CostEffectivenessDataset, WtpGrid
from .errors import CedError
from .inference import MAX_FAILURE_FRACTION, bootstrap_curves
from .models.logistic import expit
from .rankstats import individual_net_benefit, nbs_two_sample
from .standardize import ModelSpec, estimate_curves

log = logging.getLogger(__name__)

CENSORING_BETA0 = {"low": 5.65, "high": 5.1}
SCENARIOS = {
    1: dict(alpha0=4.5, alpha_a=0.0, gamma_a=0.0),
    2: dict(alpha0=4.05, alpha_a=0.7, gamma_a=0.1),
}
REPORT_COLUMNS = ("censoring", "N", "lambda", "theta_true", "mean_est", "ese", "mean_se", "n_ok", "n_failed")


@dataclass(frozen=True)
class ScenarioConfig:
    alpha0: float
    alpha_a: float
    gamma_a: float
    beta0: float
    n: int = 500
    sigma_cost: float = 0.4
    survival_shape: float = 2.0
    censoring_shape: float = 2.0
    survival_l1: float = 0.2
    survival_l2: float = 0.2
    censoring_l2: float = 0.1
    cost_intercept: float = 4.2
    cost_survival: float = 0.002
    censoring: str = "custom"
    seed: int = 0

    def __post_init__(self):
        if self.survival_shape <= 0 or self.censoring_shape <= 0:
            raise ValueError("Weibull shapes must be positive")
        if self.sigma_cost <= 0:
            raise ValueError("sigma_cost must be positive")
        if self.n < 2:
            raise ValueError("n must be at least 2")

    @classmethod
    def scenario(cls, number: int, censoring: str = "low", n: int = 500, seed: int = 0) -> "ScenarioConfig":
        """Scenario 1 (no treatment effect) or 2 (treatment raises cost and survival)."""
        return cls(**SCENARIOS[number], beta0=CENSORING_BETA0[censoring], n=n, censoring=censoring, seed=seed)

    def survival_scale(self, l1, l2, a):
        return np.exp(self.alpha0 + self.survival_l1 * l1 + self.survival_l2 * l2 + self.alpha_a * a)


def _potential_outcomes(config: ScenarioConfig, l1, l2, a, rng):
    n = l1.size
    s = config.survival_scale(l1, l2, a) * rng.weibull(config.survival_shape, n)
    log_y = rng.normal(config.cost_intercept + config.cost_survival * s + config.gamma_a * a, config.sigma_cost)
    return s, np.exp(log_y)


def generate_scenario_dataset(config: ScenarioConfig, rng: np.random.Generator | None = None
                              ) -> CostEffectivenessDataset:
    """One simulated study of ``config.n`` subjects (``tau`` is infinite)."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    n = config.n
    l1 = rng.standard_normal(n)
    l2 = rng.binomial(1, 0.5, n).astype(float)
    a = rng.binomial(1, expit(l1)).astype(float)
    s, y = _potential_outcomes(config, l1, l2, a, rng)
    c = np.exp(config.beta0 + config.censoring_l2 * l2) * rng.weibull(config.censoring_shape, n)
    x = np.minimum(s, c)
    delta = (c < s).astype(np.int8)
    return CostEffectivenessDataset(
        ids=np.arange(n),
        treatment=a,
        observed_time=x,
        event_censored=delta,
        cost_censored=delta.copy(),
        cost=np.where(delta == 1, np.nan, y),
        covariates=np.column_stack([l1, l2]),
        covariate_names=("L1", "L2"),
        tau=math.inf,
    )


def oracle_true_theta(config: ScenarioConfig, lam, m_oracle: int = 1_000_000,
                      rng: np.random.Generator | None = None):
    """True NBS from ``m_oracle`` uncensored potential-outcome draws per arm.

    Covariates are drawn from their known laws independently for each arm.
    Returns a float for scalar ``lam``, else an array.
    """
    if m_oracle < 100_000:
        raise ValueError("m_oracle must be at least 1e5")
    if rng is None:
        rng = np.random.default_rng(config.seed)
    arms = []
    for a in (0.0, 1.0):
        l1 = rng.standard_normal(m_oracle)
        l2 = rng.binomial(1, 0.5, m_oracle).astype(float)
        arms.append(_potential_outcomes(config, l1, l2, np.full(m_oracle, a), rng))
    (s0, y0), (s1, y1) = arms
    lams = np.atleast_1d(np.asarray(lam, dtype=float))
    out = np.array([nbs_two_sample(individual_net_benefit(s0, y0, l),
                                   individual_net_benefit(s1, y1, l)).theta for l in lams])
    return float(out[0]) if np.ndim(lam) == 0 else out


def replication_model_spec() -> ModelSpec:
    """Correctly specified models for the scenario DGP.

    KM censoring weights stratified by L2, Weibull survival on (L1, L2, A),
    log-normal cost on (intercept, A, S).
    """
    return ModelSpec(
        survival_covariates=("L1", "L2"),
        cost_covariates=(),
        cost_survival_term=True,
        cost_variant="lognormal",
        censoring_model="km",
        censoring_strata=("L2",),
    )


@dataclass(frozen=True)
class ReplicationRow:
    censoring: str
    n: int
    lam: float
    theta_true: float
    mean_est: float
    ese: float
    mean_se: float
    n_ok: int
    n_failed: int


@dataclass
class ReplicationReport:
    rows: list[ReplicationRow] = field(default_factory=list)
    estimates: dict = field(default_factory=dict)  # (cell, lambda) -> per-replicate estimates

    def row(self, censoring: str, n: int, lam: float) -> ReplicationRow:
        for r in self.rows:
            if r.censoring == censoring and r.n == n and r.lam == lam:
                return r
        raise KeyError((censoring, n, lam))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in self.rows:
            w.writerow([r.censoring, r.n, repr(r.lam), repr(r.theta_true), repr(r.mean_est), repr(r.ese),
                        repr(r.mean_se), r.n_ok, r.n_failed])
        return buf.getvalue()


def _replicate_jobs(jobs, configs, grid, k_boot, k_draws, seed, spec):
    out = []
    for cell, rep in jobs:
        config = configs[cell]
        ss = child_sequence(seed, 0, cell, rep)
        data = generate_scenario_dataset(config, child_rng(ss, 0))
        try:
            if k_boot > 0:
                boot = bootstrap_curves(data, spec, grid, k_boot, k_draws, seed=child_sequence(ss, 1))
                theta, se = boot.nbs.estimate, boot.nbs.se
            else:
                theta = estimate_curves(data, spec, grid, k_draws, child_rng(ss, 1, 0)).theta
                se = np.full(len(grid), np.nan)
        except CedError as err:
            out.append((cell, rep, None, None, str(err)))
            continue
        out.append((cell, rep, theta, se, None))
    return out


def run_replication_study(
    configs,
    lambdas=(2.0, 12.0),
    n_replicates: int = 200,
    k_boot: int = 300,
    k_draws: int = 5000,
    seed=0,
    threads: int = 1,
    m_oracle: int = 1_000_000,
    theta_true=None,
    model_spec: ModelSpec | None = None,
) -> ReplicationReport:
    """Repeat the full estimation pipeline over simulated datasets.

    Parameters
    ----------
    configs : ScenarioConfig or sequence of them
        One grid cell each (censoring level / sample size).
    k_boot : int
        Bootstrap replicates per dataset for the mean estimated SE; 0 skips
        the bootstrap and reports NaN.
    theta_true : optional
        Per-cell sequences of true values to skip the oracle.

    Replicate ``r`` of cell ``c`` uses streams derived from ``(seed, c, r)``.
    """
    if isinstance(configs, ScenarioConfig):
        configs = [configs]
    configs = list(configs)
    if not configs:
        raise ValueError("empty configuration grid")
    grid = WtpGrid(tuple(lambdas))
    spec = model_spec or replication_model_spec()
    seed = seed_sequence(seed)
    jobs = [(c, r) for c in range(len(configs)) for r in range(n_replicates)]
    n_chunks = max(threads, 1) * 4 if threads > 1 else 1
    chunks = [jobs[i::n_chunks] for i in range(n_chunks)]
    work = functools.partial(_replicate_jobs, configs=configs, grid=grid, k_boot=k_boot, k_draws=k_draws,
                             seed=seed, spec=spec)
    results = sorted((r for part in map_chunks(work, [c for c in chunks if c], threads) for r in part),
                     key=lambda r: (r[0], r[1]))

    report = ReplicationReport()
    for c, config in enumerate(configs):
        cell = [r for r in results if r[0] == c]
        failed = [r for r in cell if r[4] is not None]
        for r in failed:
            log.warning("cell %d replicate %d failed: %s", c, r[1], r[4])
        if len(failed) > MAX_FAILURE_FRACTION * n_replicates:
            raise CedError("TOO_MANY_FAILURES", f"cell {c}: {len(failed)} of {n_replicates} failed",
                           stage="simulate")
        ok = [r for r in cell if r[4] is None]
        est = np.array([r[2] for r in ok])
        se = np.array([r[3] for r in ok])
        if theta_true is not None:
            truth = np.asarray(theta_true[c], dtype=float)
        else:
            truth = np.atleast_1d(oracle_true_theta(config, grid.asarray(), m_oracle, child_rng(seed, 1, c)))
        for j, lam in enumerate(grid):
            report.estimates[(c, lam)] = est[:, j]
            report.rows.append(ReplicationRow(
                censoring=config.censoring,
                n=config.n,
                lam=lam,
                theta_true=float(truth[j]),
                mean_est=float(np.mean(est[:, j])),
                ese=float(np.std(est[:, j], ddof=1)) if len(ok) > 1 else float("nan"),
                mean_se=float(np.mean(se[:, j])),
                n_ok=len(ok),
                n_failed=len(failed),
            ))
    return report


__all__ = [
    "ScenarioConfig", "ReplicationReport", "ReplicationRow", "generate_scenario_dataset",
    "oracle_true_theta", "replication_model_spec", "run_replication_study",
]
