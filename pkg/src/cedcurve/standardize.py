"""Monte-Carlo standardization: potential-outcome draws, CED and NMB curves.

Pipeline for one dataset::

    censoring model on (X, delta*)  ->  IPC weights for cost-observed rows
    Weibull AFT survival model      ->  cost model (weighted)
    K draws per arm over the empirical covariate distribution
    per WTP value: rank the pooled net benefits (NBS) and difference the means (NMB)
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .domain import CostEffectivenessDataset, CurvePoint, WtpGrid
from .errors import CedError
from .ipcw import CensoringWeights, compute_censoring_weights, fit_censoring_model
from .models.cost import CostModelFit, CostVariant, fit_lognormal_cost, fit_two_part_cost, sample_cost_draw
from .models.weibull import WeibullAftFit, fit_weibull_aft, sample_survival_draw
from .rankstats import individual_net_benefit, midranks, nbs_pair_count, nbs_two_sample, rank_sum_theta

DEFAULT_K = 10_000

# Cross-check every rank-formula evaluation against the pair-count form.
DEBUG_CHECKS = os.environ.get("CEDCURVE_DEBUG", "") not in ("", "0")


@dataclass(frozen=True)
class ModelSpec:
    """Which models to fit and on which covariates.

    ``method="unadjusted"`` skips modelling entirely and compares the observed
    arms directly; it is only valid for censoring-free data.
    """

    survival_covariates: tuple[str, ...] = ()
    cost_covariates: tuple[str, ...] = ()
    cost_survival_term: bool = True
    cost_variant: str = "lognormal"
    censoring_model: str = "km"
    censoring_strata: tuple[str, ...] = ()
    censoring_covariates: tuple[str, ...] = ()
    paired_covariates: bool = False
    method: str = "standardized"

    def __post_init__(self):
        for name in ("survival_covariates", "cost_covariates", "censoring_strata", "censoring_covariates"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.method not in ("standardized", "unadjusted"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.cost_variant not in (v.value for v in CostVariant):
            raise ValueError(f"unknown cost variant {self.cost_variant!r}")
        if self.censoring_model not in ("km", "cox"):
            raise ValueError(f"unknown censoring model {self.censoring_model!r}")

    def referenced_columns(self) -> set[str]:
        return {*self.survival_covariates, *self.cost_covariates,
                *self.censoring_strata, *self.censoring_covariates}


@dataclass(frozen=True)
class FittedModels:
    censoring: object
    weights: CensoringWeights
    survival: WeibullAftFit
    cost: CostModelFit

    def diagnostics(self) -> dict:
        cens = {"kind": type(self.censoring).__name__}
        if hasattr(self.censoring, "iterations"):
            cens.update(iterations=self.censoring.iterations, grad_norm=self.censoring.grad_norm,
                        coef=list(map(float, self.censoring.phi)))
        zero = self.cost.zero_part
        return {
            "censoring": cens,
            "survival": {"shape": self.survival.shape, "coef": list(map(float, self.survival.coef)),
                         "iterations": self.survival.iterations, "grad_norm": self.survival.grad_norm},
            "cost": {"variant": self.cost.variant.value, "coef": list(map(float, self.cost.coef)),
                     "sigma": self.cost.sigma,
                     "zero_part": None if zero is None else
                     {"coef": list(map(float, zero.coef)), "iterations": zero.iterations}},
            "max_weight": float(np.nanmax(self.weights.weights)),
        }


@dataclass(frozen=True)
class EmpiricalCovariateDistribution:
    """Uniform resampling of observed covariate rows."""

    rows: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        if self.rows.shape[0] == 0:
            raise ValueError("empty covariate distribution")

    @classmethod
    def from_dataset(cls, dataset: CostEffectivenessDataset) -> "EmpiricalCovariateDistribution":
        return cls(dataset.covariates, dataset.covariate_names)

    def sample_index(self, k: int, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.rows.shape[0], size=k)

    def columns(self, index: np.ndarray, names: Sequence[str]) -> np.ndarray:
        cols = [self.names.index(nm) for nm in names]
        return self.rows[np.ix_(index, cols)]


@dataclass(frozen=True)
class PotentialDrawSet:
    """K draws of (survival, cost) per arm; arm index 0 is control."""

    survival: tuple[np.ndarray, np.ndarray]
    cost: tuple[np.ndarray, np.ndarray]

    @property
    def k(self) -> int:
        return self.survival[0].size

    def inb(self, arm: int, lam: float) -> np.ndarray:
        return individual_net_benefit(self.survival[arm], self.cost[arm], lam)


@dataclass(frozen=True)
class CurveEstimate:
    """NBS and NMB point estimates on one WTP grid."""

    lambdas: np.ndarray
    theta: np.ndarray
    nmb: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def ced_points(self) -> list[CurvePoint]:
        return [CurvePoint(float(l), float(t)) for l, t in zip(self.lambdas, self.theta)]

    def nmb_points(self) -> list[CurvePoint]:
        return [CurvePoint(float(l), float(v)) for l, v in zip(self.lambdas, self.nmb)]


def _staged(stage, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except CedError as err:
        raise err.with_stage(stage)


def fit_models(dataset: CostEffectivenessDataset, spec: ModelSpec) -> FittedModels:
    """Censoring model, IPC weights, survival model and weighted cost model."""
    cens = _staged("fit.censoring", fit_censoring_model, dataset, spec.censoring_model,
                   spec.censoring_strata, spec.censoring_covariates)
    weights = _staged("ipcw", compute_censoring_weights, dataset, cens)

    surv_cov = dataset.columns(spec.survival_covariates) if spec.survival_covariates else None
    survival = _staged("fit.survival", fit_weibull_aft, dataset.observed_time, 1 - dataset.event_censored,
                       surv_cov, dataset.treatment, covariate_names=spec.survival_covariates)

    obs = weights.present
    cost_cov = dataset.columns(spec.cost_covariates)[obs] if spec.cost_covariates else None
    term = dataset.survival_term[obs] if spec.cost_survival_term else None
    fitter = fit_two_part_cost if spec.cost_variant == CostVariant.TWO_PART.value else fit_lognormal_cost
    cost = _staged("fit.cost", fitter, dataset.cost[obs], cost_cov, dataset.treatment[obs], term,
                   weights.weights[obs], covariate_names=spec.cost_covariates)
    return FittedModels(cens, weights, survival, cost)


def standardized_draws(
    survival_fit: WeibullAftFit,
    cost_fit: CostModelFit,
    covariate_dist: EmpiricalCovariateDistribution,
    k: int,
    rng: np.random.Generator,
    tau: float = np.inf,
    paired: bool = False,
) -> PotentialDrawSet:
    """Draw K (survival, cost) pairs under each arm.

    For each arm: resample covariate rows, draw survival from the fitted
    survival model, then cost conditional on ``min(survival, tau)``.
    Covariate rows are drawn afresh for each arm unless ``paired``.
    """
    if k < 1:
        raise ValueError("K must be at least 1")
    surv, cost = [], []
    shared = covariate_dist.sample_index(k, rng) if paired else None
    for arm in (0, 1):
        idx = shared if paired else covariate_dist.sample_index(k, rng)
        s = sample_survival_draw(survival_fit, covariate_dist.columns(idx, survival_fit.covariate_names), arm, rng)
        y = sample_cost_draw(cost_fit, covariate_dist.columns(idx, cost_fit.covariate_names), arm,
                             np.minimum(s, tau), rng)
        surv.append(s)
        cost.append(y)
    return PotentialDrawSet((surv[0], surv[1]), (cost[0], cost[1]))


def _theta_equal_arms(b0: np.ndarray, b1: np.ndarray) -> float:
    n0, n1 = b0.size, b1.size
    ranks = midranks(np.concatenate([b0, b1]))
    theta = rank_sum_theta(ranks[n0:], n0, n1)
    if DEBUG_CHECKS:
        assert theta == nbs_pair_count(b0, b1), "rank-sum and pair-count forms disagree"
    return theta


def nbs_from_draws(draws: PotentialDrawSet, lambda_grid: WtpGrid) -> list[CurvePoint]:
    """Net benefit separation at each WTP value from pooled draw ranks."""
    return [CurvePoint(lam, _theta_equal_arms(draws.inb(0, lam), draws.inb(1, lam))) for lam in lambda_grid]


def nmb_from_draws(draws: PotentialDrawSet, lambda_grid: WtpGrid) -> list[CurvePoint]:
    """``lam * (mean S1 - mean S0) - (mean Y1 - mean Y0)`` at each WTP value."""
    ds = float(np.mean(draws.survival[1]) - np.mean(draws.survival[0]))
    dy = float(np.mean(draws.cost[1]) - np.mean(draws.cost[0]))
    return [CurvePoint(lam, lam * ds - dy) for lam in lambda_grid]


def _unadjusted(dataset: CostEffectivenessDataset, grid: WtpGrid) -> CurveEstimate:
    if np.any(dataset.event_censored) or np.any(dataset.cost_censored):
        raise CedError("CENSORED_DATA", "unadjusted method requires censoring-free data", stage="standardize")
    a = dataset.treatment == 1
    s, y = dataset.observed_time, dataset.cost
    lam = grid.asarray()
    theta = np.array([nbs_two_sample(individual_net_benefit(s[~a], y[~a], l),
                                     individual_net_benefit(s[a], y[a], l)).theta for l in lam])
    ds = s[a].mean() - s[~a].mean()
    dy = y[a].mean() - y[~a].mean()
    return CurveEstimate(lam, theta, lam * ds - dy, {"method": "unadjusted"})


def estimate_curves(dataset: CostEffectivenessDataset, spec: ModelSpec, lambda_grid: WtpGrid,
                    k: int = DEFAULT_K, rng: np.random.Generator | None = None) -> CurveEstimate:
    """NBS and NMB curves for one dataset (no intervals)."""
    if spec.method == "unadjusted":
        return _unadjusted(dataset, lambda_grid)
    if rng is None:
        raise ValueError("an RNG is required for standardization")
    fits = fit_models(dataset, spec)
    dist = EmpiricalCovariateDistribution.from_dataset(dataset)
    draws = _staged("standardize", standardized_draws, fits.survival, fits.cost, dist, k, rng,
                    tau=dataset.tau, paired=spec.paired_covariates)
    lam = lambda_grid.asarray()
    theta = np.array([p.estimate for p in nbs_from_draws(draws, lambda_grid)])
    nmb = np.array([p.estimate for p in nmb_from_draws(draws, lambda_grid)])
    return CurveEstimate(lam, theta, nmb, fits.diagnostics())


def ced_curve(dataset: CostEffectivenessDataset, model_spec: ModelSpec, lambda_grid: WtpGrid,
              k: int = DEFAULT_K, rng: np.random.Generator | None = None) -> list[CurvePoint]:
    """Cost-effectiveness determination curve: one NBS point per WTP value."""
    return estimate_curves(dataset, model_spec, lambda_grid, k, rng).ced_points()


__all__ = [
    "ModelSpec", "FittedModels", "EmpiricalCovariateDistribution", "PotentialDrawSet", "CurveEstimate",
    "fit_models", "standardized_draws", "nbs_from_draws", "nmb_from_draws", "estimate_curves", "ced_curve",
    "DEFAULT_K",
]
