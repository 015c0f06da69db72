"""Inverse probability of censoring weights for cost-model fitting.

For a subject with observed cost the weight is ``1 / G_i(S*_i)`` where
``S* = min(S, tau)`` and ``G_i`` is the probability of remaining
uncensored, evaluated as a left limit: only censoring events strictly
before ``S*`` reduce it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain import CostEffectivenessDataset
from .errors import FitError
from .models.cox import BreslowBaseline, CoxFit, fit_stratified_cox
from .models.kaplan_meier import KaplanMeierFit, fit_kaplan_meier, group_rows

MIN_G = 1e-8


@dataclass(frozen=True)
class CensoringWeights:
    """``weights`` is NaN (absent) exactly where the cost is censored."""

    weights: np.ndarray
    g: np.ndarray
    tau: float

    @property
    def present(self) -> np.ndarray:
        return ~np.isnan(self.weights)


def fit_censoring_model(dataset: CostEffectivenessDataset, kind: str = "km",
                        strata: Sequence[str] = (), covariates: Sequence[str] = ()):
    """Fit the censoring distribution on ``(X, delta*)``.

    ``kind`` is ``"km"`` (stratified Kaplan-Meier; ``covariates`` must be
    empty) or ``"cox"`` (stratified Cox with ``covariates`` as W).
    """
    strata = tuple(strata)
    covariates = tuple(covariates)
    v = dataset.columns(strata) if strata else None
    if kind == "km":
        if covariates:
            raise ValueError("Kaplan-Meier censoring model takes no covariates; use kind='cox'")
        return fit_kaplan_meier(dataset.observed_time, dataset.cost_censored, v, strata_names=strata)
    if kind == "cox":
        w = dataset.columns(covariates) if covariates else None
        if not np.any(dataset.cost_censored == 1):
            # nothing censored: the censoring hazard is identically zero
            empty = BreslowBaseline(np.empty(0), np.empty(0))
            return CoxFit(np.zeros(len(covariates)), {lab: empty for lab, _ in group_rows(v, dataset.n)},
                          0.0, 0, 0.0, strata, covariates)
        return fit_stratified_cox(dataset.observed_time, dataset.cost_censored, v, w,
                                  strata_names=strata, covariate_names=covariates)
    raise ValueError(f"unknown censoring model {kind!r}")


def compute_censoring_weights(dataset: CostEffectivenessDataset,
                              censoring_fit: CoxFit | KaplanMeierFit) -> CensoringWeights:
    """Weights ``1 / G_i(S*_i)`` for every subject with observed cost.

    Strata and Cox covariates are looked up in ``dataset`` by the names the
    fit was built with.  Raises ``ZERO_G`` when any ``G`` falls below 1e-8
    (a positivity violation) and ``STRATUM_MISMATCH`` for unseen strata.
    """
    n = dataset.n
    names = censoring_fit.strata_names or ()
    s_star = dataset.survival_term
    obs = dataset.cost_censored == 0
    g = np.full(n, np.nan)
    is_cox = isinstance(censoring_fit, CoxFit)
    for lab, idx in group_rows(dataset.columns(names) if names else None, n):
        idx = idx[obs[idx]]
        if idx.size == 0:
            continue
        if is_cox:
            cum = censoring_fit.baseline(lab).cumulative_hazard(s_star[idx], left=True)
            if censoring_fit.phi.size:
                lin = dataset.columns(censoring_fit.covariate_names)[idx] @ censoring_fit.phi
                cum = np.exp(lin) * cum
            g[idx] = np.exp(-cum)
        else:
            g[idx] = censoring_fit.stratum(lab).evaluate(s_star[idx], left=True)
    if np.any(g[obs] < MIN_G):
        bad = int(np.sum(g[obs] < MIN_G))
        raise FitError("ZERO_G", f"{bad} subject(s) with G < {MIN_G:g}", stage="ipcw")
    weights = np.where(obs, 1.0 / np.where(obs, g, 1.0), np.nan)
    return CensoringWeights(weights, g, dataset.tau)
