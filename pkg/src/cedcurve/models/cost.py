"""Cost models: log-normal and two-part (zero-inflated) log-normal.

Both model ``log Y`` given the design ``[1, covariates..., treatment,
survival term]``; the two-part variant adds a logistic model for
``P(Y == 0)`` on the same design.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import FitError
from .logistic import COEF_GUARD, LogisticFit, expit, fit_logistic


class CostVariant(str, enum.Enum):
    LOG_NORMAL = "lognormal"
    TWO_PART = "two_part"


@dataclass(frozen=True)
class CostModelFit:
    variant: CostVariant
    coef: np.ndarray
    sigma: float
    zero_part: LogisticFit | None = None
    use_treatment: bool = True
    use_survival_term: bool = True
    covariate_names: tuple[str, ...] = ()

    def design(self, covariates, arm, survival=None) -> np.ndarray:
        """Design rows for an ``(n, p)`` covariate array, arm and survival values."""
        cov = np.asarray(covariates, dtype=float)
        if cov.ndim == 1:
            cov = cov[None, :]
        return cost_design(cov, arm if self.use_treatment else None,
                           survival if self.use_survival_term else None, n=cov.shape[0])

    def log_mean(self, covariates, arm, survival=None) -> np.ndarray:
        return self.design(covariates, arm, survival) @ self.coef


def cost_design(covariates, treatment=None, survival_term=None, n=None) -> np.ndarray:
    """``[1, covariates..., treatment, survival term]``, omitting absent parts."""
    if n is None:
        for part in (treatment, survival_term, covariates):
            if part is not None:
                n = np.shape(part)[0]
                break
    cols = [np.ones(n)]
    if covariates is not None:
        cols.extend(np.asarray(covariates, dtype=float).reshape(n, -1).T)
    if treatment is not None:
        cols.append(np.broadcast_to(np.asarray(treatment, dtype=float), (n,)))
    if survival_term is not None:
        cols.append(np.broadcast_to(np.asarray(survival_term, dtype=float), (n,)))
    return np.column_stack(cols)


def _weights(w, n):
    w = np.ones(n) if w is None else np.asarray(w, dtype=float)
    if np.any(w < 0) or not np.any(w > 0):
        raise ValueError("case weights must be nonnegative and not all zero")
    return w


def _wls(X, z, w):
    sw = np.sqrt(w)
    Xw = X * sw[:, None]
    if np.linalg.matrix_rank(Xw[w > 0]) < X.shape[1]:
        raise FitError("SINGULAR_DESIGN", stage="fit.cost")
    coef, *_ = np.linalg.lstsq(Xw, z * sw, rcond=None)
    resid = z - X @ coef
    sigma = float(np.sqrt(np.sum(w * resid**2) / np.sum(w)))
    return coef, sigma


def fit_lognormal_cost(costs, covariates=None, treatment=None, survival_term=None, case_weights=None,
                       covariate_names=()) -> CostModelFit:
    """Weighted least squares on log cost; sigma is the weighted RMS residual (MLE)."""
    y = np.asarray(costs, dtype=float)
    n = y.size
    w = _weights(case_weights, n)
    if np.any(y[w > 0] <= 0):
        raise FitError("ZERO_COSTS_PRESENT", "use the two-part cost model", stage="fit.cost")
    X = cost_design(covariates, treatment, survival_term, n=n)
    with np.errstate(divide="ignore"):
        z = np.where(w > 0, np.log(np.where(y > 0, y, 1.0)), 0.0)
    coef, sigma = _wls(X, z, w)
    return CostModelFit(CostVariant.LOG_NORMAL, coef, sigma, None,
                        use_treatment=treatment is not None,
                        use_survival_term=survival_term is not None,
                        covariate_names=tuple(covariate_names))


def fit_two_part_cost(costs, covariates=None, treatment=None, survival_term=None, case_weights=None,
                      covariate_names=()) -> CostModelFit:
    """Logistic model for ``Y == 0`` plus a log-normal model on ``Y > 0``.

    With no zero costs the zero part is pinned at intercept ``-30`` (the
    separation guard) and zero slopes, i.e. P(Y = 0) is numerically nil.
    """
    y = np.asarray(costs, dtype=float)
    n = y.size
    w = _weights(case_weights, n)
    if np.any(y < 0):
        raise ValueError("costs must be nonnegative")
    pos = y > 0
    if not np.any(pos & (w > 0)):
        raise FitError("NO_POSITIVE_COSTS", stage="fit.cost")
    X = cost_design(covariates, treatment, survival_term, n=n)
    zero = (y == 0).astype(float)
    if not np.any(zero[w > 0] == 1):
        coef0 = np.zeros(X.shape[1])
        coef0[0] = -COEF_GUARD
        zero_part = LogisticFit(coef0, 0.0, 0, 0.0)
    else:
        zero_part = fit_logistic(zero, X, w)
    cov_pos = None if covariates is None else np.asarray(covariates, float).reshape(n, -1)[pos]
    st_pos = None if survival_term is None else np.asarray(survival_term, float)[pos]
    trt_pos = None if treatment is None else np.asarray(treatment, float)[pos]
    positive = fit_lognormal_cost(y[pos], cov_pos, trt_pos, st_pos, w[pos])
    return CostModelFit(CostVariant.TWO_PART, positive.coef, positive.sigma, zero_part,
                        use_treatment=treatment is not None,
                        use_survival_term=survival_term is not None,
                        covariate_names=tuple(covariate_names))


def sample_cost_draw(fit: CostModelFit, covariates, arm, survival, rng: np.random.Generator) -> np.ndarray:
    """One cost draw per covariate row, conditional on the survival draws.

    Log-normal part: ``exp(mu + sigma * Z)``.  The two-part variant first
    draws a Bernoulli zero with the fitted probability.
    """
    X = fit.design(covariates, arm, survival)
    mu = X @ fit.coef
    n = mu.shape[0]
    if fit.sigma == 0.0:
        warnings.warn("cost model has sigma = 0; draws are deterministic", RuntimeWarning, stacklevel=2)
        y = np.exp(mu)
    else:
        y = np.exp(mu + fit.sigma * rng.standard_normal(n))
    if fit.variant is CostVariant.TWO_PART:
        p_zero = expit(X @ fit.zero_part.coef)
        y = np.where(rng.random(n) < p_zero, 0.0, y)
    return y
