"""Weibull accelerated failure time regression for right-censored survival.

Density ``f(t) = (k/s) (t/s)^(k-1) exp(-(t/s)^k)`` with scale
``s = exp(X @ beta)``; ``X`` is ``[1, covariates..., treatment]``.
The optimizer works on ``(log k, beta)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import FitError

GRAD_TOL = 1e-8
MAX_ITER = 50


@dataclass(frozen=True)
class WeibullAftFit:
    shape: float
    coef: np.ndarray  # intercept, covariates..., treatment
    loglik: float
    iterations: int
    grad_norm: float
    use_treatment: bool = True
    covariate_names: tuple[str, ...] = ()

    def design(self, covariates, arm) -> np.ndarray:
        """Design rows for an ``(n, p)`` covariate array under arm ``arm``."""
        cov = np.asarray(covariates, dtype=float)
        if cov.ndim == 1:
            cov = cov[None, :]
        n = cov.shape[0]
        cols = [np.ones(n), cov]
        if self.use_treatment:
            cols.append(np.broadcast_to(np.asarray(arm, dtype=float), (n,)))
        return np.column_stack(cols)

    def scale(self, covariates, arm) -> np.ndarray:
        return np.exp(self.design(covariates, arm) @ self.coef)


def weibull_loglik(params, log_t, events, X):
    """Right-censored log-likelihood, score and Hessian in ``(log k, beta)``."""
    rho = params[0]
    beta = params[1:]
    k = np.exp(rho)
    u = log_t - X @ beta
    z = k * u
    ez = np.exp(z)
    d = events
    ll = float(np.sum(d * (rho - log_t + z) - ez))
    g_rho = np.sum(d * (1.0 + z) - ez * z)
    g_beta = k * (X.T @ (ez - d))
    h_rr = np.sum(d * z - ez * z * (z + 1.0))
    h_rb = k * (X.T @ (ez * (1.0 + z) - d))
    h_bb = -(k * k) * (X.T * ez) @ X
    p = X.shape[1]
    grad = np.empty(p + 1)
    grad[0] = g_rho
    grad[1:] = g_beta
    hess = np.empty((p + 1, p + 1))
    hess[0, 0] = h_rr
    hess[0, 1:] = hess[1:, 0] = h_rb
    hess[1:, 1:] = h_bb
    return ll, grad, hess


def _newton_direction(grad, hess):
    """Newton step, falling back to a Levenberg-damped one if -H is not PD."""
    neg = -hess
    mu = 0.0
    eye = np.eye(len(grad))
    diag = max(float(np.max(np.abs(np.diag(neg)))), 1.0)
    for _ in range(40):
        try:
            c = np.linalg.cholesky(neg + mu * eye)
        except np.linalg.LinAlgError:
            mu = diag * 1e-8 if mu == 0.0 else mu * 10.0
            continue
        y = np.linalg.solve(c, grad)
        return np.linalg.solve(c.T, y)
    raise FitError("SINGULAR_INFORMATION", stage="fit.weibull")


def fit_weibull_aft(observed_times, event_indicators, covariates=None, treatment=None,
                    covariate_names=()) -> WeibullAftFit:
    """Maximum likelihood Weibull AFT fit.

    Parameters
    ----------
    observed_times : array_like
        Positive times ``min(S, C)``.
    event_indicators : array_like
        1 where the death was observed, 0 where the time is censored.
    covariates : array_like, optional
        ``(n, p)`` covariate matrix (no intercept column).
    treatment : array_like, optional
        Binary arm indicator, entered as the last design column.
    """
    t = np.asarray(observed_times, dtype=float)
    d = np.asarray(event_indicators, dtype=float)
    n = t.size
    if np.any(t <= 0):
        raise ValueError("Weibull fit requires positive times")
    if not np.any(d == 1):
        raise FitError("NO_EVENTS", stage="fit.weibull")
    cols = [np.ones(n)]
    if covariates is not None:
        cov = np.asarray(covariates, dtype=float).reshape(n, -1)
        cols.extend(cov.T)
    if treatment is not None:
        cols.append(np.asarray(treatment, dtype=float))
    X = np.column_stack(cols)
    log_t = np.log(t)

    # Start from least squares on log t with unit shape, then shift the
    # intercept to the exponential MLE so the first steps are well behaved.
    beta0, *_ = np.linalg.lstsq(X, log_t, rcond=None)
    resid_scale = np.log(np.sum(np.exp(log_t - X @ beta0)) / np.sum(d))
    beta0[0] += resid_scale
    params = np.r_[0.0, beta0]

    ll, g, h = weibull_loglik(params, log_t, d, X)
    it = 0
    while np.max(np.abs(g)) >= GRAD_TOL:
        if it >= MAX_ITER:
            raise FitError("NONCONVERGENCE", f"gradient {np.max(np.abs(g)):.3g} after {it} iterations",
                           stage="fit.weibull")
        step = _newton_direction(g, h)
        scale = 1.0
        for _ in range(40):
            cand = params + scale * step
            ll_c, g_c, h_c = weibull_loglik(cand, log_t, d, X)
            if np.isfinite(ll_c) and ll_c >= ll - 1e-12 * abs(ll):
                break
            scale *= 0.5
        else:
            raise FitError("NONCONVERGENCE", "line search failed", stage="fit.weibull")
        params, ll, g, h = cand, ll_c, g_c, h_c
        it += 1
    return WeibullAftFit(
        shape=float(np.exp(params[0])),
        coef=params[1:].copy(),
        loglik=ll,
        iterations=it,
        grad_norm=float(np.max(np.abs(g))),
        use_treatment=treatment is not None,
        covariate_names=tuple(covariate_names),
    )


def sample_survival_draw(fit: WeibullAftFit, covariates, arm, rng: np.random.Generator | None = None,
                         u=None, n=None) -> np.ndarray:
    """Inverse-CDF draws ``scale * (-log U)^(1/k)``, one per covariate row.

    ``u`` fixes the uniforms (for testing); otherwise they come from ``rng``.
    For an intercept-only fit pass ``covariates=None`` and the draw count ``n``.
    """
    if covariates is None:
        covariates = np.zeros((n if n is not None else np.size(u), 0))
    scale = fit.scale(covariates, arm)
    if u is None:
        u = 1.0 - rng.random(scale.shape[0])  # (0, 1]
    return scale * (-np.log(u)) ** (1.0 / fit.shape)
