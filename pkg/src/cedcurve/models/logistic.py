"""Weighted logistic regression by Newton iteration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import FitError

GRAD_TOL = 1e-8
MAX_ITER = 50
COEF_GUARD = 30.0


def expit(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class LogisticFit:
    coef: np.ndarray
    loglik: float
    iterations: int
    grad_norm: float

    def predict(self, X) -> np.ndarray:
        return expit(np.asarray(X, dtype=float) @ self.coef)


def _loglik(beta, X, y, w):
    eta = X @ beta
    # log(1 + e^eta) computed stably
    return float(np.sum(w * (y * eta - np.logaddexp(0.0, eta))))


def fit_logistic(binary_outcomes, design, case_weights=None) -> LogisticFit:
    """Weighted MLE of P(y = 1 | x) = expit(x @ coef).

    ``design`` must already contain any intercept column.  Raises
    ``SEPARATION`` once a coefficient exceeds 30 in magnitude.
    """
    y = np.asarray(binary_outcomes, dtype=float)
    X = np.asarray(design, dtype=float).reshape(y.size, -1)
    w = np.ones_like(y) if case_weights is None else np.asarray(case_weights, dtype=float)
    if not np.all(np.isin(y, (0.0, 1.0))):
        raise ValueError("outcomes must be binary")
    if np.any(w < 0) or not np.any(w > 0):
        raise ValueError("weights must be nonnegative and not all zero")
    beta = np.zeros(X.shape[1])
    ll = _loglik(beta, X, y, w)
    it = 0
    while True:
        p = expit(X @ beta)
        g = X.T @ (w * (y - p))
        gnorm = float(np.max(np.abs(g)))
        if gnorm < GRAD_TOL:
            break
        if it >= MAX_ITER:
            raise FitError("NONCONVERGENCE", f"gradient {gnorm:.3g}", stage="fit.logistic")
        info = (X.T * (w * p * (1.0 - p))) @ X
        try:
            step = np.linalg.solve(info, g)
        except np.linalg.LinAlgError:
            raise FitError("SEPARATION", "singular information", stage="fit.logistic") from None
        scale = 1.0
        for _ in range(30):
            cand = beta + scale * step
            ll_c = _loglik(cand, X, y, w)
            if ll_c >= ll - 1e-12 * abs(ll):
                break
            scale *= 0.5
        beta, ll = cand, ll_c
        it += 1
        if np.max(np.abs(beta)) > COEF_GUARD:
            raise FitError("SEPARATION", f"|coef| > {COEF_GUARD:g}", stage="fit.logistic")
    return LogisticFit(beta, ll, it, gnorm)
