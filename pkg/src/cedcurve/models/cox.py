"""Stratified Cox proportional hazards model (Breslow ties, time-fixed covariates)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import FitError
from .kaplan_meier import group_rows

GRAD_TOL = 1e-8
MAX_ITER = 50


@dataclass(frozen=True)
class BreslowBaseline:
    """Baseline cumulative hazard for one stratum, a step function in ``times``."""

    times: np.ndarray
    increments: np.ndarray

    def cumulative_hazard(self, t, left: bool = False) -> np.ndarray:
        j = np.searchsorted(self.times, np.asarray(t, dtype=float), side="left" if left else "right")
        return np.r_[0.0, np.cumsum(self.increments)][j]


@dataclass(frozen=True)
class CoxFit:
    phi: np.ndarray
    baselines: dict
    loglik: float
    iterations: int
    grad_norm: float
    strata_names: tuple[str, ...] | None = None
    covariate_names: tuple[str, ...] | None = None

    def baseline(self, label=None) -> BreslowBaseline:
        if label is None and len(self.baselines) == 1:
            return next(iter(self.baselines.values()))
        try:
            return self.baselines[label]
        except KeyError:
            raise FitError("STRATUM_MISMATCH", f"no fitted stratum {label!r}") from None

    def survival(self, t, covariates=None, label=None, left: bool = False) -> np.ndarray:
        """exp(-exp(phi'W) * Lambda_V(t)); ``left`` gives the left limit in ``t``."""
        lin = 0.0 if covariates is None or self.phi.size == 0 else np.asarray(covariates, float) @ self.phi
        return np.exp(-np.exp(lin) * self.baseline(label).cumulative_hazard(t, left=left))


class _Stratum:
    """Pre-sorted arrays for one stratum so that each Newton step is a few cumsums."""

    def __init__(self, t, e, w):
        order = np.argsort(-t, kind="stable")  # descending time
        self.t = t[order]
        self.e = e[order].astype(bool)
        self.w = w[order]
        # last index of each row's tie group in descending order -> risk set {X_k >= t}
        self.last = np.searchsorted(-self.t, -self.t, side="right") - 1

    def terms(self, phi):
        w = self.w
        eta = w @ phi
        r = np.exp(eta)
        s0 = np.cumsum(r)[self.last]
        s1 = np.cumsum(r[:, None] * w, axis=0)[self.last]
        s2 = np.cumsum(r[:, None, None] * w[:, :, None] * w[:, None, :], axis=0)[self.last]
        ev = self.e
        ll = float(np.sum(eta[ev] - np.log(s0[ev])))
        mean = s1[ev] / s0[ev, None]
        grad = np.sum(w[ev] - mean, axis=0)
        hess = -np.sum(s2[ev] / s0[ev, None, None] - mean[:, :, None] * mean[:, None, :], axis=0)
        return ll, grad, hess

    def loglik(self, phi):
        eta = self.w @ phi
        s0 = np.cumsum(np.exp(eta))[self.last]
        return float(np.sum(eta[self.e] - np.log(s0[self.e])))

    def baseline(self, phi) -> BreslowBaseline:
        r = np.exp(self.w @ phi)
        s0 = np.cumsum(r)[self.last]
        ev = self.e
        # Breslow: each event at time t adds 1 / sum_{X_k >= t} exp(phi'W_k)
        times, inv = np.unique(self.t[ev], return_inverse=True)
        inc = np.zeros(times.size)
        np.add.at(inc, inv, 1.0 / s0[ev])
        return BreslowBaseline(times, inc)


def fit_stratified_cox(
    observed_times,
    event_indicators,
    strata=None,
    covariates=None,
    strata_names=None,
    covariate_names=None,
) -> CoxFit:
    """Maximize the stratified Breslow partial likelihood by damped Newton.

    ``event_indicators`` marks the event being modelled; to model censoring
    pass the cost-censoring indicator.  Stops when the gradient infinity-norm
    drops below 1e-8; raises ``NONCONVERGENCE`` after 50 iterations.
    """
    t = np.asarray(observed_times, dtype=float)
    e = np.asarray(event_indicators, dtype=np.int64)
    n = t.size
    w = np.zeros((n, 0)) if covariates is None else np.asarray(covariates, dtype=float).reshape(n, -1)
    if not np.any(e == 1):
        raise FitError("NO_EVENTS", stage="fit.cox")
    strata_objs = {lab: _Stratum(t[idx], e[idx], w[idx]) for lab, idx in group_rows(strata, n)}

    p = w.shape[1]
    phi = np.zeros(p)

    def evaluate(phi):
        ll, g, h = 0.0, np.zeros(p), np.zeros((p, p))
        for s in strata_objs.values():
            a, b, c = s.terms(phi)
            ll += a
            g += b
            h += c
        return ll, g, h

    def loglik(phi):
        return sum(s.loglik(phi) for s in strata_objs.values())

    ll, g, h = evaluate(phi)
    it = 0
    while p and np.max(np.abs(g)) >= GRAD_TOL:
        if it >= MAX_ITER:
            raise FitError("NONCONVERGENCE", f"gradient {np.max(np.abs(g)):.3g} after {it} iterations",
                           stage="fit.cox")
        try:
            step = np.linalg.solve(-h, g)
        except np.linalg.LinAlgError:
            raise FitError("SINGULAR_INFORMATION", stage="fit.cox") from None
        if not np.all(np.isfinite(step)):
            raise FitError("SINGULAR_INFORMATION", stage="fit.cox")
        scale = 1.0
        for _ in range(30):
            cand = phi + scale * step
            if loglik(cand) >= ll - 1e-12 * abs(ll):
                break
            scale *= 0.5
        phi = cand
        ll, g, h = evaluate(phi)
        it += 1
    baselines = {lab: s.baseline(phi) for lab, s in strata_objs.items()}
    return CoxFit(
        phi=phi,
        baselines=baselines,
        loglik=ll,
        iterations=it,
        grad_norm=float(np.max(np.abs(g))) if p else 0.0,
        strata_names=tuple(strata_names) if strata_names is not None else None,
        covariate_names=tuple(covariate_names) if covariate_names is not None else None,
    )
