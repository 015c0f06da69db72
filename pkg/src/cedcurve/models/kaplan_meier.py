"""Stratified Kaplan-Meier product-limit estimator."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import FitError


@dataclass(frozen=True)
class KmStratum:
    """Step function for one stratum.

    ``times`` are the distinct event times (ascending); ``survival[j]`` is
    S(t) on ``[times[j], times[j+1])``.
    """

    times: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray
    survival: np.ndarray

    def evaluate(self, t, left: bool = False) -> np.ndarray:
        """S(t), or the left limit S(t-) when ``left`` is true."""
        t = np.asarray(t, dtype=float)
        side = "left" if left else "right"
        j = np.searchsorted(self.times, t, side=side)
        surv = np.r_[1.0, self.survival]
        return surv[j]

    def cumulative_hazard(self, t, left: bool = False) -> np.ndarray:
        """Nelson-Aalen sum of d/n over event times <= t (< t when ``left``)."""
        t = np.asarray(t, dtype=float)
        side = "left" if left else "right"
        j = np.searchsorted(self.times, t, side=side)
        cum = np.r_[0.0, np.cumsum(self.events / self.at_risk)]
        return cum[j]


@dataclass(frozen=True)
class KaplanMeierFit:
    strata: dict = field(default_factory=dict)
    strata_names: tuple[str, ...] | None = None

    def stratum(self, label=None) -> KmStratum:
        if label is None and len(self.strata) == 1:
            return next(iter(self.strata.values()))
        try:
            return self.strata[label]
        except KeyError:
            raise FitError("STRATUM_MISMATCH", f"no fitted stratum {label!r}") from None

    def evaluate(self, t, label=None, left: bool = False) -> np.ndarray:
        return self.stratum(label).evaluate(t, left=left)


def _fit_one(times: np.ndarray, events: np.ndarray) -> KmStratum:
    order = np.argsort(times, kind="stable")
    t = times[order]
    e = events[order]
    n = t.size
    uniq, first = np.unique(t, return_index=True)
    at_risk = n - first
    d = np.add.reduceat(e, first) if n else np.array([])
    keep = d > 0
    uniq, at_risk, d = uniq[keep], at_risk[keep].astype(float), d[keep].astype(float)
    surv = np.cumprod((at_risk - d) / at_risk)  # (n-d)/n rounds once per factor
    return KmStratum(uniq, at_risk, d, surv)


def group_rows(strata: np.ndarray | None, n: int) -> list[tuple[tuple, np.ndarray]]:
    """``(label, row indices)`` per distinct stratum, labels sorted.

    Labels are tuples of the stratifying values; no strata gives the single
    label ``()``.
    """
    if strata is None:
        return [((), np.arange(n))]
    s = np.asarray(strata, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    if s.shape[1] == 0:
        return [((), np.arange(n))]
    uniq, inv = np.unique(s, axis=0, return_inverse=True)
    inv = inv.ravel()
    order = np.argsort(inv, kind="stable")
    bounds = np.searchsorted(inv[order], np.arange(uniq.shape[0] + 1))
    return [(tuple(uniq[j].tolist()), order[bounds[j]:bounds[j + 1]]) for j in range(uniq.shape[0])]


def fit_kaplan_meier(times, event_indicators, strata=None, strata_names=None) -> KaplanMeierFit:
    """Product-limit estimate of P(T > t), one curve per stratum.

    Parameters
    ----------
    times : array_like
        Nonnegative observed times.
    event_indicators : array_like
        1 where the event of interest occurred at ``times``, 0 if censored.
        For a censoring distribution pass the censoring indicator here.
    strata : array_like, optional
        ``(n,)`` or ``(n, q)`` stratifying values; labels are row tuples.
    """
    t = np.asarray(times, dtype=float)
    e = np.asarray(event_indicators, dtype=np.int64)
    if t.shape != e.shape:
        raise ValueError("times and event_indicators differ in length")
    if np.any(t < 0):
        raise ValueError("times must be nonnegative")
    if not np.all(np.isin(e, (0, 1))):
        raise ValueError("event indicators must be binary")
    if t.size == 0:
        raise FitError("EMPTY_STRATUM", stage="fit.km")
    fitted = {lab: _fit_one(t[idx], e[idx]) for lab, idx in group_rows(strata, t.size)}
    names = tuple(strata_names) if strata_names is not None else None
    return KaplanMeierFit(fitted, names)
