"""Core data model: observations, datasets, WTP grids and curve points.

A dataset is stored column-wise (numpy arrays) because every estimator and
the bootstrap work on whole columns.  :class:`Observation` is the row view
used for construction and reporting.

Conventions
-----------
``event_censored`` is 1 when the survival time is censored (C < S) and
``cost_censored`` is 1 when total cost over ``[0, min(S, tau)]`` is unknown
(C < min(S, tau)).  A censored cost is stored as NaN, never as a number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

NEGATIVE_COST = "NEGATIVE_COST"
NEGATIVE_TIME = "NEGATIVE_TIME"
MISSING_TREATMENT = "MISSING_TREATMENT"
EMPTY_ARM = "EMPTY_ARM"
INCONSISTENT_COVARIATES = "INCONSISTENT_COVARIATES"
COST_PRESENT_ON_CENSORED = "COST_PRESENT_ON_CENSORED"
MISSING_COST = "MISSING_COST"
INCONSISTENT_CENSORING = "INCONSISTENT_CENSORING"
TOO_FEW_OBSERVATIONS = "TOO_FEW_OBSERVATIONS"


@dataclass(frozen=True)
class Observation:
    """One subject.  ``cost`` is ``None`` when the cost is censored."""

    id: object
    treatment: int | None
    observed_time: float
    event_censored: int
    cost_censored: int
    cost: float | None
    covariates: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class CostEffectivenessDataset:
    """Column-oriented collection of observations sharing one cost horizon ``tau``.

    Construction does not validate; call :func:`validate_dataset`.
    """

    ids: np.ndarray
    treatment: np.ndarray
    observed_time: np.ndarray
    event_censored: np.ndarray
    cost_censored: np.ndarray
    cost: np.ndarray
    covariates: np.ndarray
    covariate_names: tuple[str, ...]
    tau: float = math.inf

    def __post_init__(self):
        n = len(self.ids)
        obj = object.__setattr__
        obj(self, "ids", np.asarray(self.ids, dtype=object))
        obj(self, "treatment", np.asarray(self.treatment, dtype=float))
        obj(self, "observed_time", np.asarray(self.observed_time, dtype=float))
        obj(self, "event_censored", np.asarray(self.event_censored, dtype=np.int8))
        obj(self, "cost_censored", np.asarray(self.cost_censored, dtype=np.int8))
        obj(self, "cost", np.asarray(self.cost, dtype=float))
        cov = np.asarray(self.covariates, dtype=float)
        if cov.ndim == 1 and cov.size == 0:
            cov = cov.reshape(n, 0)
        obj(self, "covariates", cov)
        obj(self, "covariate_names", tuple(self.covariate_names))
        obj(self, "tau", float(self.tau))
        for name in ("treatment", "observed_time", "event_censored", "cost_censored", "cost"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"column {name!r} has length {len(getattr(self, name))}, expected {n}")
        if self.covariates.ndim != 2 or self.covariates.shape[0] != n:
            raise ValueError("covariates must be an (n, p) array")

    @classmethod
    def from_observations(
        cls,
        observations: Iterable[Observation],
        covariate_names: Sequence[str] | None = None,
        tau: float = math.inf,
    ) -> "CostEffectivenessDataset":
        """Build a dataset from row objects.

        Rows missing a named covariate get NaN there, which
        :func:`validate_dataset` reports as ``INCONSISTENT_COVARIATES``.
        """
        rows = list(observations)
        if covariate_names is None:
            covariate_names = list(rows[0].covariates) if rows else []
        names = tuple(covariate_names)
        cov = np.full((len(rows), len(names)), np.nan)
        mismatched = []
        for i, r in enumerate(rows):
            if set(r.covariates) != set(names):
                mismatched.append(i)
            for j, nm in enumerate(names):
                if nm in r.covariates:
                    cov[i, j] = r.covariates[nm]
        ds = cls(
            ids=[r.id for r in rows],
            treatment=[np.nan if r.treatment is None else r.treatment for r in rows],
            observed_time=[r.observed_time for r in rows],
            event_censored=[r.event_censored for r in rows],
            cost_censored=[r.cost_censored for r in rows],
            cost=[np.nan if r.cost is None else r.cost for r in rows],
            covariates=cov,
            covariate_names=names,
            tau=tau,
        )
        if mismatched:
            # Extra keys are invisible in the array form; remember them for validation.
            object.__setattr__(ds, "_covariate_mismatch", tuple(mismatched))
        return ds

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def cost_observed(self) -> np.ndarray:
        return self.cost_censored == 0

    @property
    def survival_term(self) -> np.ndarray:
        """min(observed_time, tau): the time over which cost accrues."""
        return np.minimum(self.observed_time, self.tau)

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.covariate_names.index(name)
        except ValueError:
            raise KeyError(f"unknown covariate {name!r}") from None
        return self.covariates[:, j]

    def columns(self, names: Sequence[str]) -> np.ndarray:
        """Covariate submatrix in the given order (shape ``(n, len(names))``)."""
        idx = [self.covariate_names.index(nm) for nm in names]
        return self.covariates[:, idx]

    def arm_sizes(self) -> tuple[int, int]:
        n1 = int(np.sum(self.treatment == 1))
        n0 = int(np.sum(self.treatment == 0))
        return n0, n1

    def take(self, index: np.ndarray) -> "CostEffectivenessDataset":
        """Rows at ``index`` (used for bootstrap resampling)."""
        return CostEffectivenessDataset(
            ids=self.ids[index],
            treatment=self.treatment[index],
            observed_time=self.observed_time[index],
            event_censored=self.event_censored[index],
            cost_censored=self.cost_censored[index],
            cost=self.cost[index],
            covariates=self.covariates[index],
            covariate_names=self.covariate_names,
            tau=self.tau,
        )

    def observations(self) -> list[Observation]:
        out = []
        for i in range(self.n):
            t = self.treatment[i]
            c = self.cost[i]
            out.append(Observation(
                id=self.ids[i],
                treatment=None if np.isnan(t) else int(t),
                observed_time=float(self.observed_time[i]),
                event_censored=int(self.event_censored[i]),
                cost_censored=int(self.cost_censored[i]),
                cost=None if np.isnan(c) else float(c),
                covariates=dict(zip(self.covariate_names, map(float, self.covariates[i]))),
            ))
        return out


def validate_dataset(raw: CostEffectivenessDataset) -> CostEffectivenessDataset:
    """Return ``raw`` unchanged if every invariant holds.

    Raises
    ------
    ValidationError
        With ``report`` listing *every* violation as ``(row id, rule)``; rules
        that concern the whole dataset use ``None`` as the row id.
    """
    report: list[tuple[object, str]] = []
    ids = raw.ids
    t = raw.treatment
    x = raw.observed_time
    d = raw.event_censored
    ds = raw.cost_censored
    y = raw.cost

    def flag(mask, rule):
        for i in np.flatnonzero(mask):
            report.append((ids[i], rule))

    bad_trt = ~np.isin(t, (0.0, 1.0))
    flag(bad_trt, MISSING_TREATMENT)
    flag(~(x >= 0), NEGATIVE_TIME)
    flag(~np.isnan(y) & (y < 0), NEGATIVE_COST)
    flag((ds == 1) & ~np.isnan(y), COST_PRESENT_ON_CENSORED)
    flag((ds == 0) & np.isnan(y), MISSING_COST)
    indicators_ok = np.isin(d, (0, 1)) & np.isin(ds, (0, 1))
    # An uncensored death before tau has observed cost; a censored cost implies censored survival.
    inconsistent = ~indicators_ok | ((d == 0) & (x <= raw.tau) & (ds == 1)) | ((ds == 1) & (d == 0))
    flag(inconsistent, INCONSISTENT_CENSORING)
    bad_cov = np.zeros(raw.n, dtype=bool)
    if raw.covariates.size:
        bad_cov |= ~np.all(np.isfinite(raw.covariates), axis=1)
    for i in getattr(raw, "_covariate_mismatch", ()):
        bad_cov[i] = True
    flag(bad_cov, INCONSISTENT_COVARIATES)
    if raw.n < 2:
        report.append((None, TOO_FEW_OBSERVATIONS))
    n0, n1 = raw.arm_sizes()
    if n0 == 0 or n1 == 0:
        report.append((None, EMPTY_ARM))
    if report:
        raise ValidationError(report)
    return raw


@dataclass(frozen=True)
class WtpGrid:
    """Strictly increasing, nonnegative willingness-to-pay values."""

    lambdas: tuple[float, ...]

    def __post_init__(self):
        lam = tuple(float(v) for v in np.atleast_1d(np.asarray(self.lambdas, dtype=float)))
        if not lam:
            raise ValueError("WTP grid must be non-empty")
        if any(not math.isfinite(v) or v < 0 for v in lam):
            raise ValueError("WTP values must be finite and nonnegative")
        if any(b <= a for a, b in zip(lam, lam[1:])):
            raise ValueError("WTP values must be strictly increasing")
        object.__setattr__(self, "lambdas", lam)

    @classmethod
    def from_range(cls, start: float, stop: float, step: float) -> "WtpGrid":
        """Inclusive grid ``start, start+step, ..., stop``."""
        if step <= 0:
            raise ValueError("step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return cls(tuple(start + i * step for i in range(n)))

    def __len__(self) -> int:
        return len(self.lambdas)

    def __iter__(self):
        return iter(self.lambdas)

    def asarray(self) -> np.ndarray:
        return np.asarray(self.lambdas)


@dataclass(frozen=True)
class CurvePoint:
    lam: float
    estimate: float
    ci_lower: float | None = None
    ci_upper: float | None = None
