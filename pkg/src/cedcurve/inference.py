"""Bootstrap intervals for NBS/NMB curves, acceptability curves and the asymptotic null test."""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import child_rng, chunked, map_chunks, seed_sequence
from .domain import CostEffectivenessDataset, CurvePoint, WtpGrid
from .errors import CedError
from .standardize import DEFAULT_K, ModelSpec, estimate_curves

log = logging.getLogger(__name__)

MAX_FAILURE_FRACTION = 0.05


@dataclass(frozen=True)
class BootstrapResult:
    """Point estimates, bootstrap replicates and percentile intervals on a WTP grid.

    ``replicates`` has one row per successful replicate, ordered by replicate
    index; ``replicate_ids`` gives those indices.
    """

    lambdas: np.ndarray
    estimate: np.ndarray
    replicates: np.ndarray
    replicate_ids: np.ndarray
    alpha: float
    failures: tuple = ()

    @property
    def lower(self) -> np.ndarray:
        return np.quantile(self.replicates, self.alpha / 2, axis=0)

    @property
    def upper(self) -> np.ndarray:
        return np.quantile(self.replicates, 1 - self.alpha / 2, axis=0)

    @property
    def se(self) -> np.ndarray:
        """Standard deviation of the replicate estimates."""
        return np.std(self.replicates, axis=0, ddof=1)

    def points(self) -> list[CurvePoint]:
        lo, hi = self.lower, self.upper
        return [CurvePoint(float(l), float(e), float(a), float(b))
                for l, e, a, b in zip(self.lambdas, self.estimate, lo, hi)]


@dataclass(frozen=True)
class BootstrapCurves:
    nbs: BootstrapResult
    nmb: BootstrapResult
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_failed(self) -> int:
        return len(self.nbs.failures)


@dataclass(frozen=True)
class CeaCurve:
    lambdas: np.ndarray
    values: np.ndarray

    def points(self) -> list[CurvePoint]:
        return [CurvePoint(float(l), float(v)) for l, v in zip(self.lambdas, self.values)]


@dataclass(frozen=True)
class NullTest:
    z: float
    p_value: float
    variance: float


def resample_index(dataset: CostEffectivenessDataset, rng: np.random.Generator,
                   stratified: bool = False) -> np.ndarray:
    """Row indices of a full-size resample with replacement (optionally within arm)."""
    n = dataset.n
    if not stratified:
        return rng.integers(0, n, size=n)
    parts = []
    for arm in (0, 1):
        rows = np.flatnonzero(dataset.treatment == arm)
        parts.append(rows[rng.integers(0, rows.size, size=rows.size)])
    return np.concatenate(parts)


def _run_replicates(ids, dataset, spec, grid, k_draws, seed, stratified):
    out = []
    for b in ids:
        rng = child_rng(seed, 1, b)
        boot = dataset.take(resample_index(dataset, rng, stratified))
        n0, n1 = boot.arm_sizes()
        try:
            if n0 == 0 or n1 == 0:
                raise CedError("EMPTY_ARM", stage="bootstrap")
            est = estimate_curves(boot, spec, grid, k_draws, rng)
        except CedError as err:
            out.append((b, None, None, str(err)))
            continue
        out.append((b, est.theta, est.nmb, None))
    return out


def bootstrap_curves(
    dataset: CostEffectivenessDataset,
    model_spec: ModelSpec,
    lambda_grid: WtpGrid,
    k_boot: int,
    k_draws: int = DEFAULT_K,
    alpha: float = 0.05,
    seed=0,
    threads: int = 1,
    stratified: bool = False,
) -> BootstrapCurves:
    """Nonparametric bootstrap of the whole estimation pipeline.

    Each replicate resamples N rows with replacement and refits every model.
    Replicate ``b`` draws from its own stream derived from ``(seed, b)``, so
    the output is identical for any ``threads``.  Failed replicates are
    dropped and logged; more than 5% failures raises ``TOO_MANY_FAILURES``.
    """
    if k_boot < 2:
        raise ValueError("k_boot must be at least 2")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    seed = seed_sequence(seed)
    point = estimate_curves(dataset, model_spec, lambda_grid, k_draws, child_rng(seed, 0))

    work = functools.partial(_run_replicates, dataset=dataset, spec=model_spec, grid=lambda_grid,
                             k_draws=k_draws, seed=seed, stratified=stratified)
    chunks = chunked(list(range(k_boot)), max(threads, 1) * 4 if threads > 1 else 1)
    results = [r for part in map_chunks(work, chunks, threads) for r in part]
    results.sort(key=lambda r: r[0])

    failures = tuple((b, msg) for b, _, _, msg in results if msg is not None)
    for b, msg in failures:
        log.warning("bootstrap replicate %d failed: %s", b, msg)
    if len(failures) > MAX_FAILURE_FRACTION * k_boot:
        raise CedError("TOO_MANY_FAILURES", f"{len(failures)} of {k_boot} replicates failed", stage="bootstrap")
    ok = [r for r in results if r[3] is None]
    ids = np.array([r[0] for r in ok])
    theta = np.array([r[1] for r in ok])
    nmb = np.array([r[2] for r in ok])
    lam = lambda_grid.asarray()
    return BootstrapCurves(
        nbs=BootstrapResult(lam, point.theta, theta, ids, alpha, failures),
        nmb=BootstrapResult(lam, point.nmb, nmb, ids, alpha, failures),
        diagnostics=point.diagnostics,
    )


def cea_curve(nmb_bootstrap: BootstrapResult) -> CeaCurve:
    """Fraction of bootstrap NMB replicates strictly above zero at each WTP value."""
    reps = nmb_bootstrap.replicates
    if reps.size == 0:
        raise ValueError("no NMB replicates")
    return CeaCurve(nmb_bootstrap.lambdas, np.mean(reps > 0, axis=0))


def asymptotic_null_test(theta_hat: float, n0: int, n1: int) -> NullTest:
    """Normal-approximation test of ``theta = 1/2`` for the two-sample estimator.

    ``sqrt(n1) (theta - 1/2)`` has limiting variance ``(r + 1) / (12 r)``
    with ``r = n0 / n1``.
    """
    if n0 < 1 or n1 < 1:
        raise ValueError("arm sizes must be positive")
    r = n0 / n1
    var = (r + 1) / (12 * r)
    z = math.sqrt(n1) * (theta_hat - 0.5) / math.sqrt(var)
    return NullTest(z, math.erfc(abs(z) / math.sqrt(2)), var)
