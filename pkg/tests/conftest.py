import os

# Turn on the rank-form consistency assertion before the package is imported.
os.environ.setdefault("CEDCURVE_DEBUG", "1")

import numpy as np
import pytest

from cedcurve.domain import CostEffectivenessDataset


def make_dataset(treatment, time, event_censored, cost, covariates=None, names=(), cost_censored=None,
                 tau=np.inf, ids=None):
    n = len(treatment)
    cov = np.zeros((n, 0)) if covariates is None else np.asarray(covariates, float).reshape(n, -1)
    return CostEffectivenessDataset(
        ids=list(range(n)) if ids is None else ids,
        treatment=treatment,
        observed_time=time,
        event_censored=event_censored,
        cost_censored=event_censored if cost_censored is None else cost_censored,
        cost=cost,
        covariates=cov,
        covariate_names=names,
        tau=tau,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


# One line per acceptance criterion, echoed again at the end of the session.
ACCEPTANCE_LINES: list[str] = []


def record_criterion(label: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line, flush=True)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
