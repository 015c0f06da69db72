"""CSV and JSON data contracts.

Dataset CSV: header row required, UTF-8, '.' decimals.  ``event`` is 1 when
the death was observed (converted to ``event_censored = 1 - event``); a blank
``cost`` cell marks a censored cost.  Floats are written with ``repr`` so a
write/read cycle is exact.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .domain import CostEffectivenessDataset, CurvePoint
from .errors import ValidationError

CURVE_COLUMNS = ("lambda", "estimate", "ci_lower", "ci_upper")
DEFAULT_COLUMNS = {"id": "id", "treatment": "treatment", "time": "time", "event": "event", "cost": "cost"}


def _num(cell: str) -> float:
    cell = cell.strip()
    return math.nan if cell == "" else float(cell)


def read_dataset_csv(path, columns: dict | None = None, tau: float | None = None) -> CostEffectivenessDataset:
    """Load a dataset CSV using the column mapping ``columns``.

    ``columns`` maps ``treatment``, ``time``, ``event``, ``cost`` (and
    optionally ``id``) to header names, and ``covariates`` to a list of
    header names.  Missing headers raise :class:`ValidationError` naming them.
    """
    cols = {**DEFAULT_COLUMNS, **(columns or {})}
    covariates = list(cols.get("covariates", []))
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError([(None, "EMPTY_FILE")], stage="input") from None
        rows = [r for r in reader if r]
    header = [h.strip() for h in header]
    required = [cols[k] for k in ("treatment", "time", "event", "cost")] + covariates
    missing = [name for name in required if name not in header]
    if missing:
        raise ValidationError([(None, f"MISSING_COLUMN:{name}") for name in missing], stage="input")
    pos = {h: i for i, h in enumerate(header)}
    bad_rows = [(i + 1, "ROW_LENGTH") for i, r in enumerate(rows) if len(r) != len(header)]
    if bad_rows:
        raise ValidationError(bad_rows, stage="input")

    def col(name):
        try:
            return np.array([_num(r[pos[name]]) for r in rows])
        except ValueError as err:
            raise ValidationError([(None, f"NON_NUMERIC:{name}")], stage="input") from err

    ids = [r[pos[cols["id"]]] for r in rows] if cols["id"] in pos else list(range(1, len(rows) + 1))
    event = col(cols["event"])
    cost = col(cols["cost"])
    cov = np.column_stack([col(c) for c in covariates]) if covariates else np.zeros((len(rows), 0))
    return CostEffectivenessDataset(
        ids=ids,
        treatment=col(cols["treatment"]),
        observed_time=col(cols["time"]),
        event_censored=np.where(np.isnan(event), -1, 1 - np.nan_to_num(event)).astype(np.int8),
        cost_censored=np.isnan(cost).astype(np.int8),
        cost=cost,
        covariates=cov,
        covariate_names=tuple(covariates),
        tau=math.inf if tau is None else float(tau),
    )


def write_dataset_csv(dataset: CostEffectivenessDataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "treatment", "time", "event", "cost", *dataset.covariate_names])
        for i in range(dataset.n):
            c = dataset.cost[i]
            w.writerow([dataset.ids[i], int(dataset.treatment[i]), repr(float(dataset.observed_time[i])),
                        1 - int(dataset.event_censored[i]), "" if np.isnan(c) else repr(float(c)),
                        *(repr(float(v)) for v in dataset.covariates[i])])


def _cell(v) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))


def write_curve_csv(points: Sequence[CurvePoint], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for p in points:
            w.writerow([_cell(p.lam), _cell(p.estimate), _cell(p.ci_lower), _cell(p.ci_upper)])


def read_curve_csv(path) -> list[CurvePoint]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        out = []
        for r in reader:
            vals = {k: (None if r[k] == "" else float(r[k])) for k in CURVE_COLUMNS}
            out.append(CurvePoint(vals["lambda"], vals["estimate"], vals["ci_lower"], vals["ci_upper"]))
        return out


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()


def load_config(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
