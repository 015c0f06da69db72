"""Exception types shared across the package."""

from __future__ import annotations


class CedError(Exception):
    """Base error carrying a machine-readable code and an optional stage label.

    ``str(err)`` renders as ``"<stage>: <code>"`` (plus detail) so that
    pipeline failures read like ``"fit.cox: NONCONVERGENCE"``.
    """

    def __init__(self, code: str, detail: str = "", stage: str | None = None):
        self.code = code
        self.detail = detail
        self.stage = stage
        super().__init__(self._render())

    def _render(self) -> str:
        head = f"{self.stage}: {self.code}" if self.stage else self.code
        return f"{head} ({self.detail})" if self.detail else head

    def with_stage(self, stage: str) -> "CedError":
        """Return the same error relabelled with ``stage`` (outermost label wins)."""
        if self.stage is None:
            self.stage = stage
            self.args = (self._render(),)
        return self


class ValidationError(CedError):
    """Input data or configuration violates a contract.

    ``report`` lists every violation as ``(row_id, rule)`` pairs; ``row_id`` is
    ``None`` for dataset-level rules.
    """

    def __init__(self, report: list[tuple[object, str]], stage: str | None = "validate"):
        self.report = list(report)
        codes = sorted({rule for _, rule in self.report})
        super().__init__(codes[0] if len(codes) == 1 else "INVALID_DATASET",
                         detail=f"{len(self.report)} violation(s): " + ", ".join(codes),
                         stage=stage)


class FitError(CedError):
    """A numerical fitting or sampling step failed (non-convergence, singularity, ...)."""
