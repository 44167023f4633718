"""Core multichannel time-series container, CSV ingestion, validation.

All analysis modules consume :class:`TimeSeriesMatrix`. Instances are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError

__all__ = [
    "TimeSeriesMatrix",
    "ValidationReport",
    "load_csv",
    "save_csv",
    "validate",
    "demean",
]


@dataclass(frozen=True)
class TimeSeriesMatrix:
    """A real-valued recording: rows are time points, columns are variables.

    Parameters
    ----------
    values : ndarray, shape (n_samples, n_variables)
        Finite real numbers, dimensionless.
    labels : sequence of str
        One unique name per column.
    sample_rate_hz : float, optional
        Cycles per second. When absent, frequency-domain outputs fall
        back to a nominal 1.0 samples/second axis.
    """

    values: np.ndarray
    labels: tuple
    sample_rate_hz: Optional[float] = None

    def __init__(self, values, labels=None, sample_rate_hz=None):
        arr = np.asarray(values, dtype=float)
        if arr.ndim != 2:
            raise ValidationError(f"values must be 2-D, got {arr.ndim}-D")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"values must be at least 1x1, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise ValidationError(
                f"non-finite entry at row {bad[0]}, column {bad[1]}"
            )
        if labels is None:
            labels = tuple(f"v{i}" for i in range(arr.shape[1]))
        labels = tuple(str(name) for name in labels)
        if len(labels) != arr.shape[1]:
            raise ValidationError(
                f"{len(labels)} labels for {arr.shape[1]} columns"
            )
        if len(set(labels)) != len(labels):
            raise ValidationError("labels must be unique")
        if sample_rate_hz is not None:
            sample_rate_hz = float(sample_rate_hz)
            if not (sample_rate_hz > 0 and np.isfinite(sample_rate_hz)):
                raise ValidationError("sample_rate_hz must be positive and finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "sample_rate_hz", sample_rate_hz)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_variables(self) -> int:
        return self.values.shape[1]

    def column(self, name_or_index) -> int:
        """Resolve a variable reference (label or index) to a column index."""
        if isinstance(name_or_index, str):
            if name_or_index in self.labels:
                return self.labels.index(name_or_index)
            try:
                name_or_index = int(name_or_index)
            except ValueError:
                raise ValidationError(
                    f"unknown variable {name_or_index!r}; have {list(self.labels)}"
                ) from None
        idx = int(name_or_index)
        if not 0 <= idx < self.n_variables:
            raise ValidationError(
                f"variable index {idx} out of range [0, {self.n_variables - 1}]"
            )
        return idx


@dataclass(frozen=True)
class ValidationReport:
    """Per-variable summary statistics plus a finiteness flag."""

    per_variable_mean: tuple
    per_variable_variance: tuple
    finite_ok: bool
    length: int


def load_csv(path, has_header: bool = True, sample_rate_hz: Optional[float] = None) -> TimeSeriesMatrix:
    """Read a comma-separated file into a :class:`TimeSeriesMatrix`.

    Every cell must parse as a decimal real number (optional exponent);
    rows must all have the same number of cells. LF and CRLF endings are
    both accepted. With ``has_header`` the first row supplies labels,
    otherwise labels are generated as ``v0, v1, ...``.
    """
    try:
        with open(path, "r", newline="") as fh:
            raw_lines = fh.read().split("\n")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    lines = [ln.rstrip("\r") for ln in raw_lines]
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ValidationError(f"{path}: empty file")

    labels = None
    start = 0
    if has_header:
        labels = [cell.strip() for cell in lines[0].split(",")]
        start = 1
        if not lines[start:]:
            raise ValidationError(f"{path}: header but no data rows")

    n_cols = None
    rows = []
    for lineno, line in enumerate(lines[start:], start=start + 1):
        cells = line.split(",")
        if n_cols is None:
            n_cols = len(cells)
        elif len(cells) != n_cols:
            raise ValidationError(
                f"{path}: row {lineno} has {len(cells)} cells, expected {n_cols}"
            )
        parsed = []
        for colno, cell in enumerate(cells):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise ValidationError(
                    f"{path}: non-numeric cell at row {lineno}, column {colno}: {cell.strip()!r}"
                ) from None
        rows.append(parsed)
    if labels is not None and len(labels) != n_cols:
        raise ValidationError(
            f"{path}: header has {len(labels)} names for {n_cols} columns"
        )
    return TimeSeriesMatrix(np.array(rows, dtype=float), labels, sample_rate_hz)


def save_csv(ts: TimeSeriesMatrix, path, header: bool = True) -> None:
    """Write a matrix as CSV with 17 significant digits (lossless for doubles)."""
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(",".join(ts.labels) + "\n")
        for row in ts.values:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def validate(ts: TimeSeriesMatrix) -> ValidationReport:
    """Summarise a matrix: per-variable mean, unbiased variance, finiteness.

    Reports, never raises; the input is not modified. Variance uses the
    n-1 divisor and is 0.0 for a single sample.
    """
    vals = ts.values
    means = tuple(float(x) for x in vals.mean(axis=0))
    if vals.shape[0] > 1:
        variances = tuple(float(x) for x in vals.var(axis=0, ddof=1))
    else:
        variances = tuple(0.0 for _ in range(vals.shape[1]))
    return ValidationReport(
        per_variable_mean=means,
        per_variable_variance=variances,
        finite_ok=bool(np.isfinite(vals).all()),
        length=vals.shape[0],
    )


def demean(ts: TimeSeriesMatrix) -> TimeSeriesMatrix:
    """Subtract each column's mean; returns a new matrix."""
    centred = ts.values - ts.values.mean(axis=0)
    return TimeSeriesMatrix(centred, ts.labels, ts.sample_rate_hz)
