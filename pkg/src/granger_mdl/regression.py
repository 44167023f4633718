"""Lagged design matrices and linear least-squares estimation.

Builds the restricted/unrestricted autoregressions every causality test
rests on. Fits are solved through orthogonal factorisations (QR / SVD),
never by inverting the normal matrix, with an explicit rank guard.

The module also carries a nested-scan fast path (`ols_order_scan`): a
single Householder QR of the widest design yields the residual sum of
squares and coefficients of every lower-order model in the family,
which is what the order searches in `selection` and `timedomain` use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import RankDeficiencyError, ValidationError
from .timeseries import TimeSeriesMatrix

__all__ = [
    "LagSpec",
    "OlsFit",
    "ResidualCovariance",
    "build_design",
    "ols_fit",
    "residual_covariance",
    "stability_check",
    "ols_order_scan",
]

RANK_TOL = 1e-10


@dataclass(frozen=True)
class LagSpec:
    """Which series predicts which: a target plus ordered (variable, lags) pairs.

    A predictor with lag count 0 contributes no columns; at least one
    predictor must have a positive lag count. The target may itself
    appear as a predictor (own history) but at most once.
    """

    target: int
    predictors: tuple

    def __init__(self, target: int, predictors: Sequence[Tuple[int, int]]):
        predictors = tuple((int(v), int(lags)) for v, lags in predictors)
        if not predictors:
            raise ValidationError("LagSpec needs at least one predictor")
        seen = [v for v, _ in predictors]
        if len(set(seen)) != len(seen):
            raise ValidationError(f"duplicate predictor variables in {seen}")
        for v, lags in predictors:
            if lags < 0:
                raise ValidationError(f"negative lag count {lags} for variable {v}")
        if all(lags == 0 for _, lags in predictors):
            raise ValidationError("all lag counts are 0: design would have no columns")
        object.__setattr__(self, "target", int(target))
        object.__setattr__(self, "predictors", predictors)

    @property
    def max_lag(self) -> int:
        return max(lags for _, lags in self.predictors)

    @property
    def n_columns(self) -> int:
        return sum(lags for _, lags in self.predictors)


@dataclass(frozen=True)
class OlsFit:
    """Least-squares result for one regression.

    coefficients are ordered predictor-major (all lags of the first
    predictor, then the second, ...), lags 1..L within a predictor.
    ``sigma2_mle`` is rss/m, the maximum-likelihood noise variance.
    """

    coefficients: np.ndarray
    residuals: np.ndarray
    rss: float
    m: int
    k: int

    @property
    def sigma2_mle(self) -> float:
        return self.rss / self.m


@dataclass(frozen=True)
class ResidualCovariance:
    """2x2 contemporaneous covariance of two residual series."""

    matrix: np.ndarray

    @property
    def var_x(self) -> float:
        return float(self.matrix[0, 0])

    @property
    def var_y(self) -> float:
        return float(self.matrix[1, 1])

    @property
    def cov_xy(self) -> float:
        return float(self.matrix[0, 1])


def build_design(ts: TimeSeriesMatrix, spec: LagSpec, start: int = None):
    """Assemble the lagged design matrix and response vector for ``spec``.

    Row t of a lag-l column holds that variable at time t-l. The
    response is the target series truncated to rows ``start..end``;
    ``start`` defaults to the spec's max lag and may be set larger so
    several competing models share one response window.
    """
    values = ts.values
    max_lag = spec.max_lag
    if start is None:
        start = max_lag
    if start < max_lag:
        raise ValidationError(f"start={start} is below the max lag {max_lag}")
    n = values.shape[0]
    if n <= start:
        raise ValidationError(
            f"series of length {n} too short for a window starting at row {start}"
        )
    for v, _ in spec.predictors:
        if not 0 <= v < values.shape[1]:
            raise ValidationError(f"predictor variable {v} out of range")
    if not 0 <= spec.target < values.shape[1]:
        raise ValidationError(f"target variable {spec.target} out of range")

    response = values[start:, spec.target]
    cols = []
    for v, lags in spec.predictors:
        for ell in range(1, lags + 1):
            cols.append(values[start - ell: n - ell, v])
    design = np.column_stack(cols)
    return design, response


def ols_fit(design: np.ndarray, response: np.ndarray) -> OlsFit:
    """Solve min ||X b - y||^2 with a rank guard.

    Rank deficiency (smallest/largest singular value below 1e-10) is a
    hard error that names the offending columns, found via a pivoted QR.
    """
    X = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if X.ndim != 2:
        raise ValidationError("design must be 2-D")
    m, k = X.shape
    if y.shape != (m,):
        raise ValidationError(f"response length {y.shape} != design rows {m}")
    if m < k:
        raise ValidationError(f"underdetermined system: {m} rows < {k} columns")

    sv = np.linalg.svd(X, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] / sv[0] < RANK_TOL:
        _, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
        diag = np.abs(np.diag(R))
        scale = diag[0] if diag[0] > 0 else 1.0
        bad = [int(piv[j]) for j in range(k) if diag[j] / scale < RANK_TOL]
        raise RankDeficiencyError(
            f"rank-deficient design: columns {sorted(bad)} are linearly "
            f"dependent on the others (tolerance {RANK_TOL:g})",
            columns=sorted(bad),
        )

    coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    residuals = y - X @ coef
    rss = float(residuals @ residuals)
    return OlsFit(coefficients=coef, residuals=residuals, rss=rss, m=m, k=k)


def residual_covariance(fit_x: OlsFit, fit_y: OlsFit) -> ResidualCovariance:
    """Contemporaneous sample covariance of two residual vectors (divisor m)."""
    u = fit_x.residuals
    v = fit_y.residuals
    if u.shape != v.shape:
        raise ValidationError(
            f"residual length mismatch: {u.shape[0]} vs {v.shape[0]}"
        )
    m = u.shape[0]
    matrix = np.array(
        [
            [float(u @ u), float(u @ v)],
            [float(v @ u), float(v @ v)],
        ]
    ) / m
    return ResidualCovariance(matrix=matrix)


def stability_check(coefficients) -> float:
    """Spectral radius of the companion matrix of an AR/VAR coefficient set.

    Accepts either a 1-D array of scalar AR coefficients (a_1..a_p) or a
    sequence of (k x k) lag matrices A_1..A_p. A radius below 1 means
    the fitted difference equation is stationary; callers may warn
    otherwise.
    """
    arr = [np.atleast_2d(np.asarray(a, dtype=float)) for a in _as_lag_list(coefficients)]
    k = arr[0].shape[0]
    for a in arr:
        if a.shape != (k, k):
            raise ValidationError("lag matrices must share one square shape")
    p = len(arr)
    companion = np.zeros((k * p, k * p))
    companion[:k, :] = np.hstack(arr)
    if p > 1:
        companion[k:, : k * (p - 1)] = np.eye(k * (p - 1))
    return float(np.abs(np.linalg.eigvals(companion)).max())


def _as_lag_list(coefficients):
    arr = np.asarray(coefficients, dtype=float)
    if arr.ndim == 1:
        return [np.array([[c]]) for c in arr]
    if arr.ndim == 2:
        # single lag matrix
        return [arr]
    return list(arr)


@dataclass(frozen=True)
class OrderScanEntry:
    """One member of a nested model family: order, size, coefficients, rss."""

    order: int
    k: int
    coefficients: np.ndarray
    rss: float
    m: int
    response_sq: float


def ols_order_scan(
    ts: TimeSeriesMatrix,
    target: int,
    block_vars: Sequence[int],
    p_max: int,
    start: int = None,
) -> List[OrderScanEntry]:
    """Fit the shared-order family {order n: every block gets lags 1..n}.

    One QR of the widest design (columns interleaved lag-major so the
    order-n model is a column prefix) produces rss and coefficients for
    every n in 1..p_max on a common response window starting at
    ``start`` (default p_max). Coefficients are reported back in the
    predictor-major order used by :func:`build_design`.
    """
    if p_max < 1:
        raise ValidationError("p_max must be >= 1")
    if start is None:
        start = p_max
    values = ts.values
    n = values.shape[0]
    if n <= start:
        raise ValidationError(
            f"series of length {n} too short for orders up to {p_max}"
        )
    b = len(block_vars)
    # lag-major interleaving: [blk0_l1, blk1_l1, ..., blk0_l2, blk1_l2, ...]
    cols = []
    for ell in range(1, p_max + 1):
        for v in block_vars:
            cols.append(values[start - ell: n - ell, v])
    X = np.column_stack(cols)
    y = values[start:, target]
    m = y.shape[0]
    if m < X.shape[1]:
        raise ValidationError(
            f"underdetermined scan: {m} rows < {X.shape[1]} columns at p_max={p_max}"
        )

    Q, R = np.linalg.qr(X, mode="reduced")
    diag = np.abs(np.diag(R))
    scale = diag.max() if diag.size else 1.0
    if scale == 0.0 or (diag / scale < RANK_TOL).any():
        bad = [int(j) for j in np.flatnonzero(diag / max(scale, 1e-300) < RANK_TOL)]
        names = [f"var{block_vars[j % b]}.lag{j // b + 1}" for j in bad]
        raise RankDeficiencyError(
            f"rank-deficient design in order scan: columns {names}",
            columns=bad,
        )
    qty = Q.T @ y
    total = float(y @ y)
    cum = np.cumsum(qty ** 2)

    entries = []
    for order in range(1, p_max + 1):
        kk = b * order
        rss = max(total - float(cum[kk - 1]), 0.0)
        beta = scipy.linalg.solve_triangular(R[:kk, :kk], qty[:kk])
        # back to predictor-major order: all lags of block 0, then block 1, ...
        coef = np.empty(kk)
        for j in range(kk):
            block, ell = j % b, j // b
            coef[block * order + ell] = beta[j]
        entries.append(
            OrderScanEntry(
                order=order, k=kk, coefficients=coef, rss=rss, m=m,
                response_sq=total,
            )
        )
    return entries
