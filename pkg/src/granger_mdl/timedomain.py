"""Time-domain causality: conventional F-test GCA and code-length GCA.

Both methods compare a restricted autoregression of the target against
an unrestricted one that adds the candidate source's history. The
F-test path judges the extra sum of squares against an F distribution
at a significance level; the code-length path compares the best
two-part description length of each model family and calls the source
causal when it shortens the description.

`infer_network` assembles a directed graph over all variables. The
code-length method keeps an edge when both the pairwise comparison and
the conditional comparison (given every remaining variable) are
positive. The F-test method tests each edge conditionally on all
remaining variables, which is the conventional multivariate pipeline.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import betainc

from .errors import DegenerateFitError, RankDeficiencyError, ValidationError
from .regression import (
    LagSpec,
    OrderScanEntry,
    build_design,
    ols_fit,
    ols_order_scan,
)
from .selection import CodeLength, code_length_from_stats, select_order
from .timeseries import TimeSeriesMatrix

__all__ = [
    "FTestResult",
    "MdlCausality",
    "JointMdlCausality",
    "CausalGraph",
    "f_cdf",
    "f_test_gc",
    "conditional_f_test_gc",
    "log_variance_ratio",
    "mdl_gc",
    "conditional_mdl_gc",
    "joint_mdl_gc",
    "infer_network",
    "similarity",
]


@dataclass(frozen=True)
class FTestResult:
    """Outcome of one hierarchical F comparison."""

    f_value: float
    dof: Tuple[int, int]
    p_value: float
    significant: bool
    rss_restricted: float
    rss_unrestricted: float


@dataclass(frozen=True)
class MdlCausality:
    """Code-length comparison of a restricted and an unrestricted family.

    ``f_nats`` is the description-length saving of the unrestricted
    family; positive values mean the source carries information about
    the target beyond the target's own history.
    """

    f_nats: float
    restricted_len: CodeLength
    unrestricted_len: CodeLength
    causal: bool


@dataclass(frozen=True)
class JointMdlCausality:
    """Joint two-source comparison with all three code lengths reported."""

    f_nats: float
    len_with_first: CodeLength
    len_with_second: CodeLength
    len_with_both: CodeLength


@dataclass(frozen=True)
class CausalGraph:
    """Weighted directed adjacency over variables; edge [j, i] means j -> i."""

    n_nodes: int
    adjacency: np.ndarray
    weight: np.ndarray
    method: str
    params: dict
    labels: tuple

    def edges(self):
        """Sorted list of (source, target) index pairs present in the graph."""
        js, is_ = np.nonzero(self.adjacency)
        return sorted(zip(js.tolist(), is_.tolist()))

    def to_json(self) -> str:
        payload = {
            "nodes": list(self.labels),
            "method": self.method,
            "edges": [
                {
                    "from": self.labels[j],
                    "to": self.labels[i],
                    "weight": float(self.weight[j, i]),
                }
                for j, i in self.edges()
            ],
            "params": self.params,
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    @staticmethod
    def from_json(text: str) -> "CausalGraph":
        try:
            payload = json.loads(text)
            labels = tuple(payload["nodes"])
            method = payload.get("method", "")
            params = payload.get("params", {})
            n = len(labels)
            adjacency = np.zeros((n, n), dtype=bool)
            weight = np.zeros((n, n))
            index = {name: i for i, name in enumerate(labels)}
            for edge in payload["edges"]:
                j, i = index[edge["from"]], index[edge["to"]]
                adjacency[j, i] = True
                weight[j, i] = float(edge.get("weight", 0.0))
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise ValidationError(f"malformed graph JSON: {exc}") from exc
        return CausalGraph(
            n_nodes=n, adjacency=adjacency, weight=weight,
            method=method, params=params, labels=labels,
        )


def f_cdf(x: float, d1: int, d2: int) -> float:
    """Cumulative F distribution via the regularized incomplete beta."""
    if d1 < 1 or d2 < 1:
        raise ValidationError(f"degrees of freedom must be >= 1, got ({d1}, {d2})")
    if x < 0:
        raise ValidationError(f"x must be nonnegative, got {x}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    z = d1 * x / (d1 * x + d2)
    return float(betainc(d1 / 2.0, d2 / 2.0, z))


def _f_comparison(rss_r, rss_u, q, d2, alpha):
    if d2 < 1:
        raise ValidationError(
            f"not enough samples: denominator degrees of freedom {d2} < 1"
        )
    if rss_u > rss_r:
        # nested fits on one window can differ only by rounding
        rss_u = rss_r
    if rss_r == rss_u:
        f_value, p_value = 0.0, 1.0
    elif rss_u == 0.0:
        f_value, p_value = math.inf, 0.0
    else:
        f_value = ((rss_r - rss_u) / q) / (rss_u / d2)
        p_value = 1.0 - f_cdf(f_value, q, d2)
    return FTestResult(
        f_value=float(f_value),
        dof=(q, d2),
        p_value=float(p_value),
        significant=bool(p_value < alpha),
        rss_restricted=float(rss_r),
        rss_unrestricted=float(rss_u),
    )


def f_test_gc(
    ts: TimeSeriesMatrix,
    x,
    y,
    p: int,
    q: int,
    alpha: float = 0.05,
    start: Optional[int] = None,
) -> FTestResult:
    """Pairwise F-test: do y's last q values improve prediction of x?

    Restricted model: x on its own p lags. Unrestricted: plus q lags of
    y. Both are fit on one response window (``start`` defaults to
    max(p, q)) so the residual sums are comparable. The statistic has
    (q, m - p - q - 1) degrees of freedom.
    """
    return conditional_f_test_gc(ts, x, y, (), p, q, 0, alpha, start)


def conditional_f_test_gc(
    ts: TimeSeriesMatrix,
    x,
    y,
    z_set: Sequence,
    p: int,
    q: int,
    r: int,
    alpha: float = 0.05,
    start: Optional[int] = None,
) -> FTestResult:
    """F-test of y -> x while controlling for the variables in ``z_set``.

    Restricted model: x's own p lags plus r lags of every conditioning
    variable. Unrestricted: plus q lags of y.
    """
    xi = ts.column(x)
    yi = ts.column(y)
    zi = [ts.column(z) for z in z_set]
    if xi == yi:
        raise ValidationError("source and target must differ")
    if xi in zi or yi in zi:
        raise ValidationError("conditioning set must be disjoint from source and target")
    if p < 1 or q < 1:
        raise ValidationError(f"orders p, q must be >= 1, got p={p}, q={q}")
    if zi and r < 1:
        raise ValidationError(f"conditioning order r must be >= 1, got {r}")

    restricted = [(xi, p)] + [(z, r) for z in zi]
    unrestricted = restricted + [(yi, q)]
    window = start if start is not None else max(p, q, r if zi else 0)
    Xr, resp = build_design(ts, LagSpec(xi, restricted), start=window)
    Xu, _ = build_design(ts, LagSpec(xi, unrestricted), start=window)
    fit_r = ols_fit(Xr, resp)
    fit_u = ols_fit(Xu, resp)
    d2 = fit_u.m - Xu.shape[1] - 1
    return _f_comparison(fit_r.rss, fit_u.rss, q, d2, alpha)


def log_variance_ratio(result: FTestResult) -> float:
    """ln(var(restricted residual) / var(unrestricted residual)).

    Reported as descriptive evidence only; the decision rule of the
    F-test path is the significance threshold.
    """
    if result.rss_unrestricted == 0.0:
        return math.inf
    return math.log(result.rss_restricted / result.rss_unrestricted)


def _scan_entries(ts, target, blocks, p_max):
    """Order-family fits, falling back to per-order fits near rank trouble.

    The wide-matrix scan flags a deficiency anywhere in the family; the
    fallback walks orders from 1 upward so the first genuinely broken
    (or perfectly fitting) model surfaces its own error.
    """
    try:
        return ols_order_scan(ts, target, blocks, p_max)
    except RankDeficiencyError:
        entries = []
        for order in range(1, p_max + 1):
            spec = LagSpec(target, [(v, order) for v in blocks])
            X, y = build_design(ts, spec, start=p_max)
            fit = ols_fit(X, y)
            _require_noise(fit.rss, float(y @ y))
            entries.append(
                OrderScanEntry(
                    order=order, k=fit.k, coefficients=fit.coefficients,
                    rss=fit.rss, m=fit.m, response_sq=float(y @ y),
                )
            )
        return entries


def _require_noise(rss, response_sq):
    if rss <= 1e-12 * response_sq:
        raise DegenerateFitError(
            "degenerate noiseless fit: residual variance vanishes, "
            "the Gaussian code length is undefined"
        )


def _best_code_length(ts, target, blocks, p_max, delta, scale_floor) -> CodeLength:
    """Shortest code length over shared orders 1..p_max for one family."""
    entries = _scan_entries(ts, target, blocks, p_max)
    best = None
    for entry in entries:
        _require_noise(entry.rss, entry.response_sq)
        cl = code_length_from_stats(
            entry.coefficients, entry.rss, entry.m, ts.n_samples,
            delta=delta, scale_floor=scale_floor,
        )
        if best is None or cl.total < best.total:
            best = cl
    return best


def mdl_gc(
    ts: TimeSeriesMatrix,
    x,
    y,
    p_max: int = 10,
    delta: Optional[float] = None,
    scale_floor: float = 1.0,
) -> MdlCausality:
    """Code-length causality from y to x.

    The restricted family regresses x on its own lags, the unrestricted
    family adds y's lags at the same shared order; both are searched
    over orders 1..p_max on a common window and the best total code
    lengths are compared. Positive saving means causal; exact ties
    resolve to the smaller model (not causal).
    """
    return conditional_mdl_gc(ts, x, y, (), p_max, delta, scale_floor)


def conditional_mdl_gc(
    ts: TimeSeriesMatrix,
    x,
    y,
    z_set: Sequence,
    p_max: int = 10,
    delta: Optional[float] = None,
    scale_floor: float = 1.0,
) -> MdlCausality:
    """Code-length causality from y to x given the variables in ``z_set``.

    With an empty conditioning set this is exactly the pairwise
    comparison.
    """
    xi = ts.column(x)
    yi = ts.column(y)
    zi = [ts.column(z) for z in z_set]
    if xi == yi:
        raise ValidationError("source and target must differ")
    if xi in zi or yi in zi:
        raise ValidationError("conditioning set must be disjoint from source and target")
    restricted = _best_code_length(ts, xi, [xi] + zi, p_max, delta, scale_floor)
    unrestricted = _best_code_length(ts, xi, [xi, yi] + zi, p_max, delta, scale_floor)
    f_nats = restricted.total - unrestricted.total
    return MdlCausality(
        f_nats=float(f_nats),
        restricted_len=restricted,
        unrestricted_len=unrestricted,
        causal=bool(f_nats > 0.0),
    )


def joint_mdl_gc(
    ts: TimeSeriesMatrix,
    x,
    y,
    z,
    p_max: int = 10,
    delta: Optional[float] = None,
    scale_floor: float = 1.0,
) -> JointMdlCausality:
    """Joint influence of two sources on x, with all three lengths kept.

    The measure is min(L(x+y), L(x+z)) - L(x+y+z): positive when both
    sources contribute beyond either alone. A negative value is
    ambiguous between the two single-source readings, so the component
    code lengths are all reported for the caller to inspect.
    """
    xi, yi, zi = ts.column(x), ts.column(y), ts.column(z)
    if len({xi, yi, zi}) != 3:
        raise ValidationError("x, y, z must be three distinct variables")
    l_xy = _best_code_length(ts, xi, [xi, yi], p_max, delta, scale_floor)
    l_xz = _best_code_length(ts, xi, [xi, zi], p_max, delta, scale_floor)
    l_xyz = _best_code_length(ts, xi, [xi, yi, zi], p_max, delta, scale_floor)
    return JointMdlCausality(
        f_nats=float(min(l_xy.total, l_xz.total) - l_xyz.total),
        len_with_first=l_xy,
        len_with_second=l_xz,
        len_with_both=l_xyz,
    )


def _f_edge(ts, target, source, rest, p_max, alpha, order_criterion):
    """Conventional edge decision: conditional F-test at a searched order."""
    score = select_order(ts, target, [target] + rest, order_criterion, p_max)
    n = score.order
    result = conditional_f_test_gc(
        ts, target, source, rest, n, n, n if rest else 0, alpha, start=p_max
    )
    return result.significant, result.f_value


def _mdl_edge(ts, target, source, rest, p_max):
    """Code-length edge decision: pairwise gate, then conditional check."""
    pairwise = mdl_gc(ts, target, source, p_max)
    if not pairwise.causal or not rest:
        return pairwise.causal, pairwise.f_nats
    conditional = conditional_mdl_gc(ts, target, source, rest, p_max)
    return conditional.causal, conditional.f_nats


def infer_network(
    ts: TimeSeriesMatrix,
    method: str = "mdl",
    p_max: int = 10,
    alpha: float = 0.05,
    order_criterion: str = "AIC",
) -> CausalGraph:
    """Infer the directed causal graph over all variables of ``ts``.

    Every ordered pair (source j, target i) is evaluated independently
    in a fixed ascending order, so the result does not depend on
    traversal. With more than two variables the remaining variables
    form the conditioning set: the code-length method requires the
    pairwise and the conditional comparison to both be positive, the
    F-test method keeps an edge its conditional test deems significant
    at ``alpha``.
    """
    method_key = str(method).strip().lower().replace("-", "_")
    if method_key in ("mdl",):
        tag = "MDL"
    elif method_key in ("ftest", "f_test", "f"):
        tag = "F_TEST"
    else:
        raise ValidationError(f"unknown method {method!r}; use 'mdl' or 'ftest'")
    if ts.n_variables < 2:
        raise ValidationError("network inference needs at least 2 variables")
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    if p_max < 1:
        raise ValidationError(f"p_max must be >= 1, got {p_max}")

    nv = ts.n_variables
    adjacency = np.zeros((nv, nv), dtype=bool)
    weight = np.zeros((nv, nv))
    for i in range(nv):
        for j in range(nv):
            if i == j:
                continue
            rest = [k for k in range(nv) if k not in (i, j)]
            if tag == "MDL":
                keep, evidence = _mdl_edge(ts, i, j, rest, p_max)
            else:
                keep, evidence = _f_edge(ts, i, j, rest, p_max, alpha, order_criterion)
            adjacency[j, i] = keep
            weight[j, i] = evidence

    params = {"p_max": p_max}
    if tag == "F_TEST":
        params["alpha"] = alpha
        params["order_criterion"] = order_criterion
    return CausalGraph(
        n_nodes=nv,
        adjacency=adjacency,
        weight=weight,
        method=tag,
        params=params,
        labels=ts.labels,
    )


def similarity(a: CausalGraph, b: CausalGraph) -> float:
    """Jaccard similarity of two directed edge sets.

    Intersection over union of the edge sets; two empty graphs count as
    identical (1.0).
    """
    if a.n_nodes != b.n_nodes:
        raise ValidationError(
            f"node counts differ: {a.n_nodes} vs {b.n_nodes}"
        )
    ea, eb = set(a.edges()), set(b.edges())
    union = ea | eb
    if not union:
        return 1.0
    return len(ea & eb) / len(union)
