"""OLS and LAD fits, Newey-West HAC covariance, cumulative paths with
inference, and the median-change estimator.

Cumulative paths are reported relative to relative day -W: the estimate at
day r is the sum of the per-day coefficients for s in (-W, r], so the path
is zero at r = -W and at day r estimates the price change since day -W,
net of trend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.stats import norm

from .design import RANK_TOL, DesignMatrix, matrix_rank
from .errors import EstimationError
from .events import EventSet
from .series import PriceSeries, align_event_date

Z90 = 1.6449
Z95 = 1.9600


@dataclass(frozen=True)
class RegressionFit:
    """Coefficients (per-day dummies then the constant), residuals, and the
    minimized objective (sum of squares for OLS, sum of absolute deviations
    for LAD)."""

    design: DesignMatrix
    coefficients: np.ndarray
    residuals: np.ndarray
    objective: float
    method: str  # "ols" | "lad"

    @property
    def constant(self) -> float:
        return float(self.coefficients[self.design.constant_index])


@dataclass(frozen=True)
class HacCovariance:
    """Bartlett-kernel HAC covariance of all coefficients."""

    matrix: np.ndarray
    lag: int


@dataclass(frozen=True)
class CumulativePath:
    """Per relative day r in [-W, W]: cumulative estimate, and (for OLS with
    HAC) standard error, two-sided normal p-value, and 90%/95% CIs.  The
    inference arrays are None for LAD and median paths."""

    label: str
    rel_days: np.ndarray
    estimates: np.ndarray
    ses: np.ndarray | None = None
    pvalues: np.ndarray | None = None
    ci90: tuple[np.ndarray, np.ndarray] | None = None
    ci95: tuple[np.ndarray, np.ndarray] | None = None


def _check_rank(design: DesignMatrix):
    if matrix_rank(design.matrix) < design.n_cols:
        raise EstimationError("design matrix is rank deficient")


def fit_ols(design: DesignMatrix) -> RegressionFit:
    """Least squares via SVD; requires full column rank."""
    _check_rank(design)
    x, y = design.matrix, design.response
    coef, _, rank, _ = np.linalg.lstsq(x, y, rcond=RANK_TOL)
    if rank < design.n_cols:
        raise EstimationError("design matrix is rank deficient")
    resid = y - x @ coef
    return RegressionFit(design, coef, resid, float(resid @ resid), "ols")


def fit_lad(design: DesignMatrix) -> RegressionFit:
    """Least absolute deviations via an exact linear program.

    min 1'u + 1'v  s.t.  X theta + u - v = y,  u, v >= 0.
    The HiGHS solver is deterministic, so permutation replications are
    reproducible.
    """
    _check_rank(design)
    x, y = design.matrix, design.response
    n, p = x.shape
    c = np.concatenate([np.zeros(p), np.ones(2 * n)])
    a_eq = np.hstack([x, np.eye(n), -np.eye(n)])
    bounds = [(None, None)] * p + [(0, None)] * (2 * n)
    res = linprog(c, A_eq=a_eq, b_eq=y, bounds=bounds, method="highs")
    if not res.success:
        raise EstimationError(f"LAD solver failed: {res.message}")
    coef = res.x[:p]
    resid = y - x @ coef
    return RegressionFit(design, coef, resid, float(np.sum(np.abs(resid))), "lad")


def hac_covariance(design: DesignMatrix, fit: RegressionFit, lag: int) -> HacCovariance:
    """Newey-West covariance (X'X)^-1 S (X'X)^-1 with Bartlett weights
    w_l = 1 - l/(lag+1) on the score autocovariances."""
    if lag < 0:
        raise EstimationError("lag must be >= 0")
    if lag >= design.n_rows:
        raise EstimationError(f"lag {lag} >= row count {design.n_rows}")
    x = design.matrix
    u = x * fit.residuals[:, None]
    s = u.T @ u
    for ell in range(1, lag + 1):
        w = 1.0 - ell / (lag + 1.0)
        g = u[ell:].T @ u[:-ell]
        s += w * (g + g.T)
    xtx_inv = np.linalg.inv(x.T @ x)
    cov = xtx_inv @ s @ xtx_inv
    cov = (cov + cov.T) / 2.0
    return HacCovariance(matrix=cov, lag=lag)


def _two_sided_p(est: np.ndarray, se: np.ndarray) -> np.ndarray:
    p = np.ones_like(est)
    nz = se > 0
    p[nz] = 2.0 * norm.sf(np.abs(est[nz]) / se[nz])
    exact = (se == 0) & (est != 0)
    p[exact] = 0.0
    return p


def _selector(design: DesignMatrix, r: int, group: str | None, contrast: bool) -> np.ndarray:
    w = design.window
    e = np.zeros(design.n_cols)
    for s in range(-w + 1, r + 1):
        if contrast:
            e[design.column_index(0, s)] += 1.0
            e[design.column_index(1, s)] -= 1.0
        else:
            e[design.column_index(group, s)] += 1.0
    return e


def _path_estimates(fit: RegressionFit, group: str | None, contrast: bool) -> np.ndarray:
    design = fit.design
    w = design.window
    if contrast:
        if len(design.group_labels) != 2:
            raise EstimationError("contrast path requires a two-group design")
        daily = (
            fit.coefficients[design.column_index(0, -w) : design.column_index(0, w) + 1]
            - fit.coefficients[design.column_index(1, -w) : design.column_index(1, w) + 1]
        )
    else:
        g = design.group_index(group if group is not None else design.group_labels[0])
        daily = fit.coefficients[design.column_index(g, -w) : design.column_index(g, w) + 1]
    est = np.cumsum(daily)
    # re-base so the path is zero at r = -W (its own coefficient excluded)
    return est - daily[0]


def cumulative_path(
    fit: RegressionFit,
    cov: HacCovariance,
    group: str | None = None,
    contrast: bool = False,
) -> CumulativePath:
    """Cumulative estimates with HAC inference for one group, or for the
    first-minus-second group contrast."""
    design = fit.design
    if cov.matrix.shape != (design.n_cols, design.n_cols):
        raise EstimationError("covariance does not match the design dimensions")
    if group is None and not contrast:
        group = design.group_labels[0]
    w = design.window
    est = _path_estimates(fit, group, contrast)
    ses = np.empty(2 * w + 1)
    for i, r in enumerate(range(-w, w + 1)):
        e = _selector(design, r, group, contrast)
        ses[i] = np.sqrt(max(float(e @ cov.matrix @ e), 0.0))
    pvalues = _two_sided_p(est, ses)
    if contrast:
        label = f"{design.group_labels[0]} - {design.group_labels[1]}"
    else:
        label = group if group is not None else design.group_labels[0]
    return CumulativePath(
        label=label,
        rel_days=np.arange(-w, w + 1),
        estimates=est,
        ses=ses,
        pvalues=pvalues,
        ci90=(est - Z90 * ses, est + Z90 * ses),
        ci95=(est - Z95 * ses, est + Z95 * ses),
    )


def constant_stats(fit: RegressionFit, cov: HacCovariance) -> tuple[float, float, float]:
    """(estimate, SE, p-value) of the trend constant."""
    i = fit.design.constant_index
    mu = float(fit.coefficients[i])
    se = float(np.sqrt(max(cov.matrix[i, i], 0.0)))
    p = float(_two_sided_p(np.array([mu]), np.array([se]))[0])
    return mu, se, p


def accumulate_lad_path(
    fit: RegressionFit, group: str | None = None, contrast: bool = False
) -> CumulativePath:
    """Prefix sums of LAD daily coefficients; inference comes only from the
    permutation module."""
    if fit.method != "lad":
        raise EstimationError("accumulate_lad_path requires a LAD fit")
    design = fit.design
    est = _path_estimates(fit, group, contrast)
    if contrast:
        label = f"{design.group_labels[0]} - {design.group_labels[1]}"
    else:
        label = group if group is not None else design.group_labels[0]
    return CumulativePath(
        label=label, rel_days=np.arange(-design.window, design.window + 1), estimates=est
    )


def median_change(series: PriceSeries, events: EventSet, w: int) -> CumulativePath:
    """Median across events of the long difference y_{t_i+r} - y_{t_i-w}
    (levels, or logs for a Log series), per relative day r in [-w, w]."""
    if len(events) == 0:
        raise EstimationError("empty event set")
    if w < 1:
        raise EstimationError("window must be >= 1")
    cal = series.calendar
    vals = series.transformed()
    positions = []
    for e in events:
        anchor = align_event_date(cal, e.date)
        p = cal.position(anchor)
        if p - w < 0 or p + w >= len(cal):
            raise EstimationError(
                f"event {e.name} on {e.date}: +-{w} day coverage missing"
            )
        positions.append(p)
    pos = np.asarray(positions)
    offsets = np.arange(-w, w + 1)
    # baseline is day -w of each event
    diffs = vals[pos[:, None] + offsets[None, :]] - vals[pos - w][:, None]
    return CumulativePath(
        label="Median", rel_days=offsets, estimates=np.median(diffs, axis=0)
    )
