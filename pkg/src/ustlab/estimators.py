"""Power-law fits, uniformity tests and split-sample diagnostics."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

__all__ = [
    "ExponentFit",
    "loglog_fit",
    "bootstrap_stderr",
    "mean_stderr",
    "chi_square_uniform",
    "split_sample_check",
    "fit_scaling",
]

log = logging.getLogger(__name__)

N_BOOT = 1000


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    stderr_slope: float
    r_squared: float
    n_points: int
    excluded: list = field(default_factory=list)

    @property
    def ci95(self) -> tuple:
        h = 1.96 * self.stderr_slope
        return (self.slope - h, self.slope + h)

    def contains(self, value: float) -> bool:
        lo, hi = self.ci95
        return lo <= value <= hi

    def as_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "stderr_slope": self.stderr_slope, "ci95": list(self.ci95),
                "r_squared": self.r_squared, "n_points": self.n_points,
                "excluded": self.excluded}


def _wls(lx, ly, w, scaled=True):
    W = w.sum()
    mx = np.dot(w, lx) / W
    my = np.dot(w, ly) / W
    sxx = np.dot(w, (lx - mx) ** 2)
    if sxx == 0:
        raise ValueError("abscissae must not all coincide")
    slope = np.dot(w, (lx - mx) * (ly - my)) / sxx
    intercept = my - slope * mx
    resid = ly - intercept - slope * lx
    dof = len(lx) - 2
    s2 = np.dot(w, resid ** 2) / dof if dof > 0 else 0.0
    se = float(np.sqrt((s2 if scaled else 1.0) / sxx))
    syy = np.dot(w, (ly - my) ** 2)
    r2 = 1.0 if syy == 0 else float(min(1.0, max(0.0, 1.0 - np.dot(w, resid ** 2) / syy)))
    return float(slope), float(intercept), se, r2, resid, s2


def loglog_fit(x, y, yerr=None, weights=None, *, guard_smallest: bool = True) -> ExponentFit:
    """Weighted least squares of ``log y`` on ``log x``.

    Weights default to the inverse variance of ``log y`` when ``yerr`` (the
    standard error of each mean) is given, and to 1 otherwise.  With
    inverse-variance weights the slope error follows from those variances;
    otherwise it is scaled by the residuals.  With ``guard_smallest``
    the smallest abscissa is dropped when its standardized residual (in
    units of the known errors when given) exceeds 3 and at least five points
    were supplied.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    if len(x) < 3:
        raise ValueError("at least 3 points are needed")
    if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(x) & np.isfinite(y)):
        raise ValueError("log-log fit needs finite positive data")
    known = False
    if weights is not None:
        w = np.asarray(weights, dtype=np.float64)
    elif yerr is not None and np.all(np.asarray(yerr, dtype=np.float64) > 0):
        w = (y / np.asarray(yerr, dtype=np.float64)) ** 2
        known = True
    else:
        w = np.ones_like(x)
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    order = np.argsort(x, kind="stable")
    lx, ly, w = np.log(x[order]), np.log(y[order]), w[order]
    slope, icpt, se, r2, resid, s2 = _wls(lx, ly, w, not known)
    excluded = []
    scale = 1.0 if known else s2
    if guard_smallest and len(lx) >= 5 and scale > 0:
        z = resid[0] * np.sqrt(w[0] / scale)
        if abs(z) > 3:
            excluded.append(float(x[order][0]))
            log.info("excluding smallest abscissa %g (standardized residual %.2f)", x[order][0], z)
            slope, icpt, se, r2, _, _ = _wls(lx[1:], ly[1:], w[1:], not known)
    return ExponentFit(slope, icpt, se, r2, len(lx) - len(excluded), excluded)


def mean_stderr(samples) -> tuple:
    a = np.asarray(samples, dtype=np.float64)
    if len(a) < 2:
        return float(a.mean()), float("nan")
    return float(a.mean()), float(a.std(ddof=1) / np.sqrt(len(a)))


def bootstrap_stderr(samples, stat=np.mean, n_boot: int = N_BOOT, rng=0) -> float:
    """Bootstrap standard error of ``stat`` over the replicas in ``samples``."""
    a = np.asarray(samples, dtype=np.float64)
    if len(a) < 2:
        raise ValueError("bootstrap needs at least 2 replicas")
    res = stats.bootstrap((a,), stat, n_resamples=n_boot, method="percentile",
                          vectorized=False, random_state=np.random.default_rng(rng))
    return float(res.standard_error)


def chi_square_uniform(counts) -> tuple:
    """Pearson statistic and p-value of ``counts`` against the uniform law."""
    c = np.asarray(counts, dtype=np.float64)
    if c.ndim != 1 or len(c) < 2:
        raise ValueError("need at least 2 categories")
    if np.any(c < 0):
        raise ValueError("counts must be non-negative")
    if c.sum() == 0:
        raise ValueError("total count is zero")
    res = stats.chisquare(c)
    return float(res.statistic), float(res.pvalue)


def split_sample_check(a, ea, b, eb) -> float:
    """Largest ``|a_i - b_i| / sqrt(ea_i^2 + eb_i^2)`` across two summaries."""
    a, ea, b, eb = (np.asarray(v, dtype=np.float64) for v in (a, ea, b, eb))
    if not (a.shape == ea.shape == b.shape == eb.shape):
        raise ValueError("summaries must have equal lengths")
    if a.size == 0:
        return 0.0
    diff = np.abs(a - b)
    pooled = np.sqrt(ea ** 2 + eb ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(diff == 0, 0.0, diff / pooled)
    return float(z.max())


def fit_scaling(xs, samples, *, bootstrap: bool = True, rng=0):
    """Fit mean observables against scale and run the even/odd split check.

    ``samples[k]`` holds the replicas at scale ``xs[k]``.  Returns the fit,
    the per-scale means and errors, and the split-sample discrepancy.
    """
    means, errs = [], []
    halves = [[], [], [], []]
    for k, s in enumerate(samples):
        s = np.asarray(s, dtype=np.float64)
        means.append(s.mean())
        errs.append(bootstrap_stderr(s, rng=(rng, k)) if bootstrap else mean_stderr(s)[1])
        for h, part in enumerate((s[0::2], s[1::2])):
            m, e = mean_stderr(part)
            halves[2 * h].append(m)
            halves[2 * h + 1].append(e)
    fit = loglog_fit(xs, means, errs)
    split = split_sample_check(*halves)
    return fit, np.array(means), np.array(errs), split
