"""Named experiments: replication over seeded streams and aggregation.

Replica ``i`` of a run always draws from ``RandomSource(seed, i)``, whatever
the thread count, and results are reduced in index order, so every estimate
is a function of the configuration alone.
"""
from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .constants import D_W
from .estimators import bootstrap_stderr, fit_scaling, loglog_fit
from .lattice import RandomSource
from .metrics import ball_profile, pair_metrics
from .spatial import delta_c_surrogate, delta_distance, from_spanning_tree
from .tree import TruncationError
from .walk import displacement_profile, exit_time_from_ball, heat_kernel_iterate, range_rows, \
    walk_range_profile
from .wilson import count_spanning_trees, lerw_lengths, sample_ust

__all__ = [
    "Outcome",
    "TruncationDominated",
    "build_id",
    "replicate",
    "dyadic",
    "run_lerw_exponent",
    "run_volume",
    "run_walk_dw",
    "run_heat_ds",
    "run_metric_compare",
    "run_gh_distance",
    "run_count_st",
    "run_range",
]

LERW_CHUNK = 100


class TruncationDominated(RuntimeError):
    def __init__(self, message, statistic):
        super().__init__(message)
        self.statistic = statistic


@dataclass
class Outcome:
    estimate: object
    stderr: float | None = None
    ci95: list | None = None
    n_samples: int = 0
    header: tuple = ()
    rows: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)


def build_id() -> str:
    """Version plus a digest of the package sources."""
    h = hashlib.sha1()
    for p in sorted(Path(__file__).parent.glob("*.py")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return f"ustlab {__version__} src-{h.hexdigest()[:12]}"


def replicate(fn, count: int, seed: int, threads: int = 1) -> list:
    """``[fn(i, RandomSource(seed, i).generator) for i in range(count)]``, possibly threaded."""
    def job(i):
        return fn(i, RandomSource(seed, i).generator)

    if threads <= 1 or count <= 1:
        return [job(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(job, range(count)))


def dyadic(lo: float, hi: float) -> list:
    """Powers of two between ``lo`` and ``hi`` inclusive."""
    out = []
    k = math.ceil(math.log2(lo))
    while 2 ** k <= hi:
        out.append(2 ** k)
        k += 1
    return out


def _scales(rmax, rmin=16, count=3):
    top = int(rmax)
    lo = min(rmin, max(1, top >> (count - 1)))
    scales = dyadic(lo, top)
    if len(scales) < 3:
        raise ValueError(f"need at least 3 dyadic scales up to {rmax}")
    return scales


def _fit_outcome(scales, samples, name, header, rows, rng_seed, extra=None):
    fit, means, errs, split = fit_scaling(scales, samples, rng=rng_seed)
    extra = dict(extra or {})
    extra.update(fit=fit.as_dict(), split_discrepancy=split, scales=list(map(float, scales)),
                 means=means.tolist(), stderrs=errs.tolist())
    return fit, Outcome(fit.slope, fit.stderr_slope, list(fit.ci95),
                        int(sum(len(s) for s in samples)), header, rows, extra)


def _check_truncation(name, counts, totals):
    for c, n in zip(counts, totals):
        if n and c * 2 > n:
            raise TruncationDominated(f"{c} of {n} replicas of {name} were window-clipped", name)


def run_lerw_exponent(rmax=256, samples=2000, margin=4.0, seed=0, threads=1, rmin=16):
    """Mean ``|L_r|`` over dyadic ``r`` up to ``rmax``; slope estimates kappa."""
    radii = _scales(rmax, rmin)
    chunks = [(k, c) for k in range(len(radii)) for c in range(math.ceil(samples / LERW_CHUNK))]

    def job(i, rng):
        k, c = chunks[i]
        size = min(LERW_CHUNK, samples - c * LERW_CHUNK)
        return lerw_lengths(radii[k], size, margin, rng)

    parts = replicate(job, len(chunks), seed, threads)
    data = [np.concatenate([p for (k, _), p in zip(chunks, parts) if k == j])
            for j in range(len(radii))]
    _, out = _fit_outcome(radii, data, "lerw", (), [], seed)
    out.header = ("r", "mean_length", "stderr", "n")
    out.rows = [(r, m, e, len(d)) for r, m, e, d in
                zip(radii, out.extra["means"], out.extra["stderrs"], data)]
    return out


def run_volume(side=512, rmax=512, samples=200, margin=2.0, seed=0, threads=1, rmin=16):
    """Mean ``|B_U(0, r)|`` over sampled trees; slope estimates d_f."""
    radii = _scales(rmax, rmin)

    def job(i, rng):
        t = sample_ust(side, margin, rng, seed=seed)
        vols, trunc = ball_profile(t, t.root, radii[-1])
        return [(float(vols[r]), trunc is not None and r >= trunc) for r in radii]

    res = replicate(job, samples, seed, threads)
    rows, data, clipped = [], [], []
    for k, r in enumerate(radii):
        vals = [v for rep in res for v, tr in [rep[k]] if not tr]
        clipped.append(sum(rep[k][1] for rep in res))
        data.append(np.array(vals))
    for rep in res:
        for k, r in enumerate(radii):
            rows.append(("ball_volume", 0, 0, r, int(rep[k][0]), int(rep[k][1])))
    _check_truncation("ball_volume", clipped, [samples] * len(radii))
    _, out = _fit_outcome(radii, data, "volume", ("stat", "center_x", "center_y", "radius",
                                                  "value", "truncated"), rows, seed,
                          {"clipped": clipped})
    return out


def run_walk_dw(side=128, rmax=128, samples=500, margin=2.0, seed=0, threads=1, rmin=16,
                tmax=2 ** 16, walks=4):
    """Mean exit time of ``B_U(0, R)`` per dyadic ``R``; slope estimates d_w.

    Each tree contributes the mean of ``walks`` exit-time walks per radius and
    one displacement walk observed at dyadic times up to ``tmax``.  Trees are
    the replicas for error bars.
    """
    radii = _scales(rmax, rmin)
    times = dyadic(2 ** 6, tmax)

    def job(i, rng):
        t = sample_ust(side, margin, rng, seed=seed)
        ex = []
        for R in radii:
            try:
                ex.append(float(exit_time_from_ball(t, R, rng, walks).mean()))
            except TruncationError:
                ex.append(math.nan)
        try:
            disp = displacement_profile(t, times, rng).astype(float)
        except TruncationError:
            disp = np.full(len(times), math.nan)
        return ex, disp

    res = replicate(job, samples, seed, threads)
    ex = np.array([r[0] for r in res])
    disp = np.array([r[1] for r in res])
    clipped = np.isnan(ex).sum(axis=0).tolist()
    _check_truncation("exit_time", clipped, [samples] * len(radii))
    exit_data = [col[~np.isnan(col)] for col in ex.T]
    ok = ~np.isnan(disp).any(axis=1)
    dmeans = disp[ok].mean(axis=0)
    derrs = np.array([bootstrap_stderr(c, rng=(seed, 99, k)) for k, c in enumerate(disp[ok].T)])
    dfit = loglog_fit(times, np.maximum(dmeans, 1e-300), derrs)
    rows = [("exit_time", R, m, e, len(d)) for R, m, e, d in
            zip(radii, *_mean_err(exit_data, seed), exit_data)]
    rows += [("displacement", s, m, e, int(ok.sum())) for s, m, e in zip(times, dmeans, derrs)]
    _, out = _fit_outcome(radii, exit_data, "walk", ("stat", "scale", "mean", "stderr", "n"),
                          rows, seed, {"clipped": clipped, "walks_per_tree": walks,
                                       "displacement_fit": dfit.as_dict(),
                                       "displacement_slope": dfit.slope,
                                       "displacement_dw": 1.0 / dfit.slope})
    return out


def _mean_err(data, seed):
    means = [float(np.mean(d)) for d in data]
    errs = [bootstrap_stderr(d, rng=(seed, k)) for k, d in enumerate(data)]
    return means, errs


def heat_return_series(t, tmax, laziness=0.5, tol=1e-9):
    """``p_t(0,0)`` for one tree, growing the domain until the leak is below ``tol``."""
    R = max(8, int(8 * tmax ** (1 / D_W)))
    while True:
        radius = R if R < t.n else None
        try:
            return heat_kernel_iterate(t, t.root, tmax, laziness, radius=radius, tol=tol).p_return
        except TruncationError:
            if radius is None:
                raise
            R *= 2


def run_heat_ds(side=256, steps=2 ** 14, samples=50, laziness=0.5, margin=2.0, seed=0,
                threads=1, tmin=2 ** 8):
    """Tree-averaged lazy return probability; ``-2`` times its slope estimates d_s.

    The pointwise ``-2 log p_t / log t`` is reported as ``pointwise_ratio``;
    it carries the constant prefactor and converges much more slowly.
    """
    times = dyadic(tmin, steps)
    if len(times) < 3:
        raise ValueError("need at least 3 dyadic times")

    def job(i, rng):
        t = sample_ust(side, margin, rng, seed=seed)
        try:
            return heat_return_series(t, times[-1], laziness)
        except TruncationError:
            return None

    res = replicate(job, samples, seed, threads)
    good = [r for r in res if r is not None]
    _check_truncation("heat_kernel", [samples - len(good)], [samples])
    P = np.array(good)
    data = [P[:, s] for s in times]
    fit, out = _fit_outcome(times, data, "heat", (), [], seed)
    mean_p = P.mean(axis=0)
    t_all = np.arange(1, times[-1] + 1)
    out.header = ("t", "p_return")
    out.rows = [(0, 1.0)] + [(int(s), float(mean_p[s])) for s in t_all]
    ratio = [-2 * math.log(mean_p[s]) / math.log(s) for s in times]
    out.estimate = -2 * fit.slope
    out.stderr = 2 * fit.stderr_slope
    out.ci95 = sorted([-2 * c for c in fit.ci95])
    out.extra.update(pointwise_ratio=dict(zip(map(int, times), ratio)), trees=len(good),
                     clipped=samples - len(good))
    return out


def run_metric_compare(side=128, samples=50, pairs=200, margin=2.0, seed=0, threads=1):
    """Scaling of ``d_U`` against ``d^S`` over vertex pairs; estimates kappa.

    First points are uniform in the window's inner half; offsets have dyadic
    lengths up to ``side / 4`` and uniform direction.  The estimate is the
    slope of mean ``log d_U`` against mean ``log d^S`` across offset scales.
    The pooled per-pair least-squares slope is reported as ``pooled_slope``;
    at fixed offset, pairs with a long excursion are long in both metrics,
    which tilts the pooled slope upward.  Pairs whose path passes through the
    wired boundary node are dropped and counted.
    """
    scales = np.array(dyadic(2, max(8, side // 4)), dtype=float)

    def job(i, rng):
        t = sample_ust(side, margin, rng, seed=seed)
        h = side // 2
        x = rng.integers(-h, h + 1, size=(pairs, 2))
        k = rng.integers(0, len(scales), pairs)
        L = scales[k]
        th = rng.uniform(0, 2 * np.pi, pairs)
        y = x + np.rint(np.c_[L * np.cos(th), L * np.sin(th)]).astype(np.int64)
        keep = (np.abs(y) < side).all(axis=1) & (x != y).any(axis=1)
        xs = np.array([t.node(tuple(p)) for p in x[keep]])
        ys = np.array([t.node(tuple(p)) for p in y[keep]])
        du, ds2 = pair_metrics(t, xs, ys)
        ok = ds2 > 0
        return du[ok].astype(float), np.sqrt(ds2[ok].astype(float)), k[keep][ok], int((~ok).sum())

    res = replicate(job, samples, seed, threads)

    def binned(parts):
        du = np.concatenate([r[0] for r in parts])
        ds = np.concatenate([r[1] for r in parts])
        k = np.concatenate([r[2] for r in parts])
        present = [j for j in range(len(scales)) if np.any(k == j)]
        gu = np.array([np.exp(np.log(du[k == j]).mean()) for j in present])
        gs = np.array([np.exp(np.log(ds[k == j]).mean()) for j in present])
        return loglog_fit(gs, gu, guard_smallest=False), du, ds, gu, gs

    fit, du, ds, gu, gs = binned(res)
    pooled = loglog_fit(ds, du, guard_smallest=False)
    boot = np.random.default_rng((seed, 7))
    slopes = [binned([res[j] for j in boot.integers(0, len(res), len(res))])[0].slope
              for _ in range(1000)]
    se = float(np.std(slopes, ddof=1))
    rows = [(float(a), int(b)) for a, b in zip(ds, du)]
    return Outcome(fit.slope, se, [fit.slope - 1.96 * se, fit.slope + 1.96 * se], len(du),
                   ("d_schramm", "d_intrinsic"), rows,
                   {"fit": fit.as_dict(), "pooled_slope": pooled.slope, "trees": samples,
                    "scales": scales.tolist(), "geo_mean_intrinsic": gu.tolist(),
                    "geo_mean_schramm": gs.tolist(),
                    "dropped_through_boundary": int(sum(r[3] for r in res))})


def _mst_sample(t, points):
    """Root plus the ``points - 1`` vertices nearest to it in breadth-first order."""
    from .metrics import bfs_distances

    nodes, _, _ = bfs_distances(t, t.root, t.n, stop_at_edge=True)
    nodes = nodes[t.has_coord[nodes]]
    return nodes[:points]


def run_gh_distance(side=32, samples=10, points=8, margin=2.0, seed=0, threads=1, trees=None,
                    budget=4000):
    """``Delta`` between rescaled neighbourhoods of independent trees.

    With ``trees = (T, T')`` the two given measured trees are compared instead.
    """
    if trees is not None:
        T, U = trees
        d = delta_distance(T, U, budget=budget, seed=seed)
        c = delta_c_surrogate(T, U, budget, seed=seed)
        return Outcome(d.value, d.error, [d.value - d.error, d.value + d.error], 1,
                       ("r", "integrand"), list(zip(d.grid.tolist(), d.integrand.tolist())),
                       {"delta_error": d.error, "heuristic": d.heuristic,
                        "delta_c_upper": c.upper, "delta_c_lower": c.lower,
                        "delta_c_exhaustive": c.exhaustive,
                        "witness": [list(p) for p in c.witness.pairs]})
    delta = 1.0 / side

    def job(i, rng):
        a = sample_ust(side, margin, rng, seed=seed)
        b = sample_ust(side, margin, rng, seed=seed)
        A = from_spanning_tree(a, delta, _mst_sample(a, points))
        B = from_spanning_tree(b, delta, _mst_sample(b, points))
        d = delta_distance(A, B, budget=budget, seed=seed)
        c = delta_c_surrogate(A, B, budget, seed=seed)
        return d.value, d.error, c.upper, c.lower, d.heuristic

    res = replicate(job, samples, seed, threads)
    vals = np.array([r[0] for r in res])
    se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    rows = [(i,) + tuple(r[:4]) + (int(r[4]),) for i, r in enumerate(res)]
    return Outcome(float(vals.mean()), se, [vals.mean() - 1.96 * se, vals.mean() + 1.96 * se],
                   samples, ("replica", "delta", "delta_error", "delta_c_upper", "delta_c_lower",
                             "heuristic"), rows, {"delta_scale": delta, "points": points})


def run_count_st(rows=3, cols=3):
    n = count_spanning_trees((rows, cols))
    return Outcome(n, 0.0, [n, n], 0, ("rows", "cols", "spanning_trees"), [(rows, cols, n)])


def run_range(side=64, steps=(5000, 50000), margin=2.0, seed=0, tree=None):
    """Edge crossing counts of one walk from the origin at each requested step count."""
    t = tree if tree is not None else sample_ust(side, margin, RandomSource(seed, 0).generator,
                                                 seed=seed)
    rng = RandomSource(seed, 1).generator
    prof = walk_range_profile(t, steps, rng)
    rows = range_rows(t, prof)
    distinct = int(np.count_nonzero(prof[-1][1]))
    return Outcome(distinct, None, None, 1, ("x", "y", "px", "py", "crossings", "snapshot_steps"),
                   rows, {"distinct_edges": {int(s): int(np.count_nonzero(c)) for s, c in prof}})
