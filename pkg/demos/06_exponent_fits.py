"""
Exponent fits and diagnostics
=============================

Weighted log-log fits with confidence intervals, the smallest-scale guard,
bootstrap errors and the even/odd split check.
"""
import numpy as np

from ustlab.estimators import bootstrap_stderr, fit_scaling, loglog_fit

rng = np.random.default_rng(0)
xs = np.array([16, 32, 64, 128, 256])
samples = [x ** 1.25 * rng.lognormal(0, 0.3, 400) for x in xs]
fit, means, errs, split = fit_scaling(xs, samples)
print(f"slope {fit.slope:.4f}, 95% CI {tuple(round(c, 4) for c in fit.ci95)}, split {split:.2f}")
print("bootstrap stderr at x=16:", round(bootstrap_stderr(samples[0]), 3))

# a smallest-scale point far off the line is dropped and logged
means[0] *= 2
f = loglog_fit(xs, means, errs)
print("excluded abscissae:", f.excluded, " slope:", round(f.slope, 4))
