"""
Intrinsic and Schramm distances, balls and volumes
==================================================

Distances along a sampled tree against the Euclidean diameter of the
connecting path, and the growth of intrinsic balls around the origin.
"""
import numpy as np

from ustlab import D_F, RandomSource, sample_ust
from ustlab.estimators import loglog_fit
from ustlab.metrics import (ball_profile, covering_number, intrinsic_distance, schramm_distance,
                            tree_path)

t = sample_ust(64, 2.0, RandomSource(5).generator, seed=5)
x, y = t.node((0, 0)), t.node((20, 9))
print("path length:", tree_path(t, x, y).length)
print("d_U =", intrinsic_distance(t, x, y), " d^S =", round(schramm_distance(t, x, y), 3),
      " |x - y| =", round(float(np.hypot(20, 9)), 3))

# ball volumes around the origin, averaged over a few trees
radii = np.array([4, 8, 16, 32])
vols = []
for k in range(8):
    s = sample_ust(64, 2.0, RandomSource(5, k).generator)
    v, _ = ball_profile(s, s.root, radii[-1])
    vols.append(v[radii])
fit = loglog_fit(radii, np.mean(vols, axis=0), guard_smallest=False)
print(f"volume slope {fit.slope:.3f} (large-r target {D_F}; small r carries lattice effects)")

# how many radius-s balls cover the radius-16 ball
for s in (2, 4, 8, 16):
    print(f"cover of B(0,16) by radius-{s} balls: {covering_number(t, 16, s)}")
