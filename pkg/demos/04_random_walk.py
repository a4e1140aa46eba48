"""
Random walk on the tree
=======================

Exit times from intrinsic balls, the exact return probability of the lazy
walk, and effective resistance along the tree.
"""
import numpy as np

from ustlab import RandomSource, sample_ust
from ustlab.walk import effective_resistance, exit_time_from_ball, heat_kernel_iterate

t = sample_ust(64, 2.0, RandomSource(2).generator, seed=2)
rng = RandomSource(2, 1).generator
for R in (4, 8, 16):
    ex = exit_time_from_ball(t, R, rng, 200)
    print(f"R={R:3d}: mean exit time {ex.mean():9.1f}")

# return probabilities by iterating the transition kernel; mass is conserved exactly
s = heat_kernel_iterate(t, t.root, 1024, laziness=0.5)
for k in (16, 64, 256, 1024):
    print(f"p_{k}(0,0) = {s.p_return[k]:.5f}")
slope = np.polyfit(np.log([64, 256, 1024]), np.log(s.p_return[[64, 256, 1024]]), 1)[0]
print(f"-2 * slope = {-2 * slope:.3f} on this single tree")

# on a tree every edge of the path has unit resistance
x = t.node((10, -4))
print("R_eff(0, x) =", effective_resistance(t, t.root, x), " depth of x =", t.depth[x])
