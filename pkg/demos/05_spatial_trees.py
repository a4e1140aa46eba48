"""
Measured spatial trees and their distances
==========================================

Prohorov distance between finite measures, the bracketed correspondence
surrogate, and the restriction-weighted distance between two trees.
"""
import math

import numpy as np

from ustlab import RandomSource, sample_ust
from ustlab.spatial import (delta_c_surrogate, delta_distance, format_mst, from_spanning_tree,
                            prohorov, random_tree, restrict)

# two unit atoms at distance 0.3
D = np.array([[0.0, 0.3], [0.3, 0.0]])
print("Prohorov:", prohorov(D, [1, 0], [0, 1]))

# bracket for two small random trees
T, U = random_tree(4, 1), random_tree(4, 2)
res = delta_c_surrogate(T, U)
print(f"surrogate in [{res.lower:.4f}, {res.upper:.4f}], exhaustive={res.exhaustive}")
print("witness pairs:", res.witness.pairs)

# the distance to a restriction is at most e^{-r}
for r in (0.5, 1.0, 2.0):
    d = delta_distance(T, restrict(T, r)).value
    print(f"r={r}: Delta(T, T^(r)) = {d:.4f} <= {math.exp(-r):.4f}")

# rescaled lattice trees, sampled at a few vertices near the origin
pick = [(0, 0), (1, 0), (0, 1), (2, 2)]
a = sample_ust(8, 2.0, RandomSource(3).generator)
b = sample_ust(8, 2.0, RandomSource(4).generator)
A = from_spanning_tree(a, 0.25, [a.node(p) for p in pick])
B = from_spanning_tree(b, 0.25, [b.node(p) for p in pick])
print(format_mst(A))
print("Delta(A, B) =", round(delta_distance(A, B).value, 4))
