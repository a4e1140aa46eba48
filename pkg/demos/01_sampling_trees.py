"""
Sampling uniform spanning trees
===============================

Wilson's algorithm on a small grid, checked against the matrix-tree count,
then a wired-boundary tree of the plane rooted at the origin.
"""
from collections import Counter

import numpy as np

from ustlab import RandomSource, count_spanning_trees, rect_graph, sample_ust
from ustlab.wilson import wilson_batch
from ustlab.estimators import chi_square_uniform
from ustlab.tree import format_snapshot, parse_snapshot

# the 2x3 grid has 15 spanning trees
g = rect_graph(2, 3)
print("spanning trees of 2x3:", count_spanning_trees(g))

# sample many trees and tabulate them by parent array
parents = wilson_batch(g, 0, 30000, RandomSource(1).generator)
counts = Counter(map(bytes, parents.astype(np.int8)))
stat, p = chi_square_uniform(list(counts.values()))
print(f"distinct trees seen: {len(counts)}, chi-square p = {p:.3f}")

# a tree on the box of half-width 2*32 with wired boundary, rooted at the origin
t = sample_ust(32, 2.0, RandomSource(7).generator, seed=7)
print("vertices:", t.n, "root depth:", t.depth[t.root], "max depth in window:",
      int(t.depth[t.has_coord].max()))

# the ust-v1 snapshot round-trips exactly
text = format_snapshot(t)
print(text.splitlines()[0])
assert format_snapshot(parse_snapshot(text)) == text
