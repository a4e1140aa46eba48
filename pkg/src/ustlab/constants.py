"""Scaling exponents of the two-dimensional uniform spanning tree."""

KAPPA = 5 / 4  # LERW growth exponent
D_F = 2 / KAPPA  # intrinsic volume growth, 8/5
D_W = 1 + D_F  # walk dimension, 13/5
D_S = 2 * D_F / D_W  # spectral dimension, 16/13
