"""Curves as observations.

Each observation is a curve sampled on a shared grid. Distances between
curves are L2 distances computed with the trapezoidal rule, so unevenly
spaced grids are handled correctly.
"""
import numpy as np

from fasthsic import Sample, functional_sq_norm, hsic_test

rng = np.random.default_rng(1)

# quadrature on an uneven grid: the integral of sin^2 over [0, pi] is pi / 2
t = np.sort(np.r_[0, np.pi, rng.uniform(0, np.pi, 300)])
print(f"trapezoid integral of sin^2 on an uneven grid: {functional_sq_norm(np.sin(t), t):.5f}"
      f" (exact {np.pi / 2:.5f})")

# random curves built from a few cosine modes; y reuses the cubed
# scores of the first three modes of x
n, k = 60, 101
grid = np.linspace(0, 1, k)
modes = np.sqrt(2) * np.cos(np.pi * np.arange(1, 6)[:, None] * grid)
scores_x = rng.normal(size=(n, 5))
scores_y = rng.normal(size=(n, 5))
scores_y[:, :3] = scores_x[:, :3] ** 3
x = Sample.functional(scores_x @ modes, grid)
y = Sample.functional(scores_y @ modes, grid)
y_null = Sample.functional(rng.normal(size=(n, 5)) @ modes, grid)

for label, other in [("curves sharing three cubed modes", y), ("independent curves", y_null)]:
    res = hsic_test(x, other)
    print(f"{label:>34}: Tn = {res.statistic:8.4f}, p = {res.p_value:.4g}")
