"""
Choosing basis locations
========================

Three ways to pick q of n rows: uniform sampling, response-stratified
sampling, and nearest neighbours of a Sobol design.
"""

import numpy as np

from sbspline import (QRule, RawTable, select_adaptive, select_space_filling, select_uniform,
                      star_discrepancy, to_unit_cube)

# Skewed raw predictors. The rank transform spreads each column evenly on (0, 1).
rng = np.random.default_rng(1)
X = np.column_stack([rng.exponential(size=20000), rng.standard_t(3, size=20000)])
y = np.log1p(X[:, 0]) + np.tanh(X[:, 1]) + 0.2 * rng.normal(size=20000)
data = to_unit_cube(RawTable(X, y))
print("column means after transform:", data.X.mean(axis=0).round(4))

# How many basis functions: the 5 n^(2/9) rule.
q = QRule.parse("5*n^(2/9)")(data.n)
print("n =", data.n, "-> q =", q)

sel = {
    "uniform": select_uniform(data, q, seed=3),
    "adaptive": select_adaptive(data, q, slices=5, seed=3),
    "space-filling": select_space_filling(data, q),
}
for name, s in sel.items():
    print(f"{name:14s} q_eff={s.q_eff:3d}  D*={float(star_discrepancy(data.X[s.indices])):.4f}")

# The design itself, for reference.
pts = sel["space-filling"].info["design_points"][:q]
print(f"{'sobol design':14s}            D*={float(star_discrepancy(pts)):.4f}")
