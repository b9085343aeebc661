"""
Space-filling designs and how uniform they are
==============================================

Generate Sobol, Latin hypercube and random point sets and compare their
star discrepancy.
"""

import numpy as np

from sbspline import generate_design, local_discrepancy, star_discrepancy

# A small hand-made example: four of ten points fall in [0, 0.4) x [0, 0.5),
# whose volume is 0.2, so the local discrepancy there is |4/10 - 0.2|.
pts = [[0.1, 0.1], [0.2, 0.4], [0.3, 0.2], [0.35, 0.45], [0.5, 0.1],
       [0.1, 0.6], [0.9, 0.9], [0.4, 0.2], [0.7, 0.3], [0.2, 0.5]]
print("local discrepancy at (0.4, 0.5):", local_discrepancy(pts, [0.4, 0.5]))

# Exact star discrepancy for growing q. Sobol points shrink it fastest.
rng = np.random.default_rng(0)
print(f"{'q':>5} {'sobol':>8} {'lhs':>8} {'random':>8}")
for k in range(4, 9):
    q = 2**k
    sob = star_discrepancy(generate_design("sobol", q, 2))
    lhs = star_discrepancy(generate_design("lhs", q, 2, seed=1))
    ran = star_discrepancy(rng.uniform(size=(q, 2)))
    print(f"{q:5d} {sob:8.4f} {lhs:8.4f} {ran:8.4f}")

# Large sets in higher dimension exceed the exact budget; the approximate
# mode returns a lower bound instead.
big = generate_design("sobol", 4096, 4)
approx = star_discrepancy(big, "approximate", seed=0)
print(f"4096 Sobol points in 4-d: D* >= {float(approx):.5f} (lower bound: {approx.lower_bound})")
