"""
From scattered records to a gridded map
=======================================

Synthetic longitude/latitude readings are fitted with a thin-plate spline
and predicted on a 5 degree grid.
"""

import numpy as np

from sbspline import io
from sbspline.harness import ingest_csv_and_grid_predict, make_ozone_like, ozone_like_field

raw, _ = make_ozone_like(50_000, seed=8)
io.write_table("ozone_like.csv", raw)
print("records:", raw.n, "lon range:", raw.X[:, 0].min().round(1), raw.X[:, 0].max().round(1))

res = ingest_csv_and_grid_predict("ozone_like.csv", 5.0, "ozone_grid.csv")
print(f"kernel={res.model.spec.family} q={res.q} lambda={res.lam:.3g} grid rows={len(res.grid)}")

truth = ozone_like_field(res.grid[:, 0], res.grid[:, 1])
print("grid RMSE against the true field:", np.sqrt(np.mean((res.yhat - truth) ** 2)).round(3))

# A coarse text rendering of the predicted field (rows: latitude, north at top).
lon = np.unique(res.grid[:, 0])
lat = np.unique(res.grid[:, 1])
field = res.yhat.reshape(len(lon), len(lat)).T[::-1]
shades = " .:-=+*#%@"
lo, hi = field.min(), field.max()
for row in field[::3]:
    print("".join(shades[int((v - lo) / (hi - lo) * (len(shades) - 1))] for v in row[::2]))
