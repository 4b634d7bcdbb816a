"""
Fitting an ellipsoid through e1, e2 and one more point
======================================================

For a third point v in the plane, a centered ellipse through e1, e2 and v
exists exactly when v lies in the region R; the sandwich condition gives
the smaller region R'. The map below compares both with the solver verdict
(``#`` fitted and in R', ``+`` fitted only, ``.`` no fit, ``!`` disagreement
with R).
"""

import numpy as np

from mtfa import ellipsoid

# %%
res = ellipsoid.fit(ellipsoid.PointSet.from_points([1, 0], [0, 1], [1, 1]))
print("through (1, 1):", res.status)
print(np.round(res.M, 6))

res = ellipsoid.fit(ellipsoid.PointSet.from_points([1, 0], [0, 1], [3, 0]))
print("through (3, 0):", res.status, "separating weights", np.round(res.d, 4))

# %%
rows = {}
for x, y, inR, inRp, status in ellipsoid.region_grid(-3, 3, -3, 3, 0.25):
    fitted = status == ellipsoid.FITTED
    if fitted != inR and ellipsoid.distance_to_region_boundary([x, y]) > 1e-2:
        ch = "!"
    elif fitted:
        ch = "#" if inRp else "+"
    else:
        ch = "."
    rows.setdefault(y, []).append(ch)
for y in sorted(rows, reverse=True):
    print(" ".join(rows[y]))
