"""
Pinching trends on spheroids
============================

Stretching the sphere along one axis moves lambda_2 away from 2. The
antipodal-frame deficiency, the sphere-map defect and the diameter deficit
should move with it. Each surface is rescaled to K_min = 1 before measuring.
"""

import numpy as np

from pinchlab.report import DiagnoseConfig, sweep

grid = np.round(np.arange(0.80, 1.2501, 0.05), 2)
res = sweep("spheroid", grid, subdivisions=3, cfg=DiagnoseConfig(k_max=2))

print(f"{'ratio':>6} {'lam1-2':>8} {'lam2-2':>8} {'eta*_2':>8} {'gh_2':>8} {'pi-diam':>8}")
for r in res.rows:
    print(
        f"{r['param']:6.2f} {r['lambda1_minus_n']:8.4f} {r['lambda2_minus_n']:8.4f} "
        f"{r['eta_star_2']:8.4f} {r['gh_defect_k2_eta0.1']:8.4f} {r['diameter_deficit']:8.4f}"
    )

# Spearman rank correlations across the family
for name, rho in res.trends.items():
    print(f"{name}: {rho:.3f}")

# the round point of the family is where every deficiency bottoms out
best = min(res.rows, key=lambda r: r["eta_star_2"])
print("smallest eta*_2 at ratio", best["param"])

# lambda_4 stays well above 2 across the family
print("min lambda_4:", min(r["lambda_4"] for r in res.rows))
