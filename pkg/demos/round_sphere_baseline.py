"""
Round-sphere baseline
=====================

On the unit sphere every diagnostic has a closed-form value: the first
eigenvalue is 2 with the coordinate functions as eigenfunctions, antipodal
points sit at distance pi, and cos d_p is an exact combination of the first
three eigenfunctions. Running the diagnostics on an icosphere shows how
far the discretisation alone moves them.
"""

import numpy as np

from pinchlab import compute_spectrum, generate_icosphere
from pinchlab import metric
from pinchlab.pinching import extract_frame, li_yau_check, pk_deficiency, project_cos_distance
from pinchlab.spectral import eikonal_defect

S = generate_icosphere(4)
print(f"{S.n_vertices} vertices, area / 4 pi = {S.area / (4 * np.pi):.4f}")
print(f"K_min = {S.curvature.K_min:.4f}")

# eigenvalues come in clusters of 1, 3, 5 (l(l+1) with multiplicity 2l+1)
sp = compute_spectrum(S, 9)
print("eigenvalues:", np.round(sp.eigenvalues, 4))

# extrema of f_1..f_3 should be three orthogonal antipodal axes
fr = extract_frame(sp, S, 3)
print("pair distances:", np.round(fr.d_pair, 4))
print(f"eta* = {pk_deficiency(fr):.4f}")

# f_1 is cos of the distance to its maximum point
x1 = int(np.argmax(sp.f(1)))
d = metric.single_source(S, x1).distance
print(f"max |cos d_x1 - f_1| = {np.max(np.abs(np.cos(np.clip(d, 0, np.pi)) - sp.f(1))):.4f}")

# cos d_p projects onto span(f_1, f_2, f_3) with unit coefficient vector
r = project_cos_distance(sp, S, 100, 3)
print(f"projection at vertex 100: residual {r.residual_sup:.4f}, |a|^2 - 1 = {r.coeff_norm_defect:.4f}")

# f^2 + |grad f|^2 = 1 on the sphere, where the Li-Yau bound is exactly
# twice |grad f|^2, so the ratio sits at 1/2
print(f"eikonal defect {eikonal_defect(S, sp.f(1)):.4f}")
print("Li-Yau ratios:", [round(li_yau_check(sp, i, S), 4) for i in (1, 2, 3)])

print(f"diameter {metric.diameter(S):.4f}, radius {metric.radius(S):.4f} (pi = {np.pi:.4f})")
