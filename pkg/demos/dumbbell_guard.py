"""
A surface outside the curvature hypothesis
==========================================

Two round lobes joined by a thin neck have strongly negative curvature at
the neck, so no rescaling reaches K >= 1. The diagnostics refuse such a
surface unless forced; forced, they show a first eigenvalue far below 2
and frames and sphere maps far from round.
"""

from pinchlab import HypothesisViolation, generate_dumbbell
from pinchlab.report import DiagnoseConfig, diagnose

D = generate_dumbbell(0.3, 3)
print(f"K_min = {D.curvature.K_min:.2f}")

try:
    diagnose(D)
except HypothesisViolation as exc:
    print("refused:", exc)

rep = diagnose(D, DiagnoseConfig(k_max=2, force=True))
print("lambda_1 =", round(rep["spectrum"]["eigenvalues"][1], 4))
print("diameter =", round(rep["metric"]["diameter"], 4))
for block in rep["pk"]:
    print(f"k={block['k']}: eta* = {block['eta_star']:.3f}")
for e in rep["equator"]:
    if e["k"] == 2:
        print(f"k=2 eta={e['eta']}: gh_defect = {e['gh_defect']}")
print("fields left null:", len(rep["null_reasons"]))
