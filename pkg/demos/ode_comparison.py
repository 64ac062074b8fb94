"""
Oscillator comparison
=====================

A profile v with v'' + v = Z stays within C (eps + eta) of the sinusoid
with matching data, where eps is the L2 norm of Z and eta the data
mismatch. Profiles built by variation of parameters give an exact oracle.
"""

import numpy as np

from pinchlab.odecmp import Profile1D, compare_boundary, compare_cauchy, duhamel_solve, random_forcing

# a closed-form perturbation: Z = -0.08 sin 3t
prof = Profile1D.sample(lambda t: np.cos(t) + 0.01 * np.sin(3 * t), np.pi, 0.001)
c = compare_cauchy(prof, 1.0, 0.0)
print(f"eps = {c.eps:.4f} (0.08 sqrt(pi/2) = {0.08 * np.sqrt(np.pi / 2):.4f})")
print(f"eta = {c.eta:.4f}, sup|v - u| = {c.sup_value:.4f}, bound = {c.bound:.4f}")

# random smooth forcings: the bound holds on every case
rng = np.random.default_rng(2024)
ok = 0
for _ in range(50):
    Z = random_forcing(rng)
    a, b = rng.uniform(-1, 1, 2)
    t = np.arange(0, rng.uniform(0.5, np.pi), 0.001)
    v = duhamel_solve(t, Z(t), a, b)
    ok += compare_cauchy(Profile1D(t, v), a, b).bound_ok
print(f"Cauchy bound holds on {ok}/50 random forcings")

# boundary data: the bound carries a 1/sin(l) factor
l = np.pi / 2
prof = Profile1D.sample(lambda t: np.cos(t) + 0.01 * np.sin(3 * t), l, l / 2000)
c = compare_boundary(prof, 1.0, prof.v[-1])
print(f"boundary data on [0, pi/2]: sup|v - u| = {c.sup_value:.4f}, bound = {c.bound:.4f}")
