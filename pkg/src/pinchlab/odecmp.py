"""Comparison of perturbed oscillator profiles ``v'' + v = Z`` with sinusoids.

Two kinds of side data are supported: Cauchy data ``(v(0), v'(0))`` and
boundary data ``(v(0), v(l))``. The comparison constant is ``C = 4``: with
Duhamel's formula ``sup|v - u| <= sqrt(l) * eps + 2 * eta`` for Cauchy data on
``l <= pi``, which is below ``4 * (eps + eta)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .errors import NearConjugate

__all__ = [
    "COMPARISON_CONSTANT",
    "SIN_GUARD",
    "Profile1D",
    "Comparison",
    "residual_forcing",
    "compare_cauchy",
    "compare_boundary",
    "duhamel_solve",
    "read_profile_csv",
    "write_profile_csv",
    "random_forcing",
]

COMPARISON_CONSTANT = 4.0
SIN_GUARD = 0.05
MAX_LENGTH = np.pi + 0.2
MIN_SAMPLES = 11


@dataclass(frozen=True)
class Profile1D:
    """Uniformly sampled function ``v(t)`` on ``[0, l]``."""

    t: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("t and v must be 1-D arrays of equal length")
        if len(t) < MIN_SAMPLES:
            raise ValueError(f"need at least {MIN_SAMPLES} samples, got {len(t)}")
        h = np.diff(t)
        if np.any(h <= 0.0) or not np.allclose(h, h[0], rtol=1e-6, atol=0.0):
            raise ValueError("samples must be uniform and increasing")
        if abs(t[0]) > 1e-12 * max(1.0, abs(t[-1])):
            raise ValueError("profile must start at t = 0")
        if t[-1] > MAX_LENGTH:
            raise ValueError(f"profile length {t[-1]:.4g} exceeds pi + 0.2")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)

    @classmethod
    def sample(cls, func, length: float, h: float) -> Profile1D:
        n = int(np.floor(length / h + 1e-9))
        t = np.arange(n + 1) * h
        return cls(t, func(t))

    @property
    def h(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def length(self) -> float:
        return float(self.t[-1])

    def derivative(self) -> np.ndarray:
        """Second-order finite-difference derivative (one-sided at the ends)."""
        return np.gradient(self.v, self.h, edge_order=2)


def residual_forcing(profile: Profile1D, stride: int = 1):
    """Forcing ``Z = v'' + v`` on interior samples and ``eps = (int Z**2)**0.5``.

    ``v''`` is the centred second difference with spacing ``stride * h``; the
    ``stride`` samples at each end are dropped. Returns ``(t_interior, Z, eps)``
    with the integral taken by the trapezoid rule over the interior samples.
    """
    v, s = profile.v, int(stride)
    if len(v) < 2 * s + 2:
        raise ValueError(f"profile too short for stride {s}")
    H = s * profile.h
    z = (v[2 * s :] - 2.0 * v[s:-s] + v[: -2 * s]) / H**2 + v[s:-s]
    t = profile.t[s:-s]
    return t, z, float(np.sqrt(trapezoid(z * z, t)))


@dataclass(frozen=True)
class Comparison:
    """Outcome of comparing a profile with a pure sinusoid.

    ``bound_ok`` says the comparison estimate ``sup <= bound`` holds; it does not
    say the profiles are close (that requires ``eps + eta`` to be small too).
    """

    sup_value: float
    sup_derivative: float
    eps: float
    eta: float
    bound: float
    bound_ok: bool

    def as_dict(self) -> dict:
        return {k: (bool(v) if k == "bound_ok" else float(v)) for k, v in self.__dict__.items()}


def _start_slope(profile: Profile1D) -> float:
    v, h = profile.v, profile.h
    return (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)


def _sups(profile: Profile1D, u):
    """``sup|v - u|`` and ``sup|(v - u)'|`` over the samples.

    The derivative of the difference uses the same second-order stencil as
    :meth:`Profile1D.derivative`, so the stencil error on the sinusoid cancels
    and both sups are exactly linear in ``v - u``.
    """
    w = profile.v - u
    dw = np.gradient(w, profile.h, edge_order=2)
    return float(np.max(np.abs(w))), float(np.max(np.abs(dw)))


def compare_cauchy(profile: Profile1D, a: float, b: float, C: float = COMPARISON_CONSTANT) -> Comparison:
    """Compare with ``u(t) = a cos t + b sin t`` (``u(0) = a``, ``u'(0) = b``)."""
    t = profile.t
    _, _, eps = residual_forcing(profile)
    eta = max(abs(profile.v[0] - a), abs(_start_slope(profile) - b))
    u = a * np.cos(t) + b * np.sin(t)
    s0, s1 = _sups(profile, u)
    bound = C * (eps + eta)
    return Comparison(s0, s1, eps, float(eta), bound, bool(max(s0, s1) <= bound))


def compare_boundary(profile: Profile1D, a: float, b: float, C: float = COMPARISON_CONSTANT) -> Comparison:
    """Compare with the sinusoid ``u`` having ``u(0) = a`` and ``u(l) = b``.

    Raises
    ------
    NearConjugate
        If ``l >= pi`` or ``sin(l) < SIN_GUARD``.
    """
    t, l = profile.t, profile.length
    sl = np.sin(l)
    if l >= np.pi or sl < SIN_GUARD:
        raise NearConjugate(f"sin(l) = {sl:.4g} below guard {SIN_GUARD} (l = {l:.6g})")
    c = (b - a * np.cos(l)) / sl
    u = a * np.cos(t) + c * np.sin(t)
    _, _, eps = residual_forcing(profile)
    eta = max(abs(profile.v[0] - a), abs(profile.v[-1] - b))
    s0, s1 = _sups(profile, u)
    bound = C / sl * (eps + eta)
    return Comparison(s0, s1, eps, float(eta), float(bound), bool(max(s0, s1) <= bound))


def duhamel_solve(t, Z, a: float, b: float) -> np.ndarray:
    """Solve ``v'' + v = Z``, ``v(0) = a``, ``v'(0) = b`` by variation of parameters.

    ``v(t) = a cos t + b sin t + sin t * int_0^t cos(s) Z(s) ds
    - cos t * int_0^t sin(s) Z(s) ds``, integrals by the cumulative trapezoid
    rule on the sample grid ``t``.
    """
    t = np.asarray(t, dtype=float)
    Z = np.asarray(Z, dtype=float)
    ic = cumulative_trapezoid(np.cos(t) * Z, t, initial=0.0)
    is_ = cumulative_trapezoid(np.sin(t) * Z, t, initial=0.0)
    return a * np.cos(t) + b * np.sin(t) + np.sin(t) * ic - np.cos(t) * is_


def random_forcing(rng: np.random.Generator, max_modes: int = 5, amplitude: float = 0.1):
    """Smooth random forcing: a truncated Fourier series with few modes.

    Returns a vectorised callable ``Z(t)``.
    """
    m = int(rng.integers(1, max_modes + 1))
    freq = rng.integers(0, max_modes + 1, size=m).astype(float)
    ca = rng.uniform(-amplitude, amplitude, size=m)
    cb = rng.uniform(-amplitude, amplitude, size=m)

    def Z(t):
        t = np.asarray(t, dtype=float)[..., None]
        return np.sum(ca * np.cos(freq * t) + cb * np.sin(freq * t), axis=-1)

    return Z


def read_profile_csv(path) -> Profile1D:
    """Two-column CSV ``t, v``; a non-numeric first row is taken as a header."""
    ts, vs = [], []
    with open(path, newline="") as fh:
        for n, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise ValueError(f"line {n}: expected two columns")
            try:
                t, v = float(row[0]), float(row[1])
            except ValueError:
                if n == 1:
                    continue
                raise ValueError(f"line {n}: non-numeric value") from None
            ts.append(t)
            vs.append(v)
    return Profile1D(np.array(ts), np.array(vs))


def write_profile_csv(profile: Profile1D, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "v"])
        for t, v in zip(profile.t, profile.v):
            w.writerow([repr(float(t)), repr(float(v))])
