"""Diagnostics relating low eigenfunctions to near-antipodal point frames.

Covers frame extraction from eigenfunction extrema and its ``P_k`` deficiency,
projection of ``cos d_p`` on the first eigenfunctions, the Li-Yau gradient
bound, averages of ``u(d_p)`` against the round sphere, and how far
eigenfunctions restricted to geodesics are from solving ``v'' + v = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import metric
from .errors import NoAntipode, PathTooShort
from .geometry import TriSurface
from .odecmp import Profile1D, residual_forcing
from .spectral import DIM, Spectrum, face_mean, gradient, mean_over, vertex_average

__all__ = [
    "AntipodalFrame",
    "ProjectionReport",
    "extract_frame",
    "pk_deficiency",
    "project_cos_distance",
    "li_yau_ratio",
    "li_yau_check",
    "coarea_comparison",
    "geodesic_profile",
    "geodesic_residual",
    "residual_distribution",
    "SPHERE_MEANS",
]

# means over the round 2-sphere of u(d_pole)
SPHERE_MEANS = {"cos": 0.0, "cos2": 1.0 / 3.0, "sin2": 2.0 / 3.0}
_U = {"cos": np.cos, "cos2": lambda d: np.cos(d) ** 2, "sin2": lambda d: np.sin(d) ** 2}
ANTIPODE_SLACK = 0.3
RHS_FLOOR = 1e-12
# second differences along graph paths span three mean edge lengths (6 samples
# at the default step); narrower stencils resolve the kinks of the piecewise
# linear profile instead of its curvature
PATH_STENCIL = 6


def _clamp(d):
    return np.clip(d, 0.0, np.pi)


@dataclass(frozen=True)
class AntipodalFrame:
    """``k`` pairs ``(x_i, y_i)`` with their mutual distances.

    ``d_xx[i, j] = d(x_i, x_j)``, ``d_xy[i, j] = d(x_i, y_j)``,
    ``d_yy[i, j] = d(y_i, y_j)``; ``d_pair = diag(d_xy)``.
    """

    k: int
    x: np.ndarray
    y: np.ndarray
    d_xx: np.ndarray
    d_xy: np.ndarray
    d_yy: np.ndarray

    @property
    def d_pair(self) -> np.ndarray:
        return np.diag(self.d_xy).copy()

    def as_dict(self) -> dict:
        return {
            "x": self.x.tolist(),
            "y": self.y.tolist(),
            "d_pair": self.d_pair.tolist(),
            "d_xx": self.d_xx.tolist(),
            "d_xy": self.d_xy.tolist(),
            "d_yy": self.d_yy.tolist(),
        }


def frame_from_points(surface: TriSurface, x, y, method=metric.WITH_CHORDS) -> AntipodalFrame:
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    k = len(x)
    D = metric.distance_matrix(surface, method, sources=np.r_[x, y])
    return AntipodalFrame(k, x, y, D[:k][:, x], D[:k][:, y], D[k:][:, y])


def extract_frame(spectrum: Spectrum, surface: TriSurface, k: int, method=metric.WITH_CHORDS) -> AntipodalFrame:
    """``x_i = argmax f_i``, ``y_i = argmin f_i`` for ``i = 1..k`` (lowest index on ties)."""
    if not 1 <= k <= DIM + 1:
        raise ValueError(f"k must be in 1..{DIM + 1}")
    if k > len(spectrum) - 1:
        raise ValueError("not enough eigenpairs for the requested k")
    F = spectrum.eigenfunctions[:, 1 : k + 1]
    return frame_from_points(surface, F.argmax(axis=0), F.argmin(axis=0), method)


def pk_deficiency(frame: AntipodalFrame) -> float:
    """Smallest ``eta*`` such that the frame satisfies ``P_k(eta)`` for all ``eta > eta*``.

    ``eta* = max(max_i |pi - d(x_i, y_i)|, max_{i != j} |d(p, q) - pi/2|)``
    where ``p`` ranges over ``{x_i, y_i}`` and ``q`` over ``{x_j, y_j}``.
    Taking both ends of every pair makes the value independent of the sign
    of each eigenfunction; the absolute value in the first term only matters
    when ``d(x_i, y_i) > pi``, which the curvature bound excludes.
    """
    eta = float(np.max(np.abs(np.pi - frame.d_pair)))
    if frame.k > 1:
        off = ~np.eye(frame.k, dtype=bool)
        cross = np.stack([frame.d_xx, frame.d_xy, frame.d_xy.T, frame.d_yy])
        eta = max(eta, float(np.max(np.abs(cross[:, off] - np.pi / 2))))
    return eta


@dataclass(frozen=True)
class ProjectionReport:
    p: int
    coefficients: np.ndarray
    residual_sup: float
    residual_l2: float
    coeff_norm_defect: float

    def as_dict(self) -> dict:
        return {
            "p": int(self.p),
            "coefficients": self.coefficients.tolist(),
            "residual_sup": self.residual_sup,
            "residual_l2": self.residual_l2,
            "coeff_norm_defect": self.coeff_norm_defect,
        }


def project_cos_distance(spectrum: Spectrum, surface: TriSurface, p: int, k: int, method=metric.WITH_CHORDS) -> ProjectionReport:
    """Fourier coefficients ``a_i = (n+1) mean(cos d_p f_i)`` and the projection residual.

    Distances are clamped to ``[0, pi]`` before the cosine.
    """
    c = np.cos(_clamp(metric.single_source(surface, p, method=method).distance))
    F = spectrum.eigenfunctions[:, 1 : k + 1]
    w = surface.vertex_area / surface.vertex_area.sum()
    a = (DIM + 1) * (w * c) @ F
    r = c - F @ a
    return ProjectionReport(
        int(p),
        a,
        float(np.max(np.abs(r))),
        float(np.sqrt(w @ (r * r))),
        float(abs(a @ a - 1.0)),
    )


def li_yau_ratio(surface: TriSurface, f, lam: float) -> np.ndarray:
    """Per-vertex ratio of ``|grad f|**2`` to the Li-Yau bound.

    The bound ``2 lam sup f / (sup f - inf f) (sup f - f)(f - inf f)`` is
    evaluated per face at the value of the linear interpolant at its centroid,
    where the face gradient is defined. Both sides are then averaged over each
    vertex star with area weights, and the bound floored at ``1e-12``.
    """
    f = np.asarray(f, dtype=float)
    hi, lo = f.max(), f.min()
    fc = face_mean(surface, f)
    rhs = 2.0 * lam * hi / (hi - lo) * (hi - fc) * (fc - lo)
    g = gradient(surface, f)
    lhs = vertex_average(surface, g.face_sq)
    return lhs / np.maximum(vertex_average(surface, rhs), RHS_FLOOR)


def li_yau_check(spectrum: Spectrum, i: int, surface: TriSurface) -> float:
    """Maximum over vertices of :func:`li_yau_ratio` for eigenpair ``i``."""
    lam = float(spectrum.eigenvalues[i])
    if not lam > 0.0:
        raise ValueError("Li-Yau check needs a positive eigenvalue")
    return float(np.max(li_yau_ratio(surface, spectrum.f(i), lam)))


def coarea_comparison(surface: TriSurface, p: int, u: str = "cos2", method=metric.WITH_CHORDS) -> float:
    """``|mean_M u(d_p) - mean_S2 u(d_pole)|`` for ``u`` in ``cos``, ``cos2``, ``sin2``.

    Raises
    ------
    NoAntipode
        If ``max d_p < pi - 0.3``.
    """
    d = metric.single_source(surface, p, method=method).distance
    if d.max() < np.pi - ANTIPODE_SLACK:
        raise NoAntipode(f"vertex {p}: farthest point at {d.max():.4f} < pi - {ANTIPODE_SLACK}")
    return abs(mean_over(surface, _U[u](_clamp(d))) - SPHERE_MEANS[u])


def geodesic_profile(surface: TriSurface, f, a: int, b: int, h=None, method=metric.WITH_CHORDS):
    """Values of ``f`` along the shortest graph path from ``a`` to ``b``.

    Returns a :class:`Profile1D` sampled at uniform arclength ``h`` (default:
    half the mean edge length) using linear interpolation between path
    vertices.
    """
    path = metric.geodesic_path(surface, a, b, h, method)
    if len(path.samples) < 11:
        raise PathTooShort(f"path {a}->{b} of length {path.length:.4f} shorter than 10 steps")
    return Profile1D(path.samples, path.interpolate(f))


def geodesic_residual(
    spectrum: Spectrum, i, surface: TriSurface, a: int, b: int, h=None, stride: int = PATH_STENCIL, method=metric.WITH_CHORDS
) -> float:
    """``int_0^l |(f o g)'' + f o g|**2 dt`` along the graph geodesic ``g`` from ``a`` to ``b``.

    ``i`` is an eigenpair index or an explicit vertex function. The profile
    is sampled at step ``h``; the second derivative uses centred differences
    spanning ``stride * h`` (default ``PATH_STENCIL``), and samples closer
    than that to either end are dropped.
    """
    f = spectrum.f(i) if np.ndim(i) == 0 else np.asarray(i, dtype=float)
    if a == b:
        raise PathTooShort("a == b")
    prof = geodesic_profile(surface, f, a, b, h, method)
    if len(prof.t) < 2 * stride + 3:
        raise PathTooShort(f"path {a}->{b} too short for a stencil of {stride} steps")
    _, _, eps = residual_forcing(prof, stride)
    return eps**2


def residual_distribution(spectrum: Spectrum, i, surface: TriSurface, m: int = 100, seed: int = 0, method=metric.WITH_CHORDS) -> dict:
    """Median and 90th percentile of :func:`geodesic_residual` over ``m`` random pairs.

    Pairs are drawn uniformly from distinct vertices, skipping pairs whose
    path is too short for the stencil or longer than ``pi + 0.2``.
    """
    if m < 10:
        raise ValueError("m must be at least 10")
    rng = np.random.default_rng(seed)
    n = surface.n_vertices
    vals = []
    tries = 0
    while len(vals) < m:
        tries += 1
        if tries > 50 * m:
            break
        a, b = rng.choice(n, size=2, replace=False)
        try:
            vals.append(geodesic_residual(spectrum, i, surface, int(a), int(b), method=method))
        except ValueError:
            # too short for the stencil, or longer than a profile allows
            continue
    vals = np.array(vals)
    return {"median": float(np.median(vals)), "p90": float(np.quantile(vals, 0.9)), "count": int(len(vals))}
