"""Almost-equators and the normalised eigenfunction map into a round sphere.

For the first ``k`` eigenfunctions ``F = (f_1, ..., f_k)`` (mean-square
normalised) the almost-equator ``A_k^eta`` is where ``|F|**2`` is within
``eta`` of 1, and ``Phi = F / |F|`` maps it to ``S^{k-1}``. The defects
below measure how far ``Phi`` is from an isometry onto the sphere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph

from . import metric
from .errors import EmptyEquator
from .geometry import TriSurface
from .spectral import Spectrum, gradient

__all__ = [
    "AlmostEquator",
    "SphereMapReport",
    "almost_equator",
    "restrict",
    "sphere_map",
    "sphere_samples",
    "surjectivity_defect",
    "metric_distortion",
    "gh_defect",
    "convexity_defect",
    "antipode_defect",
    "equator_gradient_check",
    "petersen_bound_check",
    "sphere_map_report",
    "ETA_GRID",
]

ETA_GRID = (0.05, 0.1, 0.2)


def _square_sum(spectrum: Spectrum, k: int) -> np.ndarray:
    F = spectrum.eigenfunctions[:, 1 : k + 1]
    return np.einsum("ij,ij->i", F, F)


@dataclass(frozen=True)
class AlmostEquator:
    """Vertex subset ``{v : | f_1(v)**2 + ... + f_k(v)**2 - 1 | < eta}``.

    ``labels`` are connected-component labels (aligned with ``vertices``)
    under the mesh edge graph restricted to the subset.
    """

    k: int
    eta: float
    vertices: np.ndarray
    labels: np.ndarray

    def __len__(self):
        return len(self.vertices)

    @property
    def n_components(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0


def _components(surface: TriSurface, subset) -> np.ndarray:
    if len(subset) == 0:
        return np.zeros(0, dtype=np.int64)
    G = metric.distance_graph(surface, metric.EDGE_GRAPH)
    H = G[subset][:, subset]
    return csgraph.connected_components(H, directed=False)[1]


def almost_equator(spectrum: Spectrum, surface: TriSurface, k: int, eta: float, allow_empty: bool = False) -> AlmostEquator:
    """Threshold set of ``|sum_{i<=k} f_i**2 - 1| < eta`` with its components.

    Raises
    ------
    EmptyEquator
        If no vertex qualifies (unless ``allow_empty``).
    """
    if k < 1 or k > len(spectrum) - 1:
        raise ValueError("k must be in 1..len(spectrum)-1")
    if not eta > 0.0:
        raise ValueError("eta must be positive")
    sub = np.flatnonzero(np.abs(_square_sum(spectrum, k) - 1.0) < eta)
    if len(sub) == 0 and not allow_empty:
        raise EmptyEquator(f"A_{k}^{eta} is empty")
    return AlmostEquator(k, float(eta), sub, _components(surface, sub))


def restrict(equator: AlmostEquator, surface: TriSurface, mask) -> AlmostEquator:
    """Sub-equator keeping the vertices where ``mask`` (aligned with ``equator.vertices``) holds."""
    sub = equator.vertices[np.asarray(mask, dtype=bool)]
    return AlmostEquator(equator.k, equator.eta, sub, _components(surface, sub))


def sphere_map(spectrum: Spectrum, equator: AlmostEquator) -> np.ndarray:
    """``Phi = F / |F|`` on the equator's vertices, shape ``(len(equator), k)``."""
    if len(equator) == 0:
        raise EmptyEquator("empty equator")
    F = spectrum.eigenfunctions[equator.vertices, 1 : equator.k + 1]
    return F / np.linalg.norm(F, axis=1, keepdims=True)


def sphere_samples(k: int, m: int, seed: int = 0) -> np.ndarray:
    """Quasi-uniform points on ``S^{k-1}``, shape ``(m, k)``.

    ``k = 1``: the two points ``+-1``. ``k = 2``: ``m`` equally spaced angles
    with a random offset. ``k = 3``: Fibonacci lattice under a random rotation.
    """
    rng = np.random.default_rng(seed)
    if k == 1:
        return np.array([[1.0], [-1.0]])
    if k == 2:
        th = 2.0 * np.pi * (np.arange(m) + rng.uniform()) / m
        return np.column_stack([np.cos(th), np.sin(th)])
    if k == 3:
        i = np.arange(m) + 0.5
        z = 1.0 - 2.0 * i / m
        phi = np.pi * (1.0 + np.sqrt(5.0)) * i
        r = np.sqrt(1.0 - z * z)
        P = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
        Q, R = np.linalg.qr(rng.standard_normal((3, 3)))
        return P @ (Q * np.sign(np.diag(R))).T
    raise ValueError("sphere samples implemented for k in 1..3")


def _angle(u, v):
    return np.arccos(np.clip(np.einsum("...i,...i->...", u, v), -1.0, 1.0))


def surjectivity_defect(equator: AlmostEquator, phi, m: int = 500, seed: int = 0) -> float:
    """``max_X min_v d_S(X, Phi(v))`` over ``m`` sample points ``X`` of ``S^{k-1}``."""
    if len(phi) == 0:
        raise EmptyEquator("empty equator")
    if m < 100:
        raise ValueError("m must be at least 100")
    X = sphere_samples(equator.k, m, seed)
    best = np.max(X @ np.asarray(phi).T, axis=1)
    return float(np.max(np.arccos(np.clip(best, -1.0, 1.0))))


def _sample_pairs(n, m, rng):
    return rng.integers(0, n, size=m), rng.integers(0, n, size=m)


def _pair_distances(surface, a, b, method):
    """Ambient distances ``d(a[j], b[j])`` using one Dijkstra per distinct source."""
    src, inv = np.unique(a, return_inverse=True)
    D = metric.distance_matrix(surface, method, sources=src)
    return D[inv, b]


def metric_distortion(equator: AlmostEquator, phi, surface: TriSurface, spectrum: Spectrum, m: int = 1000, seed: int = 0, method=metric.WITH_CHORDS):
    """``(distortion_cos, distortion_angular)`` over ``m`` random equator pairs.

    ``distortion_cos = max |cos d(x, y) - <F(x), F(y)>|``,
    ``distortion_angular = max |d(x, y) - d_S(Phi x, Phi y)|`` with ``d``
    clamped to ``[0, pi]``.
    """
    if len(equator) == 0:
        raise EmptyEquator("empty equator")
    if m < 100:
        raise ValueError("m must be at least 100")
    rng = np.random.default_rng(seed)
    i, j = _sample_pairs(len(equator), m, rng)
    x, y = equator.vertices[i], equator.vertices[j]
    d = np.clip(_pair_distances(surface, x, y, method), 0.0, np.pi)
    F = spectrum.eigenfunctions[:, 1 : equator.k + 1]
    phi = np.asarray(phi)
    dcos = np.abs(np.cos(d) - np.einsum("ij,ij->i", F[x], F[y]))
    dang = np.abs(d - _angle(phi[i], phi[j]))
    return float(dcos.max()), float(dang.max())


def gh_defect(surjectivity: float, distortion_angular: float) -> float:
    """``eps`` of the eps-approximation ``Phi``: the larger of its two defects."""
    return max(float(surjectivity), float(distortion_angular))


def convexity_defect(surface: TriSurface, inner: AlmostEquator, outer: AlmostEquator, m: int = 200, seed: int = 0, method=metric.WITH_CHORDS):
    """``max (d_outer(x, y) - d(x, y))`` over ``m`` random pairs of ``inner``.

    ``d_outer`` is the intrinsic distance through ``outer``. Returns
    ``(defect, disconnections)``; disconnected pairs are counted, not included
    in the maximum.
    """
    if not np.all(np.isin(inner.vertices, outer.vertices)):
        raise ValueError("inner must be contained in outer")
    if len(inner) == 0:
        raise EmptyEquator("empty equator")
    rng = np.random.default_rng(seed)
    i, j = _sample_pairs(len(inner), m, rng)
    x, y = inner.vertices[i], inner.vertices[j]
    amb = _pair_distances(surface, x, y, method)
    G = metric.distance_graph(surface, method)
    sub = outer.vertices
    H = G[sub][:, sub]
    src, inv = np.unique(x, return_inverse=True)
    Dr = csgraph.dijkstra(H, directed=False, indices=np.searchsorted(sub, src))
    intr = Dr[inv, np.searchsorted(sub, y)]
    finite = np.isfinite(intr)
    defect = float(np.max(intr[finite] - amb[finite], initial=0.0))
    return defect, int(np.count_nonzero(~finite))


def antipode_defect(surface: TriSurface, equator: AlmostEquator, m: int = 200, seed: int = 0, method=metric.WITH_CHORDS) -> float:
    """``max_x max(0, pi - max_{y in A} d(x, y))`` over ``m`` sampled equator vertices ``x``."""
    if len(equator) == 0:
        raise EmptyEquator("empty equator")
    rng = np.random.default_rng(seed)
    x = np.unique(equator.vertices[rng.integers(0, len(equator), size=m)])
    D = metric.distance_matrix(surface, method, sources=x)
    far = D[:, equator.vertices].max(axis=1)
    return float(np.max(np.maximum(0.0, np.pi - far)))


def equator_gradient_check(spectrum: Spectrum, surface: TriSurface, equator: AlmostEquator, at=None) -> float:
    """Largest ``|grad(f_1**2 + ... + f_k**2)|`` over the equator (or over ``at``).

    The per-vertex norm is the star average of the face gradient norms.
    """
    g = gradient(surface, _square_sum(spectrum, equator.k))
    idx = equator.vertices if at is None else np.asarray(at)
    if len(idx) == 0:
        raise EmptyEquator("empty equator")
    return float(np.max(g.vertex_norm[idx]))


def petersen_bound_check(spectrum: Spectrum, surface: TriSurface, k: int) -> float:
    """``max_v f_1(v)**2 + ... + f_k(v)**2``."""
    return float(np.max(_square_sum(spectrum, k)))


@dataclass(frozen=True)
class SphereMapReport:
    k: int
    eta: float
    eta_outer: float
    size: int
    components: int
    surjectivity_defect: float
    distortion_cos: float
    distortion_angular: float
    gh_defect: float
    convexity_defect: float
    disconnections: int
    antipode_defect: float
    gradient_max: float
    petersen_max: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def sphere_map_report(
    spectrum: Spectrum,
    surface: TriSurface,
    k: int,
    eta: float,
    eta_outer: float | None = None,
    seed: int = 0,
    m_sphere: int = 500,
    m_pairs: int = 1000,
    m_convex: int = 200,
    m_antipode: int = 200,
    method=metric.WITH_CHORDS,
) -> SphereMapReport:
    """All equator defects for one ``(k, eta)``; ``eta_outer`` defaults to ``3 * eta``.

    Seeds for the individual samplers are derived from ``seed``.
    """
    eta_outer = 3.0 * eta if eta_outer is None else eta_outer
    s = np.random.SeedSequence([seed, k, int(round(eta * 1e6))]).generate_state(4)
    A = almost_equator(spectrum, surface, k, eta)
    B = almost_equator(spectrum, surface, k, eta_outer)
    phi = sphere_map(spectrum, A)
    surj = surjectivity_defect(A, phi, m_sphere, int(s[0]))
    dcos, dang = metric_distortion(A, phi, surface, spectrum, m_pairs, int(s[1]), method)
    conv, disc = convexity_defect(surface, A, B, m_convex, int(s[2]), method)
    anti = antipode_defect(surface, A, m_antipode, int(s[3]), method)
    return SphereMapReport(
        k=k,
        eta=float(eta),
        eta_outer=float(eta_outer),
        size=len(A),
        components=A.n_components,
        surjectivity_defect=surj,
        distortion_cos=dcos,
        distortion_angular=dang,
        gh_defect=gh_defect(surj, dang),
        convexity_defect=conv,
        disconnections=disc,
        antipode_defect=anti,
        gradient_max=equator_gradient_check(spectrum, surface, A),
        petersen_max=petersen_bound_check(spectrum, surface, k),
    )
