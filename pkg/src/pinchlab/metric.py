"""Graph-geodesic distances on a triangle mesh.

Distances are exact shortest paths on a weighted graph: the mesh edges plus,
for the ``"edge-graph-with-chords"`` method, one chord per interior edge
joining the two opposite vertices when the straight segment between them
stays inside the unfolded pair of triangles. Both graphs overestimate the
smooth geodesic distance; the method tag is carried with every result.
"""

from __future__ import annotations

import os
import weakref
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .geometry import TriSurface

__all__ = [
    "EDGE_GRAPH",
    "WITH_CHORDS",
    "DistanceField",
    "GeodesicPath",
    "distance_graph",
    "single_source",
    "distance_matrix",
    "diameter",
    "radius",
    "excess",
    "geodesic_path",
    "intrinsic_distance_in",
    "thread_count",
]

EDGE_GRAPH = "edge-graph"
WITH_CHORDS = "edge-graph-with-chords"
_METHODS = (EDGE_GRAPH, WITH_CHORDS)

_graph_cache: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()
_matrix_cache: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()


def thread_count() -> int:
    """Worker cap from ``PINCHLAB_THREADS`` (default: CPU count)."""
    env = os.environ.get("PINCHLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _flip_chords(surface: TriSurface):
    """Unfolded opposite-vertex chords ``(k, l, length)`` across interior edges."""
    v, f = surface.vertices, surface.faces
    # directed half-edge (a, b) -> opposite corner c, for faces (a, b, c) cyclically
    a = f.reshape(-1)
    b = f[:, [1, 2, 0]].reshape(-1)
    c = f[:, [2, 0, 1]].reshape(-1)
    lookup = {(int(x), int(y)): int(z) for x, y, z in zip(a, b, c)}
    ks, ls = [], []
    for (x, y), k in lookup.items():
        if x < y:
            ks.append((x, y, k, lookup[(y, x)]))
    e = np.array(ks, dtype=np.int64)
    i, j, k, l = e.T
    base = np.linalg.norm(v[j] - v[i], axis=1)
    # 2-D placement: i at origin, j at (base, 0), k above, l below
    def place(o):
        di = np.linalg.norm(v[o] - v[i], axis=1)
        dj = np.linalg.norm(v[o] - v[j], axis=1)
        x = (di**2 - dj**2 + base**2) / (2.0 * base)
        y = np.sqrt(np.maximum(di**2 - x**2, 0.0))
        return x, y

    kx, ky = place(k)
    lx, ly = place(l)
    # segment k -> (lx, -ly) crosses the x axis at parameter ky / (ky + ly)
    t = ky / (ky + ly)
    cross_x = kx + t * (lx - kx)
    ok = (cross_x > 0.0) & (cross_x < base)
    length = np.hypot(kx - lx, ky + ly)
    return k[ok], l[ok], length[ok]


def distance_graph(surface: TriSurface, method: str = WITH_CHORDS) -> sparse.csr_matrix:
    """Symmetric weighted adjacency used for shortest paths (cached per surface)."""
    if method not in _METHODS:
        raise ValueError(f"unknown method {method!r}")
    per = _graph_cache.setdefault(surface, {})
    if method in per:
        return per[method]
    v = surface.vertices
    e = surface.edges
    rows, cols = [e[:, 0]], [e[:, 1]]
    w = [np.linalg.norm(v[e[:, 0]] - v[e[:, 1]], axis=1)]
    if method == WITH_CHORDS:
        k, l, length = _flip_chords(surface)
        rows.append(k)
        cols.append(l)
        w.append(length)
    r, c, w = np.concatenate(rows), np.concatenate(cols), np.concatenate(w)
    r, c = np.minimum(r, c), np.maximum(r, c)
    # a chord may coincide with an existing edge: keep the shorter weight
    order = np.lexsort((w, c, r))
    r, c, w = r[order], c[order], w[order]
    first = np.r_[True, (r[1:] != r[:-1]) | (c[1:] != c[:-1])]
    r, c, w = r[first], c[first], w[first]
    n = surface.n_vertices
    G = sparse.csr_matrix((np.r_[w, w], (np.r_[r, c], np.r_[c, r])), shape=(n, n))
    per[method] = G
    return G


def _graph(surface, method):
    return distance_graph(surface, method)


@dataclass(frozen=True)
class DistanceField:
    source: int
    distance: np.ndarray
    method: str
    restriction: np.ndarray | None = None

    @property
    def unreachable(self) -> np.ndarray:
        return np.flatnonzero(~np.isfinite(self.distance))


def _restricted(G, subset):
    sub = np.unique(np.asarray(subset, dtype=np.int64))
    return G[sub][:, sub], sub


def single_source(surface: TriSurface, source: int, restriction=None, method: str = WITH_CHORDS) -> DistanceField:
    """Shortest-path distances from ``source``.

    With ``restriction``, paths may only use vertices of the subset; vertices
    outside it, or in another component, get ``+inf``.
    """
    G = _graph(surface, method)
    n = surface.n_vertices
    if restriction is None:
        d = csgraph.dijkstra(G, directed=False, indices=int(source))
        return DistanceField(int(source), d, method)
    H, sub = _restricted(G, restriction)
    pos = np.searchsorted(sub, source)
    if pos >= len(sub) or sub[pos] != source:
        raise ValueError("source not in restriction")
    d = np.full(n, np.inf)
    d[sub] = csgraph.dijkstra(H, directed=False, indices=int(pos))
    return DistanceField(int(source), d, method, sub)


def distance_matrix(surface: TriSurface, method: str = WITH_CHORDS, sources=None) -> np.ndarray:
    """Distances from ``sources`` (default: every vertex) to every vertex.

    Sources are split across ``thread_count()`` workers. The full matrix is
    cached per surface.
    """
    if sources is None:
        per = _matrix_cache.setdefault(surface, {})
        if method in per:
            return per[method]
    G = _graph(surface, method)
    idx = np.arange(surface.n_vertices) if sources is None else np.asarray(sources, dtype=np.int64)
    nthreads = min(thread_count(), max(1, len(idx) // 64))
    if nthreads <= 1:
        D = csgraph.dijkstra(G, directed=False, indices=idx)
    else:
        chunks = np.array_split(idx, nthreads)
        with ThreadPoolExecutor(nthreads) as ex:
            D = np.vstack(list(ex.map(lambda c: csgraph.dijkstra(G, directed=False, indices=c), chunks)))
    if sources is None:
        D = np.minimum(D, D.T)
        D.setflags(write=False)
        per[method] = D
    return D


def diameter(surface: TriSurface, method: str = WITH_CHORDS) -> float:
    """Largest graph distance between two vertices."""
    return float(distance_matrix(surface, method).max())


def radius(surface: TriSurface, method: str = WITH_CHORDS) -> float:
    """``min_x max_y d(x, y)`` over vertices."""
    return float(distance_matrix(surface, method).max(axis=1).min())


def excess(surface: TriSurface, p: int, q: int, method: str = WITH_CHORDS) -> float:
    """``max_x d(p, x) + d(q, x) - d(p, q)``."""
    if p == q:
        raise ValueError("excess needs p != q")
    dp = single_source(surface, p, method=method).distance
    dq = single_source(surface, q, method=method).distance
    return float(np.max(dp + dq) - dp[q])


@dataclass(frozen=True)
class GeodesicPath:
    """Shortest graph path with arclength parameterisation.

    ``t`` is the cumulative arclength at each path vertex; ``samples`` the
    uniform resample abscissae ``0, h, 2h, ...`` (the last at most
    ``length``), with ``segment`` / ``weight`` locating each sample on the
    path: ``sample = (1 - weight) * vertex[segment] + weight * vertex[segment + 1]``.
    """

    vertices: np.ndarray
    t: np.ndarray
    h: float
    samples: np.ndarray
    segment: np.ndarray
    weight: np.ndarray
    method: str

    @property
    def length(self) -> float:
        return float(self.t[-1]) if len(self.t) else 0.0

    def positions(self, surface: TriSurface) -> np.ndarray:
        return self.interpolate(surface.vertices)

    def interpolate(self, values) -> np.ndarray:
        """Linear interpolation of vertex values at the resample points."""
        values = np.asarray(values, dtype=float)
        if len(self.vertices) < 2:
            return values[self.vertices]
        lo = values[self.vertices[self.segment]]
        hi = values[self.vertices[self.segment + 1]]
        w = self.weight.reshape((-1,) + (1,) * (values.ndim - 1))
        return (1.0 - w) * lo + w * hi


def geodesic_path(surface: TriSurface, a: int, b: int, h: float | None = None, method: str = WITH_CHORDS) -> GeodesicPath:
    """Shortest graph path from ``a`` to ``b`` resampled at arclength step ``h``.

    ``h`` defaults to half the mean edge length and may not exceed the mean
    edge length.
    """
    mean_edge = surface.mean_edge_length
    if h is None:
        h = 0.5 * mean_edge
    if not 0.0 < h <= mean_edge:
        raise ValueError("step h must be in (0, mean edge length]")
    if a == b:
        e = np.zeros(0, dtype=np.int64)
        return GeodesicPath(np.array([a]), np.zeros(1), h, np.zeros(0), e, np.zeros(0), method)
    G = _graph(surface, method)
    _, pred = csgraph.dijkstra(G, directed=False, indices=int(a), return_predecessors=True)
    path = [int(b)]
    while path[-1] != a:
        p = pred[path[-1]]
        if p < 0:
            raise ValueError("target unreachable")
        path.append(int(p))
    verts = np.array(path[::-1], dtype=np.int64)
    steps = np.asarray(G[verts[:-1], verts[1:]]).ravel()
    t = np.concatenate([[0.0], np.cumsum(steps)])
    samples = np.arange(0.0, t[-1] * (1.0 + 1e-12), h)
    seg = np.clip(np.searchsorted(t, samples, side="right") - 1, 0, len(verts) - 2)
    w = np.clip((samples - t[seg]) / steps[seg], 0.0, 1.0)
    return GeodesicPath(verts, t, h, samples, seg, w, method)


def intrinsic_distance_in(surface: TriSurface, subset, a: int, b: int, method: str = WITH_CHORDS) -> float:
    """Shortest-path distance from ``a`` to ``b`` through vertices of ``subset`` only."""
    sub = np.asarray(subset)
    if not (np.isin(a, sub) and np.isin(b, sub)):
        raise ValueError("a and b must belong to the subset")
    return float(single_source(surface, a, restriction=sub, method=method).distance[b])
