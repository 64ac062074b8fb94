"""Cotangent Laplace-Beltrami operator, smallest eigenpairs and discrete gradients.

Eigenfunctions follow the sphere-analogy normalisation: mean square
``1/(n+1)`` with ``n = 2``, so that on the unit sphere the first eigenspace is
spanned by the coordinate functions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse import linalg as sla

from .errors import MeshError, SolverError
from .geometry import TriSurface

__all__ = [
    "DIM",
    "Spectrum",
    "GradientField",
    "assemble_operators",
    "solve_smallest",
    "normalize_mean_square",
    "compute_spectrum",
    "gradient",
    "clusters",
    "eikonal_defect",
    "li_sup_ratio",
]

DIM = 2
MEAN_SQUARE = 1.0 / (DIM + 1)
CLUSTER_RTOL = 1e-3
MAX_COUNT = 64
DENSE_LIMIT = 500


@dataclass(frozen=True)
class Spectrum:
    """Ordered eigenpairs of ``S f = lambda M f``.

    ``eigenfunctions`` has shape ``(V, count)``; column ``i`` belongs to
    ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    solver_residuals: np.ndarray
    normalized: bool = False

    def __len__(self):
        return len(self.eigenvalues)

    def f(self, i: int) -> np.ndarray:
        return self.eigenfunctions[:, i]

    def to_json(self) -> str:
        return json.dumps(
            {
                "eigenvalues": self.eigenvalues.tolist(),
                "eigenfunctions": self.eigenfunctions.T.tolist(),
                "solver_residuals": self.solver_residuals.tolist(),
                "normalized": self.normalized,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> Spectrum:
        d = json.loads(text)
        return cls(
            np.asarray(d["eigenvalues"], dtype=float),
            np.asarray(d["eigenfunctions"], dtype=float).T,
            np.asarray(d["solver_residuals"], dtype=float),
            bool(d["normalized"]),
        )


def assemble_operators(surface: TriSurface):
    """Cotangent stiffness ``S`` and barycentric lumped mass ``M`` (both CSR).

    ``S`` is symmetric positive semidefinite with constant kernel (its rows
    sum to zero by construction).
    """
    v, f = surface.vertices, surface.faces
    if np.any(surface.face_areas <= 0.0):
        raise MeshError("degenerate (zero-area) face")
    rows, cols, vals = [], [], []
    for k in range(3):
        i, j, o = f[:, (k + 1) % 3], f[:, (k + 2) % 3], f[:, k]
        a, b = v[i] - v[o], v[j] - v[o]
        cot = np.einsum("ij,ij->i", a, b) / np.linalg.norm(np.cross(a, b), axis=1)
        w = 0.5 * cot
        rows += [i, j, i, j]
        cols += [j, i, i, j]
        vals += [-w, -w, w, w]
    n = surface.n_vertices
    S = sparse.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsr()
    S.sum_duplicates()
    M = sparse.diags(surface.vertex_area).tocsr()
    return S, M


def clusters(eigenvalues, rtol=CLUSTER_RTOL):
    """Group consecutive eigenvalues whose relative gap is below ``rtol``.

    Returns a list of index arrays. The near-zero eigenvalue is always a
    singleton.
    """
    lam = np.asarray(eigenvalues)
    groups = [[0]] if len(lam) else []
    for i in range(1, len(lam)):
        prev = lam[i - 1]
        if i > 1 and abs(lam[i] - prev) < rtol * max(abs(lam[i]), 1e-300):
            groups[-1].append(i)
        else:
            groups.append([i])
    return [np.array(g) for g in groups]


def _localize(B):
    """Rotate an M-orthonormal basis ``B`` (V, m) by successive argmax localisation.

    Each new basis vector is the unit combination of the remaining span that
    is largest at the vertex where that span has the largest pointwise norm,
    so the vector peaks there.
    """
    m = B.shape[1]
    Q = np.eye(m)
    out = []
    for _ in range(m):
        R = B @ Q
        norms = np.einsum("ij,ij->i", R, R)
        v = int(np.argmax(norms))
        c = R[v] / np.sqrt(norms[v])
        out.append(Q @ c)
        # orthonormal complement of c inside span(Q)
        if Q.shape[1] > 1:
            _, _, vt = np.linalg.svd(c[None, :])
            Q = Q @ vt[1:].T
    return B @ np.array(out).T


def _residuals(S, M, F, lam):
    MF = M @ F
    r = S @ F - MF * lam
    return np.linalg.norm(r, axis=0) / np.linalg.norm(MF, axis=0)


def solve_smallest(S, M, count: int, tol: float = 1e-10, seed: int = 0, maxiter: int = 10_000) -> Spectrum:
    """Smallest ``count`` eigenpairs of ``S f = lambda M f``.

    Shift-invert Lanczos (ARPACK) around a small negative shift; dense
    ``eigh`` for meshes of at most ``DENSE_LIMIT`` vertices. Extra pairs are
    computed so that a cluster straddling ``count`` is gauged as a whole
    before truncation. ``solver_residuals`` are measured on the raw solver
    pairs, before the in-cluster rotation.

    Raises
    ------
    SolverError
        If ARPACK does not converge, or a residual exceeds ``max(tol, 1e-8)``.
    """
    n = S.shape[0]
    if not 1 <= count <= MAX_COUNT:
        raise ValueError(f"count must be in [1, {MAX_COUNT}], got {count}")
    if count > n:
        raise ValueError("count exceeds problem size")
    k = min(n, count + max(4, count // 2))
    if n <= DENSE_LIMIT:
        lam, F = scipy.linalg.eigh(S.toarray(), M.toarray(), subset_by_index=[0, k - 1])
    else:
        k = min(k, n - 1)
        mass_total = float(M.diagonal().sum())
        sigma = -1e-2 * 4.0 * np.pi / mass_total
        v0 = np.random.default_rng(seed).standard_normal(n)
        try:
            lam, F = sla.eigsh(S, k=k, M=M, sigma=sigma, which="LM", v0=v0, tol=0.0, maxiter=maxiter)
        except sla.ArpackNoConvergence as exc:
            best = np.max(_residuals(S, M, exc.eigenvectors, exc.eigenvalues), initial=np.inf)
            raise SolverError("eigensolver did not converge", float(best)) from exc
    order = np.argsort(lam)
    lam, F = lam[order], F[:, order]
    res = _residuals(S, M, F, lam)
    worst = float(np.max(res[:count]))
    if worst > max(tol, 1e-8):
        raise SolverError(f"relative residual {worst:.3e} above tolerance", worst)

    mass = M.diagonal()
    for g in clusters(lam):
        B = F[:, g]
        L = np.linalg.cholesky(B.T @ (mass[:, None] * B))
        B = np.linalg.solve(L, B.T).T
        F[:, g] = _localize(B) if len(g) > 1 else B
    return Spectrum(lam[:count].copy(), F[:, :count].copy(), res[:count].copy(), normalized=False)


def normalize_mean_square(spectrum: Spectrum, surface: TriSurface) -> Spectrum:
    """Scale each eigenfunction to mean square ``1/(n+1)`` and fix its sign.

    The sign makes the function positive at the lowest-index vertex among
    those attaining ``max |f|`` (relative tie tolerance ``1e-9``).
    """
    area = surface.vertex_area
    vol = area.sum()
    F = np.array(spectrum.eigenfunctions, dtype=float)
    for i in range(F.shape[1]):
        f = F[:, i]
        ms = float(area @ (f * f)) / vol
        if not ms > 0.0:
            raise SolverError(f"eigenfunction {i} vanishes identically")
        f = f * np.sqrt(MEAN_SQUARE / ms)
        a = np.abs(f)
        v = int(np.flatnonzero(a >= a.max() * (1.0 - 1e-9))[0])
        F[:, i] = f if f[v] > 0 else -f
    return replace(spectrum, eigenfunctions=F, normalized=True)


def compute_spectrum(surface: TriSurface, count: int, tol: float = 1e-10, seed: int = 0) -> Spectrum:
    """Assemble, solve and normalise in one call."""
    S, M = assemble_operators(surface)
    return normalize_mean_square(solve_smallest(S, M, count, tol=tol, seed=seed), surface)


@dataclass(frozen=True)
class GradientField:
    """Gradient of the piecewise-linear interpolant of a vertex function.

    ``face`` holds the constant per-face gradient vectors. ``vertex_sq`` is
    the area-weighted average of ``|grad f|**2`` over the faces incident to
    each vertex; ``vertex_norm`` is the same average of ``|grad f|``.
    """

    face: np.ndarray
    vertex_sq: np.ndarray
    vertex_norm: np.ndarray

    @property
    def face_sq(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.face, self.face)


def _face_gradient_basis(surface: TriSurface):
    v, f = surface.vertices, surface.faces
    p = [v[f[:, k]] for k in range(3)]
    n = np.cross(p[1] - p[0], p[2] - p[0])
    dbl = np.einsum("ij,ij->i", n, n)
    # grad of the hat function at corner k: (n x e_k) / |n|^2, e_k the opposite edge
    return [np.cross(n, p[(k + 2) % 3] - p[(k + 1) % 3]) / dbl[:, None] for k in range(3)]


def _star_average(surface: TriSurface, face_values):
    acc = np.zeros(surface.n_vertices)
    w = np.zeros(surface.n_vertices)
    A = surface.face_areas
    for k in range(3):
        np.add.at(acc, surface.faces[:, k], A * face_values)
        np.add.at(w, surface.faces[:, k], A)
    return acc / w


def gradient(surface: TriSurface, f) -> GradientField:
    """Per-face gradient of ``f`` and its per-vertex star averages."""
    f = np.asarray(f, dtype=float)
    basis = _face_gradient_basis(surface)
    g = sum(f[surface.faces[:, k]][:, None] * basis[k] for k in range(3))
    sq = np.einsum("ij,ij->i", g, g)
    return GradientField(g, _star_average(surface, sq), _star_average(surface, np.sqrt(sq)))


def vertex_average(surface: TriSurface, face_values) -> np.ndarray:
    """Area-weighted average of per-face values over each vertex star."""
    return _star_average(surface, np.asarray(face_values, dtype=float))


def face_mean(surface: TriSurface, f) -> np.ndarray:
    """Value of the linear interpolant of ``f`` at each face centroid."""
    return np.asarray(f, dtype=float)[surface.faces].mean(axis=1)


def mean_over(surface: TriSurface, values) -> float:
    """``(1/vol) * integral`` of a vertex function under the lumped mass."""
    a = surface.vertex_area
    return float(a @ np.asarray(values, dtype=float)) / float(a.sum())


def eikonal_defect(surface: TriSurface, f) -> float:
    """``(1/vol) * integral |f**2 + |grad f|**2 - 1|`` for a normalised eigenfunction."""
    g = gradient(surface, f)
    return mean_over(surface, np.abs(np.asarray(f) ** 2 + g.vertex_sq - 1.0))


def li_sup_ratio(surface: TriSurface, spectrum: Spectrum, coeffs, indices=(1, 2, 3), epsilon=None) -> float:
    """Ratio ``max(fbar**2 + |grad fbar|**2) / ((n + eps + 1) * mean(fbar**2))``.

    ``fbar = sum(coeffs[j] * f_indices[j])``. ``epsilon`` defaults to the
    largest ``lambda_i - n`` over the combined indices (floored at 0). Values
    at most ``1 + tau`` are expected.
    """
    idx = list(indices)
    fbar = spectrum.eigenfunctions[:, idx] @ np.asarray(coeffs, dtype=float)
    if epsilon is None:
        epsilon = max(0.0, float(np.max(spectrum.eigenvalues[idx])) - DIM)
    g = gradient(surface, fbar)
    lhs = float(np.max(fbar**2 + g.vertex_sq))
    return lhs / ((DIM + epsilon + 1.0) * mean_over(surface, fbar**2))
