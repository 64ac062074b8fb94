"""Numerical diagnostics for eigenvalue pinching on closed surfaces with K >= 1.

Submodules: ``geometry`` (meshes, curvature, OFF), ``spectral`` (Laplacian
eigenpairs), ``metric`` (graph geodesics), ``pinching`` (antipodal frames and
eigenfunction identities), ``equator`` (almost-equators and the sphere map),
``odecmp`` (oscillator comparison), ``report`` and ``cli``.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    EmptyEquator,
    HypothesisViolation,
    MeshError,
    NearConjugate,
    NoAntipode,
    PathTooShort,
    PinchlabError,
    SolverError,
)
from .geometry import (  # noqa: E402
    TriSurface,
    generate_dumbbell,
    generate_icosphere,
    generate_spheroid,
    load_off,
    rescale_to_curvature_bound,
    save_off,
)
from .spectral import Spectrum, compute_spectrum  # noqa: E402

__all__ = [
    "__version__",
    "EmptyEquator",
    "HypothesisViolation",
    "MeshError",
    "NearConjugate",
    "NoAntipode",
    "PathTooShort",
    "PinchlabError",
    "SolverError",
    "TriSurface",
    "generate_dumbbell",
    "generate_icosphere",
    "generate_spheroid",
    "load_off",
    "rescale_to_curvature_bound",
    "save_off",
    "Spectrum",
    "compute_spectrum",
]
