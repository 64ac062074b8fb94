"""Assemble every diagnostic for one surface into a JSON-ready report, and
run parameter sweeps over generator families."""

from __future__ import annotations

import csv
import io
import json
import math
from importlib import resources
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
from scipy.stats import spearmanr

from . import __version__, equator, metric, pinching
from .errors import EmptyEquator, HypothesisViolation, NoAntipode, PinchlabError
from .geometry import (
    TriSurface,
    generate_dumbbell,
    generate_icosphere,
    generate_spheroid,
    rescale_to_curvature_bound,
    write_atomic,
)
from .spectral import DIM, clusters, compute_spectrum, eikonal_defect

__all__ = [
    "SCHEMA_VERSION",
    "DiagnoseConfig",
    "diagnose",
    "dumps_report",
    "load_schema",
    "flatten_scalars",
    "graph_metric_calibration",
    "sweep",
    "SweepResult",
    "TREND_STATISTICS",
    "GENERATORS",
]

SCHEMA_VERSION = "1.0"

GENERATORS = {
    "icosphere": (lambda p, s: generate_icosphere(s), None),
    "spheroid": (lambda p, s: generate_spheroid(p, s), "ratio"),
    "dumbbell": (lambda p, s: generate_dumbbell(p, s), "neck"),
}


@dataclass
class DiagnoseConfig:
    k_max: int = 3
    eta_grid: tuple = equator.ETA_GRID
    eta_outer_factor: float = 3.0
    seed: int = 0
    eigen_count: int = 10
    rescale: bool = True
    force: bool = False
    residual_pairs: int = 100
    projection_points: int = 10
    excess_pairs: int = 10

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["eta_grid"] = list(self.eta_grid)
        return d


class _Nulls:
    """Collects ``dotted.path -> reason`` for fields that could not be computed."""

    def __init__(self):
        self.reasons = {}

    def value(self, path, x):
        if x is None:
            return None
        x = float(x)
        if not math.isfinite(x):
            self.reasons[path] = "non-finite value"
            return None
        return x

    def fail(self, path, reason):
        self.reasons[path] = str(reason)
        return None


def graph_metric_calibration(mean_edge: float, pairs: int = 1000, seed: int = 0) -> dict:
    """Graph-metric error on the unit icosphere whose edge length is closest to ``mean_edge``.

    Returns the largest relative overshoot, the largest absolute overshoot
    and the most negative difference against great-circle distance.
    """
    best = min(range(1, 6), key=lambda s: abs(_ICO_EDGE[s] - mean_edge))
    S = generate_icosphere(best)
    rng = np.random.default_rng(seed)
    i = rng.integers(0, S.n_vertices, pairs)
    j = rng.integers(0, S.n_vertices, pairs)
    D = metric.distance_matrix(S, sources=np.unique(i))
    src, inv = np.unique(i, return_inverse=True)
    d = D[inv, j]
    exact = np.arccos(np.clip(np.einsum("ij,ij->i", S.vertices[i], S.vertices[j]), -1.0, 1.0))
    ok = exact > 0
    diff = d - exact
    return {
        "reference_subdivisions": best,
        "max_rel_overshoot": float(np.max(diff[ok] / exact[ok])),
        "max_abs_overshoot": float(np.max(diff)),
        "min_difference": float(np.min(diff)),
    }


# mean edge length of the unit icosphere per subdivision level
_ICO_EDGE = {1: 0.5877, 2: 0.3057, 3: 0.1544, 4: 0.0774, 5: 0.0387}


def _pk_block(spec, S, k, cfg, nulls, base):
    fr = pinching.extract_frame(spec, S, k)
    eta = pinching.pk_deficiency(fr)
    pts = np.unique(np.r_[fr.x, fr.y])
    proj = [pinching.project_cos_distance(spec, S, int(p), k) for p in pts]
    li = [pinching.li_yau_check(spec, i, S) for i in range(1, k + 1)]
    eik = [eikonal_defect(S, spec.f(i)) for i in range(1, k + 1)]
    rd = pinching.residual_distribution(spec, k, S, cfg.residual_pairs, seed=base)
    return {
        "k": k,
        "lambda_k": float(spec.eigenvalues[k]),
        "eta_star": nulls.value(f"pk.{k}.eta_star", eta),
        "frame": fr.as_dict(),
        "projection": {
            "points": [int(p) for p in pts],
            "max_residual_sup": float(max(r.residual_sup for r in proj)),
            "max_residual_l2": float(max(r.residual_l2 for r in proj)),
            "max_coeff_norm_defect": float(max(r.coeff_norm_defect for r in proj)),
        },
        "li_yau_max_ratio": float(max(li)),
        "eikonal_defect": float(max(eik)),
        "residual_distribution": {
            "median": nulls.value(f"pk.{k}.residual_distribution.median", rd["median"] if rd["count"] else None),
            "p90": nulls.value(f"pk.{k}.residual_distribution.p90", rd["p90"] if rd["count"] else None),
            "count": rd["count"],
        },
    }


def diagnose(surface: TriSurface, cfg: DiagnoseConfig | None = None) -> dict:
    """Run every diagnostic on ``surface`` and return the report as a dict.

    The surface is first rescaled to ``K_min = 1`` (unless ``cfg.rescale`` is
    off). A surface with ``K_min <= 0`` raises :class:`HypothesisViolation`
    unless ``cfg.force`` is set, in which case it is analysed unscaled and
    flagged.
    """
    cfg = cfg or DiagnoseConfig()
    nulls = _Nulls()
    seeds = np.random.SeedSequence(cfg.seed).generate_state(8)
    k_min0 = surface.curvature.K_min
    violated = k_min0 <= 0.0
    if violated and not cfg.force:
        raise HypothesisViolation(f"K_min = {k_min0:.4g} <= 0 (use force to analyse anyway)")
    if cfg.rescale:
        S, scale = rescale_to_curvature_bound(surface, force=cfg.force)
    else:
        S, scale = surface, 1.0
    spec = compute_spectrum(S, cfg.eigen_count, seed=cfg.seed)
    lam = spec.eigenvalues

    report = {
        "schema_version": SCHEMA_VERSION,
        "surface": {
            "meta": {k: v for k, v in surface.meta.items() if isinstance(v, (str, int, float, bool))},
            "n_vertices": S.n_vertices,
            "n_faces": S.n_faces,
            "scale_factor": float(scale),
            "rescaled": bool(cfg.rescale and not violated),
            "K_min_input": float(k_min0),
            "K_min": float(S.curvature.K_min),
            "area": float(S.area),
            "area_ratio": float(S.area / (4.0 * np.pi)),
            "mean_edge_length": S.mean_edge_length,
            "gauss_bonnet_error": float(S.curvature.total - 2.0 * np.pi * (2 - 2 * S.genus)),
            "hypothesis_violated": bool(violated),
            "mesh_tolerance": graph_metric_calibration(S.mean_edge_length, seed=int(seeds[0])),
        },
        "spectrum": {
            "eigenvalues": [float(x) for x in lam],
            "clusters": [[int(i) for i in g] for g in clusters(lam)],
            "max_solver_residual": float(np.max(spec.solver_residuals)),
            "lambda_1_minus_n": float(lam[1] - DIM),
            "gap_n_plus_2": float(lam[DIM + 2] - lam[DIM + 1]) if len(lam) > DIM + 2 else None,
        },
    }

    D = metric.distance_matrix(S)
    rng = np.random.default_rng(seeds[1])
    ex = []
    for _ in range(cfg.excess_pairs):
        p, q = rng.choice(S.n_vertices, size=2, replace=False)
        ex.append(float(np.max(D[p] + D[q]) - D[p, q]))
    fr1 = pinching.extract_frame(spec, S, 1)
    x1, y1 = int(fr1.x[0]), int(fr1.y[0])
    report["metric"] = {
        "method": metric.WITH_CHORDS,
        "diameter": float(D.max()),
        "radius": float(D.max(axis=1).min()),
        "diameter_deficit": float(np.pi - D.max()),
        "excess_frame_pair": float(np.max(D[x1] + D[y1]) - D[x1, y1]),
        "excess_random_median": float(np.median(ex)),
        "cos_distance_fit_x1": float(np.max(np.abs(np.cos(np.clip(D[x1], 0, np.pi)) - spec.f(1)))),
        "sup_f1_minus_1": float(abs(spec.f(1).max() - 1.0)),
    }
    coarea = {}
    for u in ("cos", "cos2", "sin2"):
        try:
            coarea[u] = pinching.coarea_comparison(S, x1, u)
        except NoAntipode as exc:
            coarea[u] = nulls.fail(f"metric.coarea.{u}", exc)
    report["metric"]["coarea"] = coarea

    report["pk"] = [_pk_block(spec, S, k, cfg, nulls, int(seeds[2]) + k) for k in range(1, cfg.k_max + 1)]

    blocks = []
    for k in range(1, cfg.k_max + 1):
        for eta in cfg.eta_grid:
            path = f"equator.{k}.{eta}"
            try:
                r = equator.sphere_map_report(
                    spec, S, k, eta, cfg.eta_outer_factor * eta, seed=int(seeds[3])
                ).as_dict()
            except EmptyEquator as exc:
                r = {"k": k, "eta": float(eta), "eta_outer": float(cfg.eta_outer_factor * eta), "size": 0}
                for key in _EQUATOR_FIELDS:
                    r[key] = nulls.fail(f"{path}.{key}", exc)
            else:
                for key in _EQUATOR_FIELDS:
                    if key not in ("components", "disconnections"):
                        r[key] = nulls.value(f"{path}.{key}", r[key])
            blocks.append(r)
    report["equator"] = blocks
    report["null_reasons"] = nulls.reasons
    report["provenance"] = {
        "tool": "pinchlab",
        "tool_version": __version__,
        "seed": cfg.seed,
        "config": cfg.as_dict(),
        "created": datetime.now(timezone.utc).isoformat(),
    }
    return report


_EQUATOR_FIELDS = (
    "components",
    "surjectivity_defect",
    "distortion_cos",
    "distortion_angular",
    "gh_defect",
    "convexity_defect",
    "disconnections",
    "antipode_defect",
    "gradient_max",
    "petersen_max",
)

TIMESTAMP_FIELDS = (("provenance", "created"),)


def load_schema() -> dict:
    """The JSON schema shipped with the package."""
    return json.loads(resources.files("pinchlab").joinpath("schema/report.schema.json").read_text())


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=1, allow_nan=False) + "\n"


def flatten_scalars(report: dict) -> dict:
    """Flat ``column -> scalar`` view of a report for CSV output."""
    row = {}
    s = report["surface"]
    for key in ("n_vertices", "scale_factor", "K_min_input", "K_min", "area_ratio", "hypothesis_violated"):
        row[key] = s[key]
    lam = report["spectrum"]["eigenvalues"]
    for i, x in enumerate(lam):
        row[f"lambda_{i}"] = x
    for key, v in report["metric"].items():
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            row[key] = v
    for u, v in report["metric"]["coarea"].items():
        row[f"coarea_{u}"] = v
    for b in report["pk"]:
        k = b["k"]
        row[f"eta_star_{k}"] = b["eta_star"]
        row[f"li_yau_{k}"] = b["li_yau_max_ratio"]
        row[f"eikonal_{k}"] = b["eikonal_defect"]
        row[f"projection_sup_{k}"] = b["projection"]["max_residual_sup"]
        row[f"residual_median_{k}"] = b["residual_distribution"]["median"]
    for e in report["equator"]:
        tag = f"k{e['k']}_eta{e['eta']:g}"
        for key in _EQUATOR_FIELDS:
            row[f"{key}_{tag}"] = e.get(key)
    return row


# trend statistics: (name, x column, y column)
TREND_STATISTICS = (
    ("eta_star_2_vs_lambda_2", "eta_star_2", "lambda2_minus_n"),
    ("gh_defect_2_vs_lambda_2", "gh_defect_k2_eta0.1", "lambda2_minus_n"),
    ("diameter_deficit_vs_lambda_1", "diameter_deficit", "lambda1_minus_n"),
)


@dataclass
class SweepResult:
    parameter: str
    grid: list
    reports: list
    rows: list
    errors: dict = field(default_factory=dict)
    trends: dict = field(default_factory=dict)

    def csv_text(self) -> str:
        cols = ["param", "error"]
        for r in self.rows:
            cols += [c for c in r if c not in cols]
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, restval="", lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: ("" if v is None else v) for k, v in r.items()})
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "parameter": self.parameter,
            "grid": list(self.grid),
            "errors": {str(k): v for k, v in self.errors.items()},
            "trends": self.trends,
        }


def _spearman(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    if ok.sum() < 3 or np.ptp(x[ok]) == 0 or np.ptp(y[ok]) == 0:
        return None
    return float(np.clip(spearmanr(x[ok], y[ok])[0], -1.0, 1.0))


def sweep(generator: str, grid, subdivisions: int = 3, cfg: DiagnoseConfig | None = None, out_dir=None) -> SweepResult:
    """Diagnose one generated surface per grid value and compute trend statistics.

    Failures at a grid point are recorded in ``errors`` and the sweep goes on.
    With ``out_dir``, per-point reports, ``sweep.csv`` and ``sweep.json`` are
    written there.
    """
    cfg = cfg or DiagnoseConfig(k_max=2)
    make, pname = GENERATORS[generator]
    grid = [float(g) for g in grid]
    if len(grid) < 3:
        raise ValueError("a sweep needs at least 3 grid points")
    if not (np.all(np.diff(grid) > 0) or np.all(np.diff(grid) < 0)):
        raise ValueError("grid must be strictly monotone")
    res = SweepResult(pname or "none", grid, [], [])
    for g in grid:
        row = {"param": g, "error": ""}
        try:
            rep = diagnose(make(g, subdivisions), cfg)
        except (PinchlabError, ValueError, np.linalg.LinAlgError) as exc:
            res.errors[g] = f"{type(exc).__name__}: {exc}"
            row["error"] = res.errors[g]
            res.reports.append(None)
        else:
            res.reports.append(rep)
            row.update(flatten_scalars(rep))
            row["lambda1_minus_n"] = rep["spectrum"]["eigenvalues"][1] - DIM
            if len(rep["spectrum"]["eigenvalues"]) > 2:
                row["lambda2_minus_n"] = rep["spectrum"]["eigenvalues"][2] - DIM
        res.rows.append(row)
    for name, xc, yc in TREND_STATISTICS:
        xs = [r.get(xc) for r in res.rows]
        ys = [r.get(yc) for r in res.rows]
        xs = [np.nan if v in (None, "") else v for v in xs]
        ys = [np.nan if v in (None, "") else v for v in ys]
        res.trends[name] = _spearman(xs, ys)
    if out_dir is not None:
        import os

        os.makedirs(out_dir, exist_ok=True)
        for g, rep in zip(grid, res.reports):
            if rep is not None:
                write_atomic(os.path.join(out_dir, f"report_{pname}_{g:g}.json"), dumps_report(rep))
        write_atomic(os.path.join(out_dir, "sweep.csv"), res.csv_text())
        write_atomic(os.path.join(out_dir, "sweep.json"), json.dumps(res.summary(), indent=1, sort_keys=True) + "\n")
    return res
