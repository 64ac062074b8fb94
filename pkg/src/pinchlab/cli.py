"""Command-line front end: ``pinchlab gen | diagnose | sweep | ode``.

Exit codes: 0 success, 2 input validation (bad mesh, bad arguments, curvature
hypothesis not met), 3 numeric guard (near-conjugate boundary data), 4 eigensolver
failure. Settings resolve as command-line flag, then config file (TOML), then
built-in default.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .errors import HypothesisViolation, MeshError, NearConjugate, SolverError
from .geometry import load_off, off_text, write_atomic
from .odecmp import compare_boundary, compare_cauchy, read_profile_csv
from .report import GENERATORS, DiagnoseConfig, diagnose, dumps_report, sweep

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_GUARD = 3
EXIT_SOLVER = 4

DEFAULTS = {
    "subdiv": 4,
    "ratio": 1.2,
    "neck": 0.3,
    "k_max": 3,
    "eta_grid": [0.05, 0.1, 0.2],
    "seed": 0,
    "rescale": True,
    "force": False,
    "sweep_subdiv": 3,
    "sweep_k_max": 2,
}


class UsageError(ValueError):
    pass


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _load_config(path):
    if path is None:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _resolve(args, config, section, key, default_key=None):
    """Flag, then ``[section]`` table, then top level of the config, then default."""
    val = getattr(args, key, None)
    if val is not None:
        return val
    table = config.get(section, {})
    if key in table:
        return table[key]
    if key in config:
        return config[key]
    return DEFAULTS[default_key or key]


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


def _warn(msg):
    print(f"warning: {msg}", file=sys.stderr)


def cmd_gen(args, config) -> int:
    subdiv = int(_resolve(args, config, "gen", "subdiv"))
    make, pname = GENERATORS[args.kind]
    param = None
    if pname is not None:
        param = float(_resolve(args, config, "gen", pname))
    surface = make(param, subdiv)
    k_min = surface.curvature.K_min
    violated = k_min <= 0.0
    if violated:
        _warn(f"hypothesis violated: K_min < 0 (K_min = {k_min:.4g})")
    info = {
        "kind": args.kind,
        "subdivisions": subdiv,
        "n_vertices": surface.n_vertices,
        "n_faces": surface.n_faces,
        "K_min": float(k_min),
        "hypothesis_violated": bool(violated),
    }
    if pname is not None:
        info[pname] = param
    comments = [f"{k}: {json.dumps(v)}" for k, v in info.items()]
    text = off_text(surface, comments)
    if args.output is None:
        sys.stdout.write(text)
    else:
        write_atomic(args.output, text)
        info["path"] = args.output
        print(json.dumps(info, sort_keys=True))
    return EXIT_OK


def _diagnose_config(args, config, section, k_default="k_max"):
    return DiagnoseConfig(
        k_max=int(_resolve(args, config, section, "k_max", k_default)),
        eta_grid=tuple(float(x) for x in _resolve(args, config, section, "eta_grid")),
        seed=int(_resolve(args, config, section, "seed")),
        rescale=bool(_resolve(args, config, section, "rescale")),
        force=bool(_resolve(args, config, section, "force")),
    )


def cmd_diagnose(args, config) -> int:
    cfg = _diagnose_config(args, config, "diagnose")
    if not 1 <= cfg.k_max <= 3:
        raise UsageError("--k-max must be 1, 2 or 3")
    surface = load_off(args.mesh)
    rep = diagnose(surface, cfg)
    if rep["surface"]["hypothesis_violated"]:
        _warn("hypothesis violated: K_min < 0; report computed without rescaling")
    _emit(dumps_report(rep), args.output)
    return EXIT_OK


def cmd_sweep(args, config) -> int:
    grid = args.grid if args.grid is not None else config.get("sweep", {}).get("grid")
    if grid is None:
        raise UsageError("--grid is required")
    subdiv = int(_resolve(args, config, "sweep", "subdiv", "sweep_subdiv"))
    cfg = _diagnose_config(args, config, "sweep", "sweep_k_max")
    res = sweep(args.generator, grid, subdiv, cfg, out_dir=args.output)
    for g, err in res.errors.items():
        _warn(f"grid point {g:g} failed: {err}")
    print(json.dumps(res.summary(), sort_keys=True))
    return EXIT_OK


def cmd_ode(args, config) -> int:
    prof = read_profile_csv(args.profile)
    fn = compare_cauchy if args.mode == "cauchy" else compare_boundary
    cmp_ = fn(prof, args.a, args.b)
    out = {"mode": args.mode, "a": args.a, "b": args.b, "length": prof.length, "samples": len(prof.t)}
    out.update(cmp_.as_dict())
    _emit(json.dumps(out, sort_keys=True, indent=1) + "\n", args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pinchlab", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"pinchlab {__version__}")
    p.add_argument("--config", help="TOML file with default settings")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a mesh as OFF")
    g.add_argument("kind", choices=sorted(GENERATORS))
    g.add_argument("--subdiv", type=int)
    g.add_argument("--ratio", type=float, help="spheroid axis ratio")
    g.add_argument("--neck", type=float, help="dumbbell neck radius")
    g.add_argument("-o", "--output", help="OFF path (default: stdout)")
    g.set_defaults(func=cmd_gen)

    def diag_flags(q):
        q.add_argument("--k-max", dest="k_max", type=int)
        q.add_argument("--eta-grid", dest="eta_grid", type=_floats)
        q.add_argument("--seed", type=int)
        q.add_argument("--no-rescale", dest="rescale", action="store_const", const=False)
        q.add_argument("--force", action="store_const", const=True, help="analyse surfaces with K_min <= 0")

    d = sub.add_parser("diagnose", help="full diagnostic report for an OFF mesh")
    d.add_argument("mesh")
    diag_flags(d)
    d.add_argument("-o", "--output", help="JSON path (default: stdout)")
    d.set_defaults(func=cmd_diagnose)

    s = sub.add_parser("sweep", help="diagnose a generator family over a parameter grid")
    s.add_argument("generator", choices=sorted(GENERATORS))
    s.add_argument("--grid", type=_floats, help="comma-separated parameter values")
    s.add_argument("--subdiv", type=int)
    diag_flags(s)
    s.add_argument("-o", "--output", help="output directory for reports, sweep.csv, sweep.json")
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("ode", help="compare a sampled profile with a sinusoid")
    o.add_argument("profile", help="CSV with columns t, v")
    o.add_argument("--mode", choices=("cauchy", "boundary"), required=True)
    o.add_argument("--a", type=float, required=True, help="v(0)")
    o.add_argument("--b", type=float, required=True, help="v'(0) (cauchy) or v(l) (boundary)")
    o.add_argument("-o", "--output", help="JSON path (default: stdout)")
    o.set_defaults(func=cmd_ode)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args.config)
        return args.func(args, config)
    except NearConjugate as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except SolverError as exc:
        print(f"error: eigensolver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except HypothesisViolation as exc:
        print(f"error: hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (MeshError, ValueError, OSError, tomllib.TOMLDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
