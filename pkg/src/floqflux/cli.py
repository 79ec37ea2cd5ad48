"""Command-line entry point: ``floqflux <experiment> [flags]`` or
``floqflux run config.json``."""
from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys

from .runner import EXPERIMENTS, ConfigError, ExperimentError, run

_ANGLE = re.compile(r"^\s*([+-]?\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


def angle(text: str) -> float:
    """Float or a multiple of pi such as ``pi/2``, ``3pi/4``, ``-0.5*pi``."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _ANGLE.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"cannot parse angle {text!r}")
    coef = m.group(1)
    coef = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
    den = float(m.group(2)) if m.group(2) else 1.0
    return coef * math.pi / den


MODEL_FLAGS = {
    "lattice": "kind", "phi": "phi", "alpha": "alpha", "mu": "mu", "J_par": "J_par",
    "J_perp": "J_perp", "Omega": "Omega", "theta_scheme": "theta_scheme", "model": "model",
}


def _add_model_flags(p):
    g = p.add_argument_group("model")
    g.add_argument("--lattice", choices=["square", "honeycomb"])
    g.add_argument("--dims", nargs=2, type=int, metavar=("LX", "LY"))
    g.add_argument("--boundary", nargs=2, choices=["open", "periodic"], metavar=("BX", "BY"))
    g.add_argument("--phi", type=angle)
    g.add_argument("--alpha", type=angle)
    g.add_argument("--mu", type=float)
    g.add_argument("--J-par", dest="J_par", type=float)
    g.add_argument("--J-perp", dest="J_perp", type=float)
    g.add_argument("--Omega", type=float)
    g.add_argument("--theta-scheme", dest="theta_scheme",
                   choices=["square-red-bonds", "honeycomb-three-phase"])
    g.add_argument("--sector", nargs="+", type=int, help="N or Na Nb")
    g.add_argument("--model", choices=["heff", "hopping"])


def _param(p, *names, **kw):
    p.add_argument(*names, **kw)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="floqflux", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a JSON config")
    r.add_argument("config")
    r.add_argument("--workers", type=int)
    r.add_argument("--output-dir")

    for kind in EXPERIMENTS:
        p = sub.add_parser(kind)
        p.add_argument("--config", help="JSON config; flags override it")
        p.add_argument("--output-dir")
        p.add_argument("--workers", type=int, help="parallel workers (default: all cores)")
        p.add_argument("--seed", type=int)
        if kind not in ("wires", "drive-validate", "kz", "nk", "chain-oracle"):
            _add_model_flags(p)
        if kind == "propagator-scan":
            _param(p, "--omegas", nargs="+", type=float)
            _param(p, "--nsteps", type=int)
        if kind == "spectrum":
            _param(p, "--k", type=int)
        if kind in ("flow",):
            _param(p, "--axis", choices=["x", "y"])
            _param(p, "--npoints", type=int)
        if kind == "pump":
            _param(p, "--npoints", type=int)
            _param(p, "--floor", type=float)
            _param(p, "--return-path", dest="return_path", action="store_true", default=None)
        if kind == "chern":
            _param(p, "--grid", nargs=2, type=int)
            _param(p, "--gap-tol", dest="gap_tol", type=float)
        if kind in ("nk", "chain-oracle"):
            _param(p, "--L", type=int)
            _param(p, "--J-perp", dest="J_perp", type=float)
            _param(p, "--Omega", type=float)
        if kind == "nk":
            _param(p, "--Na", type=int)
            _param(p, "--Nb", type=int)
            _param(p, "--sublattice", choices=["A", "B"])
            _param(p, "--chain-boundary", dest="boundary", choices=["open", "periodic"])
        if kind == "wires":
            _param(p, "--pq", dest="pairs", nargs=2, type=int, action="append")
            _param(p, "--na")
            _param(p, "--nb")
        if kind == "drive-validate":
            _param(p, "--J-hz", dest="J_hz", type=float)
            _param(p, "--omega-hz", dest="omega_hz", type=float)
            _param(p, "--Omega-hz", dest="Omega_hz", type=float)
            _param(p, "--modulation-index", dest="modulation_index", type=float)
            _param(p, "--convention", choices=["default", "forward"])
        if kind == "kz":
            for f in ("xi0", "tau0", "nu", "z", "mu_i", "mu_c", "t_dec"):
                _param(p, "--" + f.replace("_", "-"), dest=f, type=float)
            _param(p, "--vary")
            _param(p, "--grid", nargs="*", type=float)
    return ap


_NON_PARAM = {"command", "config", "output_dir", "workers", "seed", "dims", "boundary", "sector",
              *MODEL_FLAGS}


def config_from_args(args) -> dict:
    if args.command == "run":
        with open(args.config) as fh:
            cfg = json.load(fh)
    else:
        cfg = {}
        if args.config:
            with open(args.config) as fh:
                cfg = json.load(fh)
        cfg["kind"] = args.command
        model = dict(cfg.get("model", {}))
        for flag, key in MODEL_FLAGS.items():
            v = getattr(args, flag, None)
            if v is not None and not (args.command in ("nk", "chain-oracle") and flag in ("J_perp", "Omega")):
                model[key] = v
        if getattr(args, "dims", None):
            model["Lx"], model["Ly"] = args.dims
        if getattr(args, "boundary", None):
            model["boundary_x"], model["boundary_y"] = args.boundary
        if getattr(args, "sector", None):
            model["sector"] = args.sector
        if model:
            cfg["model"] = model
        params = dict(cfg.get("params", {}))
        for k, v in vars(args).items():
            if v is None or k in _NON_PARAM and not (args.command in ("nk", "chain-oracle")
                                                     and k in ("J_perp", "Omega")):
                continue
            params[k] = v
        if params:
            cfg["params"] = params
        if args.seed is not None:
            cfg["seed"] = args.seed
    if args.output_dir:
        cfg["output_dir"] = args.output_dir
    workers = args.workers if args.workers is not None else cfg.get("workers", os.cpu_count() or 1)
    cfg["workers"] = int(workers)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        summary = run(cfg)
    except ConfigError as e:
        print(json.dumps({"error": "config", "message": str(e), "keys": e.keys}), file=sys.stderr)
        return 2
    except ExperimentError as e:
        print(json.dumps({"error": "experiment", "message": str(e)}), file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as e:
        print(json.dumps({"error": "io", "message": str(e)}), file=sys.stderr)
        return 2
    print(json.dumps(summary["results"], indent=2, sort_keys=True, default=str))
    print(f"outputs: {summary['output_dir']}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
