"""Config-driven experiments.

A config is a JSON object::

    {"kind": "<experiment>", "output_dir": "...", "seed": 0, "workers": 1,
     "model": {...}, "params": {...}}

Each run writes CSV data files plus ``summary.json`` into
``$FLOQFLUX_OUTPUT_ROOT/<output_dir>`` (default root ``./floqflux_runs``).
"""
from __future__ import annotations

import csv
import json
import math
import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, kernels

ENV_OUTPUT_ROOT = "FLOQFLUX_OUTPUT_ROOT"
TOP_KEYS = {"kind", "output_dir", "seed", "workers", "model", "params"}
EXPERIMENTS = ("magnus-check", "propagator-scan", "spectrum", "entropy", "nk", "chain-oracle",
               "flow", "pump", "chern", "wires", "drive-validate", "kz")


class ConfigError(ValueError):
    def __init__(self, message, keys=()):
        super().__init__(message)
        self.keys = list(keys)


class ExperimentError(RuntimeError):
    """Module-level abort with the experiment context attached."""


def output_root() -> Path:
    return Path(os.environ.get(ENV_OUTPUT_ROOT, "floqflux_runs"))


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path: Path, header, rows) -> Path:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    return path


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def validate(config) -> None:
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    if "kind" not in config:
        raise ConfigError("missing required key 'kind'", ["kind"])
    unknown = sorted(set(config) - TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown top-level keys: {unknown}", unknown)
    if config["kind"] not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment kind {config['kind']!r}; expected one of {EXPERIMENTS}",
                          ["kind"])
    for k in ("model", "params"):
        if k in config and not isinstance(config[k], dict):
            raise ConfigError(f"'{k}' must be an object", [k])


def _model(cfg, **defaults):
    from .model import ModelSpec
    doc = dict(defaults)
    doc.update(cfg.get("model", {}))
    try:
        return ModelSpec.from_dict(doc)
    except KeyError as e:
        raise ConfigError(str(e), [k for k in doc if k not in ModelSpec.__dataclass_fields__]) from e
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e), ["model"]) from e


def _params(cfg, allowed, **defaults):
    p = dict(defaults)
    given = cfg.get("params", {})
    unknown = sorted(set(given) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown params for {cfg['kind']}: {unknown}", unknown)
    p.update(given)
    return p


# --------------------------------------------------------------------------
# experiments: each returns (results dict, list of written files)
# --------------------------------------------------------------------------

def _exp_magnus_check(cfg, out):
    from .floquet import magnus_first_order
    from .hamiltonians import build_harmonics, build_heff
    m = _model(cfg, sector=[2])
    if len(m.sector) != 1:
        raise ConfigError("magnus-check needs a total-N sector", ["model.sector"])
    H1, Hm1 = build_harmonics(m.lattice, m.gauge, m.J_par, m.J_perp, m.basis)
    M = magnus_first_order(H1, Hm1, m.Omega)
    H = build_heff(m.lattice, m.gauge, m.J_par, m.J_perp, m.Omega, 0.0, m.basis)
    diff = M.matrix - H.matrix
    d = float(abs(diff).max()) if diff.nnz else 0.0
    return {"max_abs_diff": d, "dim": m.basis.dim, "nnz": H.nnz,
            "hermiticity_defect": H.hermiticity_defect()}, []


def _exp_propagator_scan(cfg, out):
    from .floquet import loglog_slope, magnus_defect, one_period_propagator
    from .hamiltonians import build_harmonics, build_heff
    m = _model(cfg, kind="square", Lx=2, Ly=4, boundary_x="open", boundary_y="open",
               phi=math.pi / 2, J_par=1.0, J_perp=1.0, sector=[2])
    p = _params(cfg, {"omegas", "nsteps"}, omegas=[5.0, 7.07, 10.0, 14.14, 20.0, 28.28, 40.0],
                nsteps=1024)
    H1, Hm1 = build_harmonics(m.lattice, m.gauge, m.J_par, m.J_perp, m.basis)

    def one(Om):
        U = one_period_propagator(H1, Hm1, Om, int(p["nsteps"]))
        He = build_heff(m.lattice, m.gauge, m.J_par, m.J_perp, Om, 0.0, m.basis)
        return magnus_defect(U, He, Om)

    with ThreadPoolExecutor(max(1, cfg.get("workers", 1))) as ex:
        defects = list(ex.map(one, p["omegas"]))
    f = write_csv(out / "defect.csv", ["omega[J]", "defect[1]"], zip(p["omegas"], defects))
    slope = loglog_slope(p["omegas"], defects)
    return {"omegas": p["omegas"], "defects": defects, "slope": slope}, [f]


def _exp_spectrum(cfg, out):
    from .observables import low_spectrum
    m = _model(cfg)
    p = _params(cfg, {"k", "twist"}, k=6, twist=[0.0, 0.0])
    H = m.hamiltonian(tuple(p["twist"]))
    w, _ = low_spectrum(H, min(int(p["k"]), H.dim), cfg.get("seed", 0))
    f = write_csv(out / "spectrum.csv", ["index", "energy[J]"], enumerate(w))
    return {"energies": w, "dim": H.dim, "gap": float(w[1] - w[0]) if len(w) > 1 else None}, [f]


def _ground(m, seed):
    from .observables import ground_manifold
    H = m.hamiltonian()
    E, V, w = ground_manifold(H, 4, seed=seed)
    return E, V, w


def _exp_entropy(cfg, out):
    from .observables import correlation_map, entanglement_entropy
    m = _model(cfg)
    p = _params(cfg, {"partition"}, partition="left-half")
    E, V, w = _ground(m, cfg.get("seed", 0))
    L = m.lattice
    if p["partition"] == "left-half":
        part = [s for s in range(L.nsites) if L.coords[s, 0] < L.Lx // 2]
    else:
        part = [int(s) for s in p["partition"]]
    S = entanglement_entropy(V[:, 0], m.basis, part)
    dens = correlation_map(V[:, 0], m.basis, L, "density-density")
    rows = [(i, dens[(i, i)]) for i in range(L.nsites)]
    f = write_csv(out / "density.csv", ["site", "density[1]"], rows)
    return {"entropy_nats": S, "energy": E, "ground_degeneracy": V.shape[1], "partition": part}, [f]


def _exp_nk(cfg, out):
    from .hamiltonians import build_heff
    from .hilbert import build_basis
    from .observables import decoupled_chain, ground_manifold, momentum_distribution
    p = _params(cfg, {"L", "Na", "Nb", "boundary", "sublattice", "J_perp", "Omega"},
                L=12, Na=3, Nb=3, boundary="open", sublattice="A", J_perp=1.0, Omega=4.0)
    spec, g, sites = decoupled_chain(int(p["L"]), p["boundary"])
    basis = build_basis(spec, (int(p["Na"]), int(p["Nb"])), sites=sites)
    H = build_heff(spec, g, 0.0, p["J_perp"], p["Omega"], 0.0, basis)
    E, V, _ = ground_manifold(H, 6, seed=cfg.get("seed", 0))
    k, nk = momentum_distribution(V, basis, spec, p["sublattice"], 0)
    f = write_csv(out / "nk.csv", ["k[rad]", "n_k[1]"], zip(k, nk))
    return {"argmax_k": float(k[int(np.argmax(nk))]), "energy": E,
            "ground_degeneracy": V.shape[1], "sum_nk": float(nk.sum())}, [f]


def _exp_chain_oracle(cfg, out):
    from .hamiltonians import build_heff
    from .hilbert import build_basis
    from .observables import decoupled_chain, full_spectrum, jw_chain_oracle
    p = _params(cfg, {"L", "sectors", "J_perp", "Omega"}, L=4, sectors="all", J_perp=1.0, Omega=4.0)
    L = int(p["L"])
    spec, g, sites = decoupled_chain(L)
    sectors = ([(a, b) for a in range(L + 1) for b in range(L + 1)]
               if p["sectors"] == "all" else [tuple(s) for s in p["sectors"]])
    t_perp = 2 * p["J_perp"] ** 2 / p["Omega"]
    rows, worst = [], 0.0
    for Na, Nb in sectors:
        basis = build_basis(spec, (Na, Nb), sites=sites)
        ed = full_spectrum(build_heff(spec, g, 0.0, p["J_perp"], p["Omega"], 0.0, basis))
        orc = jw_chain_oracle(L, Na, Nb, t_perp)
        d = float(np.abs(ed - orc).max())
        worst = max(worst, d)
        rows.append((Na, Nb, basis.dim, d))
    f = write_csv(out / "oracle.csv", ["Na", "Nb", "dim", "max_abs_diff[J]"], rows)
    return {"max_abs_diff": worst, "sectors": len(rows), "t_perp": t_perp}, [f]


def _exp_flow(cfg, out):
    from .pump import spectral_flow
    m = _model(cfg)
    p = _params(cfg, {"axis", "npoints"}, axis="y", npoints=9)
    fs = spectral_flow(m, p["axis"], int(p["npoints"]), cfg.get("seed", 0), cfg.get("workers", 1))
    f = fs.write_csv(out / "flow.csv")
    return {"peak_to_peak": fs.peak_to_peak, "energies": fs.energies}, [f]


def _exp_pump(cfg, out):
    from .pump import PumpAbort, charge_pump
    m = _model(cfg, boundary_x="open", boundary_y="periodic")
    p = _params(cfg, {"npoints", "floor", "return_path"}, npoints=17, floor=0.5, return_path=False)
    try:
        fs = charge_pump(m, int(p["npoints"]), float(p["floor"]), return_path=bool(p["return_path"]),
                         seed=cfg.get("seed", 0))
    except PumpAbort as e:
        raise ExperimentError(f"pump aborted: {e}") from e
    f = fs.write_csv(out / "pump.csv")
    return {"delta_q_final": float(fs.charges[-1]), "min_overlap": float(fs.overlaps.min())}, [f]


def _exp_chern(cfg, out):
    from .pump import DegeneracyError, many_body_chern, write_chern_json
    m = _model(cfg)
    p = _params(cfg, {"grid", "gap_tol"}, grid=[6, 6], gap_tol=1e-6)
    try:
        c, info = many_body_chern(m, int(p["grid"][0]), int(p["grid"][1]), float(p["gap_tol"]),
                                  cfg.get("seed", 0), cfg.get("workers", 1), return_info=True)
    except DegeneracyError as e:
        raise ExperimentError(f"chern aborted: {e}") from e
    f = write_chern_json(out / "chern.json", _jsonable(info))
    return info, [f]


def _exp_wires(cfg, out):
    from .wiretheory import wires_table
    p = _params(cfg, {"pairs", "na", "nb"}, pairs=[[0, 0], [0, -1], [1, 0]], na="1/2", nb="1/2")
    rows = wires_table([tuple(x) for x in p["pairs"]], p["na"], p["nb"])
    path = out / "wires.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "q", "K", "sigma_xy[e^2/h]", "flux[pi]"])
        for r in rows:
            w.writerow([r["p"], r["q"], json.dumps(r["K"]), r["sigma_xy"], " ".join(r["flux_over_pi"])])
    return {"table": rows}, [path]


def _exp_drive(cfg, out):
    from . import drive as dr
    p = _params(cfg, {"J_hz", "omega_hz", "Omega_hz", "modulation_index", "Lx", "Ly", "convention",
                      "nsamples"},
                J_hz=1000.0, omega_hz=5000.0, Omega_hz=1000.0, modulation_index=0.2, Lx=4, Ly=4,
                convention="default", nsamples=1000)
    omega = dr.hz(p["omega_hz"])
    V0 = p["modulation_index"] * omega / math.sqrt(2)
    E = math.sqrt(V0 / 16.0)
    prm = dr.DriveParams(J=dr.hz(p["J_hz"]), Ex=E, Ey=E, Delta_y=omega, Delta_x=omega, omega=omega,
                         Omega=dr.hz(p["Omega_hz"]))
    res = dr.cancellation_residuals(prm, int(p["nsamples"]), cfg.get("seed", 0))
    own = dr.modulation_pattern(prm, p["Lx"], p["Ly"])
    F = dr.peierls_flux_map(prm, p["Lx"], p["Ly"], p["convention"], target=None)
    homogeneous = bool(np.all(np.abs(np.mod(F - math.pi / 2 + math.pi, 2 * math.pi) - math.pi) < 1e-12))
    hier = dr.hierarchy_check(prm)
    x = prm.bessel_arg
    rows = [(m, n, F[m, n]) for m in range(F.shape[0]) for n in range(F.shape[1])]
    f = write_csv(out / "flux_map.csv", ["m", "n", "flux[rad]"], rows)
    report = {
        "cancellation": res,
        "ownership": {f"{k[0]},{k[1]}": v for k, v in own.owners.items()},
        "ownership_ok": own.ok,
        "flux_homogeneous_pi_over_2": homogeneous,
        "convention": p["convention"],
        "hierarchy": {"ratios": hier.ratios, "passed": hier.passed},
        "J_eff_hz": prm.J_eff / (2 * math.pi),
        "bessel": {"x": x, "J1": dr.bessel_j(1, x), "rel_err_linear": abs(dr.bessel_j(1, x) - x / 2) / (x / 2)},
        "frequencies": {"omega_rad_s": omega, "omega_hz": p["omega_hz"],
                        "Omega_rad_s": prm.Omega, "Omega_hz": p["Omega_hz"]},
    }
    return report, [f]


def _exp_kz(cfg, out):
    from .kz import KZParams, domain_length, freeze_out_time, kz_sweep
    allowed = set(KZParams.__dataclass_fields__) | {"vary", "grid"}
    p = _params(cfg, allowed)
    vary, grid = p.pop("vary", None), p.pop("grid", None)
    try:
        prm = KZParams(**{k: float(v) for k, v in p.items()})
    except ValueError as e:
        raise ConfigError(str(e), sorted(p)) from e
    res = {"l_dec": domain_length(prm), "t_freeze": freeze_out_time(prm), "v": prm.v}
    files = []
    if vary:
        if vary not in KZParams.__dataclass_fields__:
            raise ConfigError(f"unknown KZ field {vary!r}", ["params.vary"])
        rows = kz_sweep(prm, vary, grid or [])
        files.append(write_csv(out / "kz_sweep.csv", [vary, "l_dec[sites]", "monotone"], rows))
        res["sweep"] = rows
    return res, files


_DISPATCH = {
    "magnus-check": _exp_magnus_check, "propagator-scan": _exp_propagator_scan,
    "spectrum": _exp_spectrum, "entropy": _exp_entropy, "nk": _exp_nk,
    "chain-oracle": _exp_chain_oracle, "flow": _exp_flow, "pump": _exp_pump,
    "chern": _exp_chern, "wires": _exp_wires, "drive-validate": _exp_drive, "kz": _exp_kz,
}


def run(config: dict, root: Path | None = None) -> dict:
    """Execute one experiment and return its summary (also written to disk)."""
    validate(config)
    cfg = dict(config)
    cfg.setdefault("seed", 0)
    cfg.setdefault("workers", 1)
    root = Path(root) if root is not None else output_root()
    out = root / cfg.get("output_dir", cfg["kind"])
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        results, files = _DISPATCH[cfg["kind"]](cfg, out)
    except (ConfigError, ExperimentError):
        raise
    except (ValueError, RuntimeError, AssertionError) as e:
        raise ExperimentError(f"{cfg['kind']} failed: {e}") from e
    elapsed = time.perf_counter() - t0
    import scipy
    summary = {
        "kind": cfg["kind"],
        "inputs": config,
        "results": results,
        "files": [p.name for p in files],
        "versions": {"floqflux": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version(), "kernel_backend": kernels.BACKEND},
        "timings": {"seconds": elapsed},
    }
    summary = _jsonable(summary)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    summary["output_dir"] = str(out)
    return summary
