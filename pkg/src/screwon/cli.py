"""Command-line entry point: ``screwon <command> [options]``.

Commands
--------
spectrum    energy levels (WKB, radial eigensolver, both, or weak coupling)
dispersion  level energies along a k, lambda or lambda*k sweep, with power-law fits
classify    singularity report and Ince type of a rational second-order ODE
orbit       classical trajectory with conservation drift summary
algebra     commutator, Casimir and Heisenberg checks of the operator algebra

Every run writes ``manifest.json`` next to its outputs.  Exit codes: 0 on
success, 2 on usage or domain errors, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from ._jit import JIT_ENABLED
from .core import ModelParams
from .errors import DomainError, NumericalError

MODEL_KEYS = ("lambda", "k", "m", "mu", "hbar", "pz", "l")

DEFAULTS = {
    "spectrum": {"n": "1..10", "method": "wkb", "maslov": 0.0},
    "dispersion": {"sweep": "k", "grid": "0.001:20:25", "n": "1000", "maslov": 0.0,
                   "fit_min": None},
    "classify": {"equation": None, "coeffs": None},
    "orbit": {"state": "0.7,-0.2,0.1,0.3,0.4,0.5", "periods": 10.0, "T": None,
              "tol": 1e-10, "save_every": 100, "two_route": False},
    "algebra": {"exact": False},
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# argument helpers


def parse_n_range(text) -> list:
    """``"1..10"``, ``"5"``, ``"1,3,7"`` or a mix such as ``"1..3,10"``."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise UsageError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise UsageError("no level numbers given")
    return sorted(set(out))


def parse_grid(text) -> np.ndarray:
    """``"lo:hi:N"`` (geometric) or a comma-separated list."""
    if isinstance(text, (list, tuple)):
        g = np.array(text, dtype=float)
    elif ":" in str(text):
        parts = str(text).split(":")
        if len(parts) != 3:
            raise UsageError(f"grid must be lo:hi:N, got {text!r}")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if lo <= 0 or hi <= lo:
            raise UsageError("geometric grid needs 0 < lo < hi")
        g = np.geomspace(lo, hi, n)
    else:
        g = np.array([float(v) for v in str(text).split(",") if v.strip()])
    if g.size < 3:
        raise UsageError(f"grid needs at least 3 points, got {g.size}")
    return g


def _thread_count(requested):
    env = os.environ.get("SCREWON_THREADS")
    n = int(env) if env else int(requested or 1)
    return max(n, 1)


def _add_model_flags(p):
    g = p.add_argument_group("model parameters")
    g.add_argument("--lambda", dest="lambda", type=float, help="coupling lambda")
    g.add_argument("--k", type=float, help="wavenumber k")
    g.add_argument("--m", type=float, help="m")
    g.add_argument("--mu", type=float, help="mass mu")
    g.add_argument("--hbar", type=float, help="Planck constant")
    g.add_argument("--pz", type=float, help="axial momentum p_z")
    g.add_argument("--l", type=int, help="angular quantum number")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with model and command options")
    common.add_argument("--out", default=None, help="output directory (default ./screwon-out/<command>)")
    common.add_argument("--seed", type=int, default=None, help="seed recorded in the manifest")
    common.add_argument("--threads", type=int, default=None, help="worker threads (SCREWON_THREADS overrides)")
    common.add_argument("--json-errors", action="store_true", help="report errors as JSON on stderr")

    parser = _Parser(prog="screwon", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"screwon {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("spectrum", parents=[common], help="energy levels")
    _add_model_flags(sp)
    sp.add_argument("--n", help="levels, e.g. 1..10 or 1,5,9")
    sp.add_argument("--method", choices=["wkb", "radial", "both", "weak"])
    sp.add_argument("--maslov", type=float, help="constant added to n in the WKB rule (default 0)")

    dp = sub.add_parser("dispersion", parents=[common], help="parameter sweep with power-law fit")
    _add_model_flags(dp)
    dp.add_argument("--sweep", choices=["k", "lambda", "lambdak"])
    dp.add_argument("--grid", help="lo:hi:N geometric grid or comma list")
    dp.add_argument("--n", help="levels to track")
    dp.add_argument("--maslov", type=float)
    dp.add_argument("--fit-min", dest="fit_min", type=float, help="fit only grid values >= this")

    cp = sub.add_parser("classify", parents=[common], help="classify a rational ODE")
    cp.add_argument("equation", nargs="?", help="e.g. \"y'' + (1/z)*y' + (1/z)*y = 0\"")
    cp.add_argument("--coeffs", help="JSON {p: {num, den}, q: {num, den}}, ascending powers")

    op = sub.add_parser("orbit", parents=[common], help="classical trajectory")
    _add_model_flags(op)
    op.add_argument("--state", help="x,y,z,px,py,pz")
    op.add_argument("--periods", type=float, help="duration in characteristic times")
    op.add_argument("--T", type=float, help="duration (overrides --periods)")
    op.add_argument("--tol", type=float)
    op.add_argument("--save-every", dest="save_every", type=int)
    op.add_argument("--two-route", dest="two_route", action="store_true", default=None,
                    help="also integrate the L-S equations and compare")

    ap = sub.add_parser("algebra", parents=[common], help="operator algebra checks")
    _add_model_flags(ap)
    ap.add_argument("--exact", action="store_true", default=None, help="exact rational arithmetic")
    return parser


def resolve_config(args) -> tuple:
    """Merge defaults, the JSON config file and explicit flags (flags win)."""
    cfg = dict(DEFAULTS[args.command])
    model = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc}") from None
        for key, val in data.items():
            if key in MODEL_KEYS:
                model[key] = val
            elif key in cfg:
                cfg[key] = val
            else:
                raise UsageError(f"unknown config key {key!r}")
    ns = vars(args)
    for key in MODEL_KEYS:
        if ns.get(key) is not None:
            model[key] = ns[key]
    for key in cfg:
        if ns.get(key) is not None:
            cfg[key] = ns[key]
    return model, cfg


# ---------------------------------------------------------------------------
# commands


def _write(out: Path, name: str, text: str, written: list):
    (out / name).write_text(text)
    written.append(name)


def cmd_spectrum(params: ModelParams, cfg: dict, out: Path, threads: int) -> list:
    from .radial import RadialProblem, eigensolve, to_physical
    from .wkb import SpectrumRow, SpectrumTable, quantize, weak_coupling_spectrum

    ns = parse_n_range(cfg["n"])
    method = cfg["method"]
    params.require_spectral()
    if min(ns) < 0:
        raise UsageError("level numbers must be non-negative")
    written = []
    tab = SpectrumTable(lam=params.lam, k=params.k)
    extra = None
    if method == "weak":
        for n in ns:
            E = weak_coupling_spectrum(params, 2 * n + abs(params.l))
            tab.rows.append(SpectrumRow(n, params.l, params.p_z, E, "weak", 0.0))
    if method in ("wkb", "both"):
        tab.rows.extend(quantize(params, ns, maslov=float(cfg["maslov"])).rows)
    if method in ("radial", "both"):
        rp = RadialProblem.from_params(params)
        rad = eigensolve(rp, max(ns) + 1, method="fd")
        for row in rad.rows:
            if row.n in ns:
                E = float(to_physical(params, row.E))
                tab.rows.append(SpectrumRow(row.n, row.l, params.p_z, E, row.method, row.residual))
    if method == "both":
        by = {}
        for r in tab.rows:
            by.setdefault(r.n, {})[r.method] = r.E
        tab.rows.sort(key=lambda r: (r.n, r.method))
        extra = {"rel_diff": [abs(by[r.n]["wkb"] - by[r.n]["radial-fd"]) / abs(by[r.n]["radial-fd"])
                              for r in tab.rows]}
    tab.rows.sort(key=lambda r: (r.n, r.method))
    _write(out, "spectrum.csv", tab.to_csv(extra), written)
    return written


def _sweep_point(args):
    params, ns, maslov = args
    from .wkb import quantize_sweep
    return quantize_sweep(params, ns, maslov=maslov).energies


def cmd_dispersion(params: ModelParams, cfg: dict, out: Path, threads: int) -> list:
    from .wkb import fit_power_law

    grid = parse_grid(cfg["grid"])
    ns = parse_n_range(cfg["n"])
    sweep = cfg["sweep"]
    jobs = []
    for v in grid:
        if sweep == "k":
            q = params.replace(k=float(v))
        elif sweep == "lambda":
            q = params.replace(lam=float(v))
        else:
            q = params.replace(lam=float(v) / params.k)
        q.require_spectral()
        jobs.append((q, ns, float(cfg["maslov"])))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_sweep_point, jobs))  # map keeps input order
    else:
        results = [_sweep_point(j) for j in jobs]
    E = np.array(results)  # (grid, n)

    lines = ["sweep,value,lambda,k,n,E"]
    for i, (q, _, _) in enumerate(jobs):
        for j, n in enumerate(ns):
            lines.append(f"{sweep},{float(grid[i])!r},{q.lam!r},{q.k!r},{n},{float(E[i, j])!r}")
    written = []
    _write(out, "dispersion.csv", "\n".join(lines) + "\n", written)

    mask = np.ones(grid.size, bool) if cfg.get("fit_min") is None else grid >= float(cfg["fit_min"])
    if mask.sum() < 3:
        raise UsageError("fewer than 3 grid points remain for the fit")
    per_n = []
    for j, n in enumerate(ns):
        fit = fit_power_law(grid[mask], E[mask, j])
        per_n.append({"n": n, "slope": fit.exponent, "prefactor": fit.prefactor, "r2": fit.r2})
    top = per_n[-1]
    fits = {"slope_k": None, "slope_lambda": None, "slope_lambdak": None,
            "r2": top["r2"], "sweep": sweep, "n": top["n"], "per_n": per_n}
    fits[{"k": "slope_k", "lambda": "slope_lambda", "lambdak": "slope_lambdak"}[sweep]] = top["slope"]
    _write(out, "fits.json", json.dumps(fits, indent=2, sort_keys=True) + "\n", written)
    print(f"{sweep} sweep, n={top['n']}: slope {top['slope']:.4f} (r2 {top['r2']:.6f})")
    return written


def cmd_classify(cfg: dict, out: Path) -> list:
    from .ince import RationalODE, classify, parse_ode

    if cfg.get("equation"):
        ode = parse_ode(cfg["equation"])
    elif cfg.get("coeffs"):
        c = cfg["coeffs"]
        if isinstance(c, str):
            try:
                c = json.loads(Path(c).read_text()) if Path(c).is_file() else json.loads(c)
            except json.JSONDecodeError as exc:
                raise UsageError(f"bad coefficient JSON: {exc}") from None
        ode = RationalODE.from_dict(c)
    else:
        raise UsageError("give an equation string or --coeffs")
    rep = classify(ode)
    written = []
    _write(out, "report.json", rep.to_json() + "\n", written)
    print(rep.summary())
    return written


def cmd_orbit(params: ModelParams, cfg: dict, out: Path) -> list:
    from .classical import characteristic_time, darboux_to_ls, integrate_darboux, integrate_ls

    try:
        s0 = np.array([float(v) for v in str(cfg["state"]).split(",")])
    except ValueError:
        raise UsageError(f"bad --state {cfg['state']!r}") from None
    if s0.size != 6:
        raise UsageError("--state needs six comma-separated numbers")
    T = float(cfg["T"]) if cfg.get("T") is not None else float(cfg["periods"]) * characteristic_time(params)
    tol = float(cfg["tol"])
    traj = integrate_darboux(s0, params, T, tol=tol, save_every=int(cfg["save_every"]))
    summary = {"T": T, "tol": tol, "steps": traj.steps, "drift": traj.drift(params)}
    if cfg.get("two_route"):
        te = np.linspace(0.0, T, 101)
        a = integrate_darboux(s0, params, T, tol=tol, t_eval=te)
        b = integrate_ls(darboux_to_ls(s0, params), params, T, tol=tol, t_eval=te)
        summary["two_route_max_deviation"] = float(np.max(np.abs(darboux_to_ls(a.y, params) - b.y)))
    written = []
    _write(out, "trajectory.csv", traj.to_csv(params), written)
    _write(out, "drift.json", json.dumps(summary, indent=2, sort_keys=True) + "\n", written)
    print(json.dumps(summary["drift"], sort_keys=True))
    return written


def _jsonable(v):
    if isinstance(v, complex):
        return v.real if v.imag == 0 else [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def cmd_algebra(params: ModelParams, cfg: dict, out: Path) -> list:
    from .algebra import (build_generators, casimir_check, commutation_table,
                          heisenberg_check, verify_nilpotency)

    if params.lam == 0:
        raise UsageError("the algebra needs lambda != 0")
    exact = bool(cfg.get("exact"))
    gens = build_generators(params, exact=exact)
    relations = [{"relation": r["relation"], "matched_ordering": "unique", "residual": r["residual"]}
                 for r in commutation_table(gens, params)]
    heis = heisenberg_check(gens, params)
    relations += [{"relation": r["relation"], "matched_ordering": r["matched_ordering"],
                   "residual": r["residual"]} for r in heis]
    report = {"exact": exact, "relations": relations, "heisenberg": heis,
              "nilpotency": verify_nilpotency(gens), "casimir": casimir_check(gens, params)}
    written = []
    _write(out, "algebra.json", json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n", written)
    worst = max(r["residual"] for r in relations if r["matched_ordering"] != "none")
    print(f"{len(relations)} relations checked, worst residual {worst:.3g}")
    return written


# ---------------------------------------------------------------------------


def _fail(code: int, exc: BaseException, json_errors: bool) -> int:
    if json_errors:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc),
                                     "exit_code": code}) + "\n")
    else:
        sys.stderr.write(f"screwon: error: {exc}\n")
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    json_errors = "--json-errors" in argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            parser.print_help()
            return 2
        model, cfg = resolve_config(args)
        threads = _thread_count(args.threads)
        out = Path(args.out or Path("screwon-out") / args.command)
        out.mkdir(parents=True, exist_ok=True)
        seed = 0 if args.seed is None else int(args.seed)
        np.random.seed(seed)
        params = ModelParams.from_dict(model) if args.command != "classify" else None
        if args.command == "spectrum":
            written = cmd_spectrum(params, cfg, out, threads)
        elif args.command == "dispersion":
            written = cmd_dispersion(params, cfg, out, threads)
        elif args.command == "classify":
            written = cmd_classify(cfg, out)
        elif args.command == "orbit":
            written = cmd_orbit(params, cfg, out)
        else:
            written = cmd_algebra(params, cfg, out)
        manifest = {
            "tool": "screwon", "version": __version__, "command": args.command,
            "model": params.to_dict() if params is not None else None,
            "options": _jsonable(cfg), "seed": seed, "threads": threads,
            "jit": JIT_ENABLED, "outputs": written,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return 0
    except (UsageError, DomainError, ValueError) as exc:
        return _fail(2, exc, json_errors)
    except NumericalError as exc:
        return _fail(3, exc, json_errors)


if __name__ == "__main__":
    sys.exit(main())
