"""Command-line front end.

Exit codes: 0 on success, 1 for usage and configuration errors, 2 for
numerical failures (breakdown, non-convergence, positivity loss) and for a
``reproduce`` run with a failing criterion.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import alpha as A
from . import density as D
from . import euler_arnold as E
from . import experiments
from . import frflow as F
from . import io
from . import madelung as M
from . import oit
from . import spd as S
from .density import Density
from .errors import ConfigError, DensGeoError, NumericalError, PastBreakdown
from .grid import PeriodicGrid


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _out(args):
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _density(path):
    g, v = io.read_field(path)
    if np.iscomplexobj(v) or v.shape != g.shape:
        raise ConfigError(f"{path}: expected a real scalar field")
    return Density.normalized(g, v)


def _scalar(path, grid=None):
    g, v = io.read_field(path)
    if grid is not None and g != grid:
        raise ConfigError(f"{path}: grid {g} does not match {grid}")
    return g, v


def _threads():
    raw = os.environ.get("DENSGEO_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"DENSGEO_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def _emit(report, out_dir=None, name="report.json"):
    text = io.dumps(report)
    if out_dir is not None:
        (Path(out_dir) / name).write_text(text)
    sys.stdout.write(text)


# -- distance / geodesic -------------------------------------------------------------

DISTANCES = {
    "fisher-rao": D.fisher_rao_distance,
    "hellinger": D.hellinger_distance,
    "bhattacharyya": D.bhattacharyya,
    "wasserstein2": D.wasserstein2_1d,
}


def cmd_distance(args):
    lam, nu = _density(args.a), _density(args.b)
    if args.kind not in DISTANCES:
        raise ConfigError(f"unknown distance kind {args.kind!r}")
    _emit({"distance": DISTANCES[args.kind](lam, nu), "kind": args.kind},
          _out(args) if args.out_dir else None)


def cmd_geodesic(args):
    lam, nu = _density(args.a), _density(args.b)
    out = _out(args)
    files = []
    for k, t in enumerate(_floats(args.times)):
        p = out / f"geodesic_{k:03d}.csv"
        io.write_field(p, lam.grid, D.fisher_rao_geodesic(lam, nu, t).rho)
        files.append(p.name)
    _emit({"distance": D.fisher_rao_distance(lam, nu), "times": _floats(args.times),
           "files": files}, out)


# -- flows ----------------------------------------------------------------------------

def _default_grid(args):
    return PeriodicGrid(args.n, dim=args.dim)


def cmd_flow_fr(args):
    if args.h0:
        g, h0 = _scalar(args.h0)
        h0 = h0 - g.mean(h0)
    else:
        g = _default_grid(args)
        x = g.coords()
        h0 = np.cos(2 * np.pi * x) if g.dim == 1 else np.cos(2 * np.pi * x[0]) + 0.5 * np.cos(2 * np.pi * x[1])
    p = F.ExplicitSolutionParams.from_h0(g, h0)
    T = F.breakdown_time(p)
    t_end = args.t_end if args.t_end is not None else 0.5 * T
    out = _out(args)
    tr = F.integrate_ea_numeric(g, F.velocity_from_h(g, h0), args.dt, t_end,
                                record_every=1, stop_at_breakdown=True)
    ts = [s.t for s in tr.states]
    io.write_series(out / "series.csv", {
        "t": ts,
        "min_jac": [s.min_jacobian for s in tr.states],
        "C": tr.C[: len(ts)],
        "H": [0.5 * g.integrate(s.h ** 2) for s in tr.states],
    })
    files = ["series.csv"]
    for t in _floats(args.snapshots or ""):
        k = int(np.argmin(np.abs(np.array(ts) - t)))
        name = f"h_t{ts[k]:.6f}.csv"
        io.write_field(out / name, g, tr.states[k].h)
        files.append(name)
    s = tr.final
    report = {"breakdown_time": T, "kappa": p.kappa, "t_end": s.t,
              "numerical_breakdown": tr.breakdown,
              "C_drift": float(np.max(np.abs(np.array(tr.C) - tr.C[0]))),
              "files": files}
    if g.dim == 1 and tr.breakdown is None:
        report["explicit_h_error"] = float(np.max(np.abs(F.eulerian_to_lagrangian(s) - F.explicit_h(p, s.t))))
    _emit(report, out)
    if tr.breakdown is not None:
        # artifacts up to the breakdown are kept; the run still counts as a failure
        raise PastBreakdown(f"numerical breakdown at t = {tr.breakdown:.4f} before t_end = {t_end}")


def cmd_flow_ea(args):
    tag = E.InertiaTag.parse(args.inertia)
    if args.u0:
        g, u0 = _scalar(args.u0)
    else:
        g = PeriodicGrid(args.n)
        u0 = 0.1 * np.cos(2 * np.pi * g.x) + 0.05 * np.sin(4 * np.pi * g.x)
    out = _out(args)
    s0 = E.make_state(tag, g, u0)
    st, snaps = E.solve(tag, s0, args.dt, args.t_end, record_every=args.record_every)
    if snaps[-1] is not st:
        snaps.append(st)
    io.write_series(out / "series.csv", {
        "t": [s.t for s in snaps],
        "energy": [E.energy(tag, s) for s in snaps],
        "int_m": [g.integrate(s.m) for s in snaps],
        "ux_inf": [np.max(np.abs(g.derivative(s.u))) for s in snaps],
    })
    files = ["series.csv"]
    for t in _floats(args.snapshots or ""):
        k = int(np.argmin([abs(s.t - t) for s in snaps]))
        name = f"u_t{snaps[k].t:.6f}.csv"
        io.write_field(out / name, g, snaps[k].u)
        files.append(name)
    e = [E.energy(tag, s) for s in snaps]
    _emit({"inertia": tag.kind, "kappa": tag.kappa, "t_end": st.t,
           "energy_drift": max(e) - min(e), "files": files}, out)


# -- alpha ---------------------------------------------------------------------------

def cmd_alpha(args):
    out = _out(args)
    if args.op == "divergence":
        if not (args.a and args.b):
            raise ConfigError("alpha divergence needs --a and --b density files")
        xi = A.from_density(_density(args.a))
        eta = A.from_density(_density(args.b))
        _emit({"alpha": args.alpha, "divergence": A.divergence_alpha(args.alpha, xi, eta)}, out)
        return
    if args.v0:
        g, V0 = _scalar(args.v0)
    else:
        g = PeriodicGrid(args.n)
        V0 = 0.1 * np.sin(2 * np.pi * g.x) + 0.05 * (1 - np.cos(4 * np.pi * g.x))
    states = A.geodesic_alpha(args.alpha, A.BasepointDiffeo1D.identity(g), V0, args.dt,
                              args.t_end, record_every=args.record_every)
    cols = {"t": [s.t for s in states]}
    for j in range(g.n):
        cols[f"xi_{j}"] = [s.xi.xi[j] for s in states]
    io.write_series(out / "positions.csv", cols)
    files = ["positions.csv"]
    for t in _floats(args.snapshots or ""):
        k = int(np.argmin([abs(s.t - t) for s in states]))
        name = f"u_t{states[k].t:.6f}.csv"
        io.write_field(out / name, g, A.eulerian_velocity(states[k].xi, states[k].V))
        files.append(name)
    _emit({"alpha": args.alpha, "t_end": states[-1].t,
           "energy": [A.hdot_metric(states[0].xi, states[0].V, states[0].V),
                      A.hdot_metric(states[-1].xi, states[-1].V, states[-1].V)],
           "files": files}, out)


# -- oit ---------------------------------------------------------------------------------

def _diffeo(path):
    g, v = io.read_field(path)
    v = np.asarray(v)
    if g.dim == 1 and v.shape == g.shape:
        v = v[None]
    if v.shape != (g.dim,) + g.shape:
        raise ConfigError(f"{path}: expected displacement columns d x[, d y]")
    return oit.Diffeo(g, v)


def cmd_oit(args):
    out = _out(args)
    if args.phi:
        phi = _diffeo(args.phi)
        fr = oit.factorize(phi, dt=args.dt)
        g = phi.grid
        psi, eta = fr.psi, fr.eta
        report = {"theta": fr.theta, "info_distance": fr.info_distance,
                  "jac_eta_error": fr.jac_eta_error, "target_error": fr.target_error,
                  "recompose_error": fr.recompose_error}
    elif args.target:
        target = _density(args.target)
        g = target.grid
        lift = oit.lift_horizontal(target, dt=args.dt)
        psi, eta = lift.psi, oit.Diffeo.identity(g)
        report = {"theta": lift.theta, "info_distance": float(np.sqrt(g.volume) * lift.theta),
                  "jac_eta_error": 0.0, "target_error": oit.target_error(psi, target)}
    else:
        raise ConfigError("oit needs --target or --phi")
    io.write_vector_field(out / "psi.csv", g, psi.disp)
    io.write_vector_field(out / "eta.csv", g, eta.disp)
    report["files"] = ["psi.csv", "eta.csv"]
    _emit(report, out)


# -- spd ---------------------------------------------------------------------------------

def cmd_spd(args):
    rng = np.random.default_rng(args.seed)
    Amat = S.random_glplus(args.n, rng)
    Q, R = S.qr_polar_factorize(Amat, args.route, args.steps)
    Qh, Rh = S.householder_qr(Amat)
    report = {
        "n": args.n, "seed": args.seed, "route": args.route,
        "reconstruction": float(np.max(np.abs(Q @ R - Amat))),
        "orthogonality": float(np.max(np.abs(Q.T @ Q - np.eye(args.n)))),
        "det_Q": float(np.linalg.det(Q)),
        "lower_part_R": float(np.max(np.abs(np.tril(R, -1)))),
        "vs_cholesky": float(np.max(np.abs(R - S.cholesky_upper(Amat)))),
        "vs_householder": float(max(np.max(np.abs(Q - Qh)), np.max(np.abs(R - Rh)))),
    }
    _emit(report, _out(args) if args.out_dir else None)


# -- madelung -----------------------------------------------------------------------------

def cmd_madelung(args):
    out = _out(args)
    op = args.op
    if op == "fwd":
        if not (args.rho and args.theta):
            raise ConfigError("madelung fwd needs --rho and --theta")
        g, rho = _scalar(args.rho)
        _, theta = _scalar(args.theta, g)
        psi = M.madelung_fwd(M.CotangentDensity.from_fields(g, rho, theta))
        io.write_field(out / "psi.csv", g, psi.values)
        _emit({"norm2": psi.norm2(), "files": ["psi.csv"]}, out)
    elif op == "inv":
        if not args.psi:
            raise ConfigError("madelung inv needs --psi")
        g, v = _scalar(args.psi)
        s = M.madelung_inv(M.WaveFunction(g, v))
        io.write_field(out / "rho.csv", g, s.rho.rho)
        io.write_field(out / "theta.csv", g, s.theta)
        _emit({"winding": 0, "files": ["rho.csv", "theta.csv"]}, out)
    elif op == "2hs":
        g = PeriodicGrid(args.n)
        x = g.x
        u0 = 0.1 * np.sin(2 * np.pi * x) + 0.05 * (1 - np.cos(4 * np.pi * x))
        sig = args.sigma_amp * np.cos(2 * np.pi * x)
        tr = M.solve_2hs(g, u0, sig, args.dt, args.t_end, record_every=args.record_every)
        e = [tr.energy(k) for k in range(len(tr.times))]
        io.write_series(out / "series.csv", {"t": tr.times, "energy": e,
                                             "int_sigma": [g.integrate(s) for s in tr.sigma]})
        io.write_field(out / "u_final.csv", g, tr.u[-1])
        io.write_field(out / "sigma_final.csv", g, tr.sigma[-1])
        _emit({"energy_drift": max(e) - min(e), "t_end": float(tr.times[-1]),
               "files": ["series.csv", "u_final.csv", "sigma_final.csv"]}, out)
    elif op == "nls-check":
        g = PeriodicGrid(args.n)
        x = g.x
        s0 = M.CotangentDensity.from_fields(g, 1 + 0.05 * np.cos(2 * np.pi * x), 0.1 * np.sin(2 * np.pi * x))
        traj = M.nls_solve(M.madelung_fwd(s0), None, args.nonlinearity, args.dt, args.t_end,
                           kappa=args.kappa)
        rv, rr = M.hydrodynamic_residual(traj)
        io.write_field(out / "psi_final.csv", g, traj.psi[-1].values)
        _emit({"momentum_residual": rv, "continuity_residual": rr,
               "hydrodynamic_residual": max(rv, rr), "norm_drift": traj.norm_drift,
               "files": ["psi_final.csv"]}, out)
    else:
        raise ConfigError(f"unknown madelung operation {op!r}")


# -- reproduce / run ------------------------------------------------------------------------

def _run_one(number, seed):
    t0 = time.perf_counter()
    r = experiments.run(number, seed)
    return r, time.perf_counter() - t0


def cmd_reproduce(args):
    numbers = list(experiments.CRITERIA) if args.only is None else [args.only]
    for k in numbers:
        if k not in experiments.CRITERIA:
            raise ConfigError(f"unknown criterion {k}; choose 1-{len(experiments.CRITERIA)}")
    workers = min(_threads(), len(numbers))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_one, numbers, [args.seed] * len(numbers)))
    else:
        results = [_run_one(k, args.seed) for k in numbers]
    for r, _ in results:
        print(r.line(), file=sys.stderr)
    report = {"seed": args.seed, "criteria": [r.report() for r, _ in results],
              "all_passed": all(r.passed for r, _ in results)}
    if args.out_dir:
        out = _out(args)
        io.write_json(out / "report.json", report)
        io.write_json(out / "timing.json", {str(r.number): dt for r, dt in results})
    sys.stdout.write(io.dumps(report))
    return 0 if report["all_passed"] else 2


CONFIG_FIELDS = {"module", "operation", "grid", "params", "output_dir", "seed"}


def config_to_argv(cfg: dict):
    """Translate an experiment config into a command line."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    extra = set(cfg) - CONFIG_FIELDS
    if extra:
        raise ConfigError(f"unknown config field(s): {', '.join(sorted(extra))}")
    if "module" not in cfg:
        raise ConfigError("config field 'module' is required")
    module = cfg["module"]
    operation = cfg.get("operation")
    params = cfg.get("params", {}) or {}
    if not isinstance(params, dict):
        raise ConfigError("config field 'params' must be an object")
    argv = []
    ops = {
        "distance": None, "geodesic": None, "oit": None, "reproduce": None,
        "flow": ("fr", "ea"), "alpha": ("geodesic", "divergence"), "spd": ("qr",),
        "madelung": ("fwd", "inv", "2hs", "nls-check"),
    }
    if module not in ops:
        raise ConfigError(f"config field 'module': unknown module {module!r}")
    argv.append(module)
    if module == "distance":
        if operation is not None:
            if operation not in DISTANCES:
                raise ConfigError(f"config field 'operation': unknown operation {operation!r}")
            params = dict(params, kind=operation)
    elif ops[module] is not None:
        if operation not in ops[module]:
            raise ConfigError(f"config field 'operation': unknown operation {operation!r} "
                              f"for module {module!r}")
        argv.append(operation)
    elif operation is not None:
        raise ConfigError(f"config field 'operation': module {module!r} takes no operation")
    positional = [params.pop(k) for k in ("a", "b") if module in ("distance", "geodesic") and k in params]
    argv += [str(p) for p in positional]
    grid = cfg.get("grid") or {}
    if grid:
        if not isinstance(grid, dict) or set(grid) - {"dim", "n", "length"}:
            raise ConfigError("config field 'grid' must contain only dim, n, length")
        if grid.get("length", 1.0) != 1.0:
            raise ConfigError("config field 'grid.length': only length 1 is supported")
        if "n" in grid and module in ("flow", "alpha", "madelung"):
            params.setdefault("n", grid["n"])
        if "dim" in grid and module == "flow":
            params.setdefault("dim", grid["dim"])
    if "seed" in cfg and module in ("spd", "reproduce"):
        params.setdefault("seed", cfg["seed"])
    if cfg.get("output_dir"):
        params.setdefault("out_dir", cfg["output_dir"])
    for k, v in params.items():
        flag = "--" + k.replace("_", "-")
        if isinstance(v, bool):
            if v:
                argv.append(flag)
        else:
            argv += [flag, str(v)]
    return argv


def cmd_run(args):
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read config {args.config}: {err}") from None
    return dispatch(config_to_argv(cfg))


# -- parser ---------------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="densgeo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out_default="."):
        sp.add_argument("--out-dir", default=out_default, help="output directory")

    sp = sub.add_parser("distance", help="distance between two density CSV files")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--kind", default="fisher-rao", choices=sorted(DISTANCES))
    common(sp, None)
    sp.set_defaults(func=cmd_distance)

    sp = sub.add_parser("geodesic", help="sample the Fisher-Rao geodesic between two densities")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("--times", default="0,0.25,0.5,0.75,1")
    common(sp)
    sp.set_defaults(func=cmd_geodesic)

    flow = sub.add_parser("flow", help="Euler-Arnold flows").add_subparsers(
        dest="flow", required=True, parser_class=_Parser)
    sp = flow.add_parser("fr", help="Fisher-Rao (homogeneous H1) flow of the divergence")
    sp.add_argument("--h0", help="initial divergence CSV (default cos(2 pi x))")
    sp.add_argument("--n", type=int, default=128)
    sp.add_argument("--dim", type=int, default=1, choices=(1, 2))
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--t-end", type=float, default=None, help="default: half the breakdown time")
    sp.add_argument("--snapshots", default="", help="comma-separated times")
    common(sp)
    sp.set_defaults(func=cmd_flow_fr)
    sp = flow.add_parser("ea", help="Euler-Arnold equation for an inertia operator")
    sp.add_argument("--inertia", default="h1", help="l2 | h1 | h1ext:KAPPA | hdot")
    sp.add_argument("--u0", help="initial velocity CSV")
    sp.add_argument("--n", type=int, default=256)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--t-end", type=float, default=0.5)
    sp.add_argument("--record-every", type=int, default=10)
    sp.add_argument("--snapshots", default="")
    common(sp)
    sp.set_defaults(func=cmd_flow_ea)

    sp = sub.add_parser("alpha", help="alpha-connection geodesics and divergences")
    sp.add_argument("op", choices=("geodesic", "divergence"))
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--a", help="first density CSV (divergence)")
    sp.add_argument("--b", help="second density CSV (divergence)")
    sp.add_argument("--v0", help="initial Lagrangian velocity CSV (geodesic)")
    sp.add_argument("--n", type=int, default=256)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--t-end", type=float, default=0.5)
    sp.add_argument("--record-every", type=int, default=10)
    sp.add_argument("--snapshots", default="")
    common(sp)
    sp.set_defaults(func=cmd_alpha)

    sp = sub.add_parser("oit", help="optimal information transport")
    sp.add_argument("--target", help="target density CSV")
    sp.add_argument("--phi", help="diffeomorphism displacement CSV to factorize")
    sp.add_argument("--dt", type=float, default=1e-2)
    common(sp)
    sp.set_defaults(func=cmd_oit)

    sp = sub.add_parser("spd", help="QR decomposition as a polar factorization")
    sp.add_argument("op", choices=("qr",))
    sp.add_argument("--n", type=int, default=6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--route", default="ode", choices=("ode", "cholesky"))
    sp.add_argument("--steps", type=int, default=200)
    common(sp, None)
    sp.set_defaults(func=cmd_spd)

    sp = sub.add_parser("madelung", help="Madelung transform and related checks")
    sp.add_argument("op", choices=("fwd", "inv", "2hs", "nls-check"))
    sp.add_argument("--rho")
    sp.add_argument("--theta")
    sp.add_argument("--psi")
    sp.add_argument("--n", type=int, default=256)
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--t-end", type=float, default=None)
    sp.add_argument("--record-every", type=int, default=10)
    sp.add_argument("--sigma-amp", type=float, default=0.2)
    sp.add_argument("--nonlinearity", default="cubic", choices=M.NONLINEARITIES)
    sp.add_argument("--kappa", type=float, default=1.0)
    common(sp)
    sp.set_defaults(func=cmd_madelung)

    sp = sub.add_parser("reproduce", help="run the acceptance experiments")
    sp.add_argument("--only", type=int, default=None, help="run a single criterion")
    sp.add_argument("--seed", type=int, default=0)
    common(sp, None)
    sp.set_defaults(func=cmd_reproduce)

    sp = sub.add_parser("run", help="run an experiment described by a JSON config")
    sp.add_argument("config")
    sp.set_defaults(func=cmd_run)
    return p


def dispatch(argv):
    args = build_parser().parse_args(argv)
    if args.command == "madelung":
        defaults = {"2hs": (1e-3, 0.5), "nls-check": (1e-4, 0.05)}.get(args.op, (None, None))
        args.dt = args.dt if args.dt is not None else defaults[0]
        args.t_end = args.t_end if args.t_end is not None else defaults[1]
    rc = args.func(args)
    return 0 if rc is None else rc


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        return dispatch(argv)
    except ConfigError as err:
        print(f"densgeo: error: {err}", file=sys.stderr)
        return 1
    except NumericalError as err:
        print(f"densgeo: numerical failure ({type(err).__name__}): {err}", file=sys.stderr)
        return 2
    except (DensGeoError, OSError) as err:
        print(f"densgeo: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
