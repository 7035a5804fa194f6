"""Command line interface.

Exit codes: 0 success, 1 computation error, 2 configuration error,
3 a structural or numerical invariant failed.

CSV columns:

* ``radius``: quantity,value,tolerance
* ``asymptotics``: n,p_n,fit_residual
* ``green``: z,x,y,G,F
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from . import curve, digraph as dg
from .cavern import CavernError, build_cavern, cavern_of_path
from .config import ConfigError, RunConfig, load_config
from .group_tree import IDENTITY
from .oracle import dp_full, dp_isotropic, fit_asymptotics, is_radial
from .validate import run_checks
from .walk_kernel import path_length_residue, period
from .xi_psi import build_psi

COMMANDS = ("xi", "psi", "digraph", "classify", "cavern", "radius", "green",
            "spectral", "derivatives", "asymptotics", "validate")


class InvariantViolation(RuntimeError):
    pass


def _parse_z(text: str | None):
    if text is None:
        return None
    parts = [float(p) for p in text.split(",")]
    if len(parts) == 1:
        return parts[0]
    if len(parts) == 2:
        return complex(parts[0], parts[1])
    raise ConfigError(f"bad --z value {text!r}")


def _fmt(v) -> str:
    if isinstance(v, complex) or np.iscomplexobj(v):
        v = complex(v)
        if v.imag == 0:
            return repr(v.real)
        return f"{v.real!r}{v.imag:+.17g}j"
    return repr(float(v))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit_csv(args, header, rows, out):
    text = _csv_text(header, rows)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(text)
    out.write(text)


# -- commands --------------------------------------------------------------


def cmd_xi(cfg, args, out):
    system = build_psi(cfg.measure)
    out.write(f"# {len(system)} orbits (a,b)_e, truncation radius {system.truncation}\n")
    for o in system.orbits:
        out.write(f"{o.id}: {system.label(o.id)}\n")
    return 0


def cmd_psi(cfg, args, out):
    system = build_psi(cfg.measure)
    if args.dump:
        out.write(system.dump() + "\n")
    else:
        degs = [len(m.factors) for m in system.monomials]
        out.write(f"orbits = {len(system)}\nmonomials = {len(system.monomials)}\n"
                  f"max_degree = {max(degs) if degs else 0}\n")
    return 0


def cmd_digraph(cfg, args, out):
    system = build_psi(cfg.measure)
    graph = dg.build_digraph(system)
    cond = dg.condense(graph)
    out.write(f"vertices = {len(system)}\nedges = {len(graph.edges)}\n"
              f"components = {len(cond.components)}\n")
    for i, comp in enumerate(cond.components):
        tag = " (sink)" if i in cond.sinks else ""
        out.write(f"scc{i}{tag}: {' '.join(map(str, comp))}\n")
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(dg.to_dot(graph, cond) + "\n")
    if len(cond.sinks) != 1:
        raise InvariantViolation("condensation has more than one sink")
    return 0


def cmd_classify(cfg, args, out):
    system = build_psi(cfg.measure)
    cond = dg.condense(dg.build_digraph(system))
    grades = dg.grading(system)
    sink = set(cond.components[cond.sinks[0]])
    out.write(f"# stagnation bound M = {grades.bound}\n")
    mismatch = []
    for o in system.orbits:
        level = grades.levels[o.id]
        cls = "infinite" if level is None else f"finite({level})"
        out.write(f"{o.id}: {system.label(o.id)} {cls} scc{cond.component_of[o.id]}"
                  f"{' sink' if o.id in sink else ''}\n")
        if (level is None) != (o.id in sink):
            mismatch.append(o.id)
    if mismatch:
        raise InvariantViolation(f"classification differs from sink membership: {mismatch}")
    return 0


def cmd_cavern(cfg, args, out):
    g = cfg.group
    try:
        if args.path:
            path = [g.parse(w) for w in args.path.split(",")]
            y = g.parse(args.y) if args.y else IDENTITY
            system = build_psi(cfg.measure)
            lab = cavern_of_path(cfg.measure, path, y, system)
            tree, labels = lab.tree, lab.label_text(system)
        elif args.heights:
            tree = build_cavern([int(v) for v in args.heights.split(",")])
            labels = None
        else:
            raise ConfigError("cavern needs --path or --heights")
    except CavernError as exc:
        raise ConfigError(str(exc)) from exc
    out.write(tree.render() + "\n")
    dot = tree.to_dot(labels)
    if args.dot:
        with open(args.dot, "w") as fh:
            fh.write(dot + "\n")
    else:
        out.write(dot + "\n")
    return 0


def _radius(cfg):
    system = build_psi(cfg.measure)
    return system, curve.find_R(system, tol=max(cfg.tol, 1e-10), r_max=cfg.r_max)


def cmd_radius(cfg, args, out):
    system, rad = _radius(cfg)
    J = rad.point.J
    out.write(f"R = {rad.R!r}\n")
    rows = [("R", repr(rad.R), repr(cfg.tol)),
            ("rho", repr(rad.rho), repr(cfg.tol)),
            ("R_rho_minus_1", repr(rad.R * rad.rho - 1), repr(cfg.tol)),
            ("v_R_min", repr(float(J.min())), repr(cfg.tol)),
            ("v_R_max", repr(float(J.max())), repr(cfg.tol)),
            ("residual", repr(rad.point.residual), repr(cfg.tol))]
    _emit_csv(args, ("quantity", "value", "tolerance"), rows, out)
    if abs(rad.R * rad.rho - 1) > 1e-9:
        raise InvariantViolation("R * rho differs from 1")
    return 0


def cmd_green(cfg, args, out):
    g = cfg.group
    system = build_psi(cfg.measure)
    z = _parse_z(args.z)
    if z is None:
        z = 1.0
    x = g.parse(args.x) if args.x else IDENTITY
    y = g.parse(args.y) if args.y else IDENTITY
    point = curve.solve_v(system, z, tol=cfg.tol)
    green = curve.GreenStructure(system)
    zz = point.z.real if point.z.imag == 0 else point.z
    G = green.g(x, y, zz, point.J)
    F = green.f(x, y, zz, point.J)
    _emit_csv(args, ("z", "x", "y", "G", "F"),
              [(_fmt(z), g.format(x), g.format(y), _fmt(G), _fmt(F))], out)
    return 0


def cmd_spectral(cfg, args, out):
    system, rad = _radius(cfg)
    z = _parse_z(args.z)
    point = rad.point if z is None else curve.solve_v(system, z, tol=cfg.tol)
    report = curve.block_spectra(system, point)
    cond = report.condensation
    zabs = abs(point.z)
    out.write(f"z = {_fmt(point.z)}\nrho = {report.rho!r}\n|z|*rho = {zabs * report.rho!r}\n")
    for i, r in enumerate(report.block_spectra):
        tag = " sink" if i in cond.sinks else ""
        out.write(f"block scc{i}{tag}: rho = {r!r}, |z|*rho = {zabs * r!r}\n")
    if z is None:
        tangent = curve.tangent_at_R(system, rad)
        out.write("nu = " + " ".join(f"{v:.12g}" for v in tangent.nu) + "\n")
        out.write("u = " + " ".join(f"{v:.12g}" for v in tangent.u) + "\n")
        others = [rad.R * r for i, r in enumerate(report.block_spectra) if i not in cond.sinks]
        if any(v >= 1 for v in others):
            raise InvariantViolation("a non-sink block is critical at R")
    return 0


def cmd_derivatives(cfg, args, out):
    g = cfg.group
    system, rad = _radius(cfg)
    tangent = curve.tangent_at_R(system, rad)
    r2 = curve.second_derivative(system, rad, tangent)
    r2fd = curve.second_derivative_fd(system, rad, tangent)
    green = curve.GreenStructure(system)
    out.write(f"lambda_prime = {tangent.lambda_prime!r}\n")
    out.write(f"r_second = {r2!r}\nr_second_fd = {r2fd!r}\n")
    out.write("# normalisation: nu has unit sup-norm\n")
    failed = abs(tangent.lambda_prime) > 1e-10 or abs(r2) < 1e-6
    for x in g.ball(IDENTITY, 2):
        dgv = green.directional("g", x, IDENTITY, rad.R, rad.point.J, tangent.nu)
        c = curve.classify_f_radius(system, x, IDENTITY, rad, tangent, green)
        out.write(f"x={g.format(x)} Dg={dgv!r} Df={c.derivative!r} {c.label}\n")
        failed |= abs(dgv) <= 1e-8 or c.beyond_R != (abs(c.derivative) < 1e-8)
    if failed:
        raise InvariantViolation("derivative checks failed")
    return 0


def cmd_asymptotics(cfg, args, out):
    mu = cfg.measure
    system, rad = _radius(cfg)
    d = period(mu)
    if is_radial(mu):
        nmax = args.nmax or 10000
        table = dp_isotropic(mu, nmax)
        logs = table.logs
    else:
        nmax = args.nmax or 16
        table = dp_full(mu, IDENTITY, IDENTITY, nmax)
        logs = np.array([math.log(c) if c > 0 else -np.inf for c in table.coefficients])
        table = type(table)(table.coefficients, table.exact, logs)
    fit = fit_asymptotics(table, d, 0)
    tangent = curve.tangent_at_R(system, rad)
    r2 = curve.second_derivative(system, rad, tangent)
    lc = curve.leading_constant(system, IDENTITY, IDENTITY, rad, tangent, r2)
    out.write(f"R_fit = {fit.R!r}\nexponent_fit = {fit.exponent!r}\nC_fit = {fit.C_pinned!r}\n"
              f"C_pred = {lc.C!r}\nR = {rad.R!r}\nperiod = {d}\n")
    rows = []
    for n in fit.ns:
        model = math.log(fit.C) - n * math.log(fit.R) + fit.exponent * math.log(n)
        rows.append((int(n), repr(float(math.exp(logs[n]))), repr(float(logs[n] - model))))
    text = _csv_text(("n", "p_n", "fit_residual"), rows)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(text)
    return 0


def cmd_validate(cfg, args, out):
    checks = run_checks(cfg)
    width = max(len(c.id) for c in checks)
    for c in checks:
        out.write(f"{c.id:<{width}}  {'PASS' if c.passed else 'FAIL'}  {c.detail}\n")
    failed = [c.id for c in checks if not c.passed]
    out.write(f"# {len(checks) - len(failed)}/{len(checks)} checks passed\n")
    if failed:
        raise InvariantViolation(", ".join(failed))
    return 0


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="treewalk", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", default="nn3",
                   help="INI file or bundled name (nn3, w1, w2, w3, f2)")
    p.add_argument("--tol", type=float)
    p.add_argument("--nmax", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--dot")
    p.add_argument("--csv")
    p.add_argument("--z", help="RE or RE,IM")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--dump", action="store_true", help="psi: print every equation")
    p.add_argument("--path", help="cavern: comma separated vertices")
    p.add_argument("--heights", help="cavern: comma separated profile")
    return p


def dispatch(command: str, cfg: RunConfig, args, out=None) -> int:
    out = sys.stdout if out is None else out
    if command not in HANDLERS:
        raise ConfigError(f"unknown command {command!r}")
    return HANDLERS[command](cfg, args, out)


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = load_config(args.config).with_overrides(tol=args.tol, nmax=args.nmax, seed=args.seed)
        return dispatch(args.command, cfg, args, out)
    except ConfigError as exc:
        err.write(f"config error: {exc}\n")
        return 2
    except InvariantViolation as exc:
        err.write(f"invariant violated: {exc}\n")
        return 3
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        err.write(f"computation error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
