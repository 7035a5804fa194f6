"""Structural and numerical self-checks for one walk.

Each check returns a :class:`Check` whose ``id`` names the property it
certifies; the CLI ``validate`` command prints them as a table.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cavern import CavernError, cavern_of_path
from .config import RunConfig
from .curve import (CurveError, GreenStructure, block_spectra, classify_f_radius, find_R,
                    second_derivative, second_derivative_fd, tangent_at_R)
from .digraph import build_digraph, condense, grading, grading_violations
from .group_tree import IDENTITY
from .oracle import dp_full, dp_restricted_all, sample_restricted_path
from .walk_kernel import Irreducibility, check_irreducible, path_length_residue, period
from .xi_psi import build_psi


@dataclass(frozen=True)
class Check:
    id: str
    passed: bool
    detail: str


def run_checks(cfg: RunConfig, series_order: int = 10, path_samples: int = 20) -> list[Check]:
    mu = cfg.measure
    g = mu.group
    out: list[Check] = []

    def add(cid, ok, detail=""):
        out.append(Check(cid, bool(ok), detail))

    irr = check_irreducible(mu)
    add("irreducible_kernel", irr is Irreducibility.YES, irr.value)
    if irr is not Irreducibility.YES:
        return out
    d = period(mu)
    add("period_stable", d >= 1, f"d={d}")

    system = build_psi(mu)
    series = system.series_iterate(series_order)
    mismatched = 0
    for a in {o.a for o in system.orbits}:
        tables = dp_restricted_all(mu, a, IDENTITY, series_order)
        for o in system.orbits:
            if o.a == a and list(tables[o.b].coefficients) != series[o.id]:
                mismatched += 1
    add("series_matches_path_count", mismatched == 0,
        f"{len(system)} orbits, order {series_order}, {mismatched} mismatches")

    digraph = build_digraph(system)
    cond = condense(digraph)
    add("sink_unique", len(cond.sinks) == 1, f"{len(cond.components)} components")
    grades = grading(system)
    sink = set(cond.components[cond.sinks[0]]) if len(cond.sinks) == 1 else set()
    wrong = [i for i in range(len(system)) if grades.is_infinite(i) != (i in sink)]
    add("excursion_class_matches_sink", not wrong, f"mismatches: {wrong}")
    viol = grading_violations(digraph, grades)
    add("grading_monotone", not viol, f"violations: {viol}")

    rad = find_R(system, tol=max(cfg.tol, 1e-10), r_max=cfg.r_max)
    add("radius_perron_identity", abs(rad.R * rad.rho - 1) <= 1e-9,
        f"R={rad.R!r} |R*rho-1|={abs(rad.R * rad.rho - 1):.2e}")
    try:
        report = block_spectra(system, rad.point, cond)
    except CurveError as exc:
        add("jacobian_block_triangular", False, str(exc))
        return out
    others = [rad.R * r for i, r in enumerate(report.block_spectra) if i not in cond.sinks]
    add("jacobian_block_triangular", True, f"{len(cond.components)} diagonal blocks")
    add("non_sink_blocks_subcritical", all(v < 1 - 1e-9 for v in others),
        f"max R*rho over non-sink blocks: {max(others) if others else 0:.6f}")

    tangent = tangent_at_R(system, rad)
    finite = [i for i in range(len(system)) if i not in sink]
    add("perron_vector_support",
        np.all(np.abs(tangent.nu[finite]) < 1e-8) and np.all(tangent.nu[list(sink)] > 0),
        f"eigen residual {tangent.eigen_residual:.1e}")
    add("lambda_derivative_zero", abs(tangent.lambda_prime) < 1e-10,
        f"{tangent.lambda_prime:.2e}")
    r2 = second_derivative(system, rad, tangent)
    r2fd = second_derivative_fd(system, rad, tangent)
    add("second_derivative_nonzero", abs(r2) > 1e-6 and abs(r2 - r2fd) <= 1e-4 * abs(r2),
        f"r''={r2:.10f} fd={r2fd:.10f}")

    green = GreenStructure(system)
    dg = [green.directional("g", x, IDENTITY, rad.R, rad.point.J, tangent.nu)
          for x in g.ball(IDENTITY, 1)]
    add("green_derivative_nonzero", min(abs(v) for v in dg) > 1e-8,
        f"min |Dg| = {min(abs(v) for v in dg):.3e}")
    agree = True
    for x in g.ball(IDENTITY, 2):
        c = classify_f_radius(system, x, IDENTITY, rad, tangent, green)
        agree &= c.beyond_R == (abs(c.derivative) < 1e-8)
    add("f_radius_dichotomy", agree, "")

    rng = np.random.default_rng(cfg.seed)
    bad = 0
    for i in range(path_samples):
        o = system.orbits[i % len(system)]
        path = sample_restricted_path(mu, o.a, o.b, IDENTITY, 10, rng)
        try:
            lab = cavern_of_path(mu, path, IDENTITY, system)
        except CavernError:
            bad += 1
            continue
        if any(v is None for v in lab.orbit_ids.values()):
            bad += 1
            continue
        for child, parent in lab.tree.edges:
            if (lab.orbit_ids[child], lab.orbit_ids[parent]) not in digraph.edges:
                bad += 1
                break
    add("cavern_labels_valid", bad == 0, f"{path_samples} sampled paths, {bad} bad")

    zeros_ok = True
    for x in g.ball(IDENTITY, 2):
        r = path_length_residue(mu, IDENTITY, x, d)
        table = dp_full(mu, IDENTITY, x, 12)
        zeros_ok &= all(c == 0 for n, c in enumerate(table.coefficients) if n % d != r)
    add("residue_class_zeros", zeros_ok, f"d={d}")
    return out
