"""Command-line interface: ``giantatoms <command> --config run.cfg``.

Exit status is 0 on success, 1 for configuration errors and 2 for numerical
failures (stability guard, missing steady state, infeasible design).
Scans and spectra run on GIANTATOMS_THREADS worker threads (default 1); rows
are always written in parameter order.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .cascade import build_slh, slh_coefficients, transmission_reflection
from .coefficients import coefficient_set
from .config import (ConfigError, RangeConfig, config_from_geometry, dump_config,
                     fmt, load_config, parse_number)
from .designer import InfeasibleDesignError, design_all_to_all_3, design_chain, verify_decoherence_free
from .geometry import classify_pair, two_atom_setup
from .operators import MasterEquationGenerator, dag, product_state, sigma_minus, sigma_z
from .simulator import NumericalError, StabilityError, evolve, purity
from .slh import DriveSpec, attach_drive

THREADS_ENV = "GIANTATOMS_THREADS"
SCAN_HEADER = ["phi", "g", "Gamma_a", "Gamma_b", "Gamma_coll", "delta_omega_a", "delta_omega_b"]
SPECTRUM_HEADER = ["Delta", "T", "R", "arg_t", "arg_r"]


def n_threads():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def parallel_map(fn, items):
    items = list(items)
    workers = n_threads()
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def to_csv(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    return buf.getvalue()


def coeffs_table(geometry, method="closed"):
    cs = slh_coefficients(geometry) if method == "slh" else coefficient_set(geometry)
    labels = geometry.labels
    lines = [f"{'atom':<6} {'omega':>22} {'delta_omega':>22} {'omega_prime':>22} {'Gamma':>22}"]
    for j, lbl in enumerate(labels):
        lines.append(f"{lbl:<6} {cs.omega[j]:>22.15g} {cs.delta_omega[j]:>22.15g} "
                     f"{cs.omega_prime[j]:>22.15g} {cs.gamma_coll[j, j]:>22.15g}")
    for name, mat in (("g", cs.g), ("Gamma_coll", cs.gamma_coll)):
        lines.append("")
        lines.append(f"{name} (j, k)")
        lines.append(" " * 6 + " ".join(f"{lbl:>22}" for lbl in labels))
        for j, lbl in enumerate(labels):
            cells = []
            for k in range(len(labels)):
                cells.append(f"{'-':>22}" if j == k else f"{mat[j, k]:>22.15g}")
            lines.append(f"{lbl:<6} " + " ".join(cells))
    rows = []
    for j, lbl in enumerate(labels):
        for name, val in (("omega", cs.omega[j]), ("delta_omega", cs.delta_omega[j]),
                          ("omega_prime", cs.omega_prime[j]), ("Gamma", cs.gamma_coll[j, j])):
            rows.append([name, lbl, "", val])
    for j in range(len(labels)):
        for k in range(j + 1, len(labels)):
            rows.append(["g", labels[j], labels[k], cs.g[j, k]])
            rows.append(["Gamma_coll", labels[j], labels[k], cs.gamma_coll[j, k]])
    return "\n".join(lines) + "\n", to_csv(["quantity", "j", "k", "value"], rows)


def scan_geometry(geometry, phi):
    """Set every gap phase to phi (mirror: the atom sits phi/2 from the mirror)."""
    mirror = phi / 2 if geometry.has_mirror else None
    return geometry.with_gap_phases([phi] * (geometry.n_points - 1), mirror=mirror)


def scan_rows(geometry, values):
    if geometry.n_atoms != 2:
        raise ConfigError(f"scan needs exactly two atoms, got {geometry.n_atoms}")

    def row(phi):
        cs = coefficient_set(scan_geometry(geometry, phi))
        G = cs.gamma_coll
        return [phi, cs.g[0, 1], G[0, 0], G[1, 1], G[0, 1], cs.delta_omega[0], cs.delta_omega[1]]

    return parallel_map(row, values)


def cmd_scan(geometry, scan):
    if scan.parameter != "phi":
        raise ConfigError(f"unknown scan parameter {scan.parameter!r} (only 'phi' is supported)")
    return to_csv(SCAN_HEADER, scan_rows(geometry, scan.values()))


def observable_ops(names, geometry):
    n = geometry.n_atoms
    labels = list(geometry.labels)
    ops = {}
    for name in names:
        if name == "purity":
            ops[name] = purity
        elif name == "trace":
            ops[name] = lambda r: float(np.trace(r).real)
        elif name.startswith("pop_") and name[4:] in labels:
            sm = sigma_minus(labels.index(name[4:]), n)
            ops[name] = dag(sm) @ sm
        elif name.startswith("sz_") and name[3:] in labels:
            ops[name] = sigma_z(labels.index(name[3:]), n)
        elif name.startswith("P_") and len(name) == 2 + n and not set(name[2:]) - set("ge"):
            ops[name] = product_state(name[2:])
        else:
            raise ConfigError(f"unknown observable {name!r} (use pop_<atom>, sz_<atom>, "
                              f"P_<{n} letters g/e>, purity or trace)")
    return ops


def simulation_generator(geometry, drive=None):
    g = build_slh(geometry)
    if drive is not None:
        g = attach_drive(g, DriveSpec(drive.alpha, drive.omega_d, drive.port))
    return MasterEquationGenerator(g.H, tuple(g.L))


def cmd_simulate(cfg):
    sim = cfg.simulation
    if sim is None:
        raise ConfigError("missing [simulation] section", path=cfg.path)
    geometry = cfg.geometry()
    line = cfg.section_lines.get("simulation")
    if len(sim.rho0) != geometry.n_atoms:
        raise ConfigError(f"rho0 {sim.rho0!r} does not match {geometry.n_atoms} atoms", line, cfg.path)
    if not sim.t_final > 0:
        raise ConfigError("t_final must be positive", line, cfg.path)
    try:
        obs = observable_ops(sim.observables, geometry)
    except ConfigError as exc:
        raise ConfigError(exc.message, line, cfg.path) from None
    gen = simulation_generator(geometry, cfg.drive)
    traj = evolve(product_state(sim.rho0), gen, sim.t_final, sim.dt, obs,
                  store_states=False, record_every=sim.output_every)
    names = list(obs)
    rows = [[t] + [traj.observables[k][i] for k in names] for i, t in enumerate(traj.times)]
    return to_csv(["t"] + names, rows)


def cmd_spectrum(cfg):
    drive = cfg.drive
    if drive is None:
        raise ConfigError("missing [drive] section", path=cfg.path)
    if cfg.spectrum is None:
        raise ConfigError("missing [spectrum] section", path=cfg.path)
    geometry = cfg.geometry()
    if geometry.has_mirror:
        raise ConfigError("spectrum needs an open waveguide (no mirror)",
                          cfg.section_lines.get("geometry"), cfg.path)
    try:
        deltas = cfg.spectrum.values()
    except ConfigError as exc:
        raise ConfigError(exc.message, cfg.section_lines.get("spectrum"), cfg.path) from None
    w0 = geometry.omegas[0]

    def row(delta):
        res = transmission_reflection(geometry, DriveSpec(drive.alpha, w0 + delta, drive.port))
        return [delta, abs(res.t) ** 2, abs(res.r) ** 2, float(np.angle(res.t)),
                float(np.angle(res.r))]

    return to_csv(SPECTRUM_HEADER, parallel_map(row, deltas))


def design_report(solution):
    rep = verify_decoherence_free(solution.geometry)
    labels = solution.geometry.labels
    decay = max(solution.residual["max_gamma"], solution.residual["max_gamma_coll"])
    lines = [f"{len(rep.protected_pairs)} protected pairs, residual decay {decay:.3g}",
             solution.summary()]
    lines.append("gap phases: " + ", ".join(fmt(p) for p in solution.gap_phases))
    n = len(labels)
    for j in range(n):
        for k in range(j + 1, n):
            lines.append(f"g_{labels[j]}{labels[k]} = {solution.couplings[j, k]:.15g}")
    lines += rep.lines(labels)
    return "\n".join(lines) + "\n"


def cmd_classify(geometry):
    rep = verify_decoherence_free(geometry)
    labels = geometry.labels
    lines = [f"order: {geometry.order_string()}"]
    for j in range(geometry.n_atoms):
        lines.append(f"Gamma_{labels[j]} = {rep.gamma[j]:.15g}")
    for j in range(geometry.n_atoms):
        for k in range(j + 1, geometry.n_atoms):
            lines.append(f"{labels[j]}-{labels[k]}: {classify_pair(geometry, j, k)}, "
                         f"g = {rep.g[j, k]:.15g}, Gamma_coll = {rep.gamma_coll[j, k]:.15g}")
    lines.append(f"{len(rep.protected_pairs)} protected pairs")
    lines += rep.lines(labels)
    return "\n".join(lines) + "\n"


def _floats(text):
    return [parse_number(v) for v in text.split(",") if v.strip()]


def _rates(text, n):
    vals = _floats(text)
    if len(vals) == 1:
        return vals * n
    if len(vals) != n:
        raise ConfigError(f"expected 1 or {n} rates, got {len(vals)}")
    return vals


def _write(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _geometry(args):
    if getattr(args, "setup", None):
        return two_atom_setup(args.setup, args.phi, args.gamma)
    if not args.config:
        raise ConfigError("--config is required")
    return load_config(args.config).geometry()


def build_parser():
    p = argparse.ArgumentParser(prog="giantatoms",
                                description="Giant atoms in waveguide QED: coefficients, "
                                            "dynamics, scattering and design.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required=True):
        sp.add_argument("--config", required=config_required, help="run configuration file")
        sp.add_argument("--out", help="output path (default: standard output)")
        sp.add_argument("--format", choices=["csv"], default="csv")
        return sp

    c = common(sub.add_parser("coeffs", help="master-equation coefficient table"), False)
    c.add_argument("--method", choices=["closed", "slh"], default="closed",
                   help="closed-form sums or SLH network projection")
    c.add_argument("--setup", help="two-atom setup instead of --config "
                                   "(small, mirror, separate, braided, nested)")
    c.add_argument("--phi", type=parse_number, default=math.pi / 2)
    c.add_argument("--gamma", type=parse_number, default=1.0)

    s = common(sub.add_parser("scan", help="coefficients versus common gap phase (CSV)"), False)
    s.add_argument("--setup", help="two-atom setup instead of --config")
    s.add_argument("--gamma", type=parse_number, default=1.0)
    s.add_argument("--parameter", default=None)
    s.add_argument("--start", type=parse_number)
    s.add_argument("--stop", type=parse_number)
    s.add_argument("--step", type=parse_number)

    common(sub.add_parser("simulate", help="time evolution of observables (CSV)"))
    common(sub.add_parser("spectrum", help="transmission and reflection spectrum (CSV)"))
    common(sub.add_parser("classify", help="pair topologies and protected interactions"))

    d = sub.add_parser("design", help="decoherence-free inverse design")
    dsub = d.add_subparsers(dest="design_kind", required=True)
    ch = dsub.add_parser("chain", help="braided chain with nearest-neighbour couplings")
    ch.add_argument("--n", type=int, default=None, help="number of atoms")
    ch.add_argument("--g", required=True, help="comma-separated couplings g_{j,j+1}")
    ch.add_argument("--gamma", default="1.0", help="one rate or one per atom")
    ch.add_argument("--out", help="write the designed configuration here")
    a3 = dsub.add_parser("all3", help="three atoms with all-to-all couplings")
    a3.add_argument("--pattern", default="all-equal", help="all-equal or one-flipped")
    a3.add_argument("--gamma", default="1.0", help="one rate or three")
    a3.add_argument("--out", help="write the designed configuration here")
    return p


def run(args):
    if args.command == "coeffs":
        table, csv = coeffs_table(_geometry(args), args.method)
        sys.stdout.write(table)
        if args.out:
            _write(csv, args.out)
    elif args.command == "scan":
        if args.setup:
            geometry = two_atom_setup(args.setup, 0.0, args.gamma)
            scan = RangeConfig()
        else:
            if not args.config:
                raise ConfigError("--config or --setup is required")
            cfg = load_config(args.config)
            geometry = cfg.geometry()
            scan = cfg.scan or RangeConfig()
        for key in ("parameter", "start", "stop", "step"):
            if getattr(args, key) is not None:
                setattr(scan, key, getattr(args, key))
        _write(cmd_scan(geometry, scan), args.out)
    elif args.command == "simulate":
        _write(cmd_simulate(load_config(args.config)), args.out)
    elif args.command == "spectrum":
        _write(cmd_spectrum(load_config(args.config)), args.out)
    elif args.command == "classify":
        _write(cmd_classify(load_config(args.config).geometry()), args.out)
    elif args.command == "design":
        if args.design_kind == "chain":
            targets = _floats(args.g)
            n = args.n if args.n is not None else len(targets) + 1
            sol = design_chain(n, _rates(args.gamma, n), targets)
        else:
            sol = design_all_to_all_3(_rates(args.gamma, 3), args.pattern)
        text = dump_config(config_from_geometry(sol.geometry))
        report = design_report(sol)
        if args.out:
            _write(text, args.out)
            sys.stdout.write(report)
        else:
            sys.stdout.write(text)
            sys.stderr.write(report)
        if not sol.feasible:
            raise NumericalError("design failed verification: " + sol.summary())
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except (StabilityError, InfeasibleDesignError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
