"""Command-line entry point: ``mottprobe <subcommand> [--config FILE] [--set block.field=value ...]``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, fock
from . import io as mio
from .config import ConfigError, check, dump_toml, load_config
from .hamiltonian import FULL, build_hamiltonian, ground_state
from .lattice import CavityParams, cavity_to_hubbard, validate

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class NumericFailure(RuntimeError):
    pass


def _load(args):
    cfg = load_config(args.config, args.set or [])
    if getattr(args, "out", None):
        cfg.output.directory = str(args.out)
    if getattr(args, "workers", None):
        cfg.output.workers = args.workers
    for w in check(cfg, getattr(args, "u", None)):
        print(f"warning: {w}", file=sys.stderr)
    return cfg


def _outdir(cfg) -> Path:
    return Path(cfg.output.directory)


def _emit(summary: dict) -> None:
    print(json.dumps(mio._jsonable(summary), indent=2, sort_keys=True))


def _point_couplings(cfg, args):
    u = args.u
    if u <= 0:
        raise ConfigError("--u must be > 0")
    mu = args.mu if args.mu is not None else args.mu_over_u * u
    return u, mu


def cmd_validate(args) -> int:
    cfg = _load(args)
    spec = cfg.spec()
    g = cfg.grid
    u = g.u_max if g.mode == "slice" else cfg.params.kappa / g.kappa_min
    diags = validate(spec, cfg.model_params(u, 0.0))
    for d in diags:
        print(f"{d.level}: {d.code}: {d.message}", file=sys.stderr)
    errors = [d for d in diags if d.level == "error"]
    _emit({"ok": not errors, "diagnostics": [d.code for d in diags], "config": cfg.to_dict()})
    return EXIT_CONFIG if errors else EXIT_OK


def _write_grid_outputs(cfg, record, grid, stem="phase_diagram"):
    out = _outdir(cfg)
    mio.write_phase_diagram_csv(grid, out / f"{stem}.csv")
    if record is not None:
        mio.write_points_csv(record, out / "points.csv")
        extra = {"mode": record.mode, "failures": record.failures, "wall_time": record.wall_time}
    else:
        extra = {}
    extra["source"] = grid.source
    extra["params_used"] = grid.params_used
    mio.write_run_meta(out / "run.meta", cfg.to_dict(), extra)
    if "svg" in cfg.output.formats:
        mio.write_heatmap_svg(grid, out / f"{stem}.svg")


def _grid_summary(record, grid):
    finite = grid.psi[np.isfinite(grid.psi)]
    return {
        "source": grid.source,
        "shape": list(grid.shape),
        "failures": record.failures if record else 0,
        "psi_max": float(finite.max()) if finite.size else None,
    }


def cmd_sweep(args) -> int:
    from .pipeline import run_protocol

    cfg = _load(args)
    record, grid = run_protocol(cfg)
    _write_grid_outputs(cfg, record, grid)
    _emit(_grid_summary(record, grid))
    if record.points and record.failures == len(record.points):
        raise NumericFailure("every grid point failed")
    return EXIT_OK


def cmd_auxfield(args) -> int:
    from .pipeline import run_auxfield_map

    cfg = _load(args)
    record, grid = run_auxfield_map(cfg)
    _write_grid_outputs(cfg, record, grid)
    _emit(_grid_summary(record, grid))
    if record.points and record.failures == len(record.points):
        raise NumericFailure("every grid point failed")
    return EXIT_OK


def cmd_gutzwiller(args) -> int:
    from .meanfield import gutzwiller_phase_diagram

    cfg = _load(args)
    z = 2 * cfg.lattice.d
    grid = gutzwiller_phase_diagram(cfg.grid.mu_axis(), z * cfg.grid.kappa_axis(), n_max=args.n_max, coordination=z)
    _write_grid_outputs(cfg, None, grid)
    _emit(_grid_summary(None, grid))
    return EXIT_OK


def cmd_twomode(args) -> int:
    from .twomode import TwoModeState, current_from_trajectory, energy, integrate_amplitudes, reduce_params

    cfg = _load(args)
    u, mu = _point_couplings(cfg, args)
    spec = cfg.spec()
    p = cfg.model_params(u, mu)
    tp = reduce_params(spec, p)
    if args.z0 is None:
        # seed populations from the exact ground state of the coupled pair
        search = list(cfg.sector_search())
        gs = ground_state(build_hamiltonian(spec, p, FULL, sector=search[0]), search)
        n = spec.sites_per_lattice
        n_a = fock.expectation(fock.total_number(gs.state.basis, range(n)), gs.state).real
        n_b = fock.expectation(fock.total_number(gs.state.basis, range(n, 2 * n)), gs.state).real
        s0 = TwoModeState(complex(math.sqrt(n_a)) * np.exp(1j * args.theta0), complex(math.sqrt(n_b)))
    else:
        s0 = TwoModeState.from_population_phase(args.z0, args.theta0, args.n_total)
    t_end = args.t_end if args.t_end is not None else 10 * 2 * math.pi / max(abs(tp.e_b - tp.e_a), tp.k_big, 1e-12)
    traj = integrate_amplitudes(tp, s0, dt=args.dt, t_end=t_end)
    current = current_from_trajectory(tp, traj)
    out = _outdir(cfg)
    mio.write_trajectory_csv(traj, current, out / "trajectory.csv")
    mio.write_trace_csv(current, out / "trace.csv")
    e = energy(tp, traj)
    summary = {
        "twomode_params": {"e_a": tp.e_a, "e_b": tp.e_b, "u_a": tp.u_a, "k_big": tp.k_big},
        "n_a0": s0.n_a,
        "n_b0": s0.n_b,
        "steps": len(traj.times) - 1,
        "j_max": float(np.max(np.abs(current.values))),
        "frozen_max_diff": current.metadata["frozen_max_diff"],
        "energy_drift": float(np.max(np.abs(e - e[0]))),
    }
    mio.write_run_meta(out / "run.meta", cfg.to_dict(), {"twomode": summary})
    _emit(summary)
    return EXIT_OK


def _single_point(args, write_spectrum: bool) -> int:
    from .pipeline import measure_point

    cfg = _load(args)
    u, mu = _point_couplings(cfg, args)
    try:
        detail = measure_point(cfg, mu / u, cfg.params.kappa / u, u, mu)
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        raise NumericFailure(str(exc)) from exc
    out = _outdir(cfg)
    mio.write_trace_csv(detail.trace, out / "trace.csv")
    if write_spectrum:
        mio.write_spectrum_csv(detail.spectrum, out / "spectrum.csv")
    res = detail.result
    summary = {k: getattr(res, k) for k in ("u", "mu", "sector", "j_m", "omega_star", "psi_b", "psi_a", "flags")}
    mio.write_run_meta(out / "run.meta", cfg.to_dict(), {"point": summary})
    _emit(summary)
    return EXIT_OK


def cmd_current(args) -> int:
    return _single_point(args, write_spectrum=False)


def cmd_spectrum(args) -> int:
    return _single_point(args, write_spectrum=True)


def cmd_compare(args) -> int:
    from .pipeline import compare_maps

    try:
        m1 = mio.read_phase_diagram_csv(args.first)
        m2 = mio.read_phase_diagram_csv(args.second)
        result = compare_maps(m1, m2)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    doc = {
        "rank_correlation": result.rank_correlation,
        "levels": result.levels,
        "contours_first": [[line.tolist() for line in lines] for lines in result.contours_1],
        "contours_second": [[line.tolist() for line in lines] for lines in result.contours_2],
    }
    if args.json:
        mio.atomic_write(args.json, json.dumps(mio._jsonable(doc)) + "\n")
    if args.svg:
        mio.write_heatmap_svg(m1, args.svg, overlay=m2, levels=result.levels if len(result.levels) else None)
    _emit({"rank_correlation": result.rank_correlation, "sources": [m1.source, m2.source]})
    return EXIT_OK


def cmd_map_cavity(args) -> int:
    try:
        u, mu = cavity_to_hubbard(CavityParams(args.s, args.g13, args.g24, args.omega, args.delta, args.epsilon))
    except ZeroDivisionError as exc:
        raise ConfigError(f"cavity mapping undefined: {exc}") from exc
    _emit({"u": u, "mu": mu})
    return EXIT_OK


def cmd_config(args) -> int:
    cfg = _load(args)
    print(dump_toml(cfg), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mottprobe", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mottprobe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", type=Path, help="TOML configuration file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override, e.g. params.g=0.05")
        p.add_argument("--out", help="output directory (output.directory)")
        p.add_argument("--workers", type=int, help="worker processes (output.workers)")
        return p

    def with_point(p):
        p.add_argument("--u", type=float, required=True)
        group = p.add_mutually_exclusive_group()
        group.add_argument("--mu", type=float)
        group.add_argument("--mu-over-u", type=float, default=0.5)
        return p

    with_config(sub.add_parser("validate", help="check a configuration")).set_defaults(fn=cmd_validate)
    with_config(sub.add_parser("config", help="print the effective configuration")).set_defaults(fn=cmd_config)
    with_config(sub.add_parser("sweep", help="Josephson protocol over the grid")).set_defaults(fn=cmd_sweep)
    with_config(sub.add_parser("auxfield", help="auxiliary-field order-parameter map")).set_defaults(fn=cmd_auxfield)

    p = with_config(sub.add_parser("gutzwiller", help="single-site mean-field map"))
    p.add_argument("--n-max", type=int, default=10)
    p.set_defaults(fn=cmd_gutzwiller)

    p = with_point(with_config(sub.add_parser("twomode", help="two-mode GP trajectory")))
    p.add_argument("--z0", type=float, help="initial imbalance; default seeds from the exact ground state")
    p.add_argument("--theta0", type=float, default=0.0)
    p.add_argument("--n-total", type=float, default=2.0)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", type=float)
    p.set_defaults(fn=cmd_twomode)

    with_point(with_config(sub.add_parser("current", help="single-point J(t)"))).set_defaults(fn=cmd_current)
    with_point(with_config(sub.add_parser("spectrum", help="single-point J(t) and J(omega)"))).set_defaults(
        fn=cmd_spectrum
    )

    p = sub.add_parser("compare", help="rank correlation and contours of two phase diagrams")
    p.add_argument("first", type=Path)
    p.add_argument("second", type=Path)
    p.add_argument("--json", type=Path, help="write correlation and contour polylines here")
    p.add_argument("--svg", type=Path, help="heatmap of FIRST with contours of SECOND")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("map-cavity", help="cavity-array parameters to (U, mu)")
    for name in ("s", "g13", "g24", "omega", "delta", "epsilon"):
        p.add_argument(f"--{name}", type=float, required=True)
    p.set_defaults(fn=cmd_map_cavity)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
