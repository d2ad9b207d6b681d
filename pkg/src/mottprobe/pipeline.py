"""Measurement protocol over a parameter grid, auxiliary-field maps and map comparison.

Per grid point: ground state of the coupled pair, quench of lattice B by
delta_mu, Josephson current J(t), its peak J_m and sine spectrum, the lattice-B
order parameter from densities, and the inferred lattice-A order parameter.
"""

from __future__ import annotations

import copy
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import spearmanr

from . import __version__, fock
from .config import SweepConfig
from .dynamics import (
    CurrentTrace,
    SpectrumResult,
    dominant_frequency,
    evolve,
    josephson_current,
    peak_current,
    sine_transform,
    uniform_grid,
)
from .hamiltonian import FULL, build_hamiltonian, ground_state
from .meanfield import PhaseDiagramGrid, auxfield_order_parameter

PSI_B_FLOOR = 1e-8
J_M_FLOOR = 1e-3
# relative J_m change tolerated when the per-site cap is raised by one
CAP_TOLERANCE = 0.01


class GridMismatch(ValueError):
    pass


@dataclass
class PointResult:
    mu_over_u: float
    kappa_over_u: float
    u: float
    mu: float
    ground_energy: float = math.nan
    sector: int | None = None
    j_m: float = math.nan
    omega_star: float = math.nan
    psi_b: float = math.nan
    psi_a: float = math.nan
    # sqrt of the mean lattice-A density; the quantity psi_a should approach deep in the superfluid
    condensate_a: float = math.nan
    norm_drift: float = math.nan
    number_drift: float = math.nan
    cap_change: float = math.nan
    flags: list = field(default_factory=list)
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class PointDetail:
    result: PointResult
    trace: CurrentTrace
    spectrum: SpectrumResult


@dataclass
class RunRecord:
    config: dict
    mode: str
    points: list
    version: str = __version__
    wall_time: float = 0.0

    @property
    def failures(self) -> int:
        return sum(1 for pt in self.points if pt.failed)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "mode": self.mode,
            "version": self.version,
            "wall_time": self.wall_time,
            "failures": self.failures,
            "points": [asdict(pt) for pt in self.points],
        }


def time_grid(cfg: SweepConfig, delta_mu: float) -> tuple[np.ndarray, float]:
    """Uniform grid with tau = tau_delta_mu / delta_mu landing exactly on a sample.

    The step is the largest tau/m not above period/samples_per_period; the
    grid runs to at least max(tau, min_periods * period).
    """
    dyn = cfg.dynamics
    period = 2 * math.pi / delta_mu
    tau = dyn.tau_delta_mu / delta_mu
    dt = tau / math.ceil(tau * dyn.samples_per_period / period)
    t_end = max(tau, dyn.min_periods * period)
    return uniform_grid(t_end, dt), tau


def _couplings(cfg: SweepConfig, mu_over_u: float, kappa_over_u: float) -> tuple[float, float]:
    u = cfg.params.kappa / kappa_over_u
    return u, mu_over_u * u


def measure_point(cfg: SweepConfig, mu_over_u: float, kappa_over_u: float, u: float, mu: float) -> PointDetail:
    spec = cfg.spec()
    p = cfg.model_params(u, mu)
    res = PointResult(mu_over_u, kappa_over_u, u, mu)
    if p.g == 0:
        res.flags.append("zero coupling")

    search = list(cfg.sector_search())
    gs = ground_state(build_hamiltonian(spec, p, FULL, sector=search[0]), search)
    res.ground_energy = float(gs.energy)
    res.sector = gs.sector

    times, tau = time_grid(cfg, p.delta_mu)
    traj = evolve(gs.hamiltonian, gs.state, times)
    res.norm_drift = float(np.max(np.abs(traj.norms() - 1.0)))
    n_tot = traj.expect(fock.total_number(traj.basis)).real
    res.number_drift = float(np.max(np.abs(n_tot - n_tot[0])))

    trace = josephson_current(traj, spec, p.g, {"u": u, "mu": mu, "delta_mu": p.delta_mu, "tau": tau})
    res.j_m = peak_current(trace)
    spectrum = sine_transform(trace, cfg.dynamics.omega_axis(), tau)
    peak = dominant_frequency(spectrum)
    res.omega_star = peak.omega
    if res.j_m > J_M_FLOOR and abs(peak.omega - p.delta_mu) > cfg.dynamics.omega_step:
        res.flags.append("omega shifted")

    n = spec.sites_per_lattice
    basis = gs.state.basis
    dens_b = fock.expectation(fock.total_number(basis, range(n, 2 * n)), gs.state).real / n
    dens_a = fock.expectation(fock.total_number(basis, range(n)), gs.state).real / n
    res.psi_b = math.sqrt(max(dens_b, 0.0))
    res.condensate_a = math.sqrt(max(dens_a, 0.0))
    if p.g == 0:
        res.psi_a = 0.0
    elif res.psi_b < PSI_B_FLOOR:
        res.psi_a = 0.0
        res.flags.append("psi_b below floor")
    else:
        d = spec.dimension
        res.psi_a = res.j_m / (2 * p.g * n ** ((d - 1) / d) * res.psi_b)
    if cfg.params.cap_check:
        res.cap_change = cap_sensitivity(cfg, mu_over_u, kappa_over_u, u, mu, res.j_m)
        if res.j_m > J_M_FLOOR and res.cap_change > CAP_TOLERANCE:
            res.flags.append("cap unconverged")
    return PointDetail(res, trace, spectrum)


def cap_sensitivity(cfg: SweepConfig, mu_over_u, kappa_over_u, u, mu, j_m: float) -> float:
    """Relative change of J_m when n_max is raised by one."""
    raised = copy.deepcopy(cfg)
    raised.params.n_max += 1
    raised.params.cap_check = False
    j_up = measure_point(raised, mu_over_u, kappa_over_u, u, mu).result.j_m
    return abs(j_up - j_m) / max(abs(j_m), 1e-300)


def _safe_point(args) -> PointResult:
    cfg, mu_over_u, kappa_over_u, u, mu = args
    try:
        return measure_point(cfg, mu_over_u, kappa_over_u, u, mu).result
    except Exception as exc:  # a failed point must never abort the sweep
        return PointResult(mu_over_u, kappa_over_u, u, mu, error=f"{type(exc).__name__}: {exc}")


def _safe_aux(args) -> PointResult:
    cfg, mu_over_u, kappa_over_u, u, mu = args
    res = PointResult(mu_over_u, kappa_over_u, u, mu)
    try:
        res.psi_a = auxfield_order_parameter(cfg.spec(), cfg.model_params(u, mu))
    except Exception as exc:
        res.error = f"{type(exc).__name__}: {exc}"
    return res


def _dispatch(fn, jobs, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def grid_points(cfg: SweepConfig) -> tuple[np.ndarray, np.ndarray, list]:
    """(mu/U axis, kappa/U axis, row-major jobs) for the configured mode."""
    g = cfg.grid
    if g.mode == "map":
        mus, kappas = g.mu_axis(), g.kappa_axis()
    else:
        us = g.u_axis()
        if np.any(us <= 0):
            raise ValueError("slice mode needs U > 0")
        mus = np.array([g.slice_mu_over_u])
        kappas = np.sort(cfg.params.kappa / us)
    jobs = []
    for m in mus:
        for k in kappas:
            u, mu = _couplings(cfg, float(m), float(k))
            jobs.append((cfg, float(m), float(k), u, mu))
    return mus, kappas, jobs


def _assemble(cfg, mus, kappas, points, source, extra) -> PhaseDiagramGrid:
    psi = np.array([pt.psi_a if not pt.failed else np.nan for pt in points]).reshape(len(mus), len(kappas))
    flags = np.array(
        [("failed: " + pt.error) if pt.failed else ";".join(pt.flags) for pt in points], dtype=object
    ).reshape(psi.shape)
    params_used = {
        "n": cfg.lattice.n,
        "d": cfg.lattice.d,
        "kappa": cfg.params.kappa,
        "n_max": cfg.params.n_max,
        **extra,
    }
    return PhaseDiagramGrid(mus, kappas, psi, source, 2 * cfg.lattice.d, params_used, flags)


def run_protocol(cfg: SweepConfig) -> tuple[RunRecord, PhaseDiagramGrid]:
    start = time.perf_counter()
    mus, kappas, jobs = grid_points(cfg)
    points = _dispatch(_safe_point, jobs, cfg.output.workers)
    record = RunRecord(cfg.to_dict(), cfg.grid.mode, points, wall_time=time.perf_counter() - start)
    extra = {
        "g": cfg.params.g,
        "delta_mu": cfg.params.delta_mu,
        "n_total": cfg.params.n_total,
        "sector_mode": cfg.params.sector_mode,
    }
    return record, _assemble(cfg, mus, kappas, points, "josephson", extra)


def run_auxfield_map(cfg: SweepConfig) -> tuple[RunRecord, PhaseDiagramGrid]:
    start = time.perf_counter()
    mus, kappas, jobs = grid_points(cfg)
    points = _dispatch(_safe_aux, jobs, cfg.output.workers)
    record = RunRecord(cfg.to_dict(), cfg.grid.mode, points, wall_time=time.perf_counter() - start)
    return record, _assemble(cfg, mus, kappas, points, "auxfield", {"lam": cfg.params.lam})


@dataclass
class MapComparison:
    rank_correlation: float
    levels: np.ndarray
    # per level: list of (k, 2) polylines in (kappa/U, mu/U) coordinates
    contours_1: list
    contours_2: list


def _contour_lines(grid: PhaseDiagramGrid, levels) -> list:
    import contourpy

    z = np.where(np.isfinite(grid.psi), grid.psi, 0.0)
    if min(z.shape) < 2:
        return [[] for _ in levels]
    gen = contourpy.contour_generator(grid.kappa_over_u, grid.mu_over_u, z)
    return [list(gen.lines(float(level))) for level in levels]


def compare_maps(m1: PhaseDiagramGrid, m2: PhaseDiagramGrid, levels=None, n_levels: int = 5) -> MapComparison:
    """Spearman rank correlation over shared finite points plus contour polylines."""
    if not m1.same_axes(m2):
        raise GridMismatch("maps must share identical (mu/U, kappa/U) axes")
    a, b = m1.psi.ravel(), m2.psi.ravel()
    ok = np.isfinite(a) & np.isfinite(b)
    if ok.sum() < 2 or np.ptp(a[ok]) == 0 or np.ptp(b[ok]) == 0:
        rho = math.nan
    else:
        rho = float(spearmanr(a[ok], b[ok])[0])
    if levels is None:
        top = min(np.nanmax(m1.psi), np.nanmax(m2.psi)) if ok.any() else 0.0
        levels = np.linspace(0, top, n_levels + 2)[1:-1] if top > 0 else np.array([])
    levels = np.asarray(levels, dtype=float)
    return MapComparison(rho, levels, _contour_lines(m1, levels), _contour_lines(m2, levels))
