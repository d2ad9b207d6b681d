"""Order parameters: single-site Gutzwiller mean field and auxiliary-field ED.

Gutzwiller quantities are in units of U and parameterized by z*kappa/U, where
z = 2d is the coordination number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from . import fock
from .hamiltonian import AUXFIELD, build_hamiltonian, ground_state
from .lattice import LatticeSpec, ModelParams

SOURCES = ("gutzwiller", "auxfield", "josephson")
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
ENERGY_FLOOR = 1e-13


class ConvergenceError(RuntimeError):
    pass


@dataclass(eq=False)
class PhaseDiagramGrid:
    """Order parameter on a (mu/U, kappa/U) grid; ``psi[i, j]`` is at (mu[i], kappa[j])."""

    mu_over_u: np.ndarray
    kappa_over_u: np.ndarray
    psi: np.ndarray
    source: str
    coordination: int = 2
    params_used: dict = field(default_factory=dict)
    flags: np.ndarray | None = None

    def __post_init__(self):
        self.mu_over_u = np.asarray(self.mu_over_u, dtype=float)
        self.kappa_over_u = np.asarray(self.kappa_over_u, dtype=float)
        self.psi = np.asarray(self.psi, dtype=float).reshape(len(self.mu_over_u), len(self.kappa_over_u))
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        for name, axis in (("mu_over_u", self.mu_over_u), ("kappa_over_u", self.kappa_over_u)):
            if len(axis) > 1 and np.any(np.diff(axis) <= 0):
                raise ValueError(f"{name} axis must be strictly increasing")
        finite = self.psi[np.isfinite(self.psi)]
        if np.any(finite < 0):
            raise ValueError("order parameter must be non-negative")
        if self.flags is None:
            self.flags = np.full(self.psi.shape, "", dtype=object)
        else:
            self.flags = np.asarray(self.flags, dtype=object).reshape(self.psi.shape)

    @property
    def zkappa_over_u(self) -> np.ndarray:
        return self.coordination * self.kappa_over_u

    @property
    def shape(self):
        return self.psi.shape

    def same_axes(self, other: "PhaseDiagramGrid") -> bool:
        return (
            self.psi.shape == other.psi.shape
            and np.array_equal(self.mu_over_u, other.mu_over_u)
            and np.array_equal(self.kappa_over_u, other.kappa_over_u)
        )


# --- Gutzwiller -----------------------------------------------------------


def gutzwiller_site_hamiltonian(psi: float, mu_over_u: float, zkappa_over_u: float, n_max: int) -> np.ndarray:
    """Decoupled single-site Hamiltonian in units of U on the basis |0>..|n_max>."""
    n = np.arange(n_max + 1, dtype=float)
    off = -zkappa_over_u * psi * np.sqrt(n[1:])
    h = np.diag(0.5 * n * (n - 1) - mu_over_u * n + zkappa_over_u * psi**2)
    h += np.diag(off, 1) + np.diag(off, -1)
    return h


def _site_ground(psi, mu_over_u, zkappa_over_u, n_max, vectors=False):
    n = np.arange(n_max + 1, dtype=float)
    diag = 0.5 * n * (n - 1) - mu_over_u * n + zkappa_over_u * psi**2
    off = -zkappa_over_u * psi * np.sqrt(n[1:])
    if vectors:
        w, v = sla.eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
        return w[0], v[:, 0]
    return sla.eigvalsh_tridiagonal(diag, off, select="i", select_range=(0, 0))[0]


def site_order_parameter(psi, mu_over_u, zkappa_over_u, n_max) -> float:
    """<a> in the ground state of the site Hamiltonian at mean field ``psi``."""
    _, v = _site_ground(psi, mu_over_u, zkappa_over_u, n_max, vectors=True)
    return float(abs(np.dot(v[:-1], np.sqrt(np.arange(1, n_max + 1)) * v[1:])))


def golden_section(f, lo: float, hi: float, tol: float = 1e-8, max_iter: int = 500) -> float:
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol:
            return 0.5 * (a + b)
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    raise ConvergenceError(f"golden-section search did not reach tol={tol} in {max_iter} iterations")


def solve_selfconsistent(mu_over_u: float, zkappa_over_u: float, n_max: int = 10, tol: float = 1e-8) -> float:
    """Mean-field order parameter as the energy-minimizing psi in [0, sqrt(n_max)]."""
    if zkappa_over_u < 0:
        raise ValueError("z*kappa/U must be >= 0")
    if zkappa_over_u == 0:
        return 0.0

    def energy(psi):
        return _site_ground(psi, mu_over_u, zkappa_over_u, n_max)

    psi = golden_section(energy, 0.0, math.sqrt(n_max), tol=tol)
    e0 = energy(0.0)
    # a gain below rounding level is noise, not a superfluid minimum
    if psi < 1e-6 or energy(psi) >= e0 - ENERGY_FLOOR * max(1.0, abs(e0)):
        return 0.0
    return psi


class LobeBoundary(NamedTuple):
    zkappa_over_u: float
    at_endpoint: bool


def perturbative_boundary(n: int, mu_over_u: float) -> LobeBoundary:
    """Second-order Mott-lobe boundary z*kappa_c/U of the filling-n lobe."""
    if n < 1:
        raise ValueError("lobe filling n must be >= 1")
    if not (n - 1) <= mu_over_u <= n:
        raise ValueError(f"mu/U={mu_over_u} outside the n={n} lobe interval [{n - 1}, {n}]")
    if mu_over_u in (n - 1, n):
        return LobeBoundary(0.0, True)
    chi = (n + 1) / (n - mu_over_u) + n / (mu_over_u - (n - 1))
    return LobeBoundary(1.0 / chi, False)


def lobe_tip(n: int = 1) -> tuple[float, float]:
    """(mu/U, z*kappa/U) at the tip of the filling-n lobe, by maximizing the boundary."""
    res = minimize_scalar(
        lambda m: -perturbative_boundary(n, m).zkappa_over_u,
        bounds=(n - 1 + 1e-12, n - 1e-12),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(res.x), -float(res.fun)


def gutzwiller_boundary(mu_over_u: float, n_max: int = 10, hi: float = 1.0, tol: float = 1e-6) -> float:
    """Smallest z*kappa/U with psi > 0 at fixed mu/U, by bisection on the solver."""
    lo = 0.0
    if solve_selfconsistent(mu_over_u, hi, n_max) == 0.0:
        raise ValueError(f"no superfluid below z*kappa/U={hi} at mu/U={mu_over_u}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if solve_selfconsistent(mu_over_u, mid, n_max) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def gutzwiller_phase_diagram(mu_grid, zkappa_grid, n_max: int = 10, coordination: int = 2) -> PhaseDiagramGrid:
    mu_grid = np.asarray(mu_grid, dtype=float)
    zkappa_grid = np.asarray(zkappa_grid, dtype=float)
    psi = np.zeros((len(mu_grid), len(zkappa_grid)))
    flags = np.full(psi.shape, "", dtype=object)
    for i, m in enumerate(mu_grid):
        for j, zk in enumerate(zkappa_grid):
            try:
                psi[i, j] = solve_selfconsistent(m, zk, n_max)
            except (ConvergenceError, ValueError) as exc:
                psi[i, j] = np.nan
                flags[i, j] = f"failed: {exc}"
    return PhaseDiagramGrid(
        mu_grid,
        zkappa_grid / coordination,
        psi,
        "gutzwiller",
        coordination,
        {"n_max": n_max},
        flags,
    )


# --- auxiliary field ------------------------------------------------------


def auxfield_order_parameter(spec: LatticeSpec, p: ModelParams) -> float:
    """Site-averaged |<a_i>| in the ground state of H_A - mu N_A + lambda sum(a_i + a_i^dag)."""
    if p.lam == 0:
        # number conservation: <a> vanishes in every symmetric eigenstate, and a
        # degenerate solver could otherwise return an arbitrary sector mixture
        return 0.0
    h = build_hamiltonian(spec, p, AUXFIELD)
    gs = ground_state(h)
    basis = gs.state.basis
    values = [abs(fock.expectation(fock.annihilation(basis, i), gs.state)) for i in range(spec.sites_per_lattice)]
    return float(np.mean(values))
