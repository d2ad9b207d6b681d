"""Sparse Hamiltonians for the coupled A/B lattices and their ground states."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import fock
from .fock import FockBasis, QuantumState
from .lattice import LatticeSpec, ModelParams

MAX_DIM = 200_000
DENSE_MAX = 2000

FULL = frozenset({"A", "B", "C", "drive"})
A_ONLY = frozenset({"A"})
AUXFIELD = frozenset({"A", "aux"})


class BasisTooLarge(ValueError):
    pass


class EigensolverError(RuntimeError):
    pass


def sector_dimension(site_count: int, n_max: int, total: int) -> int:
    """Number of occupation vectors with entries in [0, n_max] summing to ``total``."""
    # inclusion-exclusion over sites exceeding the cap
    out = 0
    for k in range(site_count + 1):
        rest = total - k * (n_max + 1)
        if rest < 0:
            break
        out += (-1) ** k * math.comb(site_count, k) * math.comb(rest + site_count - 1, site_count - 1)
    return out


@dataclass(frozen=True, eq=False)
class HamiltonianBundle:
    spec: LatticeSpec
    params: ModelParams
    include: frozenset
    basis: FockBasis
    h_static: sp.csr_matrix
    h_drive: sp.csr_matrix
    h_aux: sp.csr_matrix | None = None
    max_dim: int = MAX_DIM

    @property
    def number_conserving(self) -> bool:
        return self.h_aux is None or self.params.lam == 0

    @property
    def h_ground(self) -> sp.csr_matrix:
        """Operator whose ground state prepares the initial state."""
        return self.h_static if self.h_aux is None else (self.h_static + self.h_aux).tocsr()

    @property
    def h_evolve(self) -> sp.csr_matrix:
        return (self.h_ground + self.h_drive).tocsr()

    def lattice_sites(self, which: str) -> list[int]:
        n = self.spec.sites_per_lattice
        if which == "A":
            return list(range(n))
        if "B" not in self.include:
            raise ValueError("bundle has no lattice B")
        return list(range(n, 2 * n))

    def for_sector(self, sector: int | None) -> "HamiltonianBundle":
        if sector == self.basis.sector:
            return self
        return build_hamiltonian(self.spec, self.params, self.include, sector=sector, max_dim=self.max_dim)


def build_hamiltonian(
    spec: LatticeSpec,
    p: ModelParams,
    include=FULL,
    sector: int | None = None,
    max_dim: int = MAX_DIM,
) -> HamiltonianBundle:
    """Assemble the coupled-lattice Hamiltonian on a (possibly sector-restricted) basis.

    ``include`` selects terms: ``"A"`` (Hubbard lattice), ``"B"`` (free lattice
    with chemical potential), ``"C"`` (junction), ``"drive"`` (quench shift on B)
    and ``"aux"`` (chemical potential and symmetry-breaking field on A). With
    ``"aux"`` the basis is lattice A only and unrestricted.
    """
    include = frozenset(include)
    if "aux" in include and (include & {"B", "C", "drive"}):
        raise ValueError("the auxiliary-field Hamiltonian lives on lattice A alone")
    if "C" in include and "B" not in include:
        raise ValueError("the junction term needs lattice B")
    if "aux" in include and sector is not None and p.lam != 0:
        raise ValueError("a nonzero auxiliary field breaks number conservation; no sectors")

    n = spec.sites_per_lattice
    site_count = 2 * n if "B" in include else n
    dim = (p.n_max + 1) ** site_count if sector is None else sector_dimension(site_count, p.n_max, sector)
    if dim > max_dim:
        raise BasisTooLarge(f"basis dimension {dim} exceeds cap {max_dim}")
    t = _terms(spec, p.n_max, sector, include)
    basis = t["basis"]

    h = sp.csr_matrix((basis.dim, basis.dim))
    if "A" in include:
        h = h - p.kappa * t["hop_a"] + 0.5 * p.u * t["pair_a"]
    if "B" in include:
        h = h - p.kappa * t["hop_b"] + p.mu * t["n_b"]
    if "C" in include:
        h = h - p.g * t["hop_c"]

    if "drive" in include:
        drive = p.delta_mu * t["n_b"]
    else:
        drive = sp.csr_matrix((basis.dim, basis.dim))

    aux = None
    if "aux" in include:
        aux = -p.mu * t["n_all"]
        if p.lam != 0:
            aux = aux + p.lam * t["field_a"]
        aux = aux.tocsr()

    return HamiltonianBundle(spec, p, include, basis, h.tocsr(), drive.tocsr(), aux, max_dim)


def _symmetrized_hops(basis, bonds):
    h = sp.csr_matrix((basis.dim, basis.dim))
    for i, j in bonds:
        hop = fock.hopping(basis, i, j)
        h = h + hop + hop.T
    return h.tocsr()


@lru_cache(maxsize=64)
def _terms(spec: LatticeSpec, n_max: int, sector, include: frozenset) -> dict:
    # coefficient-free pieces, shared by every grid point with the same basis
    n = spec.sites_per_lattice
    site_count = 2 * n if "B" in include else n
    basis = fock.enumerate_basis(site_count, n_max, sector)
    out = {"basis": basis}
    out["hop_a"] = _symmetrized_hops(basis, spec.edges_a)
    out["pair_a"] = sum((fock.pair_interaction(basis, i) for i in range(n)), sp.csr_matrix((basis.dim,) * 2))
    out["n_all"] = fock.total_number(basis)
    if "B" in include:
        out["hop_b"] = _symmetrized_hops(basis, [(n + i, n + j) for i, j in spec.edges_b])
        out["n_b"] = fock.total_number(basis, range(n, 2 * n))
        out["hop_c"] = _symmetrized_hops(basis, [(i, n + i) for i in spec.contact_sites])
    if "aux" in include and sector is None:
        field = sp.csr_matrix((basis.dim, basis.dim))
        for i in range(n):
            a = fock.annihilation(basis, i)
            field = field + a + a.T
        out["field_a"] = field.tocsr()
    return out


@dataclass(frozen=True, eq=False)
class GroundState:
    energy: float
    state: QuantumState
    sector: int | None
    hamiltonian: HamiltonianBundle = field(repr=False)
    residual: float = 0.0


def _lowest(h: sp.csr_matrix, dense_max: int, maxiter: int | None):
    if h.shape[0] <= dense_max:
        w, v = sla.eigh(h.toarray(), subset_by_index=[0, 0])
        return float(w[0]), v[:, 0]
    try:
        w, v = spla.eigsh(h, k=1, which="SA", maxiter=maxiter, tol=1e-12)
    except spla.ArpackNoConvergence as exc:
        raise EigensolverError(f"eigsh did not converge: {exc}") from exc
    return float(w[0]), v[:, 0]


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # largest component real-positive makes states reproducible
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def ground_state(
    h: HamiltonianBundle,
    sector_search=None,
    dense_max: int = DENSE_MAX,
    maxiter: int | None = None,
) -> GroundState:
    """Lowest eigenpair, minimized over particle-number sectors when number is conserved.

    ``sector_search`` defaults to ``range(0, n_total_max + 1)``. Ties between
    sectors go to the smallest particle number. With a nonzero auxiliary field
    the unrestricted basis is used and ``sector_search`` is ignored.
    """
    if "aux" in h.include:
        candidates = [h.for_sector(None)]
    else:
        if sector_search is None:
            sector_search = range(0, h.params.n_total_max + 1)
        sectors = sorted(set(sector_search))
        if not sectors:
            raise ValueError("empty sector search range")
        site_count = h.basis.site_count
        bad = [s for s in sectors if not 0 <= s <= h.params.n_max * site_count]
        if bad:
            raise ValueError(f"sectors {bad} unreachable with n_max={h.params.n_max}")
        candidates = [h.for_sector(s) for s in sectors]

    best = None
    for cand in candidates:
        hg = cand.h_ground
        e, v = _lowest(hg, dense_max, maxiter)
        tol = 1e-12 * max(1.0, abs(e))
        if best is None or e < best[0] - tol:
            best = (e, v, cand)
    e, v, cand = best
    v = _fix_phase(np.asarray(v, dtype=complex))
    v /= np.linalg.norm(v)
    hg = cand.h_ground
    residual = float(np.linalg.norm(hg @ v - e * v))
    scale = max(1.0, float(abs(hg).sum(axis=1).max()))
    if residual > 1e-9 * scale:
        raise EigensolverError(f"ground-state residual {residual:.3e} too large")
    sector = cand.basis.sector
    if sector is None and cand.number_conserving:
        occ = cand.basis.states.sum(axis=1)
        weights = np.abs(v) ** 2
        n_mean = float(weights @ occ)
        if np.isclose(n_mean, round(n_mean), atol=1e-9):
            sector = int(round(n_mean))
    return GroundState(e, QuantumState(cand.basis, v), sector, cand, residual)


@dataclass(frozen=True)
class ConsistencyReport:
    hermiticity: float
    commutator: float | None
    commutator_expected_nonzero: bool
    spectrum_ok: bool
    spectrum_bounds: tuple[float, float]

    @property
    def ok(self) -> bool:
        herm = self.hermiticity < 1e-12
        comm = self.commutator is None or self.commutator_expected_nonzero or self.commutator < 1e-10
        return herm and comm and self.spectrum_ok


def _max_abs(m) -> float:
    m = sp.csr_matrix(m)
    return float(np.max(np.abs(m.data), initial=0.0))


def consistency_checks(h: HamiltonianBundle, seed: int = 0) -> ConsistencyReport:
    hg = h.h_ground
    herm = max(_max_abs(hg - hg.conj().T), _max_abs(h.h_evolve - h.h_evolve.conj().T))
    commutator = None
    if h.basis.sector is None:
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(h.basis.dim) + 1j * rng.standard_normal(h.basis.dim)
        v /= np.linalg.norm(v)
        n_op = fock.total_number(h.basis)
        commutator = float(np.linalg.norm(hg @ (n_op @ v) - n_op @ (hg @ v)))
    # Gershgorin disc must enclose the extremal eigenvalues
    diag = hg.diagonal().real
    radius = np.asarray(abs(hg).sum(axis=1)).ravel() - np.abs(diag)
    lo, hi = float((diag - radius).min()), float((diag + radius).max())
    e0, _ = _lowest(hg, DENSE_MAX, None)
    spectrum_ok = lo - 1e-9 <= e0 <= hi + 1e-9
    return ConsistencyReport(herm, commutator, not h.number_conserving, spectrum_ok, (lo, hi))
