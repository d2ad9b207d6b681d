"""Truncated bosonic Fock bases and sparse operators over them.

Operators are ``scipy.sparse`` CSR matrices. States are listed in lexicographic
order of their occupation vectors, so the matrix layout is reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True, eq=False)
class FockBasis:
    site_count: int
    n_max: int
    sector: int | None
    states: np.ndarray  # (dim, site_count) int
    index: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def lookup(self, occupations) -> int:
        return self.index[tuple(int(x) for x in occupations)]

    def compatible(self, other: "FockBasis") -> bool:
        return self.site_count == other.site_count and self.n_max == other.n_max and self.sector == other.sector


def _sector_states(site_count, n_max, total):
    # lexicographic enumeration of bounded compositions of `total`
    if site_count == 1:
        if 0 <= total <= n_max:
            yield (total,)
        return
    rest_cap = n_max * (site_count - 1)
    for first in range(max(0, total - rest_cap), min(n_max, total) + 1):
        for tail in _sector_states(site_count - 1, n_max, total - first):
            yield (first,) + tail


def enumerate_basis(site_count: int, n_max: int, sector: int | None = None) -> FockBasis:
    if site_count < 1 or n_max < 1:
        raise ValueError("site_count and n_max must both be >= 1")
    if sector is None:
        states = list(itertools.product(range(n_max + 1), repeat=site_count))
    else:
        if not 0 <= sector <= n_max * site_count:
            raise ValueError(f"sector {sector} outside [0, {n_max * site_count}]")
        states = list(_sector_states(site_count, n_max, sector))
    arr = np.array(states, dtype=np.int64).reshape(len(states), site_count)
    return FockBasis(site_count, n_max, sector, arr, {s: k for k, s in enumerate(states)})


def _check_site(basis, site):
    if not 0 <= site < basis.site_count:
        raise IndexError(f"site {site} outside [0, {basis.site_count})")


def number(basis: FockBasis, site: int) -> sp.csr_matrix:
    _check_site(basis, site)
    return sp.diags(basis.states[:, site].astype(float), format="csr")


def total_number(basis: FockBasis, sites=None) -> sp.csr_matrix:
    sites = range(basis.site_count) if sites is None else list(sites)
    occ = basis.states[:, list(sites)].sum(axis=1).astype(float)
    return sp.diags(occ, format="csr")


def annihilation(basis: FockBasis, site: int, target: FockBasis | None = None) -> sp.csr_matrix:
    """Matrix of ``a_site``.

    On an unrestricted basis the result is square. On a sector basis it maps
    sector N to sector N-1; pass ``target`` to reuse an existing N-1 basis.
    """
    _check_site(basis, site)
    if basis.sector is not None:
        if target is None:
            if basis.sector == 0:
                return sp.csr_matrix((0, basis.dim))
            target = enumerate_basis(basis.site_count, basis.n_max, basis.sector - 1)
        elif target.sector != basis.sector - 1 or target.site_count != basis.site_count:
            raise ValueError("target basis must be the N-1 sector of the same lattice")
    else:
        target = basis

    rows, cols, vals = [], [], []
    for col, state in enumerate(basis.states):
        n = state[site]
        if n == 0:
            continue
        lowered = list(state)
        lowered[site] = n - 1
        rows.append(target.index[tuple(int(x) for x in lowered)])
        cols.append(col)
        vals.append(np.sqrt(n))
    return sp.csr_matrix((vals, (rows, cols)), shape=(target.dim, basis.dim))


def creation(basis: FockBasis, site: int) -> sp.csr_matrix:
    """``a_site^dagger`` on an unrestricted basis; the cap n_max maps to zero."""
    if basis.sector is not None:
        raise ValueError("creation on a sector basis leaves the sector; use annihilation(...).T")
    return annihilation(basis, site).T.tocsr()


def hopping(basis: FockBasis, i: int, j: int) -> sp.csr_matrix:
    """``a_i^dagger a_j`` (one particle moved from j to i), sector-preserving."""
    _check_site(basis, i)
    _check_site(basis, j)
    if i == j:
        return number(basis, i)
    rows, cols, vals = [], [], []
    for col, state in enumerate(basis.states):
        nj, ni = state[j], state[i]
        if nj == 0 or ni == basis.n_max:
            continue
        moved = list(state)
        moved[j] -= 1
        moved[i] += 1
        rows.append(basis.index[tuple(int(x) for x in moved)])
        cols.append(col)
        vals.append(np.sqrt(nj * (ni + 1)))
    return sp.csr_matrix((vals, (rows, cols)), shape=(basis.dim, basis.dim))


def pair_interaction(basis: FockBasis, site: int) -> sp.csr_matrix:
    """``a^dag a^dag a a = n(n-1)`` on one site."""
    n = basis.states[:, site].astype(float)
    return sp.diags(n * (n - 1.0), format="csr")


def compose(lhs, rhs=None, op: str = "mul", scale: complex | None = None) -> sp.csr_matrix:
    """Sparse algebra: ``add``, ``sub``, ``mul`` (lhs @ rhs), ``scale`` and ``adjoint``."""
    if op == "adjoint":
        return lhs.conj().T.tocsr()
    if op == "scale":
        factor = rhs if scale is None else scale
        return (lhs * factor).tocsr()
    if op == "mul":
        if lhs.shape[1] != rhs.shape[0]:
            raise ValueError(f"dimension mismatch {lhs.shape} @ {rhs.shape}")
        return (lhs @ rhs).tocsr()
    if op in ("add", "sub"):
        if lhs.shape != rhs.shape:
            raise ValueError(f"dimension mismatch {lhs.shape} vs {rhs.shape}")
        return (lhs + rhs if op == "add" else lhs - rhs).tocsr()
    raise ValueError(f"unknown op {op!r}")


@dataclass(frozen=True, eq=False)
class QuantumState:
    basis: FockBasis
    amplitudes: np.ndarray

    @classmethod
    def normalized(cls, basis: FockBasis, amplitudes) -> "QuantumState":
        v = np.asarray(amplitudes, dtype=complex)
        if v.shape != (basis.dim,):
            raise ValueError(f"expected {basis.dim} amplitudes, got shape {v.shape}")
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(basis, v / norm)

    @classmethod
    def fock(cls, basis: FockBasis, occupations) -> "QuantumState":
        v = np.zeros(basis.dim, dtype=complex)
        v[basis.lookup(occupations)] = 1.0
        return cls(basis, v)


def apply(op, state) -> np.ndarray:
    v = state.amplitudes if isinstance(state, QuantumState) else np.asarray(state)
    if op.shape[1] != v.shape[0]:
        raise ValueError(f"dimension mismatch {op.shape} @ {v.shape}")
    return op @ v


def expectation(op, state) -> complex:
    v = state.amplitudes if isinstance(state, QuantumState) else np.asarray(state)
    if op.shape != (v.shape[0], v.shape[0]):
        raise ValueError(f"dimension mismatch {op.shape} vs {v.shape}")
    return complex(np.vdot(v, op @ v))
