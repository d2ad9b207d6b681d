"""Paired-lattice geometry, physical parameters and the cavity-QED mapping.

Sites are 0-indexed. A lattice of ``n`` sites uses indices ``0..n-1`` for both
lattice A and lattice B; the combined A+B Fock space places B after A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class Boundary(str, Enum):
    OPEN = "open"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class LatticeSpec:
    dimension: int
    sites_per_lattice: int
    edges_a: tuple[tuple[int, int], ...]
    edges_b: tuple[tuple[int, int], ...]
    contact_sites: tuple[int, ...]
    boundary: Boundary = Boundary.OPEN

    @property
    def n(self) -> int:
        return self.sites_per_lattice

    @property
    def coordination(self) -> int:
        return 2 * self.dimension


@dataclass(frozen=True)
class ModelParams:
    kappa: float = 1.0
    u: float = 1.0
    mu: float = 0.0
    g: float = 0.1
    delta_mu: float = 100.0
    lam: float = 0.0
    n_max: int = 4
    n_total_max: int = 8


@dataclass(frozen=True)
class CavityParams:
    s: float
    g13: float
    g24: float
    omega: float
    delta: float
    epsilon: float


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "warning" | "error"
    code: str
    message: str


def _norm_bond(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def _chain_bonds(n: int, boundary: Boundary) -> list[tuple[int, int]]:
    bonds = [(i, i + 1) for i in range(n - 1)]
    # n == 2 periodic would duplicate the single bond
    if boundary is Boundary.PERIODIC and n >= 3:
        bonds.append((0, n - 1))
    return bonds


def build_pair_lattice(d: int, n: int, boundary: Boundary | str = Boundary.OPEN) -> LatticeSpec:
    """Chain (d=1) or square lattice (d=2) pair with identical A/B graphs.

    The contact set holds ``ceil(n**((d-1)/d))`` sites: site 0 for a chain, the
    first row of the square for d=2.
    """
    boundary = Boundary(boundary)
    if d not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {d}")
    if n < 1:
        raise ValueError(f"need at least one site, got {n}")

    if d == 1:
        bonds = _chain_bonds(n, boundary)
        contact = (0,)
    else:
        side = math.isqrt(n)
        if side * side != n:
            raise ValueError(f"d=2 needs a perfect-square site count, got {n}")
        bonds = set()
        for r in range(side):
            for c in range(side):
                i = r * side + c
                for dr, dc in ((0, 1), (1, 0)):
                    rr, cc = r + dr, c + dc
                    if boundary is Boundary.PERIODIC:
                        if side < 3 and (rr >= side or cc >= side):
                            continue
                        rr, cc = rr % side, cc % side
                    elif rr >= side or cc >= side:
                        continue
                    j = rr * side + cc
                    if j != i:
                        bonds.add(_norm_bond(i, j))
        bonds = sorted(bonds)
        contact = tuple(range(side))

    edges = tuple(_norm_bond(i, j) for i, j in bonds)
    return LatticeSpec(d, n, edges, edges, contact, boundary)


def cavity_to_hubbard(c: CavityParams) -> tuple[float, float]:
    """Effective (U, mu) of the photon Hubbard model in a driven 4-level-atom cavity."""
    if c.omega == 0:
        raise ZeroDivisionError("Rabi frequency omega must be nonzero")
    if c.g24 != 0 and c.delta == 0:
        raise ZeroDivisionError("detuning delta must be nonzero when g24 != 0")
    prefactor = c.s * (c.g13 / c.omega) ** 2
    u = prefactor * (c.g24**2 / c.delta) if c.g24 != 0 else 0.0
    mu = prefactor * c.epsilon
    return u, mu


def _edge_problems(edges, n, label) -> list[Diagnostic]:
    out = []
    seen = set()
    for bond in edges:
        i, j = bond
        if not (0 <= i < n and 0 <= j < n):
            out.append(Diagnostic("error", "invalid-site", f"invalid site index in {label} bond {bond}"))
            continue
        if i == j:
            out.append(Diagnostic("error", "self-loop", f"self-loop in {label} bond {bond}"))
            continue
        key = _norm_bond(i, j)
        if key in seen:
            out.append(Diagnostic("error", "duplicate-bond", f"duplicate {label} bond {bond}"))
        seen.add(key)
    return out


def validate(spec: LatticeSpec, p: ModelParams) -> list[Diagnostic]:
    """Structured diagnostics for a lattice/parameter pair; never raises."""
    n = spec.sites_per_lattice
    out: list[Diagnostic] = []
    if spec.dimension < 1:
        out.append(Diagnostic("error", "dimension", f"dimension must be >= 1, got {spec.dimension}"))
    if n < 1:
        out.append(Diagnostic("error", "size", f"sites_per_lattice must be >= 1, got {n}"))
    out += _edge_problems(spec.edges_a, n, "A")
    out += _edge_problems(spec.edges_b, n, "B")
    if {_norm_bond(*e) for e in spec.edges_a} != {_norm_bond(*e) for e in spec.edges_b}:
        out.append(Diagnostic("error", "asymmetric", "lattices A and B must share the same bond graph"))
    if not spec.contact_sites:
        out.append(Diagnostic("error", "contact", "contact set is empty"))
    elif len(set(spec.contact_sites)) != len(spec.contact_sites) or any(not 0 <= i < n for i in spec.contact_sites):
        out.append(Diagnostic("error", "invalid-site", "invalid site index in contact set"))

    if p.n_max < 1:
        out.append(Diagnostic("error", "n_max", f"n_max must be >= 1, got {p.n_max}"))
    if p.n_total_max < 0 or p.n_total_max > p.n_max * 2 * n:
        out.append(Diagnostic("error", "n_total_max", f"n_total_max must lie in [0, {p.n_max * 2 * n}]"))
    if p.u < 0:
        out.append(Diagnostic("error", "u", "on-site repulsion U must be >= 0"))
    if p.g < 0:
        out.append(Diagnostic("error", "g", "junction tunnelling g must be >= 0"))
    if p.lam < 0:
        out.append(Diagnostic("error", "lambda", "auxiliary field lambda must be >= 0"))
    if p.g >= p.kappa and p.g > 0:
        out.append(Diagnostic("warning", "weak-coupling", "weak-coupling assumption violated (g >= kappa)"))
    return out
