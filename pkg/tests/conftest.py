import itertools

import numpy as np
import pytest

from mottprobe.lattice import build_pair_lattice


def site_ops(n_max):
    a = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)
    return a, np.eye(n_max + 1)


def embed(op, site, site_count, n_max):
    _, eye = site_ops(n_max)
    mats = [op if k == site else eye for k in range(site_count)]
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def dense_hamiltonian(spec, p, include=("A", "B", "C")):
    """Kronecker-product construction of the coupled-lattice Hamiltonian (test oracle)."""
    n = spec.sites_per_lattice
    count = 2 * n if "B" in include else n
    a_site, _ = site_ops(p.n_max)
    a = [embed(a_site, k, count, p.n_max) for k in range(count)]
    dim = (p.n_max + 1) ** count
    h = np.zeros((dim, dim))
    if "A" in include:
        for i, j in spec.edges_a:
            h -= p.kappa * (a[i].T @ a[j] + a[j].T @ a[i])
        for i in range(n):
            h += 0.5 * p.u * a[i].T @ a[i].T @ a[i] @ a[i]
    if "B" in include:
        for i, j in spec.edges_b:
            h -= p.kappa * (a[n + i].T @ a[n + j] + a[n + j].T @ a[n + i])
        for i in range(n):
            h += p.mu * a[n + i].T @ a[n + i]
    if "C" in include:
        for i in spec.contact_sites:
            h -= p.g * (a[i].T @ a[n + i] + a[n + i].T @ a[i])
    if "aux" in include:
        for i in range(n):
            h += -p.mu * a[i].T @ a[i] + p.lam * (a[i] + a[i].T)
    return h


def sector_rows(site_count, n_max, total):
    states = list(itertools.product(range(n_max + 1), repeat=site_count))
    return [k for k, s in enumerate(states) if sum(s) == total]


@pytest.fixture
def pair2():
    return build_pair_lattice(1, 2, "open")
