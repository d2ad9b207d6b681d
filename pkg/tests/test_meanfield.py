import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mottprobe.lattice import ModelParams, build_pair_lattice
from mottprobe.meanfield import (
    ConvergenceError,
    PhaseDiagramGrid,
    _site_ground,
    auxfield_order_parameter,
    golden_section,
    gutzwiller_boundary,
    gutzwiller_phase_diagram,
    gutzwiller_site_hamiltonian,
    lobe_tip,
    perturbative_boundary,
    site_order_parameter,
    solve_selfconsistent,
)


def test_site_hamiltonian_diagonal_at_zero_field():
    h = gutzwiller_site_hamiltonian(0.0, 0.5, 0.3, 5)
    assert np.count_nonzero(h - np.diag(np.diag(h))) == 0
    # n=0: 0, n=1: -0.5, n=2: 0
    assert np.argmin(np.diag(h)) == 1
    assert np.diag(h)[:3] == pytest.approx([0.0, -0.5, 0.0])


@given(psi=st.floats(0, 3), mu=st.floats(-1, 4), zk=st.floats(0, 1))
def test_site_hamiltonian_symmetric(psi, mu, zk):
    h = gutzwiller_site_hamiltonian(psi, mu, zk, 6)
    assert np.array_equal(h, h.T)


def test_site_hamiltonian_entries():
    h = gutzwiller_site_hamiltonian(0.7, 0.3, 0.2, 3)
    assert h[0, 1] == pytest.approx(-0.2 * 0.7)
    assert h[2, 3] == pytest.approx(-0.2 * 0.7 * math.sqrt(3))
    assert h[2, 2] == pytest.approx(1 - 0.6 + 0.2 * 0.49)


def test_tridiagonal_ground_matches_dense():
    for psi, mu, zk in ((0.0, 0.5, 0.1), (0.8, 1.3, 0.25), (1.5, 2.7, 0.6)):
        h = gutzwiller_site_hamiltonian(psi, mu, zk, 10)
        assert _site_ground(psi, mu, zk, 10) == pytest.approx(np.linalg.eigvalsh(h)[0], abs=1e-12)


def test_golden_section():
    assert golden_section(lambda x: (x - 0.3) ** 2, 0, 1) == pytest.approx(0.3, abs=1e-7)
    with pytest.raises(ConvergenceError):
        golden_section(lambda x: x, 0, 1, tol=1e-30, max_iter=10)


def test_selfconsistent_examples():
    assert solve_selfconsistent(1.7, 0.0) == 0.0
    assert solve_selfconsistent(0.5, 0.05) == 0.0
    assert solve_selfconsistent(0.5, 0.5) > 0.0
    with pytest.raises(ValueError):
        solve_selfconsistent(0.5, -0.1)


@pytest.mark.parametrize("mu,zk", [(0.5, 0.5), (0.2, 0.3), (1.4, 0.2), (2.5, 0.4), (0.9, 0.12)])
def test_selfconsistency_residual(mu, zk):
    psi = solve_selfconsistent(mu, zk)
    assert psi > 0
    assert abs(psi - site_order_parameter(psi, mu, zk, 10)) < 1e-6


@settings(max_examples=40, deadline=None)
@given(mu=st.floats(0, 3), zk=st.floats(0, 0.6))
def test_never_above_zero_field_energy(mu, zk):
    psi = solve_selfconsistent(mu, zk)
    assert psi >= 0
    assert _site_ground(psi, mu, zk, 10) <= _site_ground(0.0, mu, zk, 10) + 1e-15


def test_perturbative_boundary_values():
    assert perturbative_boundary(1, 0.5).zkappa_over_u == pytest.approx(1 / 6)
    assert perturbative_boundary(1, 1.0) == (0.0, True)
    assert perturbative_boundary(2, 1.0).at_endpoint
    assert perturbative_boundary(1, 1 - 1e-9).zkappa_over_u < 1e-8
    with pytest.raises(ValueError):
        perturbative_boundary(1, 1.5)
    with pytest.raises(ValueError):
        perturbative_boundary(0, 0.5)


def test_lobe_tip():
    mu, zk = lobe_tip(1)
    assert mu == pytest.approx(math.sqrt(2) - 1, abs=1e-6)
    assert zk == pytest.approx(3 - 2 * math.sqrt(2), abs=1e-9)


@pytest.mark.parametrize("n,mus", [(1, [0.2, 0.41, 0.5, 0.8, 0.95]), (2, [1.2, 1.41, 1.5, 1.8, 1.95])])
def test_bisection_reproduces_perturbative_boundary(n, mus):
    for mu in mus:
        assert gutzwiller_boundary(mu) == pytest.approx(perturbative_boundary(n, mu).zkappa_over_u, abs=1e-3)


def test_boundary_needs_superfluid_upper_bracket():
    with pytest.raises(ValueError):
        gutzwiller_boundary(0.5, hi=0.1)


def test_phase_diagram_rows_columns_and_extracted_boundary():
    mus = np.array([0.25, 0.5, 0.75])
    zks = np.linspace(0.0, 0.3, 61)
    grid = gutzwiller_phase_diagram(mus, zks)
    assert grid.source == "gutzwiller"
    assert np.all(grid.psi[:, 0] == 0)
    assert np.allclose(grid.zkappa_over_u, zks)
    step = zks[1] - zks[0]
    for i, mu in enumerate(mus):
        col = grid.psi[i]
        assert np.all(np.diff(col) >= -1e-9)
        first = zks[np.argmax(col > 0)]
        exact = perturbative_boundary(1, mu).zkappa_over_u
        assert exact <= first <= exact + step


def test_nmax_sensitivity_low_density():
    for mu in np.linspace(0.05, 1.95, 8):
        for zk in np.linspace(0.0, 0.3, 7):
            psi10 = solve_selfconsistent(mu, zk, n_max=10)
            _, v = _site_ground(psi10, mu, zk, 10, vectors=True)
            if v**2 @ np.arange(11) > 2:
                continue
            assert abs(solve_selfconsistent(mu, zk, n_max=6) - psi10) < 1e-6


def test_grid_validation():
    with pytest.raises(ValueError):
        PhaseDiagramGrid([0.0, 0.0], [0.1], [[0.0], [0.0]], "gutzwiller")
    with pytest.raises(ValueError):
        PhaseDiagramGrid([0.0], [0.1], [[-1.0]], "auxfield")
    with pytest.raises(ValueError):
        PhaseDiagramGrid([0.0], [0.1], [[1.0]], "other")
    g = PhaseDiagramGrid([0.0, 1.0], [0.1], [[np.nan], [0.5]], "josephson")
    assert g.flags.shape == (2, 1)


# --- auxiliary field -------------------------------------------------------


def _single_site_aux(u, mu, lam, n_max):
    n = np.arange(n_max + 1)
    h = np.diag(0.5 * u * n * (n - 1) - mu * n) + lam * (np.diag(np.sqrt(n[1:]), 1) + np.diag(np.sqrt(n[1:]), -1))
    _, v = np.linalg.eigh(h)
    g = v[:, 0]
    return abs(g[:-1] @ (np.sqrt(n[1:]) * g[1:]))


def test_aux_zero_field_gives_zero(pair2):
    assert auxfield_order_parameter(pair2, ModelParams(kappa=1, u=1, mu=0.5, lam=0.0, n_max=4)) == 0.0


def test_aux_decoupled_sites_match_single_site(pair2):
    p = ModelParams(kappa=0, u=1, mu=0.5, lam=0.05, n_max=4)
    assert auxfield_order_parameter(pair2, p) == pytest.approx(_single_site_aux(1, 0.5, 0.05, 4), abs=1e-10)


def test_aux_deep_mott_linear_in_lambda(pair2):
    # first-order perturbation of |1> at mu/U = 1/2 gives |<a>| = 6 lambda
    for lam in (1e-3, 1e-4):
        val = auxfield_order_parameter(pair2, ModelParams(kappa=0, u=1, mu=0.5, lam=lam, n_max=4))
        assert val / lam == pytest.approx(6.0, rel=1e-4)


def test_aux_field_sign_symmetry(pair2):
    base = dict(kappa=1, u=4, mu=2, n_max=4)
    plus = auxfield_order_parameter(pair2, ModelParams(lam=0.1, **base))
    minus = auxfield_order_parameter(pair2, ModelParams(lam=-0.1, **base))
    assert plus == pytest.approx(minus, abs=1e-12)


def test_aux_superfluid_exceeds_mott(pair2):
    mott = auxfield_order_parameter(pair2, ModelParams(kappa=1, u=40, mu=20, lam=0.1, n_max=4))
    sf = auxfield_order_parameter(pair2, ModelParams(kappa=1, u=2, mu=1, lam=0.1, n_max=4))
    assert sf > 5 * mott


def test_aux_2d():
    spec = build_pair_lattice(2, 4, "open")
    val = auxfield_order_parameter(spec, ModelParams(kappa=1, u=2, mu=1, lam=0.1, n_max=2))
    assert 0 < val < math.sqrt(2)
