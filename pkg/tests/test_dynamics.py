import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mottprobe import fock
from mottprobe.dynamics import (
    BasisMismatch,
    CurrentTrace,
    ImaginaryCurrent,
    continuity_check,
    dominant_frequency,
    evolve,
    josephson_current,
    peak_current,
    sine_transform,
    uniform_grid,
)
from mottprobe.fock import QuantumState
from mottprobe.hamiltonian import build_hamiltonian, ground_state
from mottprobe.lattice import ModelParams, build_pair_lattice

SINGLE = build_pair_lattice(1, 1)


def two_level(g, detuning, times, c0):
    """exp(-iHt) c0 for H = [[0, -g], [-g, detuning]], written out in closed form."""
    half = detuning / 2
    omega = np.hypot(half, g)
    cos, sin = np.cos(omega * times), np.sin(omega * times)
    # H = half*I - (half*sz + g*sx) with sz = diag(1, -1)
    common = np.exp(-1j * half * times)
    ca, cb = c0
    a = common * (cos * ca + 1j * sin / omega * (half * ca + g * cb))
    b = common * (cos * cb + 1j * sin / omega * (g * ca - half * cb))
    return a, b


def single_particle(g, mu, delta_mu, n_max=2):
    p = ModelParams(kappa=1, u=0, mu=mu, g=g, delta_mu=delta_mu, n_max=n_max, n_total_max=1)
    return build_hamiltonian(SINGLE, p, sector=1)


def test_rabi_oscillation():
    g = 0.3
    h = single_particle(g, 0.0, 0.0)
    psi0 = QuantumState.fock(h.basis, [1, 0])
    times = np.linspace(0, 20, 401)
    traj = evolve(h, psi0, times)
    n_a = traj.expect(fock.number(h.basis, 0)).real
    assert np.max(np.abs(n_a - np.cos(g * times) ** 2)) < 1e-12


def test_single_particle_current_closed_form():
    g, mu, dmu = 0.05, 0.3, 10.0
    gs = ground_state(single_particle(g, mu, dmu), [1])
    times = uniform_grid(3.0, 1e-3)
    traj = evolve(gs.hamiltonian, gs.state, times)
    trace = josephson_current(traj, SINGLE, g)
    basis = gs.state.basis
    c0 = (gs.state.amplitudes[basis.lookup([1, 0])], gs.state.amplitudes[basis.lookup([0, 1])])
    ca, cb = two_level(g, mu + dmu, times, c0)
    expected = 2 * g * np.imag(np.conj(ca) * cb)
    assert np.max(np.abs(trace.values - expected)) < 1e-12
    # weak-link estimate of the amplitude from the initial populations
    estimate = 2 * g * abs(c0[0]) * abs(c0[1])
    assert peak_current(trace) == pytest.approx(estimate, rel=0.05)
    peak = dominant_frequency(sine_transform(trace, np.arange(0.0, 20.0, 0.1), 3.0))
    assert abs(peak.omega - (mu + dmu)) <= 1.0


def test_eigenstate_only_gains_phase(pair2):
    p = ModelParams(kappa=1, u=2, mu=0.5, g=0.1, delta_mu=0.0, n_max=3)
    gs = ground_state(build_hamiltonian(pair2, p), [3])
    traj = evolve(gs.hamiltonian, gs.state, np.linspace(0, 5, 11))
    overlaps = np.abs(traj.amplitudes @ gs.state.amplitudes.conj())
    assert np.allclose(overlaps, 1, atol=1e-12)
    trace = josephson_current(traj, pair2, p.g)
    assert np.allclose(trace.values, trace.values[0], atol=1e-12)


def test_time_zero_is_identity(pair2):
    p = ModelParams(kappa=1, u=2, mu=0.5, g=0.1, delta_mu=30, n_max=3)
    gs = ground_state(build_hamiltonian(pair2, p), [4])
    traj = evolve(gs.hamiltonian, gs.state, [0.0])
    assert np.allclose(traj.amplitudes[0], gs.state.amplitudes, atol=1e-14, rtol=0)


@settings(max_examples=15, deadline=None)
@given(u=st.floats(0, 20), g=st.floats(0.01, 0.3), total=st.integers(1, 6), t=st.floats(0.01, 10))
def test_norm_number_and_time_reversal(u, g, total, t):
    pair2 = build_pair_lattice(1, 2)
    p = ModelParams(kappa=1, u=u, mu=0.5 * u, g=g, delta_mu=100, n_max=3, n_total_max=6)
    gs = ground_state(build_hamiltonian(pair2, p), [total])
    traj = evolve(gs.hamiltonian, gs.state, np.linspace(0, t, 50))
    assert np.max(np.abs(traj.norms() - 1)) < 1e-10
    n_tot = traj.expect(fock.total_number(traj.basis)).real
    assert np.max(np.abs(n_tot - n_tot[0])) < 1e-10
    back = evolve(gs.hamiltonian, traj[-1], [-t])
    assert np.max(np.abs(back.amplitudes[0] - gs.state.amplitudes)) < 1e-10


def test_basis_mismatch(pair2):
    p = ModelParams(n_max=3)
    h3 = build_hamiltonian(pair2, p, sector=3)
    psi = ground_state(build_hamiltonian(pair2, p), [2]).state
    with pytest.raises(BasisMismatch):
        evolve(h3, psi, [0.0, 1.0])


def test_zero_coupling_gives_zero_current(pair2):
    p = ModelParams(kappa=1, u=1, mu=0.5, g=0.0, delta_mu=100, n_max=3)
    gs = ground_state(build_hamiltonian(pair2, p), [4])
    traj = evolve(gs.hamiltonian, gs.state, uniform_grid(0.5, 1e-3))
    trace = josephson_current(traj, pair2, p.g)
    assert not trace.values.any()
    res = continuity_check(traj, trace, pair2)
    assert res.residual < 1e-12
    assert peak_current(trace) == 0


def _quench_run(pair2, dt, g=0.1):
    p = ModelParams(kappa=1, u=2, mu=1, g=g, delta_mu=100, n_max=4)
    gs = ground_state(build_hamiltonian(pair2, p), [6])
    traj = evolve(gs.hamiltonian, gs.state, uniform_grid(0.2, dt))
    return traj, josephson_current(traj, pair2, g)


def test_continuity_is_second_order(pair2):
    residuals = []
    for dt in (2e-3, 1e-3, 5e-4):
        traj, trace = _quench_run(pair2, dt)
        res = continuity_check(traj, trace, pair2)
        assert res.sign == 1
        residuals.append(res.residual)
    ratios = np.array(residuals[:-1]) / np.array(residuals[1:])
    assert np.all((ratios > 3.6) & (ratios < 4.4))


def test_continuity_single_particle():
    g, mu, dmu = 0.1, 0.0, 100.0
    gs = ground_state(single_particle(g, mu, dmu), [1])
    dt = 1e-4 * 2 * np.pi / dmu
    traj = evolve(gs.hamiltonian, gs.state, uniform_grid(0.2, dt))
    trace = josephson_current(traj, SINGLE, g)
    assert continuity_check(traj, trace, SINGLE).residual < 1e-6


def _peak_at(pair2, g, u, mu, total, n_max=6):
    p = ModelParams(kappa=1, u=u, mu=mu, g=g, delta_mu=100, n_max=n_max)
    gs = ground_state(build_hamiltonian(pair2, p), [total])
    traj = evolve(gs.hamiltonian, gs.state, uniform_grid(2 * np.pi / 10, 2 * np.pi / 100 / 256))
    return peak_current(josephson_current(traj, pair2, g))


def test_current_is_linear_in_weak_coupling(pair2):
    # U = mu = 0: A and B bonding orbitals are degenerate, the condensate is
    # shared and the current amplitude is first order in g
    ratio = _peak_at(pair2, 0.1, 0.0, 0.0, 4) / _peak_at(pair2, 0.05, 0.0, 0.0, 4)
    assert ratio == pytest.approx(2.0, rel=0.05)


def test_gapped_point_current_is_second_order_in_g(pair2):
    # deep Mott point of lattice A: particle number is sharp at g = 0, so
    # <a^dag b> = O(g) and J = O(g^2)
    ratio = _peak_at(pair2, 0.1, 20.0, 10.0, 8) / _peak_at(pair2, 0.05, 20.0, 10.0, 8)
    assert ratio == pytest.approx(4.0, rel=0.05)


def test_trace_rejects_complex_and_nonuniform():
    with pytest.raises(ImaginaryCurrent):
        CurrentTrace(np.arange(3.0), np.array([0, 1e-6j, 0]))
    with pytest.raises(ValueError):
        CurrentTrace(np.array([0.0, 1.0, 3.0]), np.zeros(3))


def test_peak_of_sampled_sine():
    period = 2 * np.pi / 100
    t = uniform_grid(10 * period, period / 40)
    assert peak_current(CurrentTrace(t, np.sin(100 * t))) == pytest.approx(1, rel=5e-3)
    assert peak_current(CurrentTrace(t, np.zeros_like(t))) == 0


def test_sine_transform_of_pure_sine():
    t = uniform_grid(0.2, 2 * np.pi / 100 / 2000)
    spec = sine_transform(CurrentTrace(t, np.sin(100 * t)), [100.0], 0.2)
    exact = np.sqrt(2 / np.pi) * (0.1 - np.sin(40) / 400)
    assert spec.values[0] == pytest.approx(exact, abs=1e-8)


def test_sine_transform_interpolates_tau():
    t = uniform_grid(1.0, 1e-4)
    trace = CurrentTrace(t, np.ones_like(t))
    # int_0^tau sin(w t) dt = (1 - cos(w tau)) / w
    tau = 0.12345
    spec = sine_transform(trace, [3.0], tau)
    assert spec.values[0] == pytest.approx(np.sqrt(2 / np.pi) * (1 - np.cos(3 * tau)) / 3, abs=1e-9)


def test_sine_transform_zero_and_bounds():
    t = uniform_grid(1.0, 0.01)
    zero = CurrentTrace(t, np.zeros_like(t))
    spec = sine_transform(zero, np.linspace(0, 10, 5), 1.0)
    assert not spec.values.any()
    peak = dominant_frequency(spec)
    assert peak.omega == 0.0 and not peak.has_peak
    with pytest.raises(ValueError):
        sine_transform(zero, [1.0], 2.0)


def test_longer_window_sharpens_peak():
    period = 2 * np.pi / 100
    t = uniform_grid(0.4, period / 256)
    trace = CurrentTrace(t, np.sin(100 * t))
    short = sine_transform(trace, [100.0], 0.2).values[0]
    long = sine_transform(trace, [100.0], 0.4).values[0]
    # exact ratio (0.2 - sin(80)/400) / (0.1 - sin(40)/400) ~ 2.063
    exact = (0.2 - np.sin(80) / 400) / (0.1 - np.sin(40) / 400)
    assert long / short == pytest.approx(exact, rel=1e-5)
    assert 1.9 < long / short < 2.1


def test_dominant_frequency_of_sine():
    t = uniform_grid(0.2, 2 * np.pi / 100 / 256)
    spec = sine_transform(CurrentTrace(t, np.sin(100 * t)), np.arange(0.0, 201.0), 0.2)
    assert dominant_frequency(spec).omega == 100.0
