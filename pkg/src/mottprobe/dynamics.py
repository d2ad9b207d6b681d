"""Quench dynamics, Josephson current traces and their finite-time sine transform."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from . import fock
from .fock import FockBasis, QuantumState
from .hamiltonian import DENSE_MAX, HamiltonianBundle
from .lattice import LatticeSpec

SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)


class BasisMismatch(ValueError):
    pass


class ImaginaryCurrent(ArithmeticError):
    pass


def uniform_grid(t_end: float, dt: float) -> np.ndarray:
    """Grid 0, dt, 2dt, ... whose last point is the first one at or past ``t_end``."""
    steps = int(np.ceil(t_end / dt - 1e-9))
    return np.arange(steps + 1) * dt


def _check_uniform(times: np.ndarray) -> None:
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("time grid must be a nonempty 1-d array")
    if len(times) > 1:
        steps = np.diff(times)
        if np.any(steps <= 0):
            raise ValueError("time grid must be strictly increasing")
        if np.ptp(steps) > 1e-9 * max(abs(steps[0]), 1e-300) + 1e-15:
            raise ValueError("time grid must be uniform")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Evolved states on a time grid; rows of ``amplitudes`` are states."""

    basis: FockBasis
    times: np.ndarray
    amplitudes: np.ndarray

    def __len__(self):
        return len(self.times)

    def __getitem__(self, k) -> QuantumState:
        return QuantumState(self.basis, self.amplitudes[k])

    def __iter__(self):
        return (self[k] for k in range(len(self)))

    def expect(self, op) -> np.ndarray:
        """<psi(t)| op |psi(t)> for every time, complex."""
        psi = self.amplitudes
        return np.einsum("ti,ti->t", psi.conj(), (op @ psi.T).T)

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.amplitudes, axis=1)


def evolve(h: HamiltonianBundle, psi0: QuantumState, times) -> Trajectory:
    """Exact evolution under ``h_static + h_drive`` (+ aux terms if present).

    Dense spectral decomposition below ``DENSE_MAX``; Krylov action of the
    exponential on uniform grids above it.
    """
    times = np.asarray(times, dtype=float)
    if not psi0.basis.compatible(h.basis):
        raise BasisMismatch(
            f"state basis (sites={psi0.basis.site_count}, sector={psi0.basis.sector}) "
            f"does not match Hamiltonian basis (sites={h.basis.site_count}, sector={h.basis.sector})"
        )
    if abs(np.linalg.norm(psi0.amplitudes) - 1.0) > 1e-10:
        raise ValueError("initial state must be normalized")
    hmat = h.h_evolve
    if h.basis.dim <= DENSE_MAX:
        w, v = sla.eigh(hmat.toarray())
        c = v.conj().T @ psi0.amplitudes
        phases = np.exp(-1j * np.outer(times, w))
        amps = (phases * c) @ v.T
    else:
        _check_uniform(times)
        if len(times) == 1:
            amps = spla.expm_multiply(-1j * times[0] * hmat, psi0.amplitudes)[None, :]
        else:
            amps = spla.expm_multiply(
                -1j * hmat, psi0.amplitudes, start=times[0], stop=times[-1], num=len(times), endpoint=True
            )
    return Trajectory(psi0.basis, times, np.asarray(amps))


@dataclass(frozen=True, eq=False)
class CurrentTrace:
    times: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values)
        _check_uniform(times)
        if values.shape != times.shape:
            raise ValueError("times and values must have equal length")
        if np.iscomplexobj(values):
            if np.max(np.abs(values.imag), initial=0.0) > 1e-10:
                raise ImaginaryCurrent("current trace has a non-negligible imaginary part")
            values = values.real
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values.astype(float))

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0


def junction_operator(basis: FockBasis, spec: LatticeSpec):
    """Sum over contact sites of a_i^dagger b_i on the joint A+B basis."""
    n = spec.sites_per_lattice
    if basis.site_count != 2 * n:
        raise BasisMismatch("current needs the joint A+B basis")
    op = None
    for i in spec.contact_sites:
        term = fock.hopping(basis, i, n + i)
        op = term if op is None else op + term
    return op.tocsr()


def josephson_current(states: Trajectory, spec: LatticeSpec, g: float, metadata=None) -> CurrentTrace:
    """J(t) = -i g sum_C <a_i^dag b_i - b_i^dag a_i>; positive J means flow into B."""
    x = junction_operator(states.basis, spec)
    raw = -1j * g * (states.expect(x) - states.expect(x.T.conj().tocsr()))
    residue = float(np.max(np.abs(raw.imag), initial=0.0))
    if residue > 1e-10 * max(1.0, float(np.max(np.abs(raw.real), initial=0.0))):
        raise ImaginaryCurrent(f"imaginary residue {residue:.3e} in current")
    meta = dict(metadata or {})
    meta.setdefault("g", g)
    meta.setdefault("basis_dim", states.basis.dim)
    meta["imag_residue"] = residue
    return CurrentTrace(states.times, raw.real, meta)


@dataclass(frozen=True)
class ContinuityResult:
    residual: float
    sign: int  # +1: J = dN_B/dt, -1: J = -dN_B/dt


def continuity_check(states: Trajectory, trace: CurrentTrace, spec: LatticeSpec) -> ContinuityResult:
    """Max deviation between the centred difference of <N_B> and the current."""
    if not np.array_equal(states.times, trace.times):
        raise ValueError("states and trace must share a time grid")
    if len(trace.times) < 3:
        return ContinuityResult(0.0, 1)
    n = spec.sites_per_lattice
    n_b = states.expect(fock.total_number(states.basis, range(n, 2 * n))).real
    dndt = (n_b[2:] - n_b[:-2]) / (2.0 * trace.dt)
    j = trace.values[1:-1]
    plus = float(np.max(np.abs(dndt - j)))
    minus = float(np.max(np.abs(dndt + j)))
    return ContinuityResult(plus, 1) if plus <= minus else ContinuityResult(minus, -1)


def peak_current(trace: CurrentTrace) -> float:
    """Largest |J(t)| on the trace (the oscillation amplitude)."""
    if len(trace.values) == 0:
        raise ValueError("empty trace")
    return float(np.max(np.abs(trace.values)))


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    omegas: np.ndarray
    values: np.ndarray
    tau: float

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float)
        if len(omegas) > 1 and np.any(np.diff(omegas) <= 0):
            raise ValueError("omega grid must be strictly increasing")
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))


def sine_transform(trace: CurrentTrace, omegas, tau: float) -> SpectrumResult:
    """sqrt(2/pi) * int_0^tau J(t) sin(omega t) dt by the composite trapezoid rule.

    Samples past ``tau`` are dropped; if ``tau`` falls between samples the last
    panel ends at a linearly interpolated point.
    """
    t, j = trace.times, trace.values
    if tau > t[-1] * (1 + 1e-12) + 1e-15:
        raise ValueError(f"tau={tau} exceeds trace end {t[-1]}")
    if t[0] != 0.0:
        raise ValueError("trace must start at t=0")
    keep = t <= tau * (1 + 1e-12)
    ts, js = t[keep], j[keep]
    if not np.isclose(ts[-1], tau, rtol=1e-12, atol=1e-15):
        ts = np.append(ts, tau)
        js = np.append(js, np.interp(tau, t, j))
    omegas = np.asarray(omegas, dtype=float)
    integrand = js[None, :] * np.sin(np.outer(omegas, ts))
    values = SQRT_2_OVER_PI * np.trapezoid(integrand, ts, axis=1)
    return SpectrumResult(omegas, values, float(tau))


@dataclass(frozen=True)
class Peak:
    omega: float
    value: float
    has_peak: bool


def dominant_frequency(spectrum: SpectrumResult) -> Peak:
    """Grid frequency with the largest |J(omega)|; the first wins on ties."""
    if len(spectrum.omegas) == 0:
        raise ValueError("empty spectrum")
    mag = np.abs(spectrum.values)
    k = int(np.argmax(mag))  # argmax returns the first maximum
    return Peak(float(spectrum.omegas[k]), float(spectrum.values[k]), bool(mag[k] > 0))
