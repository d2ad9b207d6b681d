"""Two-mode (uniform-condensate) reduction of the coupled lattice GP equations.

Each lattice keeps a single uniform mode, phi_a and phi_b, with

    i dphi_a/dt = (E_a + U_a |phi_a|^2) phi_a - K phi_b
    i dphi_b/dt =  E_b phi_b               - K phi_a

or equivalently the imbalance/phase pair z = (N_b - N_a)/N, Theta = theta_a - theta_b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import CurrentTrace
from .lattice import LatticeSpec, ModelParams

STEPS_PER_CYCLE = 400


@dataclass(frozen=True)
class TwoModeParams:
    e_a: float
    e_b: float
    u_a: float
    k_big: float

    def __post_init__(self):
        if self.k_big < 0:
            raise ValueError("junction coupling K must be >= 0")
        if self.u_a < 0:
            raise ValueError("interaction U_a must be >= 0")

    def delta_e(self, n_total: float) -> float:
        return self.e_b - self.e_a - 0.5 * self.u_a * n_total

    def lambda_cap(self, n_total: float) -> float:
        return 0.5 * self.u_a * n_total

    def default_dt(self, n_total: float = 1.0) -> float:
        # fastest rate in either representation; absolute energies count because
        # RK4 phase error accumulates at those frequencies in the amplitude form
        rates = [
            abs(self.e_b - self.e_a),
            abs(self.e_a) + self.u_a * n_total,
            abs(self.e_b),
            self.k_big,
            abs(self.delta_e(n_total)) + abs(self.lambda_cap(n_total)),
        ]
        rate = max(rates)
        if rate == 0:
            return 1e-2
        return 2 * np.pi / rate / STEPS_PER_CYCLE


def reduce_params(spec: LatticeSpec, p: ModelParams) -> TwoModeParams:
    """Uniform-mode energies for periodic d-dimensional lattices (Phi_i = 1/sqrt(N))."""
    d, n = spec.dimension, spec.sites_per_lattice
    return TwoModeParams(
        e_a=-2 * d * p.kappa,
        e_b=p.mu - 2 * d * p.kappa,
        u_a=p.u / n,
        k_big=p.g / n ** (1.0 / d),
    )


@dataclass(frozen=True)
class TwoModeState:
    phi_a: complex
    phi_b: complex

    @classmethod
    def from_population_phase(cls, z: float, theta: float, n_total: float, theta_b: float = 0.0):
        n_a = 0.5 * n_total * (1 - z)
        n_b = 0.5 * n_total * (1 + z)
        return cls(np.sqrt(n_a) * np.exp(1j * (theta + theta_b)), np.sqrt(n_b) * np.exp(1j * theta_b))

    @property
    def n_a(self) -> float:
        return abs(self.phi_a) ** 2

    @property
    def n_b(self) -> float:
        return abs(self.phi_b) ** 2

    @property
    def n_total(self) -> float:
        return self.n_a + self.n_b

    @property
    def z(self) -> float:
        return (self.n_b - self.n_a) / self.n_total

    @property
    def theta(self) -> float:
        return float(np.angle(self.phi_a * np.conj(self.phi_b)))


def _steps(dt: float, t_end: float) -> int:
    if dt <= 0:
        raise ValueError("dt must be positive")
    return int(round(t_end / dt))


@dataclass(frozen=True, eq=False)
class AmplitudeTrajectory:
    times: np.ndarray
    phi_a: np.ndarray
    phi_b: np.ndarray

    @property
    def n_a(self):
        return np.abs(self.phi_a) ** 2

    @property
    def n_b(self):
        return np.abs(self.phi_b) ** 2

    @property
    def n_total(self):
        return self.n_a + self.n_b

    @property
    def z(self):
        return (self.n_b - self.n_a) / self.n_total

    @property
    def theta(self):
        return np.angle(self.phi_a * np.conj(self.phi_b))


def integrate_amplitudes(tp: TwoModeParams, s0: TwoModeState, dt: float | None = None, t_end: float = 1.0):
    dt = tp.default_dt(s0.n_total) if dt is None else dt
    n_steps = _steps(dt, t_end)

    ea, eb, ua, kb = tp.e_a, tp.e_b, tp.u_a, tp.k_big

    def rhs(a, b):
        return -1j * ((ea + ua * (a.real * a.real + a.imag * a.imag)) * a - kb * b), -1j * (eb * b - kb * a)

    out = np.empty((n_steps + 1, 2), dtype=complex)
    a, b = complex(s0.phi_a), complex(s0.phi_b)
    out[0] = (a, b)
    h = 0.5 * dt
    for step in range(n_steps):
        a1, b1 = rhs(a, b)
        a2, b2 = rhs(a + h * a1, b + h * b1)
        a3, b3 = rhs(a + h * a2, b + h * b2)
        a4, b4 = rhs(a + dt * a3, b + dt * b3)
        a += (dt / 6.0) * (a1 + 2 * a2 + 2 * a3 + a4)
        b += (dt / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4)
        out[step + 1] = (a, b)
    ys = out
    return AmplitudeTrajectory(np.arange(n_steps + 1) * dt, ys[:, 0], ys[:, 1])


@dataclass(frozen=True, eq=False)
class PhaseTrajectory:
    times: np.ndarray
    z: np.ndarray
    theta: np.ndarray
    n_total: float
    pole_reached: bool = False
    clamped: bool = False

    @property
    def n_a(self):
        return 0.5 * self.n_total * (1 - self.z)

    @property
    def n_b(self):
        return 0.5 * self.n_total * (1 + self.z)


POLE_TOL = 1e-12


def integrate_population_phase(
    tp: TwoModeParams, z0: float, theta0: float, n_total: float, dt: float | None = None, t_end: float = 1.0
) -> PhaseTrajectory:
    """Integrate dz/dt and dTheta/dt; stops early if |z| reaches 1."""
    if not abs(z0) < 1:
        raise ValueError("|z0| must be < 1 (the phase is undefined at the poles)")
    dt = tp.default_dt(n_total) if dt is None else dt
    n_steps = _steps(dt, t_end)
    de, lam, k = tp.delta_e(n_total), tp.lambda_cap(n_total), tp.k_big

    def rhs(z, th):
        root = math.sqrt(max(1.0 - z * z, 0.0))
        if root == 0.0:
            return 0.0, de + lam * z
        return -2 * k * root * math.sin(th), de + lam * z + 2 * k * z * math.cos(th) / root

    # scalar loop: two floats per step are much cheaper than small numpy arrays
    out = np.empty((n_steps + 1, 2))
    z, th = float(z0), float(theta0)
    out[0] = (z, th)
    clamped = pole = False
    last = n_steps
    h = 0.5 * dt
    for step in range(n_steps):
        a1, b1 = rhs(z, th)
        a2, b2 = rhs(z + h * a1, th + h * b1)
        a3, b3 = rhs(z + h * a2, th + h * b2)
        a4, b4 = rhs(z + dt * a3, th + dt * b3)
        z += (dt / 6.0) * (a1 + 2 * a2 + 2 * a3 + a4)
        th += (dt / 6.0) * (b1 + 2 * b2 + 2 * b3 + b4)
        if abs(z) >= 1.0 - POLE_TOL:
            z = math.copysign(1.0 - POLE_TOL, z)
            clamped = pole = True
            out[step + 1] = (z, th)
            last = step + 1
            break
        out[step + 1] = (z, th)
    out = out[: last + 1]
    return PhaseTrajectory(np.arange(last + 1) * dt, out[:, 0], out[:, 1], n_total, pole, clamped)


def energy(tp: TwoModeParams, traj) -> np.ndarray:
    """E_a N_a + E_b N_b + (U_a/2) N_a^2 - 2K sqrt(N_a N_b) cos(Theta), conserved by the flow."""
    n_a, n_b = traj.n_a, traj.n_b
    return tp.e_a * n_a + tp.e_b * n_b + 0.5 * tp.u_a * n_a**2 - 2 * tp.k_big * np.sqrt(n_a * n_b) * np.cos(traj.theta)


def current_from_trajectory(tp: TwoModeParams, traj) -> CurrentTrace:
    """J = dN_b/dt = -2K sqrt(N_a N_b) sin(Theta).

    ``metadata["frozen"]`` holds the same expression with N_a, N_b fixed at
    their initial values; ``metadata["frozen_max_diff"]`` is the largest gap.
    """
    n_a, n_b = traj.n_a, traj.n_b
    sin_t = np.sin(traj.theta)
    j = -2 * tp.k_big * np.sqrt(n_a * n_b) * sin_t
    frozen = -2 * tp.k_big * np.sqrt(n_a[0] * n_b[0]) * sin_t
    meta = {
        "source": "twomode",
        "frozen": frozen,
        "frozen_max_diff": float(np.max(np.abs(j - frozen), initial=0.0)),
    }
    return CurrentTrace(traj.times, j, meta)


def meanfield_amplitude(g: float, n_sites: int, d: int, psi_a: float, psi_b: float) -> float:
    """Current amplitude 2 g N^((d-1)/d) psi_a psi_b of the weak-link mean-field result."""
    if psi_a < 0 or psi_b < 0:
        raise ValueError("order parameters must be non-negative")
    return 2.0 * g * n_sites ** ((d - 1) / d) * psi_a * psi_b
