"""Driven readout-resonator dynamics.

Integrates d(beta)/dt = sqrt(kappa) * B(t) + (i*Delta - kappa/2) * beta
with fixed-step RK4 for a rectangular pulse (B(t) = B0 for t < t_p, then
zero), and derives photon numbers and the AC-Stark frequency trace.

The ODE is linear with a piecewise-constant drive, so the pulse response
is assembled from a cached unit-amplitude step response: RK4 superposition
is exact for this recurrence, the result scales exactly linearly in B0,
and repeated evaluations at different amplitudes reuse the integration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .device import QubitPhysical, coupling_strength

#: pulse length and drive detuning are guarded against the chi poles by this
#: margin (rad/ns); about 8 MHz.
DEFAULT_POLE_GUARD = 0.05


class PoleProximityError(ValueError):
    """Raised when omega_q sits too close to a pole of the dispersive shift."""


class StepSizeError(ValueError):
    """Raised when the RK4 step is too coarse for the requested dynamics."""


@dataclass(frozen=True)
class PulseShape:
    """Rectangular readout pulse: drive b0 for t_p ns, then t_r ns ringdown."""

    b0: float
    t_p: float
    t_r: float

    def __post_init__(self) -> None:
        if self.t_p <= 0:
            raise ValueError(f"t_p must be > 0, got {self.t_p}")
        if self.t_r < 0:
            raise ValueError(f"t_r must be >= 0, got {self.t_r}")
        if self.b0 < 0:
            raise ValueError(f"b0 must be >= 0, got {self.b0}")

    @property
    def total(self) -> float:
        return self.t_p + self.t_r


@dataclass
class FieldTrajectory:
    """Resonator fields for both prepared states on a shared time grid.

    beta0 is the field with the qubit in |0> (drive detuning +chi), beta1
    the field for |1> (detuning -chi).
    """

    dt: float
    beta0: np.ndarray
    beta1: np.ndarray
    chi: float

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.beta0)) * self.dt


def dispersive_shift(
    q: QubitPhysical, omega_q: float, guard: float = DEFAULT_POLE_GUARD
) -> float:
    """State-dependent resonator shift chi at the given qubit frequency."""
    detuning = omega_q - q.omega_r
    if abs(detuning) < guard or abs(detuning + q.alpha) < guard:
        raise PoleProximityError(
            f"omega_q = {omega_q} rad/ns within {guard} rad/ns of a chi pole"
        )
    g = coupling_strength(q, omega_q)
    return (
        g * g * q.alpha
        / (detuning * detuning * (1.0 + q.alpha / detuning))
        * (1.0 - detuning / omega_q)
    )


@lru_cache(maxsize=256)
def _unit_step_response(delta: float, kappa: float, dt: float, n_steps: int):
    """RK4 samples of the field under a constant unit drive, beta(0) = 0."""
    lam = 1j * delta - 0.5 * kappa
    c = math.sqrt(kappa)
    out = np.empty(n_steps + 1, dtype=complex)
    beta = 0j
    out[0] = beta
    half = 0.5 * dt
    sixth = dt / 6.0
    for n in range(n_steps):
        k1 = c + lam * beta
        k2 = c + lam * (beta + half * k1)
        k3 = c + lam * (beta + half * k2)
        k4 = c + lam * (beta + dt * k3)
        beta = beta + sixth * (k1 + 2.0 * (k2 + k3) + k4)
        out[n + 1] = beta
    out.setflags(write=False)
    return out


def _check_step(delta: float, kappa: float, dt: float) -> None:
    if dt <= 0:
        raise StepSizeError(f"dt must be > 0, got {dt}")
    limit = 1.0 / kappa
    if delta != 0.0:
        limit = min(limit, 1.0 / abs(delta))
    if dt > 0.1 * limit * (1.0 + 1e-9):
        raise StepSizeError(
            f"dt = {dt} ns too coarse; need dt <= min(1/kappa, 1/|delta|)/10 "
            f"= {0.1 * limit:.4g} ns"
        )


def solve_field(
    pulse: PulseShape, delta: float, kappa: float, dt: float
) -> np.ndarray:
    """Field samples on [0, t_p + t_r] at spacing dt for a rectangular pulse.

    t_p and the total time are snapped to the nearest grid point (the shipped
    configs keep them on-grid).
    """
    _check_step(delta, kappa, dt)
    n_tot = round(pulse.total / dt)
    n_p = round(pulse.t_p / dt)
    if n_p < 1 or n_tot < n_p:
        raise StepSizeError(
            f"pulse (t_p={pulse.t_p}, t_r={pulse.t_r}) unresolvable at dt={dt}"
        )
    step = _unit_step_response(delta, kappa, dt, n_tot)
    out = step.copy()
    if n_p < n_tot:
        out[n_p:] -= step[: n_tot + 1 - n_p]
    out *= pulse.b0
    return out


def field_pair(
    q: QubitPhysical,
    params,
    dt: float,
    guard: float = DEFAULT_POLE_GUARD,
) -> FieldTrajectory:
    """Solve both state branches at drive detunings +chi and -chi.

    params carries omega_q, b0, t_p and t_r (see error_models.ReadoutParams).
    """
    chi = dispersive_shift(q, params.omega_q, guard)
    pulse = PulseShape(b0=params.b0, t_p=params.t_p, t_r=params.t_r)
    beta0 = solve_field(pulse, +chi, q.kappa, dt)
    beta1 = solve_field(pulse, -chi, q.kappa, dt)
    return FieldTrajectory(dt=dt, beta0=beta0, beta1=beta1, chi=chi)


def stark_trajectory(
    omega_q0: float, chi: float, traj: FieldTrajectory
) -> np.ndarray:
    """Instantaneous qubit frequency under the linear AC-Stark shift."""
    n1 = traj.beta1.real**2 + traj.beta1.imag**2
    return omega_q0 + 2.0 * n1 * chi


def max_photon(traj: FieldTrajectory) -> float:
    """Largest photon number over both branches and all samples."""
    n0 = traj.beta0.real**2 + traj.beta0.imag**2
    n1 = traj.beta1.real**2 + traj.beta1.imag**2
    return float(max(n0.max(), n1.max()))


def residual_photon(traj: FieldTrajectory) -> float:
    """Mean photon number left in the resonator at the end of the ringdown."""
    last0 = traj.beta0[-1]
    last1 = traj.beta1[-1]
    return float(0.5 * (abs(last0) ** 2 + abs(last1) ** 2))
