"""Error models: the five cost terms and their weighted aggregation.

Terms: state-separation error from the matched-filter SNR, relaxation
during the informative part of the readout, residual resonator photons,
a smoothed-step penalty for measurement-induced state transitions (MIST),
and Lorentzian penalties for frequency collisions with neighboring qubits.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import erfc

from .device import FrequencyRangeError, QubitPhysical, relaxation_rate
from .dynamics import (
    DEFAULT_POLE_GUARD,
    FieldTrajectory,
    PoleProximityError,
    field_pair,
    max_photon,
    residual_photon,
    stark_trajectory,
)

DEFAULT_TOTAL_TIME = 500.0  # ns, fixed t_p + t_r
DEFAULT_MIST_CEILING = 1.0
DEFAULT_MIST_SHARPNESS = 0.05


@dataclass(frozen=True)
class ReadoutParams:
    """The optimizable triple plus the derived ringdown length."""

    omega_q: float
    b0: float
    t_p: float
    t_r: float

    @property
    def total(self) -> float:
        return self.t_p + self.t_r


@dataclass(frozen=True)
class MistParams:
    """Constants of the MIST photon-number threshold.

    a is dimensionless, b has units of ns/rad; both come from external
    numerical simulations and are config inputs here.
    """

    a: float
    b: float

    def __post_init__(self) -> None:
        if self.a <= 0:
            raise ValueError(f"MIST constant a must be > 0, got {self.a}")


class CollisionChannel(enum.Enum):
    SWAP_01_10 = "swap_01_10"
    UP_11_20 = "up_11_20"
    UP_11_02 = "up_11_02"
    HI_12_21 = "hi_12_21"


@dataclass(frozen=True)
class CollisionSpec:
    channel: CollisionChannel
    center: float
    width: float
    amplitude: float

    def __post_init__(self) -> None:
        if self.width <= 0:
            raise ValueError(f"collision width must be > 0, got {self.width}")
        if self.amplitude < 0:
            raise ValueError(f"collision amplitude must be >= 0, got {self.amplitude}")


@dataclass(frozen=True)
class CollisionDefaults:
    """Config-overridable Lorentzian defaults for the coupling heuristic.

    amplitude is chosen so a direct hit on a nearest-neighbor center costs
    about resonance_penalty; next-nearest neighbors are scaled down.
    """

    width: float = 2.0 * math.pi * 0.030  # rad/ns, 30 MHz
    resonance_penalty: float = 1.0
    next_nearest_scale: float = 0.5

    def amplitude(self, next_nearest: bool) -> float:
        # epsilon at resonance is 2*pi*c/gamma, so c = penalty*gamma/(2*pi)
        c = self.resonance_penalty * self.width / (2.0 * math.pi)
        return c * self.next_nearest_scale if next_nearest else c


@dataclass(frozen=True)
class CostWeights:
    separation: float = 1.0
    relaxation: float = 1.0
    photon: float = 1.0
    mist: float = 1.0
    coupling: float = 1.0

    def __post_init__(self) -> None:
        for name in ("separation", "relaxation", "photon", "mist", "coupling"):
            if getattr(self, name) < 0:
                raise ValueError(f"weight {name} must be >= 0")


@dataclass
class CostBreakdown:
    separation: float
    relaxation: float
    photon: float
    mist: float
    coupling: float
    snr: float
    t0: float
    n_max: float
    total: float

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.total)


def snr(traj: FieldTrajectory, eta: float, kappa: float) -> float:
    """Matched-filter SNR: 2*eta*kappa * integral of |beta0 - beta1|^2."""
    d = traj.beta0 - traj.beta1
    mag2 = d.real**2 + d.imag**2
    return 2.0 * eta * kappa * float(np.trapezoid(mag2, dx=traj.dt))


def separation_error(snr_value: float) -> float:
    """Probability of misassigning the state at the given SNR."""
    if snr_value < 0:
        raise ValueError(f"SNR must be >= 0, got {snr_value}")
    return 0.5 * float(erfc(math.sqrt(snr_value) / 2.0))


def _cumulative_snr(traj: FieldTrajectory, eta: float, kappa: float) -> np.ndarray:
    d = traj.beta0 - traj.beta1
    mag2 = d.real**2 + d.imag**2
    cum = np.empty_like(mag2)
    cum[0] = 0.0
    np.cumsum((mag2[1:] + mag2[:-1]) * (0.5 * traj.dt), out=cum[1:])
    return 2.0 * eta * kappa * cum


def half_snr_time(traj: FieldTrajectory, eta: float, kappa: float) -> float:
    """Earliest time where the cumulative SNR reaches half its final value.

    Linear interpolation between bracketing samples; ties resolve to the
    earliest time.
    """
    cum = _cumulative_snr(traj, eta, kappa)
    total = cum[-1]
    if total <= 0.0:
        raise ValueError("total SNR is zero; half-SNR time undefined")
    half = 0.5 * total
    idx = int(np.searchsorted(cum, half, side="left"))
    if idx == 0:
        return 0.0
    lo, hi = cum[idx - 1], cum[idx]
    frac = (half - lo) / (hi - lo)
    return (idx - 1 + frac) * traj.dt


def relaxation_error(
    stark: np.ndarray, dt: float, q: QubitPhysical, t0: float
) -> float:
    """Integral of Gamma1 along the Stark-shifted frequency trace up to t0.

    Trapezoidal quadrature with a linearly interpolated partial last
    interval.  Raises FrequencyRangeError if the trace leaves the table.
    """
    if t0 <= 0.0:
        return 0.0
    n_full = int(t0 / dt)
    n_full = min(n_full, len(stark) - 1)
    rates = relaxation_rate(q, stark[: n_full + 1])
    err = float(np.trapezoid(rates, dx=dt))
    t_rem = t0 - n_full * dt
    if t_rem > 0.0 and n_full + 1 < len(stark):
        frac = t_rem / dt
        omega_end = stark[n_full] + frac * (stark[n_full + 1] - stark[n_full])
        rate_end = relaxation_rate(q, float(omega_end))
        err += 0.5 * (rates[-1] + rate_end) * t_rem
    return err


def mist_threshold(omega_q: float, omega_r: float, p: MistParams) -> float:
    """Maximum tolerable photon number before state transitions set in."""
    if omega_q <= omega_r:
        raise ValueError(
            "MIST threshold is only defined for omega_q > omega_r"
        )
    x = p.a * math.exp(p.b * (omega_q - omega_r))
    return x - math.sqrt(x)


def mist_penalty(
    n_max: float,
    n_th: float,
    sharpness: float = DEFAULT_MIST_SHARPNESS,
    ceiling: float = DEFAULT_MIST_CEILING,
) -> float:
    """Logistic step in n_max centered on the threshold n_th."""
    if n_th <= 0:
        raise ValueError(f"n_th must be > 0, got {n_th}")
    z = (n_max - n_th) / (sharpness * n_th)
    # clip to avoid overflow in exp for far-from-threshold points
    z = min(max(z, -500.0), 500.0)
    return ceiling / (1.0 + math.exp(-z))


def collision_specs(
    q: QubitPhysical,
    neighbor_locked,
    defaults: CollisionDefaults = CollisionDefaults(),
) -> list[CollisionSpec]:
    """Four Lorentzian collision channels per locked neighbor.

    neighbor_locked entries are (QubitPhysical, ReadoutParams, next_nearest)
    triples for neighbors whose parameters the optimizer already fixed.
    """
    specs: list[CollisionSpec] = []
    for nb, nb_params, next_nearest in neighbor_locked:
        w_j = nb_params.omega_q
        width = defaults.width
        amp = defaults.amplitude(next_nearest)
        centers = (
            (CollisionChannel.SWAP_01_10, w_j),
            (CollisionChannel.UP_11_20, w_j + nb.alpha),
            (CollisionChannel.UP_11_02, w_j - q.alpha),
            (CollisionChannel.HI_12_21, w_j + nb.alpha - q.alpha),
        )
        for channel, center in centers:
            specs.append(CollisionSpec(channel, center, width, amp))
    return specs


def coupling_error(omega_q: float, specs) -> float:
    """Sum of Lorentzian penalties at the candidate qubit frequency."""
    total = 0.0
    for s in specs:
        total += (
            s.amplitude * (s.width / 2.0) * math.pi
            / ((omega_q - s.center) ** 2 + s.width**2 / 4.0)
        )
    return total


@lru_cache(maxsize=64)
def _gamma1_arrays(q: QubitPhysical):
    table = np.asarray(q.gamma1_table)
    return table[:, 0].copy(), table[:, 1].copy()


def _infeasible(**known) -> CostBreakdown:
    fields = dict(
        separation=math.nan, relaxation=math.nan, photon=math.nan,
        mist=math.nan, coupling=math.nan, snr=math.nan, t0=math.nan,
        n_max=math.nan,
    )
    fields.update(known)
    return CostBreakdown(total=math.inf, **fields)


def evaluate_cost(
    q: QubitPhysical,
    params: ReadoutParams,
    weights: CostWeights,
    mist: MistParams,
    specs,
    dt: float,
    include_heuristics: bool = True,
    mist_ceiling: float = DEFAULT_MIST_CEILING,
    mist_sharpness: float = DEFAULT_MIST_SHARPNESS,
    pole_guard: float = DEFAULT_POLE_GUARD,
) -> CostBreakdown:
    """All five cost terms for one parameter point.

    Deterministic and pure; a point with a hard domain error (chi pole, or
    Stark trace leaving the Gamma1 table) comes back with total = +inf.
    With include_heuristics False (the predictive-only strategy) the MIST
    and coupling terms are zero and specs are ignored.
    """
    try:
        traj = field_pair(q, params, dt, guard=pole_guard)
    except PoleProximityError:
        return _infeasible()

    # shared intermediates: |beta|^2 for both branches and the cumulative
    # matched-filter integral, each computed once
    beta0, beta1 = traj.beta0, traj.beta1
    n0 = beta0.real**2 + beta0.imag**2
    n1 = beta1.real**2 + beta1.imag**2
    d = beta0 - beta1
    mag2 = d.real**2 + d.imag**2
    cum = np.empty_like(mag2)
    cum[0] = 0.0
    np.cumsum((mag2[1:] + mag2[:-1]) * (0.5 * dt), out=cum[1:])
    scale = 2.0 * q.eta * q.kappa
    snr_value = scale * float(cum[-1])
    sep = separation_error(snr_value)

    if snr_value > 0.0:
        half = 0.5 * cum[-1]
        idx = int(np.searchsorted(cum, half, side="left"))
        frac = (half - cum[idx - 1]) / (cum[idx] - cum[idx - 1]) if idx else 0.0
        t0 = (idx - 1 + frac) * dt if idx else 0.0
        stark = params.omega_q + (2.0 * traj.chi) * n1
        xp, fp = _gamma1_arrays(q)
        n_full = min(int(t0 / dt), len(stark) - 1)
        prefix = stark[: n_full + 1]
        if prefix.min() < xp[0] or prefix.max() > xp[-1]:
            return _infeasible(snr=snr_value, separation=sep)
        rates = np.interp(prefix, xp, fp)
        relax = dt * (float(rates.sum()) - 0.5 * (rates[0] + rates[-1]))
        t_rem = t0 - n_full * dt
        if t_rem > 0.0 and n_full + 1 < len(stark):
            omega_end = prefix[-1] + (t_rem / dt) * (stark[n_full + 1] - prefix[-1])
            if not xp[0] <= omega_end <= xp[-1]:
                return _infeasible(snr=snr_value, separation=sep)
            rate_end = float(np.interp(omega_end, xp, fp))
            relax += 0.5 * (rates[-1] + rate_end) * t_rem
    else:
        t0 = 0.0
        relax = 0.0

    photon = 0.5 * float(n0[-1] + n1[-1])
    n_max = float(max(n0.max(), n1.max()))

    mist_term = 0.0
    coupling_term = 0.0
    if include_heuristics:
        if params.omega_q <= q.omega_r:
            mist_term = mist_ceiling
        else:
            n_th = mist_threshold(params.omega_q, q.omega_r, mist)
            if n_th <= 0.0:
                mist_term = mist_ceiling
            else:
                mist_term = mist_penalty(n_max, n_th, mist_sharpness, mist_ceiling)
        coupling_term = coupling_error(params.omega_q, specs)

    total = (
        weights.separation * sep
        + weights.relaxation * relax
        + weights.photon * photon
        + weights.mist * mist_term
        + weights.coupling * coupling_term
    )
    return CostBreakdown(
        separation=sep,
        relaxation=relax,
        photon=photon,
        mist=mist_term,
        coupling=coupling_term,
        snr=snr_value,
        t0=t0,
        n_max=n_max,
        total=total,
    )
