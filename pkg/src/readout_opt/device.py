"""Device model: fixed physical parameters, grid topology, and config I/O.

Internal units are angular frequencies in rad/ns, rates in 1/ns, and times
in ns.  Config files use GHz/MHz and rates per microsecond; conversion
happens once at load.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import yaml

TWO_PI = 2.0 * math.pi


def ghz_to_rad_ns(f_ghz: float) -> float:
    """Convert a linear frequency in GHz to an angular one in rad/ns."""
    return TWO_PI * f_ghz


def rad_ns_to_ghz(omega: float) -> float:
    return omega / TWO_PI


class DeviceConfigError(ValueError):
    """Raised when a device config fails to parse or violates an invariant."""


class FrequencyRangeError(ValueError):
    """Raised when a frequency falls outside the relaxation-rate table."""


class Role(enum.Enum):
    DATA = "data"
    MEASURE = "measure"


class NeighborOrder(enum.Enum):
    NEAREST = "nearest"
    NEXT_NEAREST = "next_nearest"
    BOTH = "both"


@dataclass(frozen=True, order=True)
class QubitId:
    row: int
    col: int
    role: Role = field(compare=False, default=Role.DATA)

    def __str__(self) -> str:
        return f"({self.row},{self.col},{self.role.value})"


@dataclass(frozen=True)
class QubitPhysical:
    """Fixed circuit parameters for one qubit and its readout resonator.

    gamma1_table is a tuple of (omega_q [rad/ns], rate [1/ns]) samples,
    strictly increasing in frequency.  amp_ref converts the dimensionless
    config amplitude into a drive amplitude in sqrt(photons/ns).
    """

    alpha: float
    g_eff: float
    omega_r: float
    eta: float
    kappa: float
    gamma1_table: tuple[tuple[float, float], ...]
    amp_ref: float

    def validate(self, qid: QubitId | None = None) -> None:
        where = f" for qubit {qid}" if qid is not None else ""
        if not self.alpha < 0:
            raise DeviceConfigError(f"alpha must be < 0{where}, got {self.alpha}")
        if not self.kappa > 0:
            raise DeviceConfigError(f"kappa must be > 0{where}, got {self.kappa}")
        if not 0 < self.eta <= 1:
            raise DeviceConfigError(f"eta must be in (0, 1]{where}, got {self.eta}")
        if self.g_eff < 0:
            raise DeviceConfigError(f"g_eff must be >= 0{where}, got {self.g_eff}")
        if self.amp_ref <= 0:
            raise DeviceConfigError(f"amp_ref must be > 0{where}, got {self.amp_ref}")
        if len(self.gamma1_table) < 2:
            raise DeviceConfigError(f"gamma1_table needs >= 2 entries{where}")
        freqs = [f for f, _ in self.gamma1_table]
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise DeviceConfigError(
                f"gamma1_table must be strictly increasing in frequency{where}"
            )
        if any(rate < 0 for _, rate in self.gamma1_table):
            raise DeviceConfigError(f"gamma1_table rates must be >= 0{where}")

    @property
    def gamma1_span(self) -> tuple[float, float]:
        return self.gamma1_table[0][0], self.gamma1_table[-1][0]


@dataclass
class DeviceGraph:
    """Immutable-after-load map of qubits plus per-qubit search bands."""

    qubits: dict[QubitId, QubitPhysical]
    search_band: dict[QubitId, tuple[float, float]]
    _coords: dict[tuple[int, int], QubitId] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._coords = {(q.row, q.col): q for q in self.qubits}

    def sorted_ids(self) -> list[QubitId]:
        return sorted(self.qubits, key=lambda q: (q.row, q.col))

    def at(self, row: int, col: int) -> QubitId | None:
        return self._coords.get((row, col))


def coupling_strength(q: QubitPhysical, omega_q: float) -> float:
    """Qubit-resonator coupling g = g_eff * sqrt(omega_r * omega_q) / 2."""
    if omega_q <= 0:
        raise ValueError(f"omega_q must be > 0, got {omega_q}")
    return q.g_eff * math.sqrt(q.omega_r * omega_q) / 2.0


def relaxation_rate(q: QubitPhysical, omega_q):
    """Linearly interpolated Gamma1 at omega_q; no extrapolation.

    Accepts a scalar or an ndarray of frequencies.
    """
    lo, hi = q.gamma1_span
    omega_arr = np.asarray(omega_q, dtype=float)
    if omega_arr.size and (omega_arr.min() < lo or omega_arr.max() > hi):
        raise FrequencyRangeError(
            f"frequency outside gamma1 table span [{lo}, {hi}] rad/ns"
        )
    table = np.asarray(q.gamma1_table)
    out = np.interp(omega_arr, table[:, 0], table[:, 1])
    return float(out) if np.isscalar(omega_q) else out


_NEAREST_OFFSETS = ((-1, 0), (0, -1), (0, 1), (1, 0))
_DIAGONAL_OFFSETS = ((-1, -1), (-1, 1), (1, -1), (1, 1))


def neighbors(graph: DeviceGraph, q: QubitId, order: NeighborOrder) -> list[QubitId]:
    """Grid neighbors of q at the requested order, in row-major order."""
    if q not in graph.qubits:
        raise KeyError(f"unknown qubit {q}")
    if order is NeighborOrder.NEAREST:
        offsets = _NEAREST_OFFSETS
    elif order is NeighborOrder.NEXT_NEAREST:
        offsets = _DIAGONAL_OFFSETS
    else:
        offsets = _NEAREST_OFFSETS + _DIAGONAL_OFFSETS
    found = []
    for dr, dc in offsets:
        nb = graph.at(q.row + dr, q.col + dc)
        if nb is not None:
            found.append(nb)
    found.sort(key=lambda n: (n.row, n.col))
    return found


_REQUIRED_FIELDS = (
    "row", "col", "role", "alpha_GHz", "g_eff", "f_r_GHz", "eta",
    "kappa_MHz", "amp_ref", "band_GHz", "gamma1_table",
)


def load_device(config_text: str) -> DeviceGraph:
    """Parse and validate a device config (YAML text) into a DeviceGraph."""
    try:
        raw = yaml.safe_load(config_text)
    except yaml.YAMLError as exc:
        raise DeviceConfigError(f"config parse failure: {exc}") from exc
    if not isinstance(raw, dict) or "qubits" not in raw:
        raise DeviceConfigError("config must be a mapping with a 'qubits' list")
    qubits: dict[QubitId, QubitPhysical] = {}
    bands: dict[QubitId, tuple[float, float]] = {}
    seen: set[tuple[int, int]] = set()
    for entry in raw["qubits"]:
        missing = [f for f in _REQUIRED_FIELDS if f not in entry]
        if missing:
            raise DeviceConfigError(f"qubit entry missing fields {missing}: {entry}")
        try:
            role = Role(entry["role"])
        except ValueError:
            raise DeviceConfigError(f"unknown role {entry['role']!r}") from None
        qid = QubitId(int(entry["row"]), int(entry["col"]), role)
        if (qid.row, qid.col) in seen:
            raise DeviceConfigError(f"duplicate coordinates for qubit {qid}")
        seen.add((qid.row, qid.col))
        table = tuple(
            (ghz_to_rad_ns(float(f)), float(rate) * 1e-3)
            for f, rate in entry["gamma1_table"]
        )
        phys = QubitPhysical(
            alpha=ghz_to_rad_ns(float(entry["alpha_GHz"])),
            g_eff=float(entry["g_eff"]),
            omega_r=ghz_to_rad_ns(float(entry["f_r_GHz"])),
            eta=float(entry["eta"]),
            kappa=TWO_PI * float(entry["kappa_MHz"]) * 1e-3,
            gamma1_table=table,
            amp_ref=float(entry["amp_ref"]),
        )
        phys.validate(qid)
        band_lo, band_hi = (ghz_to_rad_ns(float(v)) for v in entry["band_GHz"])
        if band_lo >= band_hi:
            raise DeviceConfigError(f"empty search band for qubit {qid}")
        lo, hi = phys.gamma1_span
        if band_lo < lo or band_hi > hi:
            raise DeviceConfigError(
                f"search band outside gamma1 table span for qubit {qid}"
            )
        qubits[qid] = phys
        bands[qid] = (band_lo, band_hi)
    if not qubits:
        raise DeviceConfigError("config contains no qubits")
    return DeviceGraph(qubits=qubits, search_band=bands)


def serialize_device(graph: DeviceGraph) -> str:
    """Emit a device config (YAML text) that load_device accepts back."""
    entries = []
    for qid in graph.sorted_ids():
        q = graph.qubits[qid]
        lo, hi = graph.search_band[qid]
        entries.append({
            "row": qid.row,
            "col": qid.col,
            "role": qid.role.value,
            "alpha_GHz": rad_ns_to_ghz(q.alpha),
            "g_eff": q.g_eff,
            "f_r_GHz": rad_ns_to_ghz(q.omega_r),
            "eta": q.eta,
            "kappa_MHz": q.kappa / TWO_PI * 1e3,
            "amp_ref": q.amp_ref,
            "band_GHz": [rad_ns_to_ghz(lo), rad_ns_to_ghz(hi)],
            "gamma1_table": [
                [rad_ns_to_ghz(f), rate * 1e3] for f, rate in q.gamma1_table
            ],
        })
    return yaml.safe_dump({"qubits": entries}, sort_keys=False)
