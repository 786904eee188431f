"""Monte Carlo benchmark of simultaneous readout with optimized parameters.

Each shot collapses the IQ plane to the 1-D matched-filter decision
variable: a Gaussian with mean +/- sqrt(SNR)/2 and variance 1/2, threshold
at zero, which reproduces the separation error 0.5*erfc(sqrt(SNR)/2)
exactly.  Relaxation flips a prepared |1> before thresholding, preparation
errors flip the prepared bit, and the heuristic coupling penalty is applied
as a crude per-shot outcome randomization (flagged as such in reports).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .device import DeviceGraph, QubitId, Role
from .error_models import CostBreakdown
from .snake import OptimizationResult


class Subset(enum.Enum):
    ALL_QUBITS = "all"
    MEASURE_ONLY = "measure"


@dataclass(frozen=True)
class BenchmarkConfig:
    n_states: int = 200
    n_shots: int = 2000
    seed: int = 0
    prep_error: float = 0.0
    subset: Subset = Subset.ALL_QUBITS

    def __post_init__(self) -> None:
        if self.n_states <= 0 or self.n_shots <= 0:
            raise ValueError("n_states and n_shots must be > 0")
        if not 0.0 <= self.prep_error <= 1.0:
            raise ValueError("prep_error must be a probability")


@dataclass
class ShotRecords:
    """Aggregated outcomes: prepared bits and measured-one counts per state."""

    qubits: list[QubitId]
    prepared: np.ndarray  # (n_states, n_qubits) of 0/1
    ones: np.ndarray      # (n_states, n_qubits) counts of measured |1>
    n_shots: int


@dataclass
class ErrorBudget:
    separation: float
    state_prep: float
    relaxation: float
    unknown: float
    observed: float
    suspect: bool = False  # unknown negative beyond statistical tolerance


@dataclass
class BenchmarkReport:
    config: BenchmarkConfig
    qubits: list[QubitId]
    p10: dict[QubitId, float]       # P(measured 1 | prepared 0)
    p01: dict[QubitId, float]       # P(measured 0 | prepared 1)
    error: dict[QubitId, float]
    cross_fidelity: np.ndarray      # (n_qubits, n_qubits), nan on diagonal
    undefined_pairs: list[tuple[QubitId, QubitId]]
    budget: ErrorBudget
    records: ShotRecords = field(repr=False, default=None)


def _sample_shots(
    prepared: int,
    n: int,
    snr: float,
    relax_p: float,
    prep_p: float,
    coupling_p: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Vectorized shot model; returns a boolean array of measured bits."""
    bits = np.full(n, bool(prepared))
    if prep_p > 0.0:
        bits ^= rng.random(n) < prep_p
    if relax_p > 0.0:
        bits &= ~(rng.random(n) < relax_p)
    mean = np.where(bits, 0.5, -0.5) * math.sqrt(snr)
    x = mean + rng.normal(0.0, math.sqrt(0.5), n)
    measured = x > 0.0
    if coupling_p > 0.0:
        scramble = rng.random(n) < min(1.0, coupling_p)
        measured[scramble] = rng.integers(0, 2, int(scramble.sum())).astype(bool)
    return measured


def sample_shot(
    breakdown: CostBreakdown,
    prepared: int,
    rng: np.random.Generator,
    prep_error: float = 0.0,
) -> int:
    """Draw a single measured bit for a prepared state."""
    out = _sample_shots(
        prepared, 1, breakdown.snr,
        min(1.0, max(0.0, breakdown.relaxation)),
        prep_error,
        breakdown.coupling,
        rng,
    )
    return int(out[0])


def measurement_error(
    prepared: np.ndarray, ones: np.ndarray, n_shots: int
) -> tuple[float, float, float]:
    """(P(1|0), P(0|1), symmetric error) from per-state tallies of one qubit."""
    prepared = np.asarray(prepared, dtype=bool)
    ones = np.asarray(ones, dtype=float)
    n0 = int((~prepared).sum())
    n1 = int(prepared.sum())
    if n0 == 0 or n1 == 0:
        raise ValueError("both prepared values must be represented")
    p10 = float(ones[~prepared].sum() / (n0 * n_shots))
    p01 = float((n_shots - ones[prepared]).sum() / (n1 * n_shots))
    return p10, p01, 0.5 * (p10 + p01)


def cross_fidelity(records: ShotRecords):
    """Pairwise cross-fidelity matrix from the benchmark tallies.

    F_ij = 1 - [P(1_i|0_i 0_j) + P(1_i|1_i 0_j)
                + P(0_i|1_i 1_j) + P(0_i|0_i 1_j)] / 2,
    conditioning on the prepared states of both qubits.  Entries whose
    conditioning cell is empty come back as nan and are listed separately.
    """
    prep = records.prepared.astype(bool)
    ones = records.ones.astype(float)
    n = records.n_shots
    n_q = len(records.qubits)
    f = np.full((n_q, n_q), np.nan)
    undefined = []
    for i in range(n_q):
        for j in range(n_q):
            if i == j:
                continue
            cells = []
            ok = True
            # (y_i, z_j, probability of measuring NOT y_i)
            for y, z in ((0, 0), (1, 0), (1, 1), (0, 1)):
                mask = (prep[:, i] == bool(y)) & (prep[:, j] == bool(z))
                count = int(mask.sum())
                if count == 0:
                    ok = False
                    break
                if y == 0:
                    p = ones[mask, i].sum() / (count * n)       # P(1_i | 0_i z_j)
                else:
                    p = (n - ones[mask, i]).sum() / (count * n)  # P(0_i | 1_i z_j)
                cells.append(p)
            if ok:
                # cells hold misassignment probabilities; the formula's
                # second and fourth terms are correct-assignment ones.
                f[i, j] = 1.0 - 0.5 * (
                    cells[0] + (1.0 - cells[1]) + cells[2] + (1.0 - cells[3])
                )
            else:
                undefined.append((records.qubits[i], records.qubits[j]))
    return f, undefined


def error_budget(
    breakdowns: dict[QubitId, CostBreakdown],
    observed: float,
    prep_error: float,
    tolerance: float = 0.0,
) -> ErrorBudget:
    """Decompose the observed mean error into modeled components.

    The relaxation model applies only to prepared |1>, so it enters the
    symmetric (state-averaged) error at half weight.  unknown is the exact
    remainder; a remainder more negative than -tolerance flags the budget.
    """
    sep = float(np.mean([b.separation for b in breakdowns.values()]))
    relax = float(np.mean([b.relaxation for b in breakdowns.values()])) / 2.0
    unknown = observed - (sep + prep_error + relax)
    return ErrorBudget(
        separation=sep,
        state_prep=prep_error,
        relaxation=relax,
        unknown=unknown,
        observed=observed,
        suspect=unknown < -tolerance,
    )


def run_benchmark(
    graph: DeviceGraph,
    result: OptimizationResult,
    cfg: BenchmarkConfig,
) -> BenchmarkReport:
    """Simulate simultaneous readout of random initial states.

    Deterministic for a fixed config: prepared states and every qubit's
    shots draw from per-state substreams spawned from the seed.
    """
    if cfg.subset is Subset.MEASURE_ONLY:
        qubits = [q for q in graph.sorted_ids() if q.role is Role.MEASURE]
    else:
        qubits = graph.sorted_ids()
    missing = [q for q in qubits if q not in result.per_qubit]
    if missing:
        raise ValueError(f"optimization result missing qubits {missing}")

    shot_model = []
    for qid in qubits:
        bd = result.per_qubit[qid].breakdown
        shot_model.append((
            bd.snr,
            min(1.0, max(0.0, bd.relaxation)),
            bd.coupling,
        ))

    ss = np.random.SeedSequence(cfg.seed)
    children = ss.spawn(cfg.n_states + 1)
    prep_rng = np.random.default_rng(children[0])
    prepared = prep_rng.integers(0, 2, size=(cfg.n_states, len(qubits)))
    ones = np.zeros((cfg.n_states, len(qubits)), dtype=np.int64)
    for s in range(cfg.n_states):
        rng = np.random.default_rng(children[s + 1])
        for j, (snr_v, relax_p, coup_p) in enumerate(shot_model):
            measured = _sample_shots(
                int(prepared[s, j]), cfg.n_shots, snr_v, relax_p,
                cfg.prep_error, coup_p, rng,
            )
            ones[s, j] = int(measured.sum())

    records = ShotRecords(qubits, prepared, ones, cfg.n_shots)
    p10, p01, error = {}, {}, {}
    for j, qid in enumerate(qubits):
        p10[qid], p01[qid], error[qid] = measurement_error(
            prepared[:, j], ones[:, j], cfg.n_shots
        )
    fmat, undefined = cross_fidelity(records)
    observed = float(np.mean([error[qid] for qid in qubits]))
    budget = error_budget(
        {qid: result.per_qubit[qid].breakdown for qid in qubits},
        observed,
        cfg.prep_error,
        tolerance=3.0 * math.sqrt(0.25 / (cfg.n_states * cfg.n_shots)),
    )
    return BenchmarkReport(
        config=cfg,
        qubits=qubits,
        p10=p10,
        p01=p01,
        error=error,
        cross_fidelity=fmat,
        undefined_pairs=undefined,
        budget=budget,
        records=records,
    )
