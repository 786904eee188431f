"""Greedy graph-traversal ("snake") optimizer with brute-force inner search.

Measure qubits are optimized first, hopping diagonally between them where
possible, then the data qubits.  Each qubit's cost is minimized by an
exhaustive scan over its (omega_q, amplitude, pulse length) grid while
accumulating frequency-collision constraints from already-locked neighbors
up to next-nearest order.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .device import DeviceGraph, NeighborOrder, QubitId, QubitPhysical, neighbors
from .error_models import (
    CollisionDefaults,
    CostBreakdown,
    CostWeights,
    MistParams,
    ReadoutParams,
    collision_specs,
    evaluate_cost,
)


class InfeasibleQubitError(RuntimeError):
    """Raised when every grid point for a qubit is infeasible.

    Carries any partial OptimizationResult accumulated before the failure.
    """

    def __init__(self, qid, partial=None):
        super().__init__(f"all grid points infeasible for qubit {qid}")
        self.qid = qid
        self.partial = partial


@dataclass(frozen=True)
class SearchGrid:
    """Sorted candidate values for the three optimizable parameters."""

    omega_points: tuple[float, ...]
    amp_points: tuple[float, ...]
    tp_points: tuple[float, ...]

    def __post_init__(self) -> None:
        for name in ("omega_points", "amp_points", "tp_points"):
            pts = getattr(self, name)
            if len(pts) == 0:
                raise ValueError(f"{name} must be non-empty")
            if any(b <= a for a, b in zip(pts, pts[1:])):
                raise ValueError(f"{name} must be strictly ascending")

    @property
    def size(self) -> int:
        return len(self.omega_points) * len(self.amp_points) * len(self.tp_points)


@dataclass
class QubitResult:
    params: ReadoutParams
    breakdown: CostBreakdown
    traversal_index: int
    n_collision_specs: int


@dataclass
class OptimizationResult:
    per_qubit: dict[QubitId, QubitResult]
    order: list[QubitId]
    evaluations: int


def _row_major(qids) -> list[QubitId]:
    return sorted(qids, key=lambda q: (q.row, q.col))


def traversal_order(graph: DeviceGraph, start: QubitId | None = None) -> list[QubitId]:
    """Measure qubits first (diagonal hops where possible), then data qubits.

    Among measure qubits the walk prefers an unvisited diagonal neighbor
    (row-major tie-break) and falls back to the first unvisited measure
    qubit in row-major order.  Data qubits follow in row-major order.
    """
    from .device import Role

    measures = _row_major(q for q in graph.qubits if q.role is Role.MEASURE)
    datas = _row_major(q for q in graph.qubits if q.role is Role.DATA)
    order: list[QubitId] = []
    if measures:
        if start is None:
            current = measures[0]
        else:
            if start not in graph.qubits or start.role is not Role.MEASURE:
                raise ValueError(f"start qubit {start} is not a measure qubit")
            current = start
        unvisited = set(measures)
        while True:
            order.append(current)
            unvisited.discard(current)
            if not unvisited:
                break
            diag = [
                n for n in neighbors(graph, current, NeighborOrder.NEXT_NEAREST)
                if n in unvisited
            ]
            current = diag[0] if diag else _row_major(unvisited)[0]
    order.extend(datas)
    return order


def _scan_chunk(
    q: QubitPhysical,
    omega_points,
    omega_offset: int,
    amp_points,
    tp_points,
    total_time: float,
    locked,
    weights: CostWeights,
    mist: MistParams,
    dt: float,
    include_heuristics: bool,
    collision_defaults: CollisionDefaults,
    mist_ceiling: float,
    mist_sharpness: float,
    pole_guard: float,
):
    """Exhaustive scan over a slice of the omega axis.

    Returns (best_total, (i_omega, i_amp, i_tp), params, breakdown) with the
    lexicographically first grid index winning ties, or None if every point
    in the chunk is infeasible.
    """
    specs = (
        collision_specs(q, locked, collision_defaults) if include_heuristics else ()
    )
    best = None
    for i_w, omega in enumerate(omega_points):
        for i_a, amp in enumerate(amp_points):
            for i_t, t_p in enumerate(tp_points):
                params = ReadoutParams(
                    omega_q=omega, b0=amp, t_p=t_p, t_r=total_time - t_p
                )
                bd = evaluate_cost(
                    q, params, weights, mist, specs, dt,
                    include_heuristics=include_heuristics,
                    mist_ceiling=mist_ceiling,
                    mist_sharpness=mist_sharpness,
                    pole_guard=pole_guard,
                )
                if not math.isfinite(bd.total):
                    continue
                key = (bd.total, (i_w + omega_offset, i_a, i_t))
                if best is None or key < best[0]:
                    best = (key, params, bd)
    if best is None:
        return None
    (total, idx), params, bd = best
    return total, idx, params, bd


def optimize_qubit(
    q: QubitPhysical,
    grid: SearchGrid,
    locked,
    weights: CostWeights,
    mist: MistParams,
    *,
    total_time: float,
    dt: float,
    include_heuristics: bool = True,
    collision_defaults: CollisionDefaults = CollisionDefaults(),
    mist_ceiling: float = 1.0,
    mist_sharpness: float = 0.05,
    pole_guard: float = 0.05,
    threads: int = 1,
    qid: QubitId | None = None,
) -> tuple[ReadoutParams, CostBreakdown]:
    """Exact grid minimum of the cost for one qubit.

    locked holds (QubitPhysical, ReadoutParams, next_nearest) triples for
    previously optimized neighbors.  Ties break lexicographically on
    (omega, amplitude, pulse-length) grid indices, so the result does not
    depend on how the scan is parallelized.
    """
    common = (
        grid.amp_points, grid.tp_points, total_time, tuple(locked), weights,
        mist, dt, include_heuristics, collision_defaults, mist_ceiling,
        mist_sharpness, pole_guard,
    )
    if threads <= 1 or len(grid.omega_points) == 1:
        results = [_scan_chunk(q, grid.omega_points, 0, *common)]
    else:
        n_chunks = min(threads * 2, len(grid.omega_points))
        bounds = [
            round(i * len(grid.omega_points) / n_chunks) for i in range(n_chunks + 1)
        ]
        jobs = [
            (q, grid.omega_points[lo:hi], lo, *common)
            for lo, hi in zip(bounds, bounds[1:])
            if hi > lo
        ]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_scan_chunk_star, jobs))
    best = min(
        (r for r in results if r is not None),
        key=lambda r: (r[0], r[1]),
        default=None,
    )
    if best is None:
        raise InfeasibleQubitError(qid)
    return best[2], best[3]


def _scan_chunk_star(args):
    return _scan_chunk(*args)


def optimize_device(
    graph: DeviceGraph,
    grid_per_qubit: dict[QubitId, SearchGrid],
    weights: CostWeights,
    mist: MistParams,
    *,
    total_time: float,
    dt: float,
    include_heuristics: bool = True,
    collision_defaults: CollisionDefaults = CollisionDefaults(),
    mist_ceiling: float = 1.0,
    mist_sharpness: float = 0.05,
    pole_guard: float = 0.05,
    threads: int = 1,
    start: QubitId | None = None,
) -> OptimizationResult:
    """Run the snake over the whole device, locking qubits as it goes."""
    order = traversal_order(graph, start)
    locked_params: dict[QubitId, ReadoutParams] = {}
    per_qubit: dict[QubitId, QubitResult] = {}
    evaluations = 0
    for index, qid in enumerate(order):
        q = graph.qubits[qid]
        grid = grid_per_qubit[qid]
        locked = _locked_neighbors(graph, qid, locked_params)
        evaluations += grid.size
        try:
            params, bd = optimize_qubit(
                q, grid, locked, weights, mist,
                total_time=total_time, dt=dt,
                include_heuristics=include_heuristics,
                collision_defaults=collision_defaults,
                mist_ceiling=mist_ceiling, mist_sharpness=mist_sharpness,
                pole_guard=pole_guard, threads=threads, qid=qid,
            )
        except InfeasibleQubitError as exc:
            exc.partial = OptimizationResult(per_qubit, order[:index], evaluations)
            raise
        n_specs = 4 * len(locked) if include_heuristics else 0
        per_qubit[qid] = QubitResult(params, bd, index, n_specs)
        locked_params[qid] = params
    return OptimizationResult(per_qubit, order, evaluations)


def _locked_neighbors(
    graph: DeviceGraph,
    qid: QubitId,
    locked_params: dict[QubitId, ReadoutParams],
) -> list[tuple[QubitPhysical, ReadoutParams, bool]]:
    """Locked (physical, params, next_nearest) triples around one qubit."""
    out = []
    for nb in neighbors(graph, qid, NeighborOrder.BOTH):
        if nb in locked_params:
            diagonal = nb.row != qid.row and nb.col != qid.col
            out.append((graph.qubits[nb], locked_params[nb], diagonal))
    return out
