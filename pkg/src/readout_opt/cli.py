"""Command-line entry point: validate, optimize, sweep, benchmark.

Every command writes a manifest echo with all resolved configuration next
to its outputs, so a run can be reproduced exactly from the output
directory alone.  All outputs are YAML or CSV.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .benchmark import BenchmarkConfig, BenchmarkReport, Subset, run_benchmark
from .config import (
    OptimizerConfig,
    OptimizerConfigError,
    Strategy,
    build_search_grid,
    config_echo,
    load_optimizer_config,
)
from .device import (
    DeviceConfigError,
    DeviceGraph,
    QubitId,
    Role,
    ghz_to_rad_ns,
    load_device,
    rad_ns_to_ghz,
)
from .error_models import CostBreakdown, ReadoutParams, evaluate_cost
from .snake import (
    InfeasibleQubitError,
    OptimizationResult,
    QubitResult,
    optimize_device,
)

log = logging.getLogger("readout_opt")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_IO = 2
EXIT_INFEASIBLE = 3


def _read_text(path: str) -> str:
    return Path(path).read_text()


def _load_graph(path: str) -> DeviceGraph:
    return load_device(_read_text(path))


def _load_opt_config(path: str | None) -> OptimizerConfig:
    if path is None:
        return load_optimizer_config("")
    return load_optimizer_config(_read_text(path))


def _write_manifest(out: Path, name: str, payload: dict) -> None:
    payload = {"version": __version__, **payload}
    (out / name).write_text(yaml.safe_dump(payload, sort_keys=False))


def _breakdown_to_dict(bd: CostBreakdown) -> dict:
    return {
        "separation": float(bd.separation),
        "relaxation": float(bd.relaxation),
        "photon": float(bd.photon),
        "mist": float(bd.mist),
        "coupling": float(bd.coupling),
        "snr": float(bd.snr),
        "t0_ns": float(bd.t0),
        "n_max": float(bd.n_max),
        "total": float(bd.total),
    }


def result_to_dict(result: OptimizationResult, strategy: Strategy) -> dict:
    rows = []
    for qid in sorted(result.per_qubit, key=lambda q: (q.row, q.col)):
        r = result.per_qubit[qid]
        rows.append({
            "row": qid.row,
            "col": qid.col,
            "role": qid.role.value,
            "traversal_index": r.traversal_index,
            "n_collision_specs": r.n_collision_specs,
            "f_q_GHz": rad_ns_to_ghz(r.params.omega_q),
            "B0": float(r.params.b0),
            "t_p_ns": float(r.params.t_p),
            "t_r_ns": float(r.params.t_r),
            "cost": _breakdown_to_dict(r.breakdown),
        })
    return {
        "strategy": strategy.value,
        "evaluations": result.evaluations,
        "qubits": rows,
    }


def result_from_dict(raw: dict) -> OptimizationResult:
    per_qubit = {}
    order: list[tuple[int, QubitId]] = []
    for row in raw["qubits"]:
        qid = QubitId(int(row["row"]), int(row["col"]), Role(row["role"]))
        c = row["cost"]
        bd = CostBreakdown(
            separation=c["separation"], relaxation=c["relaxation"],
            photon=c["photon"], mist=c["mist"], coupling=c["coupling"],
            snr=c["snr"], t0=c["t0_ns"], n_max=c["n_max"], total=c["total"],
        )
        params = ReadoutParams(
            omega_q=ghz_to_rad_ns(row["f_q_GHz"]),
            b0=row["B0"], t_p=row["t_p_ns"], t_r=row["t_r_ns"],
        )
        per_qubit[qid] = QubitResult(
            params, bd, int(row["traversal_index"]), int(row["n_collision_specs"])
        )
        order.append((int(row["traversal_index"]), qid))
    order.sort()
    return OptimizationResult(
        per_qubit=per_qubit,
        order=[q for _, q in order],
        evaluations=int(raw["evaluations"]),
    )


_SUMMARY_COLUMNS = (
    "row", "col", "role", "traversal_index", "f_q_GHz", "B0", "t_p_ns",
    "t_r_ns", "separation", "relaxation", "photon", "mist", "coupling",
    "snr", "t0_ns", "n_max", "total", "n_collision_specs",
)


def _write_summary_csv(path: Path, result_dict: dict) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_SUMMARY_COLUMNS)
        writer.writeheader()
        for row in result_dict["qubits"]:
            flat = {k: v for k, v in row.items() if k != "cost"}
            flat.update(row["cost"])
            writer.writerow(flat)


def cmd_validate(args) -> int:
    graph = _load_graph(args.device)
    n_measure = sum(1 for q in graph.qubits if q.role is Role.MEASURE)
    print(f"device ok: {len(graph.qubits)} qubits "
          f"({n_measure} measure, {len(graph.qubits) - n_measure} data)")
    if args.opt_config:
        _load_opt_config(args.opt_config)
        print("optimizer config ok")
    return EXIT_OK


def cmd_optimize(args) -> int:
    graph = _load_graph(args.device)
    cfg = _load_opt_config(args.opt_config)
    strategy = Strategy(args.strategy)
    out = Path(args.out)

    grids = {qid: build_search_grid(graph, qid, cfg) for qid in graph.qubits}
    start = None
    if cfg.start is not None:
        start = graph.at(*cfg.start)
        if start is None:
            raise OptimizerConfigError(f"start qubit {cfg.start} not on device")

    t_begin = time.perf_counter()
    try:
        result = optimize_device(
            graph, grids, cfg.weights, cfg.mist,
            total_time=cfg.total_time, dt=cfg.dt,
            include_heuristics=(strategy is Strategy.ALL_MODELS),
            collision_defaults=cfg.collision,
            mist_ceiling=cfg.mist_ceiling, mist_sharpness=cfg.mist_sharpness,
            pole_guard=cfg.pole_guard, threads=args.threads, start=start,
        )
    except InfeasibleQubitError as exc:
        log.error("optimization infeasible at qubit %s", exc.qid)
        if exc.partial is not None and exc.partial.per_qubit:
            out.mkdir(parents=True, exist_ok=True)
            partial = result_to_dict(exc.partial, strategy)
            (out / "results_partial.yaml").write_text(
                yaml.safe_dump(partial, sort_keys=False))
        return EXIT_INFEASIBLE
    elapsed = time.perf_counter() - t_begin
    log.info("optimized %d qubits: %d cost evaluations in %.1f s",
             len(result.per_qubit), result.evaluations, elapsed)

    out.mkdir(parents=True, exist_ok=True)
    result_dict = result_to_dict(result, strategy)
    (out / "results.yaml").write_text(yaml.safe_dump(result_dict, sort_keys=False))
    _write_summary_csv(out / "summary.csv", result_dict)
    _write_manifest(out, "manifest.yaml", {
        "command": "optimize",
        "device": str(args.device),
        "opt_config": str(args.opt_config) if args.opt_config else None,
        "strategy": strategy.value,
        "seed": args.seed,
        "threads": args.threads,
        "resolved_config": config_echo(cfg),
        "evaluations": result.evaluations,
    })
    print(f"wrote {out / 'results.yaml'} "
          f"({result.evaluations} evaluations, {elapsed:.1f} s)")
    return EXIT_OK


def _parse_qubit(spec: str, graph: DeviceGraph) -> QubitId:
    try:
        row, col = (int(v) for v in spec.split(","))
    except ValueError:
        raise ValueError(f"qubit must be given as 'row,col', got {spec!r}") from None
    qid = graph.at(row, col)
    if qid is None:
        raise ValueError(f"no qubit at ({row},{col})")
    return qid


def cmd_sweep(args) -> int:
    graph = _load_graph(args.device)
    cfg = _load_opt_config(args.opt_config)
    strategy = Strategy(args.strategy)
    qid = _parse_qubit(args.qubit, graph)
    q = graph.qubits[qid]
    band_lo, band_hi = graph.search_band[qid]

    pin_omega = (
        ghz_to_rad_ns(args.pin_f_ghz) if args.pin_f_ghz is not None
        else 0.5 * (band_lo + band_hi)
    )
    pin_amp = args.pin_amp if args.pin_amp is not None \
        else 0.5 * (cfg.grid.amp_min + cfg.grid.amp_max)
    pin_tp = args.pin_tp_ns if args.pin_tp_ns is not None \
        else 0.5 * (cfg.grid.tp_min_ns + cfg.grid.tp_max_ns)

    if args.points < 1:
        raise ValueError("points must be >= 1")
    if args.points == 1:
        values = np.array([args.min])
        if args.min != args.max:
            raise ValueError("points=1 requires min == max")
    else:
        values = np.linspace(args.min, args.max, args.points)

    axis = args.axis
    if axis == "frequency":
        lo_ghz, hi_ghz = rad_ns_to_ghz(band_lo), rad_ns_to_ghz(band_hi)
        if args.min < lo_ghz or args.max > hi_ghz:
            raise ValueError(
                f"frequency range outside search band [{lo_ghz:.4f}, {hi_ghz:.4f}] GHz")
    elif axis == "length":
        if args.min <= 0 or args.max > cfg.total_time:
            raise ValueError("pulse length range outside (0, total]")
    elif args.min < 0:
        raise ValueError("amplitude must be >= 0")

    rows = []
    for v in values:
        omega, amp, tp = pin_omega, pin_amp, pin_tp
        if axis == "frequency":
            omega = ghz_to_rad_ns(float(v))
        elif axis == "amplitude":
            amp = float(v)
        else:
            tp = float(v)
        params = ReadoutParams(
            omega_q=omega, b0=amp * q.amp_ref, t_p=tp, t_r=cfg.total_time - tp
        )
        bd = evaluate_cost(
            q, params, cfg.weights, cfg.mist, (), cfg.dt,
            include_heuristics=(strategy is Strategy.ALL_MODELS),
            mist_ceiling=cfg.mist_ceiling, mist_sharpness=cfg.mist_sharpness,
            pole_guard=cfg.pole_guard,
        )
        rows.append({
            "f_q_GHz": rad_ns_to_ghz(omega),
            "amp": amp,
            "B0": params.b0,
            "t_p_ns": params.t_p,
            "t_r_ns": params.t_r,
            "separation_error": bd.separation,
            "relaxation_error": bd.relaxation,
            "residual_photons": bd.photon,
            "n_max": bd.n_max,
            "snr": bd.snr,
            "mist": bd.mist,
            "coupling": bd.coupling,
        })

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "sweep.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)

    # field trajectory at the pinned point
    from .dynamics import field_pair

    pinned = ReadoutParams(
        omega_q=pin_omega, b0=pin_amp * q.amp_ref,
        t_p=pin_tp, t_r=cfg.total_time - pin_tp,
    )
    traj = field_pair(q, pinned, cfg.dt, guard=cfg.pole_guard)
    with (out / "trajectory.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["t_ns", "re_beta0", "im_beta0", "re_beta1", "im_beta1", "n0", "n1"])
        for t, b0_, b1_ in zip(traj.times, traj.beta0, traj.beta1):
            writer.writerow([
                t, b0_.real, b0_.imag, b1_.real, b1_.imag,
                abs(b0_) ** 2, abs(b1_) ** 2,
            ])

    _write_manifest(out, "manifest.yaml", {
        "command": "sweep",
        "device": str(args.device),
        "opt_config": str(args.opt_config) if args.opt_config else None,
        "strategy": strategy.value,
        "qubit": [qid.row, qid.col],
        "axis": axis,
        "range": [float(args.min), float(args.max), int(args.points)],
        "pins": {
            "f_GHz": rad_ns_to_ghz(pin_omega),
            "amp": pin_amp,
            "t_p_ns": pin_tp,
        },
        "resolved_config": config_echo(cfg),
    })
    print(f"wrote {out / 'sweep.csv'} ({len(rows)} rows)")
    return EXIT_OK


def _write_benchmark_outputs(out: Path, report: BenchmarkReport) -> None:
    with (out / "per_qubit_errors.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "role", "p_1_given_0", "p_0_given_1",
                         "error"])
        for qid in report.qubits:
            writer.writerow([
                qid.row, qid.col, qid.role.value,
                report.p10[qid], report.p01[qid], report.error[qid],
            ])
    with (out / "cross_fidelity.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row_i", "col_i", "row_j", "col_j", "F_ij"])
        for i, qi in enumerate(report.qubits):
            for j, qj in enumerate(report.qubits):
                if i == j:
                    continue
                writer.writerow([qi.row, qi.col, qj.row, qj.col,
                                 report.cross_fidelity[i, j]])
    # integrated histogram of |F_ij|
    offdiag = report.cross_fidelity[~np.eye(len(report.qubits), dtype=bool)]
    absf = np.sort(np.abs(offdiag[np.isfinite(offdiag)]))
    with (out / "cross_fidelity_hist.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["abs_F", "cumulative_fraction"])
        for k, v in enumerate(absf):
            writer.writerow([v, (k + 1) / len(absf)])
    b = report.budget
    with (out / "budget.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["component", "probability"])
        for name in ("separation", "state_prep", "relaxation", "unknown",
                     "observed"):
            writer.writerow([name, getattr(b, name)])

    mean_err = float(np.mean(list(report.error.values())))
    mean_absf = float(np.mean(absf)) if len(absf) else float("nan")
    lines = [
        f"qubits benchmarked: {len(report.qubits)}",
        f"states x shots: {report.config.n_states} x {report.config.n_shots}",
        f"mean measurement error: {mean_err:.4%}",
        f"mean |F_ij|: {mean_absf:.5f}",
        "budget: "
        + ", ".join(f"{n}={getattr(b, n):.4%}" for n in
                    ("separation", "state_prep", "relaxation", "unknown")),
        "note: crosstalk enters shots only as a crude outcome-randomization "
        "proxy for the heuristic coupling penalty",
    ]
    if b.suspect:
        lines.append("warning: unknown component negative beyond tolerance")
    if report.undefined_pairs:
        lines.append(f"undefined cross-fidelity pairs: {len(report.undefined_pairs)}")
    (out / "report.txt").write_text("\n".join(lines) + "\n")


def cmd_benchmark(args) -> int:
    graph = _load_graph(args.device)
    raw = yaml.safe_load(_read_text(args.results))
    result = result_from_dict(raw)

    device_ids = set(graph.qubits)
    result_ids = set(result.per_qubit)
    if device_ids != result_ids:
        raise ValueError(
            "results file does not match the device: "
            f"{len(device_ids ^ result_ids)} mismatched qubits")

    cfg = BenchmarkConfig(
        n_states=args.n_states,
        n_shots=args.n_shots,
        seed=args.seed,
        prep_error=args.prep_error,
        subset=Subset.MEASURE_ONLY if args.subset == "measure" else Subset.ALL_QUBITS,
    )
    report = run_benchmark(graph, result, cfg)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_benchmark_outputs(out, report)
    _write_manifest(out, "manifest.yaml", {
        "command": "benchmark",
        "device": str(args.device),
        "results": str(args.results),
        "seed": cfg.seed,
        "n_states": cfg.n_states,
        "n_shots": cfg.n_shots,
        "prep_error": cfg.prep_error,
        "subset": cfg.subset.value,
    })
    print(f"wrote benchmark report to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="readout-opt",
        description="Model-based optimization of superconducting qubit readout",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="lint device and optimizer configs")
    p_val.add_argument("--device", required=True)
    p_val.add_argument("--opt-config")
    p_val.set_defaults(func=cmd_validate)

    p_opt = sub.add_parser("optimize", help="run the snake optimizer")
    p_opt.add_argument("--device", required=True)
    p_opt.add_argument("--opt-config")
    p_opt.add_argument("--strategy", choices=[s.value for s in Strategy],
                       default=Strategy.ALL_MODELS.value)
    p_opt.add_argument("--seed", type=int, default=0)
    p_opt.add_argument("--threads", type=int, default=1)
    p_opt.add_argument("--out", required=True)
    p_opt.set_defaults(func=cmd_optimize)

    p_sw = sub.add_parser("sweep", help="sweep one parameter of one qubit")
    p_sw.add_argument("--device", required=True)
    p_sw.add_argument("--opt-config")
    p_sw.add_argument("--strategy", choices=[s.value for s in Strategy],
                      default=Strategy.ALL_MODELS.value)
    p_sw.add_argument("--qubit", required=True, help="row,col")
    p_sw.add_argument("--axis", choices=["frequency", "amplitude", "length"],
                      required=True)
    p_sw.add_argument("--min", type=float, required=True)
    p_sw.add_argument("--max", type=float, required=True)
    p_sw.add_argument("--points", type=int, default=101)
    p_sw.add_argument("--pin-f-ghz", type=float, dest="pin_f_ghz")
    p_sw.add_argument("--pin-amp", type=float)
    p_sw.add_argument("--pin-tp-ns", type=float, dest="pin_tp_ns")
    p_sw.add_argument("--out", required=True)
    p_sw.set_defaults(func=cmd_sweep)

    p_bm = sub.add_parser("benchmark", help="Monte Carlo readout benchmark")
    p_bm.add_argument("--device", required=True)
    p_bm.add_argument("--results", required=True)
    p_bm.add_argument("--seed", type=int, default=0)
    p_bm.add_argument("--n-states", type=int, default=200)
    p_bm.add_argument("--n-shots", type=int, default=2000)
    p_bm.add_argument("--prep-error", type=float, default=0.0)
    p_bm.add_argument("--subset", choices=["all", "measure"], default="all")
    p_bm.add_argument("--out", required=True)
    p_bm.set_defaults(func=cmd_benchmark)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DeviceConfigError, OptimizerConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # structured nonzero exit on any module failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
