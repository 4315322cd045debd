"""Command-line scenario runner: one subcommand per workload plus the
benchmarking and fitting tools.

Every run takes a --seed and is fully reproducible: traces are byte-identical
and CSV outputs identical except wall-clock columns.
"""
from __future__ import annotations

import argparse
import csv
import math
import statistics
import sys

from .bench import CSV_HEADER, bench_sweep, read_csv, write_csv
from .errors import QNetSimError
from .fitting import (
    FitError,
    compare_models,
    fit_const_plus_power,
    fit_piecewise,
    fit_power_law,
)
from .protocols import (
    ClusterConfig,
    QlanConfig,
    SwapConfig,
    TeleportConfig,
    run_cluster,
    run_qlan,
    run_swap_chain,
    run_teleport,
)
from .states import BACKENDS
from .trace import TraceWriter

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qnetsim")
    sub = parser.add_subparsers(dest="command", required=True)

    tp = sub.add_parser("teleport", help="noisy/congested teleportation of |+>")
    tp.add_argument("--distance-km", type=float, required=True)
    tp.add_argument("--tdep-ms", type=float, default=math.inf,
                    help="depolarization time constant; inf for noiseless")
    tp.add_argument("--transport", choices=("unreliable", "reliable"), default="reliable")
    tp.add_argument("--congested", action="store_true")
    tp.add_argument("--trials", type=int, default=1000)
    tp.add_argument("--backend", choices=BACKENDS, default="dm")
    tp.add_argument("--seed", type=int, default=0)
    tp.add_argument("--csv", help="append a summary row to this CSV")
    tp.add_argument("--trace", help="write the first trial's trace here")

    sw = sub.add_parser("swap", help="entanglement-swapping chain")
    sw.add_argument("--nodes", type=int, required=True)
    sw.add_argument("--backend", choices=BACKENDS, default="ket")
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--link-km", type=float, default=1.0)
    sw.add_argument("--trace")

    cl = sub.add_parser("cluster", help="cluster-state preparation + evaluation")
    cl.add_argument("--rows", type=int, required=True)
    cl.add_argument("--cols", type=int, required=True)
    cl.add_argument("--backend", choices=BACKENDS, default="stab")
    cl.add_argument("--seed", type=int, default=0)
    cl.add_argument("--trace")

    ql = sub.add_parser("qlan", help="graph-state engineering in a star QLAN")
    ql.add_argument("--clients", type=int, required=True)
    ql.add_argument("--length-km", type=float, default=50.0)
    ql.add_argument("--loss-p", type=float, default=0.0)
    ql.add_argument("--runs", type=int, default=1)
    ql.add_argument("--backend", choices=BACKENDS, default="stab")
    ql.add_argument("--seed", type=int, default=0)
    ql.add_argument("--config", help="TOML file with [qlan] lengths_km = [...]")
    ql.add_argument("--csv")
    ql.add_argument("--trace", help="write the first run's trace here")

    be = sub.add_parser("bench", help="CI-stopped scaling benchmark sweep")
    be.add_argument("--workload", choices=("cluster", "swap", "qlan"), required=True)
    be.add_argument("--sizes", type=_int_list, required=True,
                    help="comma-separated problem sizes (qubits, nodes, or clients)")
    be.add_argument("--backend", choices=BACKENDS, default="stab")
    be.add_argument("--rows", type=int, default=1, help="cluster lattice rows")
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--margin", type=float, default=0.02)
    be.add_argument("--min-trials", type=int, default=5)
    be.add_argument("--max-trials", type=int, default=30)
    be.add_argument("--in-process", action="store_true",
                    help="skip the per-trial child process (faster, shared RSS)")
    be.add_argument("--out", required=True, help="output CSV path")

    ft = sub.add_parser("fit", help="scaling-law fits over a bench CSV")
    ft.add_argument("csv_path")
    ft.add_argument("--metric", choices=("total", "sim", "config", "mem"), default="total")
    ft.add_argument("--region", choices=("all", "low", "mid", "high"), default="all")
    ft.add_argument("--piecewise", type=float, metavar="BREAKPOINT")
    ft.add_argument("--compare-models", action="store_true")
    ft.add_argument("--const-plus-power", action="store_true")

    tr = sub.add_parser("trace", help="trace utilities")
    tr_sub = tr.add_subparsers(dest="trace_command", required=True)
    synth = tr_sub.add_parser("synth", help="emit a small hand-written example trace")
    synth.add_argument("--out", default="-")
    synth.add_argument("--source", default="Alice")
    synth.add_argument("--target", default="Bob")
    synth.add_argument("--qubits", default="aliceHalf,bobHalf")
    synth.add_argument("--send-at-us", type=int, default=0)
    synth.add_argument("--deliver-at-us", type=int, default=50)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (QNetSimError, FitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "teleport":
        return _cmd_teleport(args)
    if args.command == "swap":
        return _cmd_swap(args)
    if args.command == "cluster":
        return _cmd_cluster(args)
    if args.command == "qlan":
        return _cmd_qlan(args)
    if args.command == "bench":
        return _cmd_bench(args)
    if args.command == "fit":
        return _cmd_fit(args)
    if args.command == "trace":
        return _cmd_trace(args)
    raise ValueError(f"unknown command {args.command}")


def _cmd_teleport(args) -> int:
    cfg = TeleportConfig(
        distance_km=args.distance_km,
        t_dep_ms=args.tdep_ms,
        transport=args.transport,
        congested=args.congested,
        trials=args.trials,
        backend=args.backend,
        seed=args.seed,
        trace_sink=args.trace,
    )
    result = run_teleport(cfg)
    fids = result.fidelities
    waits = result.waits_ns
    failed = sum(1 for t in result.trials if t.failed)
    mean_f = statistics.fmean(fids) if fids else float("nan")
    std_f = statistics.stdev(fids) if len(fids) > 1 else 0.0
    mean_w = statistics.fmean(waits) if waits else float("nan")
    print(
        f"teleport d={args.distance_km} km T_dep={args.tdep_ms} ms "
        f"{args.transport}{' congested' if args.congested else ''}: "
        f"mean fidelity {mean_f:.6f} (std {std_f:.6f}) over {len(fids)} trials, "
        f"mean wait {mean_w/1e6:.4f} ms, {failed} failed"
    )
    if args.csv:
        _append_csv(
            args.csv,
            ["distance_km", "tdep_ms", "transport", "congested", "trials", "failed",
             "mean_fidelity", "std_fidelity", "mean_wait_ns"],
            [args.distance_km, args.tdep_ms, args.transport, int(args.congested),
             args.trials, failed, f"{mean_f:.9f}", f"{std_f:.9f}", round(mean_w)],
        )
    return 0


def _cmd_swap(args) -> int:
    report = run_swap_chain(
        SwapConfig(
            nodes=args.nodes, backend=args.backend, seed=args.seed,
            link_km=args.link_km, trace_sink=args.trace,
        )
    )
    status = "ok" if report.success else f"FAILED ({report.failure_phase})"
    fid = f"{report.final_fidelity:.9f}" if report.final_fidelity is not None else "n/a"
    print(
        f"swap N={args.nodes} backend={args.backend}: {status}, fidelity {fid}, "
        f"completed at {report.completion_time_ns/1e3:.2f} us, "
        f"{report.counters['events']} events, "
        f"{report.counters['retransmissions']} retransmissions"
    )
    return 0 if report.success else 1


def _cmd_cluster(args) -> int:
    report = run_cluster(
        ClusterConfig(
            rows=args.rows, cols=args.cols, backend=args.backend,
            seed=args.seed, trace_sink=args.trace,
        )
    )
    print(
        f"cluster {args.rows}x{args.cols} backend={args.backend}: "
        f"{report.counters['cz_count']} CZs, {report.counters['measure_count']} measurements, "
        f"config {report.extra['wall_config_s']*1e3:.1f} ms, "
        f"sim {report.extra['wall_sim_s']*1e3:.1f} ms"
    )
    return 0 if report.success else 1


def _cmd_qlan(args) -> int:
    lengths = None
    if args.config:
        with open(args.config, "rb") as fh:
            doc = tomllib.load(fh)
        lengths = doc.get("qlan", {}).get("lengths_km")
    rows = []
    for k in range(args.runs):
        cfg = QlanConfig(
            clients=args.clients,
            length_km=args.length_km,
            loss_p=args.loss_p,
            backend=args.backend,
            seed=args.seed + k,
            lengths_km=lengths,
            trace_sink=args.trace if k == 0 else None,
        )
        rows.append(run_qlan(cfg))
    good = [r for r in rows if r.success]
    times = [r.completion_time_ns / 1e6 for r in good]
    mean_t = statistics.fmean(times) if times else float("nan")
    std_t = statistics.stdev(times) if len(times) > 1 else 0.0
    fid = min((r.final_fidelity for r in good), default=float("nan"))
    print(
        f"qlan M={args.clients} d={args.length_km} km p={args.loss_p}: "
        f"{len(good)}/{args.runs} succeeded, completion {mean_t:.3f} ms (std {std_t:.3f}), "
        f"min fidelity {fid}"
    )
    if args.csv:
        _append_csv(
            args.csv,
            ["clients", "length_km", "loss_p", "runs", "succeeded",
             "mean_completion_ms", "std_completion_ms", "min_fidelity"],
            [args.clients, args.length_km, args.loss_p, args.runs, len(good),
             f"{mean_t:.6f}", f"{std_t:.6f}", f"{fid:.9f}"],
        )
    return 0 if len(good) == args.runs else 1


def _cmd_bench(args) -> int:
    params = (("rows", args.rows),) if args.workload == "cluster" else ()
    rows = bench_sweep(
        args.workload,
        args.sizes,
        args.backend,
        seed=args.seed,
        margin_frac=args.margin,
        min_trials=args.min_trials,
        max_trials=args.max_trials,
        subprocess=not args.in_process,
        params=params,
        progress=print,
    )
    write_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


_METRIC_COL = {
    "total": "mean_total_ms",
    "sim": "mean_sim_ms",
    "config": "mean_config_ms",
    "mem": "mean_peak_kb",
}


def _cmd_fit(args) -> int:
    rows = read_csv(args.csv_path)
    col = _METRIC_COL[args.metric]
    points = [(row["n"], row[col]) for row in rows]
    if args.piecewise is not None:
        pw = fit_piecewise(points, args.piecewise)
        print(f"{'segment':<12} {'alpha':>10} {'beta':>8} {'R^2':>8}")
        print(f"{'below':<12} {pw.below.alpha:>10.4f} {pw.below.beta:>8.4f} {pw.below.r_squared:>8.4f}")
        print(f"{'at/above':<12} {pw.above.alpha:>10.4f} {pw.above.beta:>8.4f} {pw.above.r_squared:>8.4f}")
        print(f"combined R^2 = {pw.combined_r_squared:.4f} (breakpoint {args.piecewise:g})")
        return 0
    if args.const_plus_power:
        cp = fit_const_plus_power(points)
        print(
            f"Y = a + b*N^k: a={cp.a:.4f} b={cp.b:.4e} k={cp.k:.4f} "
            f"R^2={cp.r_squared:.4f} converged={cp.converged}"
        )
        return 0
    fit = fit_power_law(points, args.region)
    print(f"{'region':<8} {'alpha':>10} {'beta':>8} {'R^2':>8} {'points':>7}")
    print(
        f"{fit.region:<8} {fit.alpha:>10.4f} {fit.beta:>8.4f} "
        f"{fit.r_squared:>8.4f} {fit.points:>7}"
    )
    if args.compare_models:
        cmp = compare_models(points, args.region)
        print(
            f"model selection: dAIC={cmp.delta_aic:+.2f} dBIC={cmp.delta_bic:+.2f} "
            f"(power - exponential) -> preferred: {cmp.preferred}"
        )
    return 0


def _cmd_trace(args) -> int:
    if args.trace_command != "synth":
        raise ValueError(f"unknown trace command {args.trace_command!r}")
    qubits = args.qubits.split(",")
    if len(qubits) != 2:
        raise ValueError("--qubits needs exactly two comma-separated names")
    clock = {"t": 0}
    writer = TraceWriter(args.out, lambda: clock["t"])
    writer.write_topology([args.source, args.target], [(args.source, args.target)], [])
    writer.init_qubit(args.source, qubits[0])
    writer.init_qubit(args.source, qubits[1])
    writer.entangle(qubits)
    clock["t"] = args.send_at_us * 1000
    writer.send_qubit(qubits[1], args.source, args.target)
    clock["t"] = args.deliver_at_us * 1000
    writer.deliver_qubit(qubits[1], args.target)
    writer.close()
    if args.out != "-":
        print(f"wrote {args.out}")
    return 0


def _append_csv(path: str, header: list[str], row: list) -> None:
    try:
        with open(path) as fh:
            has_header = fh.readline().strip() != ""
    except FileNotFoundError:
        has_header = False
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if not has_header:
            writer.writerow(header)
        writer.writerow(row)


if __name__ == "__main__":
    raise SystemExit(main())
