"""Measurement methodology: wall-clock phase split, peak RSS, CI stopping.

Each benchmarked scenario runs in a fresh spawned child process so peak
resident memory reflects that run alone. Configuration time covers scenario
construction and initial event scheduling; simulation time covers the event
loop. Trials repeat sequentially until the 95% confidence interval of every
tracked metric is within the requested fraction of its mean.
"""
from __future__ import annotations

import csv
import multiprocessing as mp
import resource
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

CSV_HEADER = [
    "n",
    "trials",
    "mean_config_ms",
    "std_config_ms",
    "mean_sim_ms",
    "std_sim_ms",
    "mean_total_ms",
    "std_total_ms",
    "mean_peak_kb",
    "std_peak_kb",
]

METRICS = ("config_ms", "sim_ms", "total_ms", "peak_kb")


@dataclass(frozen=True)
class ScenarioSpec:
    """Picklable description of one benchmark scenario run."""

    workload: str  # cluster | swap | qlan
    size: int
    backend: str
    seed: int = 0
    params: tuple = ()  # extra (key, value) pairs for the workload


@dataclass
class BenchRecord:
    n_or_N: int
    config_ms: float
    sim_ms: float
    total_ms: float
    peak_kb: float
    failed: bool = False

    def metric(self, name: str) -> float:
        return getattr(self, name)


@dataclass
class TrialStats:
    trials: int
    mean: float
    std: float
    ci95_margin: float
    converged: bool


def _build_and_run(spec: ScenarioSpec) -> tuple[float, float]:
    """Returns (config_s, sim_s); imports stay local so spawn starts clean."""
    from .protocols.cluster import ClusterConfig, run_cluster
    from .protocols.qlan import QlanConfig, run_qlan
    from .protocols.swap import SwapConfig, run_swap_chain

    params = dict(spec.params)
    if spec.workload == "cluster":
        rows = int(params.get("rows", 1))
        if spec.size % rows:
            raise ValueError(f"size {spec.size} not divisible by rows={rows}")
        report = run_cluster(
            ClusterConfig(rows=rows, cols=spec.size // rows, backend=spec.backend, seed=spec.seed)
        )
    elif spec.workload == "swap":
        report = run_swap_chain(SwapConfig(nodes=spec.size, backend=spec.backend, seed=spec.seed))
    elif spec.workload == "qlan":
        report = run_qlan(
            QlanConfig(
                clients=spec.size,
                backend=spec.backend,
                seed=spec.seed,
                length_km=float(params.get("length_km", 5.0)),
                loss_p=float(params.get("loss_p", 0.0)),
            )
        )
    else:
        raise ValueError(f"unknown workload {spec.workload!r}")
    if not report.success:
        raise RuntimeError(f"{spec.workload} run failed in phase {report.failure_phase}")
    return report.extra["wall_config_s"], report.extra["wall_sim_s"]


def _child_main(spec: ScenarioSpec, pipe) -> None:  # pragma: no cover - child process
    try:
        config_s, sim_s = _build_and_run(spec)
        peak_kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
        pipe.send((config_s * 1e3, sim_s * 1e3, float(peak_kb), False))
    except Exception as exc:
        pipe.send((0.0, 0.0, 0.0, repr(exc)))
    finally:
        pipe.close()


def time_run(spec: ScenarioSpec, subprocess: bool = True) -> BenchRecord:
    """One measured trial; `subprocess=False` trades RSS isolation for speed."""
    if subprocess:
        ctx = mp.get_context("spawn")
        parent, child = ctx.Pipe(duplex=False)
        proc = ctx.Process(target=_child_main, args=(spec, child))
        proc.start()
        child.close()
        try:
            config_ms, sim_ms, peak_kb, err = parent.recv()
        except EOFError:
            proc.join()
            return BenchRecord(spec.size, 0.0, 0.0, 0.0, 0.0, failed=True)
        proc.join()
        failed = bool(err)
    else:
        try:
            config_s, sim_s = _build_and_run(spec)
            config_ms, sim_ms = config_s * 1e3, sim_s * 1e3
            peak_kb = float(resource.getrusage(resource.RUSAGE_SELF).ru_maxrss)
            failed = False
        except Exception:
            config_ms = sim_ms = peak_kb = 0.0
            failed = True
    return BenchRecord(
        n_or_N=spec.size,
        config_ms=config_ms,
        sim_ms=sim_ms,
        total_ms=config_ms + sim_ms,
        peak_kb=peak_kb,
        failed=failed,
    )


def peak_rss_kb() -> float:
    """Current process high-water resident memory (non-decreasing)."""
    return float(resource.getrusage(resource.RUSAGE_SELF).ru_maxrss)


def repeat_until_ci(
    runner: Callable[[int], dict],
    confidence: float = 0.95,
    margin_frac: float = 0.02,
    min_trials: int = 5,
    max_trials: int = 100,
) -> dict[str, TrialStats]:
    """Sequential trials until every metric's CI margin is small enough.

    `runner(trial_index)` returns a metric dict; the 95% margin is
    1.96 * std / sqrt(trials) (normal approximation, sample std).
    """
    if margin_frac <= 0:
        raise ValueError("margin_frac must be positive")
    if confidence != 0.95:
        raise ValueError("only the 95% level is supported")
    samples: dict[str, list[float]] = {}
    trials = 0
    converged = False
    while trials < max_trials:
        values = runner(trials)
        trials += 1
        for key, val in values.items():
            samples.setdefault(key, []).append(float(val))
        if trials < min_trials:
            continue
        if all(_margin_ok(vals, margin_frac) for vals in samples.values()):
            converged = True
            break
    out = {}
    for key, vals in samples.items():
        arr = np.asarray(vals)
        std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
        margin = 1.96 * std / np.sqrt(len(arr))
        out[key] = TrialStats(
            trials=len(arr),
            mean=float(arr.mean()),
            std=std,
            ci95_margin=float(margin),
            converged=converged,
        )
    return out


def _margin_ok(vals: list[float], margin_frac: float) -> bool:
    arr = np.asarray(vals)
    std = float(arr.std(ddof=1))
    margin = 1.96 * std / np.sqrt(len(arr))
    return margin <= margin_frac * abs(float(arr.mean()))


def bench_sweep(
    workload: str,
    sizes: list[int],
    backend: str,
    seed: int = 0,
    margin_frac: float = 0.02,
    min_trials: int = 5,
    max_trials: int = 30,
    subprocess: bool = True,
    params: tuple = (),
    progress: Optional[Callable[[str], None]] = None,
) -> list[dict]:
    """CI-stopped trials per size; returns rows shaped like the CSV schema."""
    rows = []
    for size in sizes:

        def runner(k: int, size=size) -> dict:
            rec = time_run(
                ScenarioSpec(workload, size, backend, seed + k, params), subprocess
            )
            if rec.failed:
                raise RuntimeError(f"scenario failed: {workload} size={size}")
            return {m: rec.metric(m) for m in METRICS}

        stats = repeat_until_ci(
            runner, margin_frac=margin_frac, min_trials=min_trials, max_trials=max_trials
        )
        row = {"n": size, "trials": stats["total_ms"].trials}
        for m in METRICS:
            row[f"mean_{m}"] = stats[m].mean
            row[f"std_{m}"] = stats[m].std
        rows.append(row)
        if progress is not None:
            progress(
                f"{workload} n={size}: total {row['mean_total_ms']:.2f} ms "
                f"over {row['trials']} trials"
            )
    return rows


def write_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row["n"],
                    row["trials"],
                    _fmt(row["mean_config_ms"]),
                    _fmt(row["std_config_ms"]),
                    _fmt(row["mean_sim_ms"]),
                    _fmt(row["std_sim_ms"]),
                    _fmt(row["mean_total_ms"]),
                    _fmt(row["std_total_ms"]),
                    _fmt(row["mean_peak_kb"]),
                    _fmt(row["std_peak_kb"]),
                ]
            )


def read_csv(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected CSV header: {reader.fieldnames}")
        rows = []
        for raw in reader:
            rows.append({k: (int(v) if k in ("n", "trials") else float(v)) for k, v in raw.items()})
        return rows


def _fmt(x: float) -> str:
    return f"{x:.6g}"
