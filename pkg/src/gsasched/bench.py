"""Experiment sweeps over task and VM counts, with CSV and plot-data output.

For each grid point and seed one workload is generated and every algorithm
schedules that same workload, so the comparison is paired.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
import statistics
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from . import baselines, metrics
from .baselines import PsoParams
from .gsa import GsaParams, run_gsa
from .metrics import FitnessParams
from .model import Workload
from .workgen import GenSpec, generate_workload

log = logging.getLogger(__name__)

ALGORITHMS = ("gsa", "pso", "minmin", "maxmin", "mct", "met", "olb", "sufferage", "ljfr-sjfr")
MODES = ("sweep-tasks", "sweep-vms", "both")
RESULT_FIELDS = (
    "algorithm",
    "num_tasks",
    "num_vms",
    "seed",
    "makespan",
    "util_sum",
    "avg_time_util",
    "fitness",
    "wall_time_ms",
)


@dataclass(frozen=True)
class FitnessOverrides:
    """Fixed fitness weights; any field left as None uses the workload default."""

    gamma: float | None = None
    delta: float | None = None
    eps1: float | None = None
    eps2: float | None = None

    def resolve(self, workload: Workload) -> FitnessParams:
        base = FitnessParams.default_for(workload)
        given = {k: v for k, v in dataclasses.asdict(self).items() if v is not None}
        return dataclasses.replace(base, **given)


@dataclass(frozen=True)
class ExperimentConfig:
    task_counts: tuple[int, ...] = (1000, 5000, 10000, 20000, 50000)
    vm_counts: tuple[int, ...] = (16, 64, 256, 1024)
    mode: str = "both"
    algorithms: tuple[str, ...] = ALGORITHMS
    seeds: tuple[int, ...] = (0,)
    fixed_vms: int | None = None  # sweep-tasks VM count; None -> vm_counts[0]
    fixed_tasks: int | None = None  # sweep-vms task count; None -> task_counts[-1]
    gen: dict[str, Any] = field(default_factory=dict)  # extra GenSpec fields (ranges)
    gsa: dict[str, Any] = field(default_factory=dict)
    pso: dict[str, Any] = field(default_factory=dict)
    fitness: dict[str, Any] = field(default_factory=dict)
    olb_random: bool = False
    timing: bool = True
    verbose: bool = False
    workers: int = 1
    out: str = "results"

    def __post_init__(self) -> None:
        for name in ("task_counts", "vm_counts", "algorithms", "seeds"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ValueError(f"unknown algorithms {unknown}; choose from {ALGORITHMS}")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if not self.task_counts or not self.vm_counts:
            raise ValueError("task_counts and vm_counts must be non-empty")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        # surface bad parameter blocks before any work starts
        GsaParams(**self.gsa)
        PsoParams(**self.pso)
        FitnessOverrides(**self.fitness)

    @property
    def sweep_vms_count(self) -> int:
        return self.fixed_vms if self.fixed_vms is not None else self.vm_counts[0]

    @property
    def sweep_tasks_count(self) -> int:
        return self.fixed_tasks if self.fixed_tasks is not None else self.task_counts[-1]

    def grid(self) -> list[tuple[int, int]]:
        points: list[tuple[int, int]] = []
        if self.mode in ("sweep-tasks", "both"):
            points += [(n, self.sweep_vms_count) for n in self.task_counts]
        if self.mode in ("sweep-vms", "both"):
            points += [(self.sweep_tasks_count, m) for m in self.vm_counts]
        return sorted(set(points))

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        return cls(**doc)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def desk_preset(**overrides: Any) -> ExperimentConfig:
    """Small grid that finishes in minutes on a laptop.

    OLB runs in random-placement mode here, the reading under which it is a
    meaningful baseline for the task sweep.
    """
    base: dict[str, Any] = dict(
        task_counts=(200, 500, 1000, 2000),
        vm_counts=(8, 16, 32),
        fixed_vms=16,
        fixed_tasks=2000,
        seeds=tuple(range(10)),
        gsa={"max_iters": 150},
        pso={"max_iters": 150},
        olb_random=True,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


@dataclass(frozen=True)
class ResultRow:
    algorithm: str
    num_tasks: int
    num_vms: int
    seed: int
    makespan: float
    util_sum: float
    avg_time_util: float
    fitness: float
    wall_time_ms: float
    status: str = "ok"
    workload_hash: str = ""

    @property
    def key(self) -> tuple:
        return (self.algorithm, self.num_tasks, self.num_vms, self.seed)


def workload_hash(workload: Workload) -> str:
    h = hashlib.sha256()
    for arr in (workload.time_req, workload.resource_req, workload.capacity, workload.speed):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()[:16]


def make_workload(config: ExperimentConfig, num_tasks: int, num_vms: int, seed: int) -> Workload:
    return generate_workload(GenSpec(num_tasks, num_vms, seed=seed, **config.gen))


def run_algorithm(
    name: str, workload: Workload, config: ExperimentConfig, seed: int
) -> tuple[np.ndarray, FitnessParams]:
    fparams = FitnessOverrides(**config.fitness).resolve(workload)
    if name == "gsa":
        params = GsaParams(**{"seed": seed, **config.gsa})
        return run_gsa(workload, params, fparams).best_assignment, fparams
    if name == "pso":
        params = PsoParams(**{"seed": seed, **config.pso})
        return baselines.schedule_pso(workload, params, fparams).best_assignment, fparams
    if name == "olb":
        rng = np.random.default_rng(seed)
        return baselines.schedule_olb(workload, rng, random_mode=config.olb_random), fparams
    return baselines.HEURISTICS[name](workload), fparams


def _run_point(config: ExperimentConfig, num_tasks: int, num_vms: int, seed: int) -> list[ResultRow]:
    workload = make_workload(config, num_tasks, num_vms, seed)
    digest = workload_hash(workload) if config.verbose else ""
    rows = []
    for name in config.algorithms:
        start = time.perf_counter()
        try:
            a, fparams = run_algorithm(name, workload, config, seed)
            m = metrics.evaluate(workload, a, fparams)
            values = (m.makespan, m.util_sum, m.avg_time_util, m.fitness)
            status = "ok"
        except Exception as exc:  # one failed run must not abort the sweep
            log.warning("%s failed on n=%d m=%d seed=%d: %s", name, num_tasks, num_vms, seed, exc)
            values = (math.nan,) * 4
            status = f"error: {exc}"
        elapsed = (time.perf_counter() - start) * 1000.0 if config.timing else 0.0
        rows.append(ResultRow(name, num_tasks, num_vms, seed, *values, elapsed, status, digest))
    return rows


def run_experiment(config: ExperimentConfig) -> list[ResultRow]:
    jobs = [(n, m, s) for n, m in config.grid() for s in config.seeds]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            futures = [pool.submit(_run_point, config, *job) for job in jobs]
            chunks = [f.result() for f in futures]
    else:
        chunks = []
        for job in jobs:
            log.info("running n=%d m=%d seed=%d", *job)
            chunks.append(_run_point(config, *job))
    rows = [r for chunk in chunks for r in chunk]
    return sorted(rows, key=lambda r: r.key)


@dataclass(frozen=True)
class PointStats:
    algorithm: str
    num_tasks: int
    num_vms: int
    runs: int
    makespan_mean: float
    makespan_std: float
    util_sum_mean: float
    util_sum_std: float
    avg_time_util_mean: float
    avg_time_util_std: float
    fitness_mean: float
    fitness_std: float


@dataclass(frozen=True)
class Gain:
    baseline: str
    makespan_gain_pct: float  # mean over grid points of (baseline - gsa) / baseline
    util_gain_pct: float  # mean over grid points of (gsa - baseline) / baseline
    points: int


@dataclass
class Summary:
    points: list[PointStats]
    gains: list[Gain]

    def stats(self, algorithm: str) -> list[PointStats]:
        return [p for p in self.points if p.algorithm == algorithm]

    def gain(self, baseline: str) -> Gain:
        for g in self.gains:
            if g.baseline == baseline:
                return g
        raise KeyError(baseline)


def _mean_std(values: list[float]) -> tuple[float, float]:
    if not values:
        return math.nan, math.nan
    mean = statistics.fmean(values)
    std = statistics.pstdev(values) if len(values) > 1 else 0.0
    return mean, std


def summarize(rows: Iterable[ResultRow], reference: str = "gsa") -> Summary:
    groups: dict[tuple[str, int, int], list[ResultRow]] = defaultdict(list)
    for r in rows:
        if r.status == "ok":
            groups[(r.algorithm, r.num_tasks, r.num_vms)].append(r)

    points = []
    for (alg, n, m), rs in sorted(groups.items()):
        cols = {}
        for name in ("makespan", "util_sum", "avg_time_util", "fitness"):
            cols[name] = _mean_std([getattr(r, name) for r in rs])
        points.append(
            PointStats(
                alg, n, m, len(rs),
                *cols["makespan"], *cols["util_sum"], *cols["avg_time_util"], *cols["fitness"],
            )
        )

    by_point = {(p.algorithm, p.num_tasks, p.num_vms): p for p in points}
    ref_points = [p for p in points if p.algorithm == reference]
    gains = []
    baselines_seen = sorted({p.algorithm for p in points} - {reference})
    for base in baselines_seen:
        span, util = [], []
        for ref in ref_points:
            other = by_point.get((base, ref.num_tasks, ref.num_vms))
            if other is None:
                continue
            span.append((other.makespan_mean - ref.makespan_mean) / other.makespan_mean * 100.0)
            util.append((ref.avg_time_util_mean - other.avg_time_util_mean) / other.avg_time_util_mean * 100.0)
        if span:
            gains.append(Gain(base, statistics.fmean(span), statistics.fmean(util), len(span)))
    return Summary(points, gains)


def _fmt(x: float) -> str:
    return repr(float(x))


def rows_to_csv(rows: Iterable[ResultRow], verbose: bool = False) -> str:
    buf = io.StringIO()
    fields = RESULT_FIELDS + (("status", "workload_hash") if verbose else ())
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        line = [r.algorithm, r.num_tasks, r.num_vms, r.seed]
        line += [_fmt(getattr(r, f)) for f in RESULT_FIELDS[4:]]
        if verbose:
            line += [r.status, r.workload_hash]
        w.writerow(line)
    return buf.getvalue()


def rows_from_csv(text: str) -> list[ResultRow]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append(
            ResultRow(
                algorithm=rec["algorithm"],
                num_tasks=int(rec["num_tasks"]),
                num_vms=int(rec["num_vms"]),
                seed=int(rec["seed"]),
                makespan=float(rec["makespan"]),
                util_sum=float(rec["util_sum"]),
                avg_time_util=float(rec["avg_time_util"]),
                fitness=float(rec["fitness"]),
                wall_time_ms=float(rec["wall_time_ms"]),
                status=rec.get("status") or "ok",
                workload_hash=rec.get("workload_hash") or "",
            )
        )
    return rows


def summary_to_csv(summary: Summary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = [f.name for f in dataclasses.fields(PointStats)]
    w.writerow(names)
    for p in summary.points:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in dataclasses.astuple(p)])
    return buf.getvalue()


def gains_to_csv(summary: Summary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f.name for f in dataclasses.fields(Gain)])
    for g in summary.gains:
        w.writerow([g.baseline, _fmt(g.makespan_gain_pct), _fmt(g.util_gain_pct), g.points])
    return buf.getvalue()


def plot_data(summary: Summary, x: str, fixed: int, value: str) -> str:
    """Whitespace-separated table: first column the swept variable, one column per algorithm."""
    fixed_attr = "num_vms" if x == "num_tasks" else "num_tasks"
    pts = [p for p in summary.points if getattr(p, fixed_attr) == fixed]
    algs = sorted({p.algorithm for p in pts})
    xs = sorted({getattr(p, x) for p in pts})
    table = {(p.algorithm, getattr(p, x)): getattr(p, value) for p in pts}
    lines = ["# " + " ".join([x] + (algs or []))]
    for xv in xs:
        cells = [_fmt(table[(a, xv)]) if (a, xv) in table else "nan" for a in algs]
        lines.append(" ".join([str(xv)] + cells))
    return "\n".join(lines) + "\n"


def emit_outputs(
    rows: list[ResultRow], summary: Summary, outdir: str | Path, config: ExperimentConfig | None = None
) -> dict[str, Path]:
    config = config or ExperimentConfig(out=str(outdir))
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {outdir}: {exc}") from exc

    fixed_vms, fixed_tasks = config.sweep_vms_count, config.sweep_tasks_count
    files = {
        "results.csv": rows_to_csv(rows, config.verbose),
        "summary.csv": summary_to_csv(summary),
        "gains.csv": gains_to_csv(summary),
        "fig_makespan_vs_tasks.dat": plot_data(summary, "num_tasks", fixed_vms, "makespan_mean"),
        "fig_util_vs_tasks.dat": plot_data(summary, "num_tasks", fixed_vms, "avg_time_util_mean"),
        "fig_makespan_vs_vms.dat": plot_data(summary, "num_vms", fixed_tasks, "makespan_mean"),
        "fig_util_vs_vms.dat": plot_data(summary, "num_vms", fixed_tasks, "avg_time_util_mean"),
    }
    written = {}
    for name, text in files.items():
        path = outdir / name
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        written[name] = path
    return written
