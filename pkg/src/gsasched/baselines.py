"""Comparison schedulers: classical list heuristics and a PSO optimiser.

Execution time of task ``j`` on VM ``i`` is ``time_req[j] / speed[i]``; its
completion time is that plus the VM's current ready time. Ties are always
broken by lowest task index, then lowest VM index.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import metrics
from .gsa import GsaRunResult, IterationRecord, iteration_rng
from .metrics import FitnessParams
from .model import Assignment, Workload, decode_position, validate_workload


class ReadyTimes:
    """Per-VM accumulated finish times."""

    def __init__(self, m: int) -> None:
        self.times = np.zeros(m)

    def completion(self, etc_row: np.ndarray) -> np.ndarray:
        return self.times + etc_row

    def assign(self, vm: int, exec_time: float) -> None:
        self.times[vm] += exec_time


def schedule_olb(workload: Workload, rng: np.random.Generator | None = None, random_mode: bool = False) -> Assignment:
    """Opportunistic load balancing.

    Default: each task, in input order, goes to the VM that becomes free first
    (no execution-time lookahead). With ``random_mode`` every task is placed on
    a uniformly random VM instead.
    """
    validate_workload(workload)
    if random_mode:
        rng = rng if rng is not None else np.random.default_rng()
        return rng.integers(0, workload.m, size=workload.n).astype(np.int64)
    ready = ReadyTimes(workload.m)
    out = np.empty(workload.n, dtype=np.int64)
    etc = workload.etc
    for j in range(workload.n):
        vm = int(np.argmin(ready.times))
        out[j] = vm
        ready.assign(vm, etc[j, vm])
    return out


def schedule_met(workload: Workload) -> Assignment:
    """Minimum execution time: fastest VM per task, load ignored."""
    validate_workload(workload)
    return np.argmin(workload.etc, axis=1).astype(np.int64)


def schedule_mct(workload: Workload) -> Assignment:
    """Minimum completion time in input order."""
    validate_workload(workload)
    ready = ReadyTimes(workload.m)
    out = np.empty(workload.n, dtype=np.int64)
    etc = workload.etc
    for j in range(workload.n):
        vm = int(np.argmin(ready.completion(etc[j])))
        out[j] = vm
        ready.assign(vm, etc[j, vm])
    return out


class _Batch:
    """Unassigned tasks with their current completion-time matrix."""

    def __init__(self, workload: Workload) -> None:
        self.etc = workload.etc
        self.ready = ReadyTimes(workload.m)
        self.remaining = np.arange(workload.n)
        self.out = np.full(workload.n, -1, dtype=np.int64)

    def __bool__(self) -> bool:
        return self.remaining.size > 0

    def completion(self) -> np.ndarray:
        return self.ready.times[None, :] + self.etc[self.remaining]

    def take(self, pos: int, vm: int) -> None:
        j = int(self.remaining[pos])
        self.out[j] = vm
        self.ready.assign(vm, self.etc[j, vm])
        self.remaining = np.delete(self.remaining, pos)

    def min_step(self) -> None:
        ct = self.completion()
        best_vm = np.argmin(ct, axis=1)
        mct = ct[np.arange(len(best_vm)), best_vm]
        pos = int(np.argmin(mct))  # remaining is sorted, so first hit = lowest task index
        self.take(pos, int(best_vm[pos]))

    def max_step(self) -> None:
        ct = self.completion()
        best_vm = np.argmin(ct, axis=1)
        mct = ct[np.arange(len(best_vm)), best_vm]
        pos = int(np.argmax(mct))
        self.take(pos, int(best_vm[pos]))


def schedule_min_min(workload: Workload) -> Assignment:
    validate_workload(workload)
    batch = _Batch(workload)
    while batch:
        batch.min_step()
    return batch.out


def schedule_max_min(workload: Workload) -> Assignment:
    validate_workload(workload)
    batch = _Batch(workload)
    while batch:
        batch.max_step()
    return batch.out


def schedule_sufferage(workload: Workload) -> Assignment:
    """Schedule the task that would lose most by missing its best VM first."""
    validate_workload(workload)
    batch = _Batch(workload)
    while batch:
        ct = batch.completion()
        best_vm = np.argmin(ct, axis=1)
        if ct.shape[1] == 1:
            suff = np.zeros(ct.shape[0])
        else:
            two = np.partition(ct, 1, axis=1)
            suff = two[:, 1] - two[:, 0]
        pos = int(np.argmax(suff))
        batch.take(pos, int(best_vm[pos]))
    return batch.out


def schedule_ljfr_sjfr(workload: Workload, start_with_long: bool = True) -> Assignment:
    """Alternate one Max-Min (long job) step and one Min-Min (short job) step."""
    validate_workload(workload)
    batch = _Batch(workload)
    long_turn = start_with_long
    while batch:
        if long_turn:
            batch.max_step()
        else:
            batch.min_step()
        long_turn = not long_turn
    return batch.out


class InertiaSchedule(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class PsoParams:
    swarm_size: int = 30
    max_iters: int = 150
    inertia: InertiaSchedule = InertiaSchedule.LINEAR
    w: float = 0.7  # constant schedule
    w_start: float = 0.9
    w_end: float = 0.4
    w_low: float = 0.4  # adaptive: agents better than the mean
    w_high: float = 0.9  # adaptive: the rest
    c1: float = 2.0
    c2: float = 2.0
    v_max: float | None = None  # None -> m - 1
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "inertia", InertiaSchedule(self.inertia))
        if self.swarm_size < 2:
            raise ValueError("swarm_size must be >= 2")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("c1 and c2 must be >= 0")
        for name in ("w", "w_start", "w_end", "w_low", "w_high"):
            if not 0 <= getattr(self, name) < 1.5:
                raise ValueError(f"{name} must lie in [0, 1.5)")
        if self.v_max is not None and not self.v_max > 0:
            raise ValueError("v_max must be > 0")

    def inertia_weights(self, t: int, fitness: np.ndarray) -> np.ndarray:
        """Per-particle inertia at iteration ``t`` (1-based)."""
        if self.inertia is InertiaSchedule.CONSTANT:
            return np.full(fitness.shape, self.w)
        if self.inertia is InertiaSchedule.LINEAR:
            frac = (t - 1) / max(self.max_iters - 1, 1)
            return np.full(fitness.shape, self.w_start + (self.w_end - self.w_start) * frac)
        return np.where(fitness < fitness.mean(), self.w_low, self.w_high)


def schedule_pso(
    workload: Workload, params: PsoParams | None = None, fparams: FitnessParams | None = None
) -> GsaRunResult:
    """Global-best PSO over the same position encoding and fitness as GSA."""
    validate_workload(workload)
    params = params or PsoParams()
    fparams = fparams or FitnessParams.default_for(workload)
    m = workload.m
    v_max = float(params.v_max) if params.v_max is not None else float(max(m - 1, 1))

    def evaluate(pos: np.ndarray) -> np.ndarray:
        return metrics.population_fitness(workload, decode_position(pos, m), fparams)

    rng = iteration_rng(params.seed, 0)
    shape = (params.swarm_size, workload.n)
    x = rng.uniform(0.0, m - 1, size=shape)
    v = np.zeros(shape)
    fit = evaluate(x)
    pbest, pbest_fit = x.copy(), fit.copy()
    g = int(np.argmin(pbest_fit))
    gbest, gbest_fit = pbest[g].copy(), float(pbest_fit[g])
    history = [IterationRecord(0, gbest_fit, float(fit.min()), float(fit.max()), float("nan"))]

    for t in range(1, params.max_iters + 1):
        r = iteration_rng(params.seed, t)
        r1 = r.random(shape)
        r2 = r.random(shape)
        w = params.inertia_weights(t, fit)[:, None]
        v = w * v + params.c1 * r1 * (pbest - x) + params.c2 * r2 * (gbest - x)
        v = np.clip(v, -v_max, v_max)
        x = np.clip(x + v, 0.0, m - 1)
        fit = evaluate(x)
        improved = fit < pbest_fit
        pbest[improved] = x[improved]
        pbest_fit[improved] = fit[improved]
        g = int(np.argmin(pbest_fit))
        if pbest_fit[g] < gbest_fit:
            gbest, gbest_fit = pbest[g].copy(), float(pbest_fit[g])
        history.append(IterationRecord(t, gbest_fit, float(fit.min()), float(fit.max()), float("nan")))

    best = decode_position(gbest, m)
    return GsaRunResult(
        best_assignment=best,
        best_fitness=gbest_fit,
        best_metrics=metrics.evaluate(workload, best, fparams),
        history=history,
        iterations_run=params.max_iters,
    )


HEURISTICS = {
    "olb": schedule_olb,
    "met": schedule_met,
    "mct": schedule_mct,
    "minmin": schedule_min_min,
    "maxmin": schedule_max_min,
    "sufferage": schedule_sufferage,
    "ljfr-sjfr": schedule_ljfr_sjfr,
}
