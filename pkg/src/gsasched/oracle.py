"""Exhaustive optimisers for tiny instances.

Assignments are enumerated in mixed-radix order with task 0 as the most
significant digit, so the first minimiser found is also the lexicographically
smallest one.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import metrics
from .metrics import FitnessParams
from .model import Assignment, Workload, validate_workload

DEFAULT_BUDGET = 10**7
_CHUNK = 1 << 15


class OracleBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    best_assignment: Assignment
    best_fitness: float
    best_makespan: float
    enumerated_count: int


def _check_budget(workload: Workload, budget: int) -> int:
    total = workload.m**workload.n
    if total > budget:
        raise OracleBudgetError(
            f"refusing to enumerate m^n = {workload.m}^{workload.n} = {total} assignments "
            f"(budget {budget})"
        )
    return total


def _digits(index: np.ndarray, n: int, m: int) -> np.ndarray:
    powers = m ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (index[:, None] // powers[None, :]) % m


def _scan(workload: Workload, lo: int, hi: int, score) -> tuple[float, int]:
    best_val, best_idx = np.inf, -1
    for start in range(lo, hi, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, hi), dtype=np.int64)
        vals = score(_digits(idx, workload.n, workload.m))
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best_idx = float(vals[k]), int(idx[k])
    return best_val, best_idx


def _search(workload: Workload, score, budget: int, workers: int) -> tuple[Assignment, float, int]:
    total = _check_budget(workload, budget)
    m = workload.m
    block = total // m  # one block per value of the leading digit
    bounds = [(d * block, (d + 1) * block) for d in range(m)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda b: _scan(workload, *b, score), bounds))
    else:
        parts = [_scan(workload, lo, hi, score) for lo, hi in bounds]
    # blocks are in lexicographic order, so strict < keeps the earliest minimiser
    best_val, best_idx = np.inf, -1
    for val, idx in parts:
        if val < best_val:
            best_val, best_idx = val, idx
    assignment = _digits(np.array([best_idx], dtype=np.int64), workload.n, m)[0]
    return assignment, best_val, total


def _span_scores(workload: Workload):
    m = workload.m

    def score(assignments: np.ndarray) -> np.ndarray:
        s = assignments.shape[0]
        flat = (assignments + (np.arange(s) * m)[:, None]).ravel()
        busy = np.bincount(flat, weights=np.tile(workload.time_req, s), minlength=s * m)
        return (busy.reshape(s, m) / workload.speed).max(axis=1)

    return score


def brute_force_optimum(
    workload: Workload,
    fparams: FitnessParams | None = None,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
) -> OracleResult:
    """Global fitness minimiser over all ``m**n`` assignments."""
    validate_workload(workload)
    fparams = fparams or FitnessParams.default_for(workload)

    def score(assignments: np.ndarray) -> np.ndarray:
        return metrics.population_fitness(workload, assignments, fparams)

    a, val, total = _search(workload, score, budget, workers)
    return OracleResult(a, val, metrics.makespan(workload, a), total)


def brute_force_min_makespan(
    workload: Workload, budget: int = DEFAULT_BUDGET, workers: int = 1
) -> tuple[Assignment, float]:
    validate_workload(workload)
    a, val, _ = _search(workload, _span_scores(workload), budget, workers)
    return a, val
