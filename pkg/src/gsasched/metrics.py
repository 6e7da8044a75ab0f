"""Schedule evaluators: makespan, resource-utilisation sum, time utilisation and fitness.

All functions are pure. ``fitness`` is the quantity the population optimisers
minimise::

    f = (gamma * makespan + eps1) / (delta * util_sum + eps2)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Assignment, Workload


@dataclass(frozen=True)
class FitnessParams:
    gamma: float
    delta: float
    eps1: float = 1.0
    eps2: float = 1.0

    def __post_init__(self) -> None:
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not self.delta > 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if not self.eps1 >= 0:
            raise ValueError(f"eps1 must be >= 0, got {self.eps1}")
        if not self.eps2 > 0:
            raise ValueError(f"eps2 must be > 0, got {self.eps2}")

    @classmethod
    def default_for(cls, workload: Workload) -> "FitnessParams":
        """Unit-normalised weights for ``workload``.

        ``gamma`` is the reciprocal of the ideal makespan (total work spread
        over total speed) and ``delta`` the reciprocal of the utilisation sum
        obtained with equal capacities, so both weighted terms sit near 1 and
        neither is swamped by ``eps1 = eps2 = 1``.
        """
        ideal_span = float(workload.time_req.sum() / workload.speed.sum())
        ref_util = float(workload.m * workload.resource_req.sum() / workload.capacity.sum())
        return cls(gamma=1.0 / ideal_span, delta=1.0 / ref_util)

    @classmethod
    def size_scaled(cls, workload: Workload) -> "FitnessParams":
        """Alternative weights ``gamma = 1/sum(time_req)``, ``delta = 1/m``."""
        return cls(gamma=1.0 / float(workload.time_req.sum()), delta=1.0 / workload.m)


@dataclass(frozen=True)
class ScheduleMetrics:
    makespan: float
    util_sum: float
    avg_time_util: float
    fitness: float


def vm_busy_times(workload: Workload, a: Assignment) -> np.ndarray:
    """Per-VM busy time: sum of ``time_req / speed`` over the tasks placed on it."""
    return np.bincount(a, weights=workload.time_req, minlength=workload.m) / workload.speed


def makespan(workload: Workload, a: Assignment) -> float:
    return float(vm_busy_times(workload, a).max())


def resource_util_sum(workload: Workload, a: Assignment) -> float:
    # no capping at 1.0: overloaded VMs simply contribute more than one unit
    load = np.bincount(a, weights=workload.resource_req, minlength=workload.m)
    return float((load / workload.capacity).sum())


def avg_time_utilization(workload: Workload, a: Assignment) -> float:
    busy = vm_busy_times(workload, a)
    return float(busy.sum() / (workload.m * busy.max()))


def fitness(workload: Workload, a: Assignment, p: FitnessParams) -> float:
    return _combine(makespan(workload, a), resource_util_sum(workload, a), p)


def _combine(span: float, util: float, p: FitnessParams) -> float:
    return (p.gamma * span + p.eps1) / (p.delta * util + p.eps2)


def evaluate(workload: Workload, a: Assignment, p: FitnessParams) -> ScheduleMetrics:
    busy = vm_busy_times(workload, a)
    span = float(busy.max())
    util = resource_util_sum(workload, a)
    return ScheduleMetrics(
        makespan=span,
        util_sum=util,
        avg_time_util=float(busy.sum() / (workload.m * span)),
        fitness=_combine(span, util, p),
    )


def population_fitness(workload: Workload, assignments: np.ndarray, p: FitnessParams) -> np.ndarray:
    """Fitness of every row of an ``(S, n)`` assignment matrix.

    Row-by-row evaluation through a single flattened ``bincount``; each row's
    result is bit-identical to calling :func:`fitness` on it alone.
    """
    s, n = assignments.shape
    m = workload.m
    flat = (assignments + (np.arange(s) * m)[:, None]).ravel()
    busy = (
        np.bincount(flat, weights=np.tile(workload.time_req, s), minlength=s * m).reshape(s, m)
        / workload.speed
    )
    load = np.bincount(flat, weights=np.tile(workload.resource_req, s), minlength=s * m).reshape(s, m)
    span = busy.max(axis=1)
    util = (load / workload.capacity).sum(axis=1)
    return (p.gamma * span + p.eps1) / (p.delta * util + p.eps2)
