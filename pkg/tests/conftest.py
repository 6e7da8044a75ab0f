from __future__ import annotations

import itertools

import numpy as np
import pytest

from gsasched.model import Workload


def make_wa() -> Workload:
    # 2 identical VMs, tasks of length 2, 4, 6
    return Workload.from_arrays([2, 4, 6], [10, 20, 30], [100, 100])


def make_wb() -> Workload:
    # second VM runs at half speed
    return Workload.from_arrays([4, 6], [10, 10], [100, 100], [1.0, 0.5])


@pytest.fixture
def wa() -> Workload:
    return make_wa()


@pytest.fixture
def wb() -> Workload:
    return make_wb()


def random_small_workload(rng: np.random.Generator, max_n: int = 8, max_m: int = 3,
                          equal_caps: bool = False, speeds: bool = False) -> Workload:
    n = int(rng.integers(1, max_n + 1))
    m = int(rng.integers(1, max_m + 1))
    time_req = rng.integers(1, 20, size=n).astype(float)
    res = rng.integers(1, 10, size=n).astype(float)
    caps = np.full(m, 16.0) if equal_caps else rng.integers(4, 32, size=m).astype(float)
    spd = rng.choice([0.5, 1.0, 2.0], size=m) if speeds else None
    return Workload.from_arrays(time_req, res, caps, spd)


# Reference evaluators written with plain loops; deliberately independent of
# gsasched.metrics so they can serve as an oracle for it.

def ref_busy(w: Workload, a) -> list[float]:
    busy = [0.0] * w.m
    for j, vm in enumerate(a):
        busy[vm] += w.tasks[j].time_req / w.vms[vm].speed
    return busy


def ref_makespan(w: Workload, a) -> float:
    return max(ref_busy(w, a))


def ref_util_sum(w: Workload, a) -> float:
    load = [0.0] * w.m
    for j, vm in enumerate(a):
        load[vm] += w.tasks[j].resource_req
    return sum(load[i] / w.vms[i].capacity for i in range(w.m))


def ref_fitness(w: Workload, a, p) -> float:
    return (p.gamma * ref_makespan(w, a) + p.eps1) / (p.delta * ref_util_sum(w, a) + p.eps2)


def all_assignments(w: Workload):
    return itertools.product(range(w.m), repeat=w.n)


def ref_min_makespan(w: Workload) -> float:
    return min(ref_makespan(w, a) for a in all_assignments(w))


def ref_best_fitness(w: Workload, p) -> float:
    return min(ref_fitness(w, a, p) for a in all_assignments(w))
