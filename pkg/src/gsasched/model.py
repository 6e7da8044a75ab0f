"""Core scheduling types: tasks, VMs, workloads and assignment decoding.

An assignment is a plain integer numpy array ``vm_of`` of length ``n`` where
entry ``j`` is the (0-based) index of the VM executing task ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

Assignment = np.ndarray


class WorkloadError(ValueError):
    """Raised when a workload violates one of its invariants."""


@dataclass(frozen=True)
class Task:
    id: int
    time_req: float
    resource_req: float


@dataclass(frozen=True)
class Vm:
    id: int
    capacity: float
    speed: float = 1.0


@dataclass(frozen=True)
class Workload:
    tasks: tuple[Task, ...]
    vms: tuple[Vm, ...]

    def __post_init__(self) -> None:
        # accept lists for convenience but store tuples so the value is hashable
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "vms", tuple(self.vms))

    @property
    def n(self) -> int:
        return len(self.tasks)

    @property
    def m(self) -> int:
        return len(self.vms)

    # Array views used by the vectorised evaluators. Cached on first access.
    @cached_property
    def time_req(self) -> np.ndarray:
        return np.array([t.time_req for t in self.tasks], dtype=float)

    @cached_property
    def resource_req(self) -> np.ndarray:
        return np.array([t.resource_req for t in self.tasks], dtype=float)

    @cached_property
    def capacity(self) -> np.ndarray:
        return np.array([v.capacity for v in self.vms], dtype=float)

    @cached_property
    def speed(self) -> np.ndarray:
        return np.array([v.speed for v in self.vms], dtype=float)

    @cached_property
    def etc(self) -> np.ndarray:
        """Expected time to compute, shape ``(n, m)``: ``time_req[j] / speed[i]``."""
        return self.time_req[:, None] / self.speed[None, :]

    @classmethod
    def from_arrays(
        cls,
        time_req: Sequence[float],
        resource_req: Sequence[float],
        capacity: Sequence[float],
        speed: Sequence[float] | None = None,
    ) -> "Workload":
        if speed is None:
            speed = [1.0] * len(capacity)
        tasks = tuple(
            Task(j, float(t), float(r)) for j, (t, r) in enumerate(zip(time_req, resource_req))
        )
        vms = tuple(Vm(i, float(c), float(s)) for i, (c, s) in enumerate(zip(capacity, speed)))
        return cls(tasks, vms)


def validate_workload(workload: Workload) -> Workload:
    """Return ``workload`` unchanged if every invariant holds.

    Raises :class:`WorkloadError` describing the first violation found.
    """
    if not workload.tasks:
        raise WorkloadError("empty task list")
    if not workload.vms:
        raise WorkloadError("empty VM list")
    for j, task in enumerate(workload.tasks):
        if task.id != j:
            raise WorkloadError(f"task {j}: id {task.id} does not match position {j}")
        if not (np.isfinite(task.time_req) and task.time_req > 0):
            raise WorkloadError(f"task {j}: time_req must be > 0, got {task.time_req}")
        if not (np.isfinite(task.resource_req) and task.resource_req > 0):
            raise WorkloadError(f"task {j}: resource_req must be > 0, got {task.resource_req}")
    for i, vm in enumerate(workload.vms):
        if vm.id != i:
            raise WorkloadError(f"vm {i}: id {vm.id} does not match position {i}")
        if not (np.isfinite(vm.capacity) and vm.capacity > 0):
            raise WorkloadError(f"vm {i}: capacity must be > 0, got {vm.capacity}")
        if not (np.isfinite(vm.speed) and vm.speed > 0):
            raise WorkloadError(f"vm {i}: speed must be > 0, got {vm.speed}")
    return workload


def decode_position(position: np.ndarray, m: int) -> Assignment:
    """Map a real-valued agent position onto VM indices.

    Each coordinate is rounded half away from zero and clamped into ``[0, m-1]``.
    Works on a single position or on a stacked ``(S, n)`` population.
    """
    x = np.asarray(position, dtype=float)
    rounded = np.sign(x) * np.floor(np.abs(x) + 0.5)
    return np.clip(rounded, 0, m - 1).astype(np.int64)


def check_assignment(workload: Workload, a: Sequence[int]) -> Assignment:
    """Coerce ``a`` to an integer array and verify it is a valid assignment."""
    arr = np.asarray(a, dtype=np.int64)
    if arr.shape != (workload.n,):
        raise ValueError(f"assignment must have length {workload.n}, got shape {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() >= workload.m):
        raise ValueError(f"assignment entries must lie in [0, {workload.m - 1}]")
    return arr

