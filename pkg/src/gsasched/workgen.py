"""Seeded synthetic workloads and the ``.workload.json`` file format.

File layout::

    {
      "tasks": [{"id": 0, "time_req": 12.5, "resource_req": 3.0}, ...],
      "vms":   [{"id": 0, "capacity": 32.0, "speed": 1.0}, ...]
    }

Floats are written with ``repr`` precision by the json module, so a
write/read round trip reproduces every value exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .model import Task, Vm, Workload, WorkloadError, validate_workload

Range = tuple[float, float]


@dataclass(frozen=True)
class GenSpec:
    num_tasks: int
    num_vms: int
    time_req_range: Range = (1.0, 100.0)
    resource_req_range: Range = (1.0, 16.0)
    capacity_range: Range = (16.0, 64.0)
    speed_range: Range = (1.0, 1.0)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_tasks < 1:
            raise ValueError(f"num_tasks must be >= 1, got {self.num_tasks}")
        if self.num_vms < 1:
            raise ValueError(f"num_vms must be >= 1, got {self.num_vms}")
        for name in ("time_req_range", "resource_req_range", "capacity_range", "speed_range"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ValueError(f"{name} must satisfy 0 < lo <= hi, got ({lo}, {hi})")
            object.__setattr__(self, name, (float(lo), float(hi)))


def _uniform(rng: np.random.Generator, bounds: Range, size: int) -> np.ndarray:
    lo, hi = bounds
    if lo == hi:
        return np.full(size, lo)
    return rng.uniform(lo, hi, size=size)


def generate_workload(spec: GenSpec) -> Workload:
    rng = np.random.default_rng(spec.seed)
    n, m = spec.num_tasks, spec.num_vms
    # draw order is fixed so a given seed always yields the same workload
    time_req = _uniform(rng, spec.time_req_range, n)
    resource_req = _uniform(rng, spec.resource_req_range, n)
    capacity = _uniform(rng, spec.capacity_range, m)
    speed = _uniform(rng, spec.speed_range, m)
    return validate_workload(Workload.from_arrays(time_req, resource_req, capacity, speed))


def workload_to_dict(workload: Workload) -> dict[str, Any]:
    return {
        "tasks": [
            {"id": t.id, "time_req": t.time_req, "resource_req": t.resource_req}
            for t in workload.tasks
        ],
        "vms": [{"id": v.id, "capacity": v.capacity, "speed": v.speed} for v in workload.vms],
    }


def workload_from_dict(doc: Any) -> Workload:
    if not isinstance(doc, dict):
        raise WorkloadError("workload document must be a JSON object")
    for section in ("tasks", "vms"):
        if section not in doc:
            raise WorkloadError(f"missing '{section}' section")
        if not isinstance(doc[section], list):
            raise WorkloadError(f"'{section}' must be a list")
    tasks = []
    for k, entry in enumerate(doc["tasks"]):
        tasks.append(
            Task(
                id=_field(entry, "id", "tasks", k, int),
                time_req=_field(entry, "time_req", "tasks", k, float),
                resource_req=_field(entry, "resource_req", "tasks", k, float),
            )
        )
    vms = []
    for k, entry in enumerate(doc["vms"]):
        speed = entry.get("speed", 1.0) if isinstance(entry, dict) else None
        vms.append(
            Vm(
                id=_field(entry, "id", "vms", k, int),
                capacity=_field(entry, "capacity", "vms", k, float),
                speed=_coerce(speed, "speed", "vms", k, float),
            )
        )
    return validate_workload(Workload(tuple(tasks), tuple(vms)))


def _field(entry: Any, name: str, section: str, k: int, kind: type) -> Any:
    if not isinstance(entry, dict):
        raise WorkloadError(f"{section}[{k}]: expected an object")
    if name not in entry:
        raise WorkloadError(f"{section}[{k}]: missing field '{name}'")
    return _coerce(entry[name], name, section, k, kind)


def _coerce(value: Any, name: str, section: str, k: int, kind: type) -> Any:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise WorkloadError(f"{section}[{k}].{name}: expected a number, got {value!r}")
    if kind is int:
        if isinstance(value, float) and not value.is_integer():
            raise WorkloadError(f"{section}[{k}].{name}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def write_workload(workload: Workload, path: str | Path) -> Path:
    path = Path(path)
    validate_workload(workload)
    path.write_text(json.dumps(workload_to_dict(workload), indent=1) + "\n", encoding="utf-8")
    return path


def read_workload(path: str | Path) -> Workload:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise WorkloadError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return workload_from_dict(doc)
