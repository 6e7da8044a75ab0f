"""Gravitational search over the continuous task-to-VM encoding.

Every agent is a real vector of length ``n`` (one coordinate per task) that
decodes to an assignment via :func:`gsasched.model.decode_position`. Agents
attract each other with a force proportional to the product of their
fitness-derived masses, so the population drifts toward good schedules.

Random numbers are drawn per iteration from a stream derived from
``(seed, iteration)`` and always in full matrices, so results do not depend on
how many worker threads evaluate the population.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from . import metrics
from .metrics import FitnessParams, ScheduleMetrics
from .model import Assignment, Workload, decode_position, validate_workload


class GSchedule(str, Enum):
    POWER = "power"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class GsaParams:
    population_size: int = 30
    g0: float = 100.0
    alpha: float | None = None  # None -> max_iters
    phi: float = -1.0
    mass_eps: float = 1e-6
    r_eps: float = 1e-9
    max_iters: int = 150
    stagnation_window: int | None = None
    v_max: float | None = None  # None -> m - 1 (one full sweep of the VM range)
    seed: int = 0
    g_schedule: GSchedule = GSchedule.POWER
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "g_schedule", GSchedule(self.g_schedule))
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        for name in ("g0", "mass_eps", "r_eps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.alpha is not None and not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if self.v_max is not None and not self.v_max > 0:
            raise ValueError("v_max must be > 0")
        if self.stagnation_window is not None and self.stagnation_window < 1:
            raise ValueError("stagnation_window must be >= 1 or None")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def effective_alpha(self) -> float:
        return float(self.max_iters if self.alpha is None else self.alpha)

    def effective_v_max(self, m: int) -> float:
        if self.v_max is not None:
            return float(self.v_max)
        return float(max(m - 1, 1))


@dataclass
class Agent:
    position: np.ndarray
    velocity: np.ndarray
    fitness: float
    mass: float


@dataclass
class Swarm:
    """Population state held as stacked arrays, one row per agent."""

    positions: np.ndarray  # (S, n)
    velocities: np.ndarray  # (S, n)
    fitness: np.ndarray  # (S,)
    masses: np.ndarray  # (S,)

    def __len__(self) -> int:
        return self.positions.shape[0]

    def agent(self, i: int) -> Agent:
        return Agent(
            self.positions[i].copy(),
            self.velocities[i].copy(),
            float(self.fitness[i]),
            float(self.masses[i]),
        )

    @property
    def agents(self) -> list[Agent]:
        return [self.agent(i) for i in range(len(self))]


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    global_best: float
    population_best: float
    population_worst: float
    mass_sum: float


@dataclass
class GsaRunResult:
    best_assignment: Assignment
    best_fitness: float
    best_metrics: ScheduleMetrics
    history: list[IterationRecord] = field(default_factory=list)
    iterations_run: int = 0

    @property
    def best_series(self) -> list[float]:
        return [h.global_best for h in self.history]


def iteration_rng(seed: int, iteration: int) -> np.random.Generator:
    """Independent random stream for one iteration (0 = initialisation)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(iteration,)))


def gravitational_constant(t: int, params: GsaParams) -> float:
    if t < 1:
        raise ValueError("iterations are counted from 1")
    if params.g_schedule is GSchedule.POWER:
        return params.g0 * (t / params.effective_alpha) ** params.phi
    return params.g0 * math.exp(params.phi * t / params.max_iters)


def compute_masses(fitnesses: Sequence[float], mass_eps: float) -> np.ndarray:
    """Normalised masses for a minimisation problem; lower fitness -> heavier agent."""
    fit = np.asarray(fitnesses, dtype=float)
    best, worst = fit.min(), fit.max()
    if best == worst:
        return np.full(fit.shape, 1.0 / fit.size)
    raw = (fit - worst) / (best - worst) + mass_eps
    return raw / raw.sum()


def _force_row(
    i: int, positions: np.ndarray, masses: np.ndarray, g: float, r_eps: float, rand: np.ndarray
) -> np.ndarray:
    diff = positions - positions[i]
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    dist[i] = np.inf  # no self-attraction
    coef = rand[i] * g * masses[i] * masses / (dist + r_eps)
    return coef @ diff


def total_forces(
    positions: np.ndarray,
    masses: np.ndarray,
    g: float,
    r_eps: float,
    rand: np.ndarray,
    pool: ThreadPoolExecutor | None = None,
) -> np.ndarray:
    """Force on every agent from all others.

    ``rand[i, j]`` weights the pull of agent ``j`` on agent ``i``. Rows are
    computed independently so a thread pool yields bit-identical output.
    """
    positions = np.asarray(positions, dtype=float)
    masses = np.asarray(masses, dtype=float)
    rand = np.asarray(rand, dtype=float)
    s = positions.shape[0]

    def row(i: int) -> np.ndarray:
        return _force_row(i, positions, masses, g, r_eps, rand)

    rows = list(pool.map(row, range(s))) if pool is not None else [row(i) for i in range(s)]
    return np.stack(rows)


def _evaluate(workload: Workload, positions: np.ndarray, fparams: FitnessParams) -> np.ndarray:
    return metrics.population_fitness(workload, decode_position(positions, workload.m), fparams)


def init_population(
    params: GsaParams, workload: Workload, fparams: FitnessParams | None = None
) -> Swarm:
    """Uniform random positions in ``[0, m-1]`` with zero velocity."""
    fparams = fparams or FitnessParams.default_for(workload)
    rng = iteration_rng(params.seed, 0)
    shape = (params.population_size, workload.n)
    positions = rng.uniform(0.0, workload.m - 1, size=shape)
    fit = _evaluate(workload, positions, fparams)
    return Swarm(positions, np.zeros(shape), fit, compute_masses(fit, params.mass_eps))


def step(
    swarm: Swarm,
    t: int,
    params: GsaParams,
    workload: Workload,
    fparams: FitnessParams,
    rng: np.random.Generator | None = None,
    pool: ThreadPoolExecutor | None = None,
) -> Swarm:
    """One gravitational update: masses, forces, kinematics, re-evaluation."""
    rng = rng if rng is not None else iteration_rng(params.seed, t)
    s, n = swarm.positions.shape
    pair_rand = rng.random((s, s))
    vel_rand = rng.random((s, n))

    masses = compute_masses(swarm.fitness, params.mass_eps)
    g = gravitational_constant(t, params)
    forces = total_forces(swarm.positions, masses, g, params.r_eps, pair_rand, pool)
    accel = forces / (masses + params.mass_eps)[:, None]

    v_max = params.effective_v_max(workload.m)
    velocities = np.clip(vel_rand * swarm.velocities + accel, -v_max, v_max)
    positions = np.clip(swarm.positions + velocities, 0.0, workload.m - 1)
    fit = _evaluate(workload, positions, fparams)
    return Swarm(positions, velocities, fit, masses)


Callback = Callable[[int, Swarm], None]


def run_gsa(
    workload: Workload,
    params: GsaParams | None = None,
    fparams: FitnessParams | None = None,
    callback: Callback | None = None,
) -> GsaRunResult:
    """Optimise ``workload`` and return the best schedule seen in any iteration."""
    validate_workload(workload)
    params = params or GsaParams()
    fparams = fparams or FitnessParams.default_for(workload)

    pool = ThreadPoolExecutor(params.workers) if params.workers > 1 else None
    try:
        swarm = init_population(params, workload, fparams)
        best_pos, best_fit = _best_of(swarm)
        history = [_record(0, best_fit, swarm)]
        if callback is not None:
            callback(0, swarm)

        since_improved = 0
        t = 0
        for t in range(1, params.max_iters + 1):
            swarm = step(swarm, t, params, workload, fparams, pool=pool)
            cand_pos, cand_fit = _best_of(swarm)
            if cand_fit < best_fit:
                best_pos, best_fit = cand_pos, cand_fit
                since_improved = 0
            else:
                since_improved += 1
            history.append(_record(t, best_fit, swarm))
            if callback is not None:
                callback(t, swarm)
            if params.stagnation_window is not None and since_improved >= params.stagnation_window:
                break
    finally:
        if pool is not None:
            pool.shutdown()

    best_assignment = decode_position(best_pos, workload.m)
    return GsaRunResult(
        best_assignment=best_assignment,
        best_fitness=best_fit,
        best_metrics=metrics.evaluate(workload, best_assignment, fparams),
        history=history,
        iterations_run=t,
    )


def _best_of(swarm: Swarm) -> tuple[np.ndarray, float]:
    i = int(np.argmin(swarm.fitness))
    return swarm.positions[i].copy(), float(swarm.fitness[i])


def _record(t: int, global_best: float, swarm: Swarm) -> IterationRecord:
    return IterationRecord(
        iteration=t,
        global_best=global_best,
        population_best=float(swarm.fitness.min()),
        population_worst=float(swarm.fitness.max()),
        mass_sum=float(swarm.masses.sum()),
    )
