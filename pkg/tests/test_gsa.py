import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsasched import gsa, metrics, oracle
from gsasched.gsa import GsaParams, Swarm
from gsasched.metrics import FitnessParams
from gsasched.model import Workload, decode_position

from conftest import random_small_workload, ref_best_fitness


class ConstRng:
    """Stand-in random stream that always returns the same value."""

    def __init__(self, value: float = 1.0) -> None:
        self.value = value

    def random(self, shape):
        return np.full(shape, self.value)


def test_init_population_shape_and_range():
    w = Workload.from_arrays(np.arange(1, 11), np.ones(10), np.full(4, 10.0))
    swarm = gsa.init_population(GsaParams(population_size=30, seed=3), w)
    assert swarm.positions.shape == (30, 10)
    assert swarm.positions.min() >= 0 and swarm.positions.max() <= 3
    assert not swarm.velocities.any()
    assert len(swarm.agents) == 30
    agent = swarm.agent(0)
    assert agent.position.shape == agent.velocity.shape == (10,)


def test_init_population_is_deterministic():
    w = Workload.from_arrays(np.arange(1, 11), np.ones(10), np.full(4, 10.0))
    a = gsa.init_population(GsaParams(seed=11), w)
    b = gsa.init_population(GsaParams(seed=11), w)
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.fitness, b.fitness)


def test_init_population_single_vm_degenerate():
    w = Workload.from_arrays([3, 5, 7], [1, 1, 1], [10])
    swarm = gsa.init_population(GsaParams(seed=0), w)
    assert not decode_position(swarm.positions, 1).any()
    assert np.all(swarm.fitness == swarm.fitness[0])


def test_fitness_of_agents_matches_decoded_assignment(wa):
    p = FitnessParams.default_for(wa)
    swarm = gsa.init_population(GsaParams(seed=5), wa, p)
    for pos, f in zip(swarm.positions, swarm.fitness):
        assert f == metrics.fitness(wa, decode_position(pos, wa.m), p)


def test_power_schedule_example():
    p = GsaParams(g0=100, alpha=100, phi=-0.5, max_iters=200)
    assert gsa.gravitational_constant(25, p) == pytest.approx(200.0, rel=1e-15)
    assert gsa.gravitational_constant(100, p) == 100.0


def test_exponential_schedule_example():
    p = GsaParams(g0=100, phi=-20, max_iters=50, g_schedule="exponential")
    assert gsa.gravitational_constant(50, p) == pytest.approx(100 * math.exp(-20), rel=1e-15)
    assert gsa.gravitational_constant(50, p) == pytest.approx(2.06e-7, rel=1e-2)


def test_default_schedule_decays_to_g0():
    p = GsaParams(max_iters=150)
    g = [gsa.gravitational_constant(t, p) for t in range(1, 151)]
    assert all(a > b for a, b in zip(g, g[1:]))
    assert g[-1] == pytest.approx(p.g0)


def test_gravitational_constant_rejects_t0():
    with pytest.raises(ValueError):
        gsa.gravitational_constant(0, GsaParams())


def test_masses_example():
    masses = gsa.compute_masses([2, 4, 6], 1e-6)
    expected = np.array([1 + 1e-6, 0.5 + 1e-6, 1e-6]) / (1.5 + 3e-6)
    assert np.allclose(masses, expected, rtol=1e-12)
    # printed values, compared at their printed precision
    assert masses[:2] == pytest.approx([0.66667, 0.33333], abs=5e-6)
    assert masses[2] == pytest.approx(6.7e-7, abs=5e-9)


def test_masses_degenerate_equal_fitness():
    assert gsa.compute_masses([5, 5, 5], 1e-6).tolist() == [1 / 3] * 3


@given(st.lists(st.floats(0.01, 1e6), min_size=1, max_size=60), st.floats(1e-9, 1.0))
def test_masses_sum_to_one(fits, eps):
    masses = gsa.compute_masses(fits, eps)
    assert abs(masses.sum() - 1.0) <= 1e-12
    assert masses.min() >= 0 and masses.max() <= 1
    assert masses[int(np.argmin(fits))] == masses.max()


def test_two_agent_force_example():
    x = np.array([[0.0], [2.0]])
    f = gsa.total_forces(x, np.array([0.5, 0.5]), 1.0, 0.0, np.ones((2, 2)))
    assert f[:, 0].tolist() == [0.25, -0.25]


def test_coincident_agents_feel_no_force():
    x = np.array([[1.0, 2.0], [1.0, 2.0]])
    f = gsa.total_forces(x, np.array([0.5, 0.5]), 1.0, 1e-9, np.ones((2, 2)))
    assert not f.any()


def test_zero_mass_agents_annihilate_forces():
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 5, size=(4, 6))
    f = gsa.total_forces(x, np.array([1.0, 0.0, 0.0, 0.0]), 3.0, 1e-9, rng.random((4, 4)))
    assert not f.any()


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1))
def test_pairwise_forces_antisymmetric(seed):
    rng = np.random.default_rng(seed)
    s, n = int(rng.integers(2, 6)), int(rng.integers(1, 8))
    x = rng.uniform(0, 4, size=(s, n))
    masses = gsa.compute_masses(rng.uniform(1, 10, size=s), 1e-6)
    for i in range(s):
        for j in range(i + 1, s):
            sel = np.zeros((s, s))
            sel[i, j] = sel[j, i] = 1.0
            f = gsa.total_forces(x, masses, 2.5, 1e-9, sel)
            assert np.allclose(f[i], -f[j], rtol=1e-12, atol=1e-15)


def test_forces_match_explicit_double_sum():
    rng = np.random.default_rng(4)
    x = rng.uniform(0, 3, size=(5, 7))
    masses = gsa.compute_masses(rng.uniform(1, 2, size=5), 1e-6)
    rand = rng.random((5, 5))
    f = gsa.total_forces(x, masses, 7.0, 1e-9, rand)
    for i in range(5):
        expected = np.zeros(7)
        for j in range(5):
            if j != i:
                r = math.dist(x[i], x[j])
                expected += rand[i, j] * 7.0 * masses[i] * masses[j] / (r + 1e-9) * (x[j] - x[i])
        assert np.allclose(f[i], expected, rtol=1e-12)


def _swarm(positions, velocities, fitness):
    positions = np.asarray(positions, dtype=float)
    return Swarm(positions, np.asarray(velocities, dtype=float), np.asarray(fitness, dtype=float),
                 gsa.compute_masses(fitness, 1e-6))


def test_step_fixed_point_without_force():
    w = Workload.from_arrays([1, 2, 3], [1, 1, 1], [5, 5])
    p = FitnessParams.default_for(w)
    pos = np.array([[0.2, 0.9, 0.4]] * 3)
    fit = metrics.population_fitness(w, decode_position(pos, 2), p)
    swarm = _swarm(pos, np.zeros_like(pos), fit)
    out = gsa.step(swarm, 1, GsaParams(seed=0), w, p)
    assert np.array_equal(out.positions, pos)
    assert np.array_equal(out.fitness, fit)


def test_step_clamps_velocity():
    w = Workload.from_arrays([1.0], [1.0], [1, 1, 1, 1, 1, 1, 1, 1, 1, 1])
    p = FitnessParams.default_for(w)
    swarm = _swarm([[1.0], [1.0]], [[3.2], [-3.2]], [1.0, 1.0])
    out = gsa.step(swarm, 1, GsaParams(v_max=0.5), w, p, rng=ConstRng(1.0))
    assert out.velocities[:, 0].tolist() == [0.5, -0.5]
    assert out.positions[:, 0].tolist() == [1.5, 0.5]


def test_step_clamps_position_at_upper_bound():
    w = Workload.from_arrays([4.0], [1.0], [1.0, 1.0])
    p = FitnessParams.default_for(w)
    # agent 1 sits at the top of the range and pulls agent 0 hard upward
    swarm = _swarm([[0.9], [1.0]], [[0.0], [0.0]], [2.0, 1.0])
    out = gsa.step(swarm, 1, GsaParams(v_max=10.0, g0=1000.0), w, p, rng=ConstRng(1.0))
    assert out.velocities[0, 0] > 0.1
    assert out.positions[0, 0] == 1.0
    assert decode_position(out.positions[0], 2).tolist() == [1]


def test_run_gsa_finds_wa_optimum(wa):
    p = FitnessParams.default_for(wa)
    res = gsa.run_gsa(wa, GsaParams(population_size=20, max_iters=200, seed=9), p)
    assert res.best_metrics.makespan == 6
    assert res.best_fitness == pytest.approx(ref_best_fitness(wa, p), rel=1e-12)
    assert res.best_fitness == pytest.approx(oracle.brute_force_optimum(wa, p).best_fitness, rel=1e-12)


@pytest.mark.parametrize("m", [1, 2, 5])
def test_single_task_closed_form(m):
    w = Workload.from_arrays([7.0], [3.0], [12.0] * m)
    p = FitnessParams(gamma=0.2, delta=0.5, eps1=1.0, eps2=1.0)
    res = gsa.run_gsa(w, GsaParams(max_iters=5, seed=1), p)
    assert res.best_fitness == pytest.approx((0.2 * 7 + 1) / (0.5 * 3 / 12 + 1))


def test_single_task_prefers_fastest_vm():
    w = Workload.from_arrays([8.0], [1.0], [10.0, 10.0, 10.0], [1.0, 4.0, 2.0])
    res = gsa.run_gsa(w, GsaParams(max_iters=20, seed=2))
    assert res.best_assignment.tolist() == [1]


def test_run_is_deterministic(wa):
    a = gsa.run_gsa(wa, GsaParams(seed=42, max_iters=30))
    b = gsa.run_gsa(wa, GsaParams(seed=42, max_iters=30))
    assert np.array_equal(a.best_assignment, b.best_assignment)
    assert a.best_fitness == b.best_fitness
    assert a.history == b.history


def test_worker_count_does_not_change_result():
    rng = np.random.default_rng(1)
    w = Workload.from_arrays(rng.uniform(1, 50, 60), rng.uniform(1, 9, 60), rng.uniform(8, 32, 6))
    one = gsa.run_gsa(w, GsaParams(seed=5, max_iters=25, workers=1))
    four = gsa.run_gsa(w, GsaParams(seed=5, max_iters=25, workers=4))
    assert np.array_equal(one.best_assignment, four.best_assignment)
    assert one.history == four.history


def test_invariants_hold_every_iteration():
    rng = np.random.default_rng(2)
    w = Workload.from_arrays(rng.uniform(1, 50, 40), rng.uniform(1, 9, 40), rng.uniform(8, 32, 5))
    params = GsaParams(seed=3, max_iters=60, v_max=1.5)
    seen = []

    def check(t, swarm):
        seen.append(t)
        assert abs(swarm.masses.sum() - 1.0) <= 1e-12
        assert swarm.positions.min() >= 0 and swarm.positions.max() <= w.m - 1
        assert np.abs(swarm.velocities).max() <= 1.5

    res = gsa.run_gsa(w, params, callback=check)
    assert seen == list(range(61))
    series = res.best_series
    assert all(b <= a for a, b in zip(series, series[1:]))
    assert res.best_fitness == series[-1]


def test_stagnation_stops_early():
    w = Workload.from_arrays([1.0, 1.0], [1.0, 1.0], [1.0])  # single VM: nothing to improve
    res = gsa.run_gsa(w, GsaParams(seed=0, max_iters=100, stagnation_window=5))
    assert res.iterations_run == 5
    assert len(res.history) == 6


@pytest.mark.parametrize("kw", [dict(population_size=1), dict(g0=0), dict(max_iters=0), dict(v_max=-1.0)])
def test_params_validated(kw):
    with pytest.raises(ValueError):
        GsaParams(**kw)


def test_desk_scale_oracle_optimality():
    """Within 5% of the exhaustive optimum on at least 90% of seeds."""
    rng = np.random.default_rng(2024)
    w = random_small_workload(rng, max_n=8, max_m=3)
    while w.m ** w.n < 100:
        w = random_small_workload(rng, max_n=8, max_m=3)
    p = FitnessParams.default_for(w)
    best = oracle.brute_force_optimum(w, p).best_fitness
    hits = sum(
        gsa.run_gsa(w, GsaParams(population_size=30, max_iters=300, seed=s), p).best_fitness
        <= 1.05 * best
        for s in range(20)
    )
    assert hits >= 18
