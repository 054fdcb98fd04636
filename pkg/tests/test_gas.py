import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gasearch import testbed
from gasearch.core import (
    MAXIMIZE, STABILITY_HALT, BoxDomain, EvalBudget, ObjectiveSpec, RngStream,
)
from gasearch.gas import (
    GasConfig, Swarm, TabuList, center_of_mass, clone_probability, clone_sources,
    compute_walker_flows, gas_init, gas_run, gas_step, jump_scale, memory_flow_and_clone,
    memory_insert, memory_insert_and_churn, perturb_position, perturb_positions, scale_values,
    squared_distance, walker_flow,
)

from gas_checks import INVARIANT_FUNCTIONS, check_state, snapshot, stepped_run

finite_values = arrays(np.float64, st.integers(2, 30),
                       elements=st.floats(-1e6, 1e6, allow_nan=False))


@given(finite_values)
def test_scaling_bounds_and_extremes(v):
    phi = scale_values(v)
    assert np.all((phi >= 0) & (phi <= 1))
    if v.min() < v.max():
        assert phi[np.argmin(v)] == 0.0 and phi[np.argmax(v)] == 1.0
    else:
        assert np.all(phi == 0)


@given(arrays(np.int64, st.integers(2, 30), elements=st.integers(-10**4, 10**4)),
       st.integers(1, 100), st.integers(-10**3, 10**3))
def test_scaling_keeps_argmin_under_affine_maps(v, a, b):
    # integer data keeps the affine map exact in floating point
    v = v.astype(float)
    assert np.argmin(scale_values(v)) == np.argmin(v)
    np.testing.assert_allclose(scale_values(a * v + b), scale_values(v), atol=1e-12)


def test_scaling_pins_non_finite_to_one():
    phi = scale_values([1.0, np.inf, 3.0, np.nan])
    np.testing.assert_array_equal(phi, [0, 1, 1, 1])


def test_flow_formula():
    assert walker_flow(1.0, 2.0, 3.0) == 4 * 2 * 3
    assert squared_distance([0, 0], [3, 4]) == 25


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_clone_probability_bounds(fi, fk):
    p = clone_probability(fi, fk)
    assert 0 <= p <= 1
    if fk > fi or fi == 0:
        assert p == 0


def test_clone_probability_examples():
    assert clone_probability(4.0, 1.0) == 0.75
    assert clone_probability(4.0, 0.0) == 1.0
    assert clone_probability(4.0, 4.0) == 0.0
    assert clone_probability(0.0, 0.0) == 0.0
    assert clone_probability(1.0, 2.0) == 0.0


@given(st.integers(2, 40), st.floats(0, 100), st.integers(0, 10**6))
def test_equal_flows_leave_swarm_unchanged(n, f, seed):
    src = clone_sources(np.full(n, f), RngStream(seed))
    np.testing.assert_array_equal(src, np.arange(n))


def test_zero_flow_walkers_always_clone_from_full():
    # p = 1 when the partner's flow is 0 and ours is positive
    src = clone_sources(np.array([5.0, 0.0]), RngStream(0))
    np.testing.assert_array_equal(src, [1, 1])


def test_walker_sitting_on_its_tabu_memory():
    x = np.array([[0.0, 0.0], [1.0, 0.0]])
    swarm = Swarm(x, np.array([0.0, 1.0]), np.array([0.0, 1.0]), np.zeros(2))
    tabu = TabuList(np.zeros((2, 2)), np.zeros(2), np.zeros(2))
    flows = compute_walker_flows(swarm, tabu, RngStream(0))
    # walker 0 equals every memory, so delta^2 is replaced by 1
    np.testing.assert_allclose(flows, [1 * 1 * 1, 4 * 1 * 1])


def test_jump_scale_ranges():
    assert jump_scale(0.0) == 1e-5 and jump_scale(1.0) == pytest.approx(1e-1)
    assert jump_scale(0.0, MAXIMIZE) == pytest.approx(1e-1)
    assert jump_scale(1.0, MAXIMIZE) == pytest.approx(1e-5)


def test_center_of_mass_weights_and_fallback():
    x = np.array([[0.0, 0.0], [2.0, 4.0]])
    box = BoxDomain.cube(-5, 5, 2)
    sw = Swarm(x, np.zeros(2), np.array([0.0, 1.0]), np.zeros(2))
    np.testing.assert_array_equal(center_of_mass(sw, box), [2, 4])
    sw = Swarm(x, np.zeros(2), np.zeros(2), np.zeros(2))
    np.testing.assert_array_equal(center_of_mass(sw, box), [1, 2])


@given(st.integers(0, 10**6), st.floats(0, 1))
@settings(max_examples=50)
def test_perturbation_stays_inside(seed, phi):
    box = BoxDomain([0.0, -1.0], [1.0, 0.0])
    x = np.array([0.0, 0.0])  # on a corner: about 3/4 of draws leave the box
    y = perturb_position(x, phi, box, "minimize", RngStream(seed))
    assert box.contains(y)


def test_perturbation_scale_follows_phi():
    box = BoxDomain.cube(-1e6, 1e6, 1)
    x = np.zeros((4000, 1))
    for phi, sigma in ((0.0, 1e-5), (0.5, 1e-3), (1.0, 1e-1)):
        y = perturb_positions(x, np.full(4000, phi), box, "minimize", RngStream(1))
        assert np.std(y) / 2e6 == pytest.approx(sigma, rel=0.05)


def test_memory_insert_overwrites_one_slot():
    tabu = TabuList(np.zeros((5, 2)), np.zeros(5), np.zeros(5))
    new = memory_insert(tabu, np.array([1.0, 1.0]), -1.0, RngStream(2))
    assert (new.values == -1.0).sum() == 1
    assert np.all(tabu.values == 0)  # the input is untouched


def test_tabu_churn_on_identical_memories_is_identity():
    tabu = TabuList(np.ones((6, 3)), np.full(6, 2.0), np.zeros(6))
    out = memory_flow_and_clone(tabu, RngStream(4))
    np.testing.assert_array_equal(out.memories, tabu.memories)


@given(st.integers(0, 10**6), st.integers(2, 20))
@settings(max_examples=50)
def test_churn_keeps_size_and_members(seed, n):
    rng = RngStream(seed)
    mem = rng.uniform(size=(n, 2))
    tabu = TabuList(mem, rng.uniform(size=n), np.zeros(n))
    out = memory_insert_and_churn(tabu, np.array([0.5, 0.5]), -1.0, rng)
    assert len(out) == n
    allowed = {tuple(r) for r in mem} | {(0.5, 0.5)}
    assert all(tuple(r) in allowed for r in out.memories)


# --------------------------------------------------------------------------
# whole-loop invariants
# --------------------------------------------------------------------------

@pytest.mark.parametrize("name", INVARIANT_FUNCTIONS)
def test_loop_invariants(name):
    spec = testbed.get(name)
    last = np.inf
    for state, budget in stepped_run(name, seed=3, steps=40):
        last = check_state(state, spec, 12, last)


@given(st.sampled_from(INVARIANT_FUNCTIONS), st.integers(0, 2**40))
@settings(max_examples=15, deadline=None)
def test_loop_invariants_any_seed(name, seed):
    spec = testbed.get(name)
    last = np.inf
    for state, _ in stepped_run(name, seed, steps=5, n_walkers=6):
        last = check_state(state, spec, 6, last)


def test_seeded_replay_is_bit_exact():
    a = [snapshot(s, b) for s, b in stepped_run("eggholder", 9, 15)]
    b = [snapshot(s, b) for s, b in stepped_run("eggholder", 9, 15)]
    for x, y in zip(a, b):
        for u, v in zip(x, y):
            np.testing.assert_array_equal(u, v)
    c = [snapshot(s, b) for s, b in stepped_run("eggholder", 10, 15)]
    assert not np.array_equal(a[-1][0], c[-1][0])


def test_run_is_deterministic():
    spec = testbed.get("ackley")
    t1 = gas_run(spec, budget=EvalBudget(limit=3000), rng=RngStream(5))
    t2 = gas_run(spec, budget=EvalBudget(limit=3000), rng=RngStream(5))
    assert t1.same_as(t2)


def test_sphere_solved_quickly():
    spec = testbed.get("sphere")
    trace = gas_run(spec, budget=EvalBudget(limit=10**4), rng=RngStream(1),
                    target=spec.known_min_value)
    assert trace.solved and trace.solved_at_reads <= 10**4


def test_stability_halt_without_target():
    spec = testbed.get("booth")
    trace = gas_run(spec, GasConfig(n_walkers=10, stability_window=5),
                    EvalBudget(limit=10**6), RngStream(0))
    assert trace.status == STABILITY_HALT
    assert trace.reads_used < 10**6


@pytest.mark.parametrize("limit", [1, 5, 12, 13, 40, 200])
def test_tiny_budgets_never_overspend(limit):
    spec = testbed.get("rastrigin5")
    budget = EvalBudget(limit=limit)
    trace = gas_run(spec, GasConfig(n_walkers=12), budget, RngStream(0), target=0.0)
    assert trace.reads_used == limit
    assert trace.status == "budget_exhausted"
    assert trace.samples and trace.samples[-1][0] <= limit


def test_maximization_finds_the_peak():
    box = BoxDomain.cube(-2, 2, 2)
    spec = ObjectiveSpec("bump", 2, lambda x: float(3 - np.sum((x - 0.5) ** 2)), box, 3.0,
                         gradient=lambda x: -2 * (x - 0.5), sense=MAXIMIZE)
    trace = gas_run(spec, GasConfig(n_walkers=8), EvalBudget(limit=5000), RngStream(0),
                    target=3.0)
    assert trace.solved
    assert trace.best_value == pytest.approx(3.0, abs=1e-6)
    np.testing.assert_allclose(trace.best_position, [0.5, 0.5], atol=1e-3)


def test_max_loops_and_state_api():
    spec = testbed.get("ackley")
    budget = EvalBudget(limit=10**5)
    state = gas_init(spec, GasConfig(n_walkers=5), budget, RngStream(0))
    gas_step(state, spec, budget)
    assert state.loop == 1
    trace = gas_run(spec, GasConfig(n_walkers=5), EvalBudget(limit=10**5), RngStream(0),
                    max_loops=3)
    assert trace.reads_used < 10**5


def test_config_validation():
    with pytest.raises(ValueError):
        GasConfig(n_walkers=1)
    with pytest.raises(ValueError):
        GasConfig(sense="sideways")
