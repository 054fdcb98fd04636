"""GAS: a walker swarm with flow-driven cloning, a tabu list of local minima
that clones within itself, local-search injection and fitness-scaled jumps.

One loop of :func:`gas_step`:

1. every walker gets a flow from its scaled value, the squared distance to a
   random partner walker and to a random tabu memory; walkers then clone
   lower-flow walkers with probability ``(F_i - F_k) / F_i``;
2. local searches start from the phi-weighted centre of mass and from the
   best walker; both minima enter the tabu list (each followed by the tabu
   flow-and-clone routine) and the best record is refreshed;
3. walkers jump with Gaussian steps of scale ``10**-(5 - 4 phi)`` times the
   box length, halving the scale until the move lands inside the box.
"""

from __future__ import annotations

import dataclasses
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    BUDGET_EXHAUSTED, MAXIMIZE, MINIMIZE, SOLVED, STABILITY_HALT, BoxDomain, BudgetExhausted,
    EvalBudget, ObjectiveSpec, RngStream, RunTrace, TraceRecorder, counted_evaluate_many,
)
from .local_search import LocalSearchOptions, minimize_bounded, project


@dataclass(frozen=True)
class GasConfig:
    n_walkers: int = 50
    stability_window: int = 50
    stability_precision: float = 1e-6
    # None follows the objective's own sense
    sense: Optional[str] = None
    local_opts: LocalSearchOptions = field(default_factory=LocalSearchOptions)

    def __post_init__(self):
        if self.n_walkers < 2:
            raise ValueError("GAS needs at least two walkers")
        if self.stability_window < 1 or self.stability_precision <= 0:
            raise ValueError("stability window and precision must be positive")
        if self.sense not in (None, MINIMIZE, MAXIMIZE):
            raise ValueError(f"unknown sense {self.sense!r}")


@dataclass
class Swarm:
    positions: np.ndarray
    values: np.ndarray
    phis: np.ndarray
    flows: np.ndarray

    def take(self, idx) -> "Swarm":
        return Swarm(self.positions[idx], self.values[idx], self.phis[idx], self.flows[idx])

    def __len__(self):
        return len(self.values)


@dataclass
class TabuList:
    memories: np.ndarray
    values: np.ndarray
    flows: np.ndarray

    def __len__(self):
        return len(self.values)


@dataclass
class BestRecord:
    position: np.ndarray
    value: float
    history: deque


@dataclass
class GasState:
    swarm: Swarm
    tabu: TabuList
    best: BestRecord
    config: GasConfig
    sense: str
    streams: dict
    recorder: Optional[TraceRecorder] = None
    loop: int = 0
    status: Optional[str] = None


# --------------------------------------------------------------------------
# Elementary formulas
# --------------------------------------------------------------------------

def scale_values(values) -> np.ndarray:
    """Min-max scaling onto [0, 1]; all zeros when the values are all equal.

    Non-finite entries (singular Lennard-Jones configurations) are pinned to
    1 and the finite ones are scaled among themselves.
    """
    v = np.asarray(values, dtype=float)
    finite = np.isfinite(v)
    phi = np.ones_like(v)
    if not finite.any():
        return np.zeros_like(v)
    fv = v[finite]
    lo, hi = fv.min(), fv.max()
    phi[finite] = (fv - lo) / (hi - lo) if hi > lo else 0.0
    return phi


def squared_distance(a, b):
    """Squared Euclidean distance along the last axis."""
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return np.einsum("...k,...k->...", diff, diff)


def walker_flow(phi, d2, delta2):
    return (np.asarray(phi) + 1.0) ** 2 * d2 * delta2


def tabu_flow(phi_t, d2):
    return (np.asarray(phi_t) + 1.0) ** 2 * d2


def clone_probability(f_self, f_other):
    """Probability that an entry with flow ``f_self`` copies one with ``f_other``."""
    f_self = np.asarray(f_self, dtype=float)
    f_other = np.asarray(f_other, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = np.where(f_self > 0, (f_self - f_other) / f_self, 0.0)
    p = np.where(f_other > f_self, 0.0, np.clip(ratio, 0.0, 1.0))
    return float(p) if p.ndim == 0 else p


def jump_scale(phi, sense: str = MINIMIZE):
    phi = np.asarray(phi, dtype=float)
    exponent = -(1.0 + 4.0 * phi) if sense == MAXIMIZE else -(5.0 - 4.0 * phi)
    out = 10.0 ** exponent
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# Walker flow and cloning
# --------------------------------------------------------------------------

def compute_walker_flows(swarm: Swarm, tabu: TabuList, rng: RngStream) -> np.ndarray:
    n = len(swarm)
    x = swarm.positions
    partner = rng.partners(n)
    memory = rng.integers(0, len(tabu), n)
    d2 = squared_distance(x, x[partner])
    t = tabu.memories[memory]
    delta2 = squared_distance(x, t)
    delta2[np.all(x == t, axis=1)] = 1.0
    return walker_flow(swarm.phis, d2, delta2)


def clone_sources(flows, rng: RngStream, partners=None) -> np.ndarray:
    """Index each entry copies its state from (itself when it does not clone).

    Decisions use the flows as given and are applied simultaneously.
    """
    flows = np.asarray(flows, dtype=float)
    n = flows.size
    k = rng.partners(n) if partners is None else np.asarray(partners)
    p = clone_probability(flows, flows[k])
    rho = rng.uniform(size=n)
    return np.where(rho < p, k, np.arange(n))


def flow_and_clone_pass(swarm: Swarm, tabu: TabuList, rng: RngStream) -> Swarm:
    flows = compute_walker_flows(swarm, tabu, rng)
    src = clone_sources(flows, rng)
    return Swarm(swarm.positions, swarm.values, swarm.phis, flows).take(src)


def center_of_mass(swarm: Swarm, domain: BoxDomain) -> np.ndarray:
    w = swarm.phis
    total = w.sum()
    if total > 0:
        cm = w @ swarm.positions / total
    else:
        cm = swarm.positions.mean(axis=0)
    return project(cm, domain)


def argmin_random_tie(values, rng: RngStream) -> int:
    values = np.asarray(values)
    ties = np.flatnonzero(values == values.min())
    return int(rng.choice(ties))


# --------------------------------------------------------------------------
# Position update
# --------------------------------------------------------------------------

def perturb_positions(positions, phis, domain: BoxDomain, sense: str, rng: RngStream) -> np.ndarray:
    """Gaussian jumps with per-walker std ``jump_scale(phi) * L``.

    A walker whose candidate leaves the box redraws its whole move with the
    scale halved, until it lands inside.
    """
    x = np.atleast_2d(np.asarray(positions, dtype=float))
    delta = np.atleast_1d(jump_scale(phis, sense)).astype(float).copy()
    out = x.copy()
    pending = np.arange(len(x))
    while pending.size:
        xi = rng.normal(1.0, size=(pending.size, x.shape[1])) * delta[pending, None]
        cand = x[pending] + domain.lengths * xi
        ok = domain.contains(cand)
        out[pending[ok]] = cand[ok]
        pending = pending[~ok]
        delta[pending] *= 0.5
    return out


def perturb_position(x, phi, domain: BoxDomain, sense: str, rng: RngStream) -> np.ndarray:
    return perturb_positions(np.asarray(x, dtype=float)[None, :], [phi], domain, sense, rng)[0]


# --------------------------------------------------------------------------
# Tabu memory
# --------------------------------------------------------------------------

def memory_insert(tabu: TabuList, t_new, t_value: float, rng: RngStream) -> TabuList:
    """Overwrite a uniformly chosen slot with ``t_new``."""
    slot = int(rng.integers(len(tabu)))
    memories = tabu.memories.copy()
    values = tabu.values.copy()
    flows = tabu.flows.copy()
    memories[slot] = t_new
    values[slot] = t_value
    return TabuList(memories, values, flows)


def memory_flow_and_clone(tabu: TabuList, rng: RngStream) -> TabuList:
    n = len(tabu)
    phi = scale_values(tabu.values)
    partner = rng.partners(n)
    d2 = squared_distance(tabu.memories, tabu.memories[partner])
    flows = tabu_flow(phi, d2)
    src = clone_sources(flows, rng, partners=partner)
    return TabuList(tabu.memories[src], tabu.values[src], flows[src])


def memory_insert_and_churn(tabu: TabuList, t_new, t_value: float, rng: RngStream) -> TabuList:
    return memory_flow_and_clone(memory_insert(tabu, t_new, t_value, rng), rng)


# --------------------------------------------------------------------------
# Driver
# --------------------------------------------------------------------------

def _jump_phis(values, sense):
    # the jump formula for maximization expects phi of the original objective
    return scale_values(-values) if sense == MAXIMIZE else scale_values(values)


def _minimization_view(spec: ObjectiveSpec, config: GasConfig):
    sense = config.sense or spec.sense
    if sense != spec.sense:
        spec = dataclasses.replace(spec, sense=sense)
    return spec, spec.as_minimization(), sense


def gas_init(spec: ObjectiveSpec, config: GasConfig, budget: EvalBudget, rng: RngStream,
             target: Optional[float] = None, recorder: Optional[TraceRecorder] = None) -> GasState:
    """Initialization: random swarm, local search from the best walker, tabu fill."""
    original, spec, sense = _minimization_view(spec, config)
    streams = {name: rng.child(name) for name in ("init", "walkers", "local", "tabu", "moves")}
    if recorder is None:
        recorder = TraceRecorder("gas", original, rng.seed, budget, target=target,
                                 config=config_snapshot(config))
    n = config.n_walkers
    positions = spec.domain.sample(streams["init"], n)
    reads = budget.counter
    try:
        values = counted_evaluate_many(spec, positions, budget)
    except BudgetExhausted as exc:
        recorder.offer_many(exc.values, positions, reads)
        raise
    recorder.offer_many(values, positions, reads)
    phis = scale_values(values)
    i_min = argmin_random_tie(phis, streams["init"])
    # evaluating x_min again inside the local search is charged like any read
    res = minimize_bounded(spec, positions[i_min], config.local_opts, budget, streams["local"])
    if not res.value <= values[i_min]:
        res.x, res.value = positions[i_min].copy(), float(values[i_min])
    swarm = Swarm(positions, values, phis, np.zeros(n))
    tabu = TabuList(np.tile(res.x, (n, 1)), np.full(n, res.value), np.zeros(n))
    best = BestRecord(res.x.copy(), res.value, deque(maxlen=config.stability_window))
    recorder.offer(res.value, res.x)
    state = GasState(swarm, tabu, best, config, sense, streams, recorder)
    if recorder.solved:
        state.status = SOLVED
    if budget.exhausted:
        raise BudgetExhausted()
    return state


def gas_step(state: GasState, spec: ObjectiveSpec, budget: EvalBudget) -> GasState:
    """One search loop. Sets ``state.status`` when a halt criterion fires.

    ``spec`` is the objective as given to :func:`gas_init`.
    """
    _, spec, _ = _minimization_view(spec, state.config)
    cfg = state.config
    walk, local, tabu_rng = state.streams["walkers"], state.streams["local"], state.streams["tabu"]

    # Step 1
    swarm = flow_and_clone_pass(state.swarm, state.tabu, walk)

    # Step 2
    x_cm = center_of_mass(swarm, spec.domain)
    if state.loop == 0:
        x_min = state.best.position
    else:
        x_min = swarm.positions[argmin_random_tie(swarm.phis, walk)]
    found = []
    for start in (x_cm, x_min):
        if budget.exhausted:
            break
        try:
            found.append(minimize_bounded(spec, start, cfg.local_opts, budget, local))
        except BudgetExhausted:
            break
    tabu = state.tabu
    for res in found:
        tabu = memory_insert_and_churn(tabu, res.x, res.value, tabu_rng)
    state.swarm, state.tabu = swarm, tabu

    r = int(np.argmin(tabu.values))
    best = state.best
    previous = list(best.history)
    if tabu.values[r] < best.value:
        best.position, best.value = tabu.memories[r].copy(), float(tabu.values[r])
    best.history.append(best.value)
    recorder = state.recorder
    if recorder is not None and recorder.offer(best.value, best.position):
        state.status = SOLVED
    state.loop += 1
    if budget.exhausted:
        raise BudgetExhausted()
    if state.status is not None:
        return state

    # Halt criterion (only without a target value)
    if (recorder is None or recorder.target is None) and len(previous) >= cfg.stability_window:
        if abs(best.value - np.mean(previous)) < cfg.stability_precision:
            state.status = STABILITY_HALT
            return state

    # Step 3
    moves = perturb_positions(swarm.positions, _jump_phis(swarm.values, state.sense),
                              spec.domain, state.sense, state.streams["moves"])
    try:
        values = counted_evaluate_many(spec, moves, budget)
    except BudgetExhausted as exc:
        k = exc.values.size
        swarm.positions[:k] = moves[:k]
        swarm.values[:k] = exc.values
        swarm.phis = scale_values(swarm.values)
        raise
    state.swarm = Swarm(moves, values, scale_values(values), swarm.flows)
    return state


def config_snapshot(config) -> dict:
    return dataclasses.asdict(config)


def gas_run(spec: ObjectiveSpec, config: Optional[GasConfig] = None,
            budget: Optional[EvalBudget] = None, rng: Optional[RngStream] = None,
            target: Optional[float] = None, max_loops: Optional[int] = None) -> RunTrace:
    """Run GAS until the target is hit, the budget runs out or BEST stabilizes.

    With a ``target`` the stability halt is disabled, as in benchmark mode.
    """
    config = config or GasConfig()
    budget = budget or EvalBudget(limit=10**6)
    rng = rng or RngStream(0)
    original, _, _ = _minimization_view(spec, config)
    recorder = TraceRecorder("gas", original, rng.seed, budget, target=target,
                             config=config_snapshot(config))
    state = None
    try:
        state = gas_init(spec, config, budget, rng, target, recorder)
        while state.status is None:
            if max_loops is not None and state.loop >= max_loops:
                break
            gas_step(state, spec, budget)
    except BudgetExhausted:
        pass
    status = state.status if state is not None else None
    return recorder.finish(status or BUDGET_EXHAUSTED)
