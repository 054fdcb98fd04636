"""Comparison solvers: Basin Hopping, Cuckoo Search with a periodic local
search, and Differential Evolution (best/1/bin).

All three share GAS's run contract: an objective, a read budget, a seeded
stream and an optional target; they return a :class:`~gasearch.core.RunTrace`.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    BUDGET_EXHAUSTED, BudgetExhausted, EvalBudget, ObjectiveSpec, RngStream, RunTrace,
    TraceRecorder, counted_evaluate_many,
)
from .local_search import LocalSearchOptions, minimize_bounded, project


# --------------------------------------------------------------------------
# Basin Hopping
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BhConfig:
    step_size: float = 0.25
    temperature: float = 1.0
    local_opts: LocalSearchOptions = field(default_factory=LocalSearchOptions)
    adaptive_interval: int = 50
    target_accept_rate: float = 0.5
    step_factor: float = 0.9

    def __post_init__(self):
        if not 0 < self.step_size <= 1:
            raise ValueError("step_size must lie in (0, 1]")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.adaptive_interval < 1:
            raise ValueError("adaptive_interval must be positive")


def metropolis_accept(f_old: float, f_new: float, temperature: float, rng: RngStream) -> bool:
    if not np.isfinite(f_new):
        return False
    if f_new <= f_old:
        return True
    if temperature <= 0:
        return False
    return bool(rng.uniform() < math.exp(-(f_new - f_old) / temperature))


def adapt_step(step: float, accept_rate: float, config: BhConfig) -> float:
    """Grow the step when too many hops are accepted, shrink it otherwise."""
    if accept_rate > config.target_accept_rate:
        return min(1.0, step / config.step_factor)
    return step * config.step_factor


def bh_run(spec: ObjectiveSpec, config: Optional[BhConfig] = None,
           budget: Optional[EvalBudget] = None, rng: Optional[RngStream] = None,
           target: Optional[float] = None) -> RunTrace:
    """Perturb the incumbent, minimize locally, accept by the Metropolis rule.

    Every ``adaptive_interval`` hops the step size is nudged towards the
    target acceptance rate.
    """
    config = config or BhConfig()
    budget = budget or EvalBudget(limit=10**6)
    rng = rng or RngStream(0)
    recorder = TraceRecorder("bh", spec, rng.seed, budget, target=target,
                             config=dataclasses.asdict(config))
    spec = spec.as_minimization()
    domain = spec.domain
    init, steps, accept, local = (rng.child(n) for n in ("init", "steps", "accept", "local"))
    step = config.step_size
    try:
        res = minimize_bounded(spec, domain.sample(init), config.local_opts, budget, local)
        x, f = res.x, res.value
        recorder.offer(f, x)
        hops = accepted = 0
        while not recorder.solved:
            jump = (2 * steps.uniform(size=domain.dimension) - 1) * step * domain.lengths
            trial = project(x + jump, domain)
            res = minimize_bounded(spec, trial, config.local_opts, budget, local)
            recorder.offer(res.value, res.x)
            if metropolis_accept(f, res.value, config.temperature, accept):
                x, f = res.x, res.value
                accepted += 1
            hops += 1
            if hops % config.adaptive_interval == 0:
                step = adapt_step(step, accepted / config.adaptive_interval, config)
                accepted = 0
    except BudgetExhausted:
        pass
    return recorder.finish(BUDGET_EXHAUSTED)


# --------------------------------------------------------------------------
# Cuckoo Search
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CsConfig:
    n_nests: int = 25
    pa: float = 0.25
    levy_beta: float = 1.5
    levy_scale: float = 0.01
    local_search_period: int = 100
    local_opts: LocalSearchOptions = field(default_factory=LocalSearchOptions)

    def __post_init__(self):
        if self.n_nests < 2:
            raise ValueError("n_nests must be at least 2")
        if not 0 <= self.pa <= 1:
            raise ValueError("pa must lie in [0, 1]")
        if not 1 < self.levy_beta <= 2:
            raise ValueError("levy_beta must lie in (1, 2]")
        if self.levy_scale <= 0 or self.local_search_period < 1:
            raise ValueError("levy_scale and local_search_period must be positive")


def mantegna_sigma(beta: float) -> float:
    num = math.gamma(1 + beta) * math.sin(math.pi * beta / 2)
    den = math.gamma((1 + beta) / 2) * beta * 2 ** ((beta - 1) / 2)
    return (num / den) ** (1 / beta)


def levy_step(rng: RngStream, beta: float, d) -> np.ndarray:
    """Heavy-tailed step of shape ``d`` by Mantegna's algorithm.

    At ``beta == 2`` Mantegna's scale collapses to zero; the stable law there
    is Gaussian with variance 2, which is returned instead.
    """
    if not 1 < beta <= 2:
        raise ValueError("beta must lie in (1, 2]")
    if beta == 2:
        return rng.normal(math.sqrt(2.0), size=d)
    u = rng.normal(mantegna_sigma(beta), size=d)
    v = np.abs(rng.normal(1.0, size=d))
    v = np.where(v == 0, np.finfo(float).tiny, v)
    return u / v ** (1 / beta)


def cs_run(spec: ObjectiveSpec, config: Optional[CsConfig] = None,
           budget: Optional[EvalBudget] = None, rng: Optional[RngStream] = None,
           target: Optional[float] = None) -> RunTrace:
    """Cuckoo Search with a local search from the best nest every
    ``local_search_period`` loops."""
    config = config or CsConfig()
    budget = budget or EvalBudget(limit=10**6)
    rng = rng or RngStream(0)
    recorder = TraceRecorder("cs", spec, rng.seed, budget, target=target,
                             config=dataclasses.asdict(config))
    spec = spec.as_minimization()
    domain = spec.domain
    init, flights, pick, abandon, local = (
        rng.child(n) for n in ("init", "flights", "pick", "abandon", "local"))
    n, d = config.n_nests, domain.dimension
    n_abandon = int(round(config.pa * n))
    try:
        nests = domain.sample(init, n)
        reads = budget.counter
        try:
            fit = counted_evaluate_many(spec, nests, budget)
        except BudgetExhausted as exc:
            recorder.offer_many(exc.values, nests, reads)
            raise
        recorder.offer_many(fit, nests, reads)
        loop = 0
        while not recorder.solved:
            loop += 1
            steps = config.levy_scale * domain.lengths * levy_step(flights, config.levy_beta, (n, d))
            cand = project(nests + steps, domain)
            reads = budget.counter
            try:
                vals = counted_evaluate_many(spec, cand, budget)
            except BudgetExhausted as exc:
                recorder.offer_many(exc.values, cand, reads)
                raise
            if recorder.offer_many(vals, cand, reads):
                break
            rivals = pick.integers(0, n, n)
            for i, j in enumerate(rivals):
                if vals[i] < fit[j]:
                    nests[j] = cand[i]
                    fit[j] = vals[i]

            if n_abandon:
                worst = np.argsort(fit, kind="stable")[n - n_abandon:]
                fresh = domain.sample(abandon, n_abandon)
                reads = budget.counter
                try:
                    fresh_vals = counted_evaluate_many(spec, fresh, budget)
                except BudgetExhausted as exc:
                    recorder.offer_many(exc.values, fresh, reads)
                    raise
                nests[worst] = fresh
                fit[worst] = fresh_vals
                if recorder.offer_many(fresh_vals, fresh, reads):
                    break

            if loop % config.local_search_period == 0:
                b = int(np.argmin(fit))
                res = minimize_bounded(spec, nests[b], config.local_opts, budget, local)
                recorder.offer(res.value, res.x)
                if res.value < fit[b]:
                    nests[b], fit[b] = res.x, res.value
    except BudgetExhausted:
        pass
    return recorder.finish(BUDGET_EXHAUSTED)


# --------------------------------------------------------------------------
# Differential Evolution
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DeConfig:
    pop_multiplier: int = 15
    min_population: int = 20
    strategy: str = "best1bin"
    mutation_range: tuple = (0.5, 1.0)
    crossover_rate: float = 0.7

    def __post_init__(self):
        if self.strategy != "best1bin":
            raise ValueError("only the best1bin strategy is implemented")
        lo, hi = self.mutation_range
        if not 0 <= lo <= hi:
            raise ValueError("mutation_range must satisfy 0 <= low <= high")
        if not 0 <= self.crossover_rate <= 1:
            raise ValueError("crossover_rate must lie in [0, 1]")

    def population(self, dimension: int) -> int:
        size = max(self.min_population, self.pop_multiplier * dimension)
        if size < 4:
            raise ValueError("population must hold at least 4 members")
        return size


def binomial_crossover(target, donor, crossover_rate: float, rng: RngStream):
    """Mix rows of ``target`` and ``donor``; one random coordinate per row
    always comes from the donor."""
    target = np.atleast_2d(target)
    donor = np.atleast_2d(donor)
    n, d = target.shape
    mask = rng.uniform(size=(n, d)) < crossover_rate
    mask[np.arange(n), rng.integers(0, d, n)] = True
    return np.where(mask, donor, target)


def _two_distinct_others(n: int, rng: RngStream):
    idx = np.arange(n)
    off_a = rng.integers(1, n, n)
    off_b = rng.integers(1, n - 1, n)
    off_b = np.where(off_b >= off_a, off_b + 1, off_b)
    return (idx + off_a) % n, (idx + off_b) % n


def de_run(spec: ObjectiveSpec, config: Optional[DeConfig] = None,
           budget: Optional[EvalBudget] = None, rng: Optional[RngStream] = None,
           target: Optional[float] = None) -> RunTrace:
    """Generational DE: donors ``best + F (x_a - x_b)`` with ``F`` dithered once
    per generation, projected into the box, binomial crossover, greedy
    replacement."""
    config = config or DeConfig()
    budget = budget or EvalBudget(limit=10**6)
    rng = rng or RngStream(0)
    recorder = TraceRecorder("de", spec, rng.seed, budget, target=target,
                             config=dataclasses.asdict(config))
    spec = spec.as_minimization()
    domain = spec.domain
    n = config.population(domain.dimension)
    init, mutate, cross = (rng.child(k) for k in ("init", "mutate", "cross"))
    lo, hi = config.mutation_range
    try:
        pop = domain.sample(init, n)
        reads = budget.counter
        try:
            fit = counted_evaluate_many(spec, pop, budget)
        except BudgetExhausted as exc:
            recorder.offer_many(exc.values, pop, reads)
            raise
        recorder.offer_many(fit, pop, reads)
        while not recorder.solved:
            pop, fit = de_generation(spec, pop, fit, config, budget, mutate, cross, recorder,
                                     lo + (hi - lo) * mutate.uniform())
    except BudgetExhausted:
        pass
    return recorder.finish(BUDGET_EXHAUSTED)


def de_generation(spec, pop, fit, config: DeConfig, budget, mutate: RngStream,
                  cross: RngStream, recorder=None, scale: float = 0.5):
    """One generation; returns the new ``(population, values)``."""
    n = len(pop)
    a, b = _two_distinct_others(n, mutate)
    best = pop[int(np.argmin(fit))]
    donors = project(best + scale * (pop[a] - pop[b]), spec.domain)
    trials = binomial_crossover(pop, donors, config.crossover_rate, cross)
    reads = budget.counter
    try:
        vals = counted_evaluate_many(spec, trials, budget)
    except BudgetExhausted as exc:
        if recorder is not None:
            recorder.offer_many(exc.values, trials, reads)
        raise
    if recorder is not None:
        recorder.offer_many(vals, trials, reads)
    keep = vals <= fit
    pop = np.where(keep[:, None], trials, pop)
    fit = np.where(keep, vals, fit)
    return pop, fit
