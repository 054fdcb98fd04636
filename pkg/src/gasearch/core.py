"""Shared types for every solver: search boxes, objectives, read accounting,
seeded random streams and run traces."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

Array = np.ndarray

MINIMIZE = "minimize"
MAXIMIZE = "maximize"

SOLVED = "solved"
BUDGET_EXHAUSTED = "budget_exhausted"
STABILITY_HALT = "stability_halt"

_MASK64 = (1 << 64) - 1


class GasearchError(Exception):
    """Base class for package errors."""


class BudgetExhausted(GasearchError):
    """Raised when an evaluation is requested after the read limit is reached.

    ``values`` holds whatever a batch evaluation managed to compute before
    running out, so callers can still use the partial results.
    """

    def __init__(self, message="function-read budget exhausted", values=None):
        super().__init__(message)
        self.values = np.empty(0) if values is None else np.asarray(values, float)


class OutOfDomain(GasearchError, ValueError):
    pass


class UnknownFunction(GasearchError, KeyError):
    pass


class UnknownAlgorithm(GasearchError, KeyError):
    pass


class IncompleteData(GasearchError):
    pass


@dataclass(frozen=True, eq=False)
class BoxDomain:
    """Axis-aligned compact box ``[lower, upper]``."""

    lower: Array
    upper: Array

    def __post_init__(self):
        lower = np.array(self.lower, dtype=float).reshape(-1)
        upper = np.array(self.upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape or lower.size == 0:
            raise ValueError("lower and upper must be non-empty and of equal length")
        if not np.all(np.isfinite(lower)) or not np.all(np.isfinite(upper)):
            raise ValueError("box bounds must be finite")
        if np.any(lower >= upper):
            raise ValueError("every lower bound must be strictly below its upper bound")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        lengths = upper - lower
        lengths.flags.writeable = False
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def cube(cls, low: float, high: float, dimension: int) -> "BoxDomain":
        return cls(np.full(dimension, low), np.full(dimension, high))

    @property
    def dimension(self) -> int:
        return self.lower.size

    def contains(self, x) -> bool | Array:
        """Componentwise membership; rows of a 2-D array are tested separately."""
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lower) & (x <= self.upper)
        return np.all(inside, axis=-1)

    def sample(self, rng: "RngStream", n: Optional[int] = None) -> Array:
        shape = (self.dimension,) if n is None else (n, self.dimension)
        u = rng.uniform(size=shape)
        return np.minimum(self.lower + u * self.lengths, self.upper)

    def __eq__(self, other):
        if not isinstance(other, BoxDomain):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))


@dataclass(frozen=True)
class ObjectiveSpec:
    """A named objective on a box.

    ``evaluate`` maps a point of shape ``(d,)`` to a float. When
    ``vectorized`` is true it also accepts ``(n, d)`` and returns ``(n,)``,
    which lets solvers score a whole swarm in one call (each row still
    costs one read). ``success_tolerance`` is the closeness to
    ``known_min_value`` that counts as solved.
    """

    name: str
    dimension: int
    evaluate: Callable[[Array], Any]
    domain: BoxDomain
    known_min_value: float
    gradient: Optional[Callable[[Array], Array]] = None
    known_min_position: Optional[Array] = None
    sense: str = MINIMIZE
    vectorized: bool = False
    success_tolerance: float = 1e-6

    def __post_init__(self):
        if self.dimension != self.domain.dimension:
            raise ValueError(f"{self.name}: dimension {self.dimension} does not match its domain")
        if self.sense not in (MINIMIZE, MAXIMIZE):
            raise ValueError(f"sense must be {MINIMIZE!r} or {MAXIMIZE!r}")

    def as_minimization(self) -> "ObjectiveSpec":
        """Return the objective solvers actually minimize (negated for maximize)."""
        if self.sense == MINIMIZE:
            return self
        f, g = self.evaluate, self.gradient
        return ObjectiveSpec(
            name=self.name,
            dimension=self.dimension,
            evaluate=lambda x: -np.asarray(f(x)) if self.vectorized else -f(x),
            domain=self.domain,
            known_min_value=-self.known_min_value,
            gradient=None if g is None else (lambda x: -np.asarray(g(x))),
            known_min_position=self.known_min_position,
            sense=MINIMIZE,
            vectorized=self.vectorized,
            success_tolerance=self.success_tolerance,
        )


@dataclass
class EvalBudget:
    """Function-read counter with a hard limit. Single owner per run."""

    limit: int
    counter: int = 0

    def __post_init__(self):
        if self.limit <= 0:
            raise ValueError("budget limit must be positive")

    @property
    def remaining(self) -> int:
        return self.limit - self.counter

    @property
    def exhausted(self) -> bool:
        return self.counter >= self.limit


def counted_evaluate(spec: ObjectiveSpec, x, budget: EvalBudget) -> float:
    """Evaluate ``spec`` at ``x``, charging one read to ``budget``."""
    x = np.asarray(x, dtype=float)
    if budget.counter >= budget.limit:
        raise BudgetExhausted()
    dom = spec.domain
    if x.shape != (spec.dimension,) or not ((x >= dom.lower).all() and (x <= dom.upper).all()):
        raise OutOfDomain(f"point outside the domain of {spec.name}")
    value = float(spec.evaluate(x))
    budget.counter += 1
    return value


def counted_evaluate_many(spec: ObjectiveSpec, xs, budget: EvalBudget) -> Array:
    """Evaluate each row of ``xs``, one read per row.

    When the budget cannot cover every row, the affordable prefix is
    evaluated and returned inside the raised :class:`BudgetExhausted`.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != spec.dimension:
        raise OutOfDomain(f"expected an (n, {spec.dimension}) array for {spec.name}")
    if not np.all(spec.domain.contains(xs)):
        raise OutOfDomain(f"point outside the domain of {spec.name}")
    n = min(len(xs), budget.remaining)
    if n <= 0:
        raise BudgetExhausted()
    head = xs[:n]
    if spec.vectorized:
        values = np.asarray(spec.evaluate(head), dtype=float).reshape(n)
    else:
        values = np.array([float(spec.evaluate(row)) for row in head])
    budget.counter += n
    if n < len(xs):
        raise BudgetExhausted(values=values)
    return values


def _label_words(label: str) -> list[int]:
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=16).digest()
    return [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]


class RngStream:
    """Seeded, splittable random stream on a counter-based generator (Philox).

    Child streams are keyed by ``(seed, label path)`` so draws made in one
    component never shift the sequence seen by another.
    """

    def __init__(self, seed: int, label: str = ""):
        self.seed = int(seed) & _MASK64
        self.label = label
        entropy = [self.seed & 0xFFFFFFFF, self.seed >> 32] + _label_words(label)
        self._gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))

    def child(self, label: str) -> "RngStream":
        return RngStream(self.seed, f"{self.label}/{label}")

    def uniform(self, size=None):
        """Uniform draw(s) in [0, 1)."""
        return self._gen.random(size)

    def normal(self, sigma=1.0, size=None):
        """Normal draw(s) with mean 0 and standard deviation ``sigma``."""
        return self._gen.normal(0.0, sigma, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def choice(self, indices):
        """Uniform pick from a non-empty sequence of indices."""
        indices = np.asarray(indices)
        if len(indices) == 1:
            return indices[0]
        return indices[self._gen.integers(len(indices))]

    def partners(self, n: int) -> Array:
        """One partner per index ``i`` in ``range(n)``, uniform over ``j != i``."""
        if n < 2:
            raise ValueError("need at least two entries to pick a distinct partner")
        offsets = self._gen.integers(1, n, n)
        return (np.arange(n) + offsets) % n


def rng_uniform(rng: RngStream) -> float:
    return float(rng.uniform())


def rng_normal(rng: RngStream, sigma: float) -> float:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return float(rng.normal(sigma))


@dataclass
class RunTrace:
    """Best-so-far history of one run.

    ``samples`` holds ``(reads, best_value)`` pairs in minimization sense,
    recorded whenever the solver's best improves.
    """

    algorithm: str
    objective: str
    seed: int
    samples: list = field(default_factory=list)
    status: str = BUDGET_EXHAUSTED
    solved_at_reads: Optional[int] = None
    reads_used: int = 0
    best_position: Optional[Array] = None
    target: Optional[float] = None
    sense: str = MINIMIZE
    run_id: int = 0
    config: dict = field(default_factory=dict)

    @property
    def best_value(self) -> float:
        """Best value in the objective's own sense."""
        if not self.samples:
            return float("nan")
        v = self.samples[-1][1]
        return -v if self.sense == MAXIMIZE else v

    @property
    def solved(self) -> bool:
        return self.solved_at_reads is not None

    def same_as(self, other: "RunTrace") -> bool:
        """Bit-exact comparison of the recorded history and outcome."""
        return (
            self.samples == other.samples
            and self.status == other.status
            and self.solved_at_reads == other.solved_at_reads
            and self.reads_used == other.reads_used
            and np.array_equal(self.best_position, other.best_position)
        )


class TraceRecorder:
    """Tracks a solver's best value and turns it into a :class:`RunTrace`."""

    def __init__(self, algorithm: str, spec: ObjectiveSpec, seed: int, budget: EvalBudget,
                 target: Optional[float] = None, tolerance: Optional[float] = None,
                 config: Optional[dict] = None):
        self.budget = budget
        self.best_value = np.inf
        self.best_position = None
        # spec here is the original; solvers work on the minimization view
        self.sense = spec.sense
        if target is not None and spec.sense == MAXIMIZE:
            target = -target
        self.target = target
        self.tolerance = spec.success_tolerance if tolerance is None else tolerance
        self.solved_at_reads = None
        self.trace = RunTrace(algorithm=algorithm, objective=spec.name, seed=seed,
                              target=None if target is None else float(target),
                              sense=spec.sense, config=dict(config or {}))

    def offer(self, value: float, x, reads: Optional[int] = None) -> bool:
        """Record ``value`` if it improves on the best. Returns True once solved."""
        value = float(value)
        if value < self.best_value:
            self.best_value = value
            self.best_position = np.array(x, dtype=float)
            reads = self.budget.counter if reads is None else int(reads)
            samples = self.trace.samples
            if samples and samples[-1][0] >= reads:
                samples[-1] = (samples[-1][0], value)
            else:
                samples.append((reads, value))
            if (self.solved_at_reads is None and self.target is not None
                    and abs(value - self.target) <= self.tolerance):
                self.solved_at_reads = samples[-1][0]
        return self.solved_at_reads is not None

    def offer_many(self, values, xs, reads_before: int) -> bool:
        """Offer a batch evaluated in order starting after ``reads_before`` reads."""
        values = np.asarray(values)
        if values.size == 0:
            return self.solved
        running = np.minimum.accumulate(values)
        improved = np.flatnonzero((values == running) & (values < self.best_value))
        for i in improved:
            if values[i] < self.best_value:
                self.offer(values[i], xs[i], reads_before + i + 1)
        return self.solved

    @property
    def solved(self) -> bool:
        return self.solved_at_reads is not None

    def finish(self, status: str) -> RunTrace:
        trace = self.trace
        trace.status = SOLVED if self.solved else status
        trace.solved_at_reads = self.solved_at_reads
        trace.reads_used = self.budget.counter
        trace.best_position = self.best_position
        return trace
