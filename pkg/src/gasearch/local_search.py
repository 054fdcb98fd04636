"""Bound-constrained limited-memory BFGS.

Gradient-projection variant: iterates are clamped to the box, gradient
components pushing against an active bound are zeroed, and steps come from
the usual two-loop recursion followed by a backtracking Armijo search along
the projected path. Every objective value is charged to the caller's
:class:`~gasearch.core.EvalBudget`; analytic gradients are free, finite
differences pay for their evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import BoxDomain, BudgetExhausted, EvalBudget, ObjectiveSpec, RngStream, counted_evaluate

ARMIJO_C = 1e-4
MAX_HALVINGS = 40
CURVATURE_EPS = 1e-10


@dataclass(frozen=True)
class LocalSearchOptions:
    memory_pairs: int = 10
    max_iterations: int = 200
    pg_tolerance: float = 1e-9
    fd_step: float = 1e-8

    def __post_init__(self):
        for name in ("memory_pairs", "max_iterations", "pg_tolerance", "fd_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass
class LocalMinResult:
    x: np.ndarray
    value: float
    reads_used: int
    converged: bool
    iterations: int = 0


def project(x, domain: BoxDomain) -> np.ndarray:
    """Clamp ``x`` componentwise onto ``domain``."""
    return np.minimum(np.maximum(np.asarray(x, dtype=float), domain.lower), domain.upper)


def projected_gradient(x, g, domain: BoxDomain) -> np.ndarray:
    """Gradient with components pressing against an active bound set to zero."""
    pg = np.array(g, dtype=float)
    pg[(x <= domain.lower) & (pg > 0)] = 0.0
    pg[(x >= domain.upper) & (pg < 0)] = 0.0
    return pg


def fd_gradient(spec: ObjectiveSpec, x, budget: EvalBudget, step: float = 1e-8,
                fx: Optional[float] = None) -> np.ndarray:
    """Central-difference gradient, ``h = step * max(1, |x[n]|)``.

    Interior components cost two reads each. A component whose bound is
    closer than ``h`` falls back to a one-sided difference against ``f(x)``
    (evaluated once and reused when ``fx`` is not supplied).
    """
    x = np.asarray(x, dtype=float)
    lo, hi = spec.domain.lower, spec.domain.upper
    g = np.empty_like(x)
    for n in range(x.size):
        h = step * max(1.0, abs(x[n]))
        up_ok = x[n] + h <= hi[n]
        down_ok = x[n] - h >= lo[n]
        xp = x.copy()
        xm = x.copy()
        if up_ok and down_ok:
            xp[n] += h
            xm[n] -= h
            g[n] = (counted_evaluate(spec, xp, budget) - counted_evaluate(spec, xm, budget)) / (2 * h)
            continue
        if fx is None:
            fx = counted_evaluate(spec, x, budget)
        if up_ok:
            xp[n] += h
            g[n] = (counted_evaluate(spec, xp, budget) - fx) / h
        elif down_ok:
            xm[n] -= h
            g[n] = (fx - counted_evaluate(spec, xm, budget)) / h
        else:
            g[n] = 0.0
    return g


class _Memory:
    """Last ``m`` curvature pairs ``(s, y)`` of the limited-memory update.

    :meth:`apply` runs the standard two-loop recursion on Gram matrices of
    the stored pairs, kept up to date on :meth:`push`, so the inner loops
    are plain float arithmetic.
    """

    def __init__(self, m: int):
        self.m = m
        self.clear()

    def __bool__(self):
        return bool(self.rho)

    def clear(self):
        self.S = None
        self.Y = None
        self.sy: list = []   # sy[i][j] = s_i . y_j
        self.yy: list = []   # yy[i][j] = y_i . y_j
        self.rho: list = []

    def push(self, s, y):
        if self.S is None:
            self.S, self.Y = s[None, :], y[None, :]
            self.sy, self.yy = [[float(s @ y)]], [[float(y @ y)]]
            self.rho = [1.0 / self.sy[0][0]]
            return
        if len(self.rho) == self.m:
            self.S, self.Y = self.S[1:], self.Y[1:]
            self.sy = [row[1:] for row in self.sy[1:]]
            self.yy = [row[1:] for row in self.yy[1:]]
            self.rho = self.rho[1:]
        s_y = (self.S @ y).tolist()
        y_s = (self.Y @ s).tolist()
        y_y = (self.Y @ y).tolist()
        syy, yyy = float(s @ y), float(y @ y)
        for i, row in enumerate(self.sy):
            row.append(s_y[i])
        for i, row in enumerate(self.yy):
            row.append(y_y[i])
        self.sy.append(y_s + [syy])
        self.yy.append(y_y + [yyy])
        self.rho.append(1.0 / syy)
        self.S = np.vstack((self.S, s))
        self.Y = np.vstack((self.Y, y))

    def apply(self, q):
        """Return ``H q`` for the current inverse-Hessian approximation."""
        sy, yy, rho = self.sy, self.yy, self.rho
        k = len(rho)
        sq = (self.S @ q).tolist()
        yq = (self.Y @ q).tolist()
        gamma = sy[-1][-1] / yy[-1][-1]
        alpha = [0.0] * k
        for i in range(k - 1, -1, -1):
            acc = sq[i]
            row = sy[i]
            for j in range(i + 1, k):
                acc -= alpha[j] * row[j]
            alpha[i] = rho[i] * acc
        diff = [0.0] * k
        for i in range(k):
            row = yy[i]
            acc = yq[i]
            for j in range(k):
                acc -= alpha[j] * row[j]
            acc *= gamma
            for j in range(i):
                acc += diff[j] * sy[j][i]
            diff[i] = alpha[i] - rho[i] * acc
        return gamma * (q - np.array(alpha) @ self.Y) + np.array(diff) @ self.S


def minimize_bounded(spec: ObjectiveSpec, x0, opts: Optional[LocalSearchOptions] = None,
                     budget: Optional[EvalBudget] = None,
                     rng: Optional[RngStream] = None) -> LocalMinResult:
    """Refine ``x0`` to a local minimum of ``spec`` inside its box.

    ``converged`` is true only when the projected-gradient infinity norm
    reaches ``opts.pg_tolerance``. Line-search failure (non-smooth or
    round-off limited objectives) and budget exhaustion both return the
    best point found with ``converged=False``. Raises
    :class:`BudgetExhausted` only when not even ``x0`` could be evaluated.
    """
    opts = opts or LocalSearchOptions()
    if budget is None:
        budget = EvalBudget(limit=np.iinfo(np.int64).max)
    domain = spec.domain
    start_reads = budget.counter

    def value_and_grad(x):
        f = counted_evaluate(spec, x, budget)
        if not np.isfinite(f):
            return f, None
        if spec.gradient is not None:
            return f, np.asarray(spec.gradient(x), dtype=float)
        return f, fd_gradient(spec, x, budget, opts.fd_step, fx=f)

    x = project(x0, domain)
    f, g = value_and_grad(x)
    pairs = _Memory(opts.memory_pairs)
    converged = False
    iterations = 0
    pending = None
    try:
        while iterations < opts.max_iterations:
            if g is None or not np.all(np.isfinite(g)):
                break
            pg = projected_gradient(x, g, domain)
            if np.max(np.abs(pg)) <= opts.pg_tolerance:
                converged = True
                break
            active = pg == 0.0
            q = np.where(active, 0.0, g)
            if pairs:
                d = -pairs.apply(q)
                d[active] = 0.0
                if d @ q >= 0:
                    pairs.clear()
            if not pairs:
                d = -q / max(1.0, math.sqrt(q @ q))

            alpha = 1.0
            accepted = False
            for _ in range(MAX_HALVINGS):
                x_new = project(x + alpha * d, domain)
                dx = x_new - x
                if not np.any(dx):
                    break
                f_new = counted_evaluate(spec, x_new, budget)
                if f_new <= f + ARMIJO_C * (g @ dx):
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                if pairs:
                    pairs.clear()
                    continue
                break

            pending = (x_new, f_new)
            g_new = None
            if np.isfinite(f_new):
                g_new = (np.asarray(spec.gradient(x_new), dtype=float) if spec.gradient is not None
                         else fd_gradient(spec, x_new, budget, opts.fd_step, fx=f_new))
            iterations += 1
            if g_new is not None:
                s, y = dx, g_new - g
                if s @ y > CURVATURE_EPS * math.sqrt((s @ s) * (y @ y)):
                    pairs.push(s, y)
                else:
                    pairs.clear()
            x, f, g = x_new, f_new, g_new
            pending = None
    except BudgetExhausted:
        converged = False
        if pending is not None:
            x, f = pending
    return LocalMinResult(x=x, value=float(f), reads_used=budget.counter - start_reads,
                          converged=converged, iterations=iterations)
