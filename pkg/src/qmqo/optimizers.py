"""Derivative-free minimizers used by the QAOA loop.

Both optimizers share one contract: ``budget`` caps the number of objective
evaluations, the best point seen is returned, and a run stops early when the
best value improves by less than ``stall_rtol`` (relative) over
``stall_iterations`` consecutive iterations.

With ``budget == 0`` the start point is returned untouched; the objective is
still evaluated once so that ``f*`` can be reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Objective = Callable[[np.ndarray], float]
Callback = Callable[[int, np.ndarray, float], None]

GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))  # 0.381966...


@dataclass(frozen=True)
class Tolerances:
    xtol: float = 1e-3
    ftol: float = 1e-4
    stall_rtol: float = 1e-6
    stall_iterations: int = 10
    initial_step: float = 0.1


class _BudgetExhausted(Exception):
    pass


class _Tracker:
    """Counts evaluations and keeps the best point seen."""

    def __init__(self, fun: Objective, budget: int):
        self.fun = fun
        self.budget = budget
        self.nfev = 0
        self.best_x: Optional[np.ndarray] = None
        self.best_f = math.inf

    def __call__(self, x: np.ndarray) -> float:
        if self.nfev >= self.budget:
            raise _BudgetExhausted
        self.nfev += 1
        f = float(self.fun(x))
        if f < self.best_f or self.best_x is None:
            self.best_f, self.best_x = f, np.array(x, dtype=float)
        return f


class _Stall:
    def __init__(self, tol: Tolerances):
        self.tol = tol
        self.history: list[float] = []

    def update(self, f: float) -> bool:
        """Record the best value after an iteration; True when stagnated."""
        self.history.append(f)
        k = self.tol.stall_iterations
        if len(self.history) <= k:
            return False
        old, new = self.history[-k - 1], self.history[-1]
        return abs(old - new) <= self.tol.stall_rtol * max(abs(old), 1e-12)


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    nfev: int
    nit: int


def nelder_mead(
    fun: Objective,
    x0,
    budget: int,
    tolerances: Tolerances = Tolerances(),
    callback: Optional[Callback] = None,
) -> OptimizeResult:
    """Downhill simplex with reflection 1, expansion 2, contraction 0.5, shrink 0.5."""
    x0 = np.asarray(x0, dtype=float).copy()
    if budget <= 0:
        return OptimizeResult(x0, float(fun(x0)), 1, 0)
    f = _Tracker(fun, budget)
    n = len(x0)
    nit = 0
    try:
        simplex = [x0]
        for k in range(n):
            v = x0.copy()
            v[k] += tolerances.initial_step if v[k] == 0 else tolerances.initial_step * max(1.0, abs(v[k]))
            simplex.append(v)
        simplex = np.array(simplex)
        values = np.array([f(v) for v in simplex])
        stall = _Stall(tolerances)
        while True:
            order = np.argsort(values, kind="stable")
            simplex, values = simplex[order], values[order]
            nit += 1
            if callback is not None:
                callback(nit, simplex[0].copy(), float(values[0]))
            spread_x = np.max(np.abs(simplex[1:] - simplex[0]))
            spread_f = np.max(np.abs(values[1:] - values[0]))
            if (spread_x <= tolerances.xtol and spread_f <= tolerances.ftol) or stall.update(values[0]):
                break

            centroid = simplex[:-1].mean(axis=0)
            worst = simplex[-1]
            xr = centroid + (centroid - worst)
            fr = f(xr)
            if fr < values[0]:
                xe = centroid + 2.0 * (centroid - worst)
                fe = f(xe)
                simplex[-1], values[-1] = (xe, fe) if fe < fr else (xr, fr)
                continue
            if fr < values[-2]:
                simplex[-1], values[-1] = xr, fr
                continue
            if fr < values[-1]:
                xc = centroid + 0.5 * (xr - centroid)
                fc = f(xc)
                if fc <= fr:
                    simplex[-1], values[-1] = xc, fc
                    continue
            else:
                xc = centroid + 0.5 * (worst - centroid)
                fc = f(xc)
                if fc < values[-1]:
                    simplex[-1], values[-1] = xc, fc
                    continue
            for k in range(1, n + 1):
                simplex[k] = simplex[0] + 0.5 * (simplex[k] - simplex[0])
                values[k] = f(simplex[k])
    except _BudgetExhausted:
        pass
    return OptimizeResult(f.best_x, f.best_f, f.nfev, nit)


def _bracket(phi: Callable[[float], float], f0: float, step: float, grow: float = 1.618034, max_steps: int = 50):
    """Find ``a < b < c`` with ``phi(b) <= min(phi(a), phi(c))`` starting at 0."""
    a, fa = 0.0, f0
    b = step
    fb = phi(b)
    if fb > fa:
        a, b, fa, fb = b, a, fb, fa
    c = b + grow * (b - a)
    fc = phi(c)
    for _ in range(max_steps):
        if fc >= fb:
            break
        a, fa, b, fb = b, fb, c, fc
        c = b + grow * (b - a)
        fc = phi(c)
    if a > c:
        a, c, fa, fc = c, a, fc, fa
    return a, b, c, fb


def golden_section(
    phi: Callable[[float], float], a: float, b: float, c: float, fb: float, xtol: float
) -> tuple[float, float]:
    """Golden-section search on ``[a, c]`` with interior point ``b``."""
    x, fx = b, fb
    while c - a > xtol * (1.0 + abs(x)):
        if x - a > c - x:
            u = x - GOLDEN * (x - a)
        else:
            u = x + GOLDEN * (c - x)
        fu = phi(u)
        if fu < fx:
            if u < x:
                c = x
            else:
                a = x
            x, fx = u, fu
        else:
            if u < x:
                a = u
            else:
                c = u
    return x, fx


def _line_min(f, x: np.ndarray, fx: float, d: np.ndarray, tol: Tolerances) -> tuple[np.ndarray, float]:
    def phi(t):
        return f(x + t * d)

    a, b, c, fb = _bracket(phi, fx, tol.initial_step)
    t, ft = golden_section(phi, a, b, c, fb, tol.xtol)
    if ft < fx:
        return x + t * d, ft
    return x, fx


def powell(
    fun: Objective,
    x0,
    budget: int,
    tolerances: Tolerances = Tolerances(),
    callback: Optional[Callback] = None,
) -> OptimizeResult:
    """Powell's conjugate-direction method.

    Each iteration line-minimizes along every direction of the set, then
    replaces the direction of largest decrease by the net displacement when
    Powell's test says the new direction is worth keeping.
    """
    x0 = np.asarray(x0, dtype=float).copy()
    if budget <= 0:
        return OptimizeResult(x0, float(fun(x0)), 1, 0)
    f = _Tracker(fun, budget)
    n = len(x0)
    directions = np.eye(n)
    nit = 0
    try:
        x, fx = x0, f(x0)
        stall = _Stall(tolerances)
        while True:
            nit += 1
            x_start, f_start = x.copy(), fx
            biggest, biggest_idx = 0.0, 0
            for k in range(n):
                before = fx
                x, fx = _line_min(f, x, fx, directions[k], tolerances)
                if before - fx > biggest:
                    biggest, biggest_idx = before - fx, k
            if callback is not None:
                callback(nit, x.copy(), fx)
            converged = 2.0 * (f_start - fx) <= tolerances.ftol * (abs(f_start) + abs(fx)) + 1e-20
            if converged or stall.update(fx):
                break

            delta = x - x_start
            if not np.any(delta):
                continue
            f_ext = f(x + delta)
            if f_ext < f_start:
                t = 2.0 * (f_start - 2.0 * fx + f_ext) * (f_start - fx - biggest) ** 2
                t -= biggest * (f_start - f_ext) ** 2
                if t < 0.0:
                    x, fx = _line_min(f, x, fx, delta, tolerances)
                    directions[biggest_idx] = directions[-1]
                    directions[-1] = delta / np.linalg.norm(delta)
    except _BudgetExhausted:
        pass
    return OptimizeResult(f.best_x, f.best_f, f.nfev, nit)


OPTIMIZERS = {"nelder-mead": nelder_mead, "powell": powell}
