"""Budgeted classical outer-loop optimizers.

Both methods delegate the iteration itself to :mod:`scipy.optimize` and
wrap the objective so that every probe is counted, recorded and cut off
exactly at the budget.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .circuits import central_difference


FD_STEP = 1e-6
SIMPLEX_STEP = 0.05


class BudgetExhausted(Exception):
    pass


class ObjectiveError(RuntimeError):
    """Objective returned a non-finite value; ``result`` holds the best-so-far."""

    def __init__(self, message: str, result: "OptResult"):
        super().__init__(message)
        self.result = result


@dataclass
class ObjectiveBudget:
    max_evals: int
    evals_used: int = 0

    def __post_init__(self):
        if self.max_evals < 1:
            raise ValueError("budget must allow at least one evaluation")

    @property
    def remaining(self) -> int:
        return self.max_evals - self.evals_used

    def charge(self, cost: int = 1) -> None:
        if self.evals_used + cost > self.max_evals:
            raise BudgetExhausted
        self.evals_used += cost


@dataclass
class OptResult:
    best_params: np.ndarray
    best_value: float
    evals: int
    converged: bool
    history: list[tuple[int, float]] = field(default_factory=list)
    message: str = ""


class GradientFn:
    """A gradient callback with a declared evaluation cost per call."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], cost: int):
        self.fn = fn
        self.cost = cost

    def __call__(self, x):
        return self.fn(x)


class _Tracked:
    def __init__(self, f, budget: ObjectiveBudget):
        self.f = f
        self.budget = budget
        self.history: list[tuple[int, float]] = []
        self.best_x = None
        self.best_value = np.inf

    def __call__(self, x) -> float:
        self.budget.charge(1)
        x = np.array(x, dtype=float)
        value = float(self.f(x))
        if not np.isfinite(value):
            raise ObjectiveError(f"objective returned {value} at {x.tolist()}", self.result(False))
        self.history.append((self.budget.evals_used, value))
        if value < self.best_value:
            self.best_value = value
            self.best_x = x.copy()
        return value

    def result(self, converged: bool, message: str = "") -> OptResult:
        return OptResult(
            best_params=None if self.best_x is None else self.best_x.copy(),
            best_value=float(self.best_value),
            evals=self.budget.evals_used,
            converged=converged,
            history=list(self.history),
            message=message,
        )


def minimize_simplex(
    f: Callable[[np.ndarray], float],
    x0,
    budget: ObjectiveBudget,
    ftol: float = 1e-8,
    step: float = SIMPLEX_STEP,
    xtol: float = 1e-4,
) -> OptResult:
    """Nelder-Mead; stops when the simplex spreads less than ``ftol`` in value and ``xtol`` in position."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.size < 1:
        raise ValueError("need at least one parameter")
    tracked = _Tracked(f, budget)
    simplex = np.vstack([x0, x0 + step * np.eye(x0.size)])
    try:
        res = optimize.minimize(
            tracked,
            x0,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": xtol,
                "fatol": ftol,
                "maxiter": 10**9,
                "maxfev": 10**9,
            },
        )
    except BudgetExhausted:
        return tracked.result(False, "budget exhausted")
    return tracked.result(bool(res.success), str(res.message))


def minimize_quasi_newton(
    f: Callable[[np.ndarray], float],
    x0,
    budget: ObjectiveBudget,
    gtol: float = 1e-6,
    gradient: GradientFn | Callable | None = None,
) -> OptResult:
    """BFGS with strong-Wolfe line search.

    Without ``gradient`` the gradient is taken by central differences on the
    counted objective (2 * dim probes).  A :class:`GradientFn` is charged its
    declared cost; a bare callable is charged 2 * dim, the parameter-shift
    price for one generator per parameter.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.size < 1:
        raise ValueError("need at least one parameter")
    tracked = _Tracked(f, budget)
    grad_norm = [np.inf]

    if gradient is None:
        def jac(x):
            g = central_difference(tracked, x, FD_STEP)
            grad_norm[0] = float(np.max(np.abs(g)))
            return g
    else:
        cost = gradient.cost if isinstance(gradient, GradientFn) else 2 * x0.size

        def jac(x):
            budget.charge(cost)
            g = np.asarray(gradient(np.array(x, dtype=float)), dtype=float)
            if not np.all(np.isfinite(g)):
                raise ObjectiveError("gradient is not finite", tracked.result(False))
            grad_norm[0] = float(np.max(np.abs(g)))
            return g

    try:
        res = optimize.minimize(
            tracked, x0, jac=jac, method="BFGS",
            options={"gtol": gtol, "maxiter": 10**9, "norm": np.inf},
        )
    except BudgetExhausted:
        return tracked.result(False, "budget exhausted")
    converged = bool(res.success) or grad_norm[0] < gtol
    return tracked.result(converged, str(res.message))
