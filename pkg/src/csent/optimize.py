"""Multi-start quasi-Newton minimization.

Objectives come in two flavours: a *batched* function ``f(X) -> values`` for
``X`` of shape ``(n, P)``, differentiated by central differences evaluated in
one batch, or an analytic ``value_and_grad(x)``. Restarts run in index order
and the lowest restart index wins ties, so results depend only on the starts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

FD_STEP = 1e-6


@dataclass(frozen=True)
class RestartResult:
    x: np.ndarray
    value: float
    nit: int
    success: bool


@dataclass(frozen=True)
class MultistartResult:
    x: np.ndarray
    value: float
    best_index: int
    restarts: list[RestartResult] = field(repr=False)

    @property
    def terminal_values(self) -> np.ndarray:
        return np.array([r.value for r in self.restarts])

    def converged_fraction(self, tol: float) -> float:
        """Fraction of restarts ending within ``tol`` of the best value."""
        v = self.terminal_values
        return float(np.mean(v <= self.value + tol))


def central_difference(batch_fun: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                       step: float = FD_STEP) -> np.ndarray:
    p = x.shape[0]
    e = np.eye(p) * step
    vals = batch_fun(np.concatenate([x + e, x - e]))
    return (vals[:p] - vals[p:]) / (2 * step)


def minimize_multistart(starts: Sequence[np.ndarray], *,
                        batch_fun: Callable[[np.ndarray], np.ndarray] | None = None,
                        value_and_grad: Callable[[np.ndarray], tuple[float, np.ndarray]] | None = None,
                        fd_step: float = FD_STEP, gtol: float = 1e-8,
                        maxiter: int = 2000) -> MultistartResult:
    if (batch_fun is None) == (value_and_grad is None):
        raise ValueError("give exactly one of batch_fun or value_and_grad")
    if value_and_grad is not None:
        fun, jac = value_and_grad, True
    else:
        def fun(x):
            return float(batch_fun(x[None, :])[0])

        def jac(x):
            return central_difference(batch_fun, x, fd_step)

    results = []
    for x0 in starts:
        x0 = np.asarray(x0, dtype=float)
        res = minimize(fun, x0, jac=jac, method="BFGS", options={"gtol": gtol, "maxiter": maxiter})
        x = np.asarray(res.x, dtype=float)
        val = float(res.fun)
        # BFGS may stop on a line-search failure past its best point
        if value_and_grad is None:
            start_val = fun(x0)
        else:
            start_val = value_and_grad(x0)[0]
        if start_val < val:
            x, val = x0, float(start_val)
        results.append(RestartResult(x, val, int(res.nit), bool(res.success)))

    best = 0
    for i, r in enumerate(results):
        if r.value < results[best].value:
            best = i
    return MultistartResult(results[best].x, results[best].value, best, results)
