"""Derivative-free minimization with the Nelder-Mead simplex method."""

from dataclasses import dataclass

import numpy as np

from .exceptions import InputError

REFLECT, EXPAND, CONTRACT, SHRINK = 1.0, 2.0, 0.5, 0.5


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    fun: float
    converged: bool
    iterations: int
    evaluations: int


def _safe(objective):
    def wrapped(x):
        try:
            v = float(objective(x))
        except (ArithmeticError, ValueError):
            return np.inf
        return v if np.isfinite(v) else np.inf

    return wrapped


def nelder_mead(objective, x0, *, step=None, max_iter=2000, tol=1e-10):
    """Minimize ``objective`` starting from ``x0``.

    Parameters
    ----------
    objective : callable
        Maps a 1-D array to a scalar. Non-finite values and arithmetic
        errors count as ``+inf``, so the simplex simply avoids those regions.
    x0 : array_like
        Starting point; the objective must be finite there.
    step : float or array_like, optional
        Edge lengths of the initial simplex. Defaults to 5% of each
        coordinate (0.00025 for zero coordinates).
    max_iter : int
        Iteration budget.
    tol : float
        Stop once ``max(f) - min(f)`` over the simplex falls below
        ``tol * (1 + |f_best|)``.

    Returns
    -------
    SimplexResult
    """
    if max_iter < 1:
        raise InputError("max_iter must be >= 1")
    if not tol > 0:
        raise InputError("tol must be > 0")
    func = _safe(objective)
    x0 = np.asarray(x0, dtype=float).ravel()
    n = x0.size
    f0 = func(x0)
    if not np.isfinite(f0):
        raise InputError("objective is not finite at the starting point")

    if step is None:
        step = np.where(x0 != 0, 0.05 * x0, 0.00025)
    step = np.broadcast_to(np.asarray(step, dtype=float), (n,))
    simplex = np.vstack([x0, x0 + np.diag(step)])
    fvals = np.empty(n + 1)
    fvals[0] = f0
    for k in range(1, n + 1):
        fvals[k] = func(simplex[k])
    nfev = n + 1

    converged = False
    it = 0
    while it < max_iter:
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        spread = fvals[-1] - fvals[0]
        if spread < tol * (1.0 + abs(fvals[0])):
            converged = True
            break
        it += 1

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + REFLECT * (centroid - worst)
        fr = func(xr)
        nfev += 1

        if fr < fvals[0]:
            xe = centroid + EXPAND * (xr - centroid)
            fe = func(xe)
            nfev += 1
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue

        if fr < fvals[-1]:
            xc = centroid + CONTRACT * (xr - centroid)
            fc = func(xc)
            nfev += 1
            if fc <= fr:
                simplex[-1], fvals[-1] = xc, fc
                continue
        else:
            xc = centroid + CONTRACT * (worst - centroid)
            fc = func(xc)
            nfev += 1
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
                continue

        best = simplex[0]
        simplex[1:] = best + SHRINK * (simplex[1:] - best)
        for k in range(1, n + 1):
            fvals[k] = func(simplex[k])
        nfev += n

    k = int(np.argmin(fvals))
    return SimplexResult(simplex[k].copy(), float(fvals[k]), converged, it, nfev)
