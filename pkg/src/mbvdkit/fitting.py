"""Fitting MBVD element values to one-port admittance sweeps."""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_complex, check_frequencies
from .exceptions import BoundaryExtremumError, InitializationError, InputError
from .mbvd import (
    COUPLING_RATIO,
    MbvdParams,
    ResonatorMetrics,
    ResonatorSpec,
    admittance,
    k2_from_freqs,
    mbvd_from_spec,
    resonator_metrics,
)
from .optimize import nelder_mead

PARAM_NAMES = ("c0", "cm", "lm", "rm", "rs", "ls")
WORKERS_ENV = "MBVDKIT_WORKERS"

# Fallback resistance for log-space parameterization when a value is zero.
_FLOOR = {"rm": 1e-3, "rs": 1e-3, "ls": 1e-15}


@dataclass(frozen=True)
class FitOptions:
    max_iter: int = 2000
    restarts: int = 8
    tol: float = 1e-10
    weights: tuple = (1.0, 1.0)
    fit_parasitics: bool = True
    seed: int = 0
    workers: Optional[int] = None

    def __post_init__(self):
        if int(self.max_iter) < 1:
            raise InputError("max_iter must be >= 1")
        if not self.tol > 0:
            raise InputError("tol must be > 0")
        if int(self.restarts) < 0:
            raise InputError("restarts must be >= 0")
        if len(self.weights) != 2 or min(self.weights) < 0:
            raise InputError("weights must be a non-negative (magnitude, phase) pair")


@dataclass(frozen=True)
class FitResult:
    params: MbvdParams
    residual: float
    metrics: Optional[ResonatorMetrics]
    converged: bool
    seed: int = 0
    initial: Optional[MbvdParams] = field(default=None, repr=False)


def wrap_phase(x):
    """Wrap angles into ``(-pi, pi]``."""
    w = np.mod(np.asarray(x) + np.pi, 2 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


def fit_objective(params, freqs, y, weights=(1.0, 1.0)):
    """Mean over frequency of the weighted log-magnitude and phase residuals."""
    ym = admittance(params, freqs)
    w_mag, w_ph = weights
    d_mag = np.log10(np.abs(ym)) - np.log10(np.abs(y))
    d_ph = wrap_phase(np.angle(ym) - np.angle(y))
    return float(np.mean(w_mag * d_mag**2 + w_ph * d_ph**2))


def _interior_extrema(freqs, y):
    """Acoustic ``|Y|`` max/min pair from possibly noisy data.

    The log magnitude is lightly smoothed; among interior minima, the one
    with the deepest drop from the preceding maximum wins. The maximum of an
    EM resonance is followed only by a falling edge, so it never pairs.
    """
    mag = np.log(np.abs(y))
    n = mag.size
    w = max(1, n // 200) | 1
    if w > 1:
        kernel = np.ones(w) / w
        padded = np.pad(mag, w // 2, mode="edge")
        smooth = np.convolve(padded, kernel, mode="valid")
    else:
        smooth = mag
    margin = max(1, w)
    interior = np.arange(margin, n - margin)
    is_min = (smooth[interior] <= smooth[interior - 1]) & (smooth[interior] < smooth[interior + 1])
    best = None
    for j in interior[is_min]:
        # Require a genuine rise after the minimum, not a wiggle.
        if np.max(smooth[j:]) - smooth[j] < 0.1:
            continue
        i = int(np.argmax(smooth[:j]))
        if i < margin:
            continue
        drop = smooth[i] - smooth[j]
        if best is None or drop > best[0]:
            best = (drop, i, int(j))
    if best is None:
        raise InitializationError(
            "sweep must contain fs and fp: no |Y| maximum followed by a minimum found"
        )
    _, i, j = best
    lo, hi = max(0, i - w), min(n, i + w + 1)
    i = lo + int(np.argmax(mag[lo:hi]))
    lo, hi = max(i + 1, j - w), min(n, j + w + 1)
    j = lo + int(np.argmin(mag[lo:hi]))
    return i, j


def init_guess(freqs, y):
    """Starting element values read off the sweep.

    ``fs0``/``fp0`` come from the ``|Y|`` max/min pair, the static
    capacitance from the median of ``Im(Y)/w`` over the lowest decade below
    ``fs0`` (corrected by ``1 + cm/c0``), the motional branch from the
    coupling implied by ``fs0``/``fp0`` with ``Q = 5``. Routing parasitics
    start at ``rs = 0.5`` ohm and ``ls`` placing the EM resonance at
    ``1.3 fp0``.
    """
    freqs = check_frequencies(freqs)
    y = check_complex(y, name="admittance", shape=freqs.shape)
    if freqs.size < 5:
        raise InitializationError("sweep too short to initialize a fit")
    i, j = _interior_extrema(freqs, y)
    fs0, fp0 = float(freqs[i]), float(freqs[j])
    k2 = k2_from_freqs(fs0, fp0)
    k2 = min(max(k2, 1e-4), 0.9)
    low = freqs <= 10.0 * freqs[0]
    below = low & (freqs < fs0 * (1.0 - 0.5 * (fp0 / fs0 - 1.0)))
    sel = below if np.count_nonzero(below) >= 3 else low
    c_total = float(np.median(np.imag(y[sel]) / (2 * math.pi * freqs[sel])))
    if not c_total > 0:
        c_total = float(np.median(np.abs(y) / (2 * math.pi * freqs)))
    c0 = c_total / (1.0 + COUPLING_RATIO * k2)
    core = mbvd_from_spec(ResonatorSpec(fs=fs0, k2=k2, q=5.0, c0=c0))
    ls = 1.0 / ((2 * math.pi * 1.3 * fp0) ** 2 * c0)
    return MbvdParams(c0=c0, rm=core.rm, lm=core.lm, cm=core.cm, rs=0.5, ls=ls)


def _to_vector(p, parasitics):
    vals = [p.c0, p.cm, p.lm, max(p.rm, _FLOOR["rm"])]
    if parasitics:
        vals += [max(p.rs, _FLOOR["rs"]), max(p.ls, _FLOOR["ls"])]
    return np.log10(vals)


def _from_vector(x, parasitics):
    v = 10.0 ** np.asarray(x, dtype=float)
    rs, ls = (v[4], v[5]) if parasitics else (0.0, 0.0)
    return MbvdParams(c0=v[0], rm=v[3], lm=v[2], cm=v[1], rs=rs, ls=ls)


def _workers(opts):
    if opts.workers is not None:
        return max(1, int(opts.workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return 1


def fit_mbvd(freqs, y, opts=None):
    """Fit :class:`MbvdParams` to an admittance sweep.

    The objective (:func:`fit_objective`) is minimized over log10 element
    values with Nelder-Mead: one run from :func:`init_guess`, then
    ``opts.restarts`` runs from the best point so far perturbed by up to
    +/-0.3 decades per parameter, then a final polishing run. Restart
    offsets are drawn up front from ``opts.seed``, so results do not depend
    on the worker count.
    """
    opts = FitOptions() if opts is None else opts
    freqs = check_frequencies(freqs)
    y = check_complex(y, name="admittance", shape=freqs.shape)
    if np.any(y == 0):
        raise InputError("admittance data contains exact zeros")
    par = bool(opts.fit_parasitics)
    weights = tuple(float(w) for w in opts.weights)
    p_init = init_guess(freqs, y)
    if not par:
        p_init = p_init.core()
    x_init = _to_vector(p_init, par)

    def cost(x):
        if np.any(np.abs(x) > 30):
            return np.inf
        return fit_objective(_from_vector(x, par), freqs, y, weights)

    f_init = cost(x_init)

    def run(x0, step):
        return nelder_mead(cost, x0, step=step, max_iter=opts.max_iter, tol=opts.tol)

    best = run(x_init, 0.1)
    rng = np.random.default_rng(opts.seed)
    offsets = rng.uniform(-0.3, 0.3, size=(int(opts.restarts), x_init.size))
    nworkers = _workers(opts)
    # Restarts go in rounds so that each round starts from the best point so
    # far; within a round the runs are independent.
    for start in range(0, len(offsets), nworkers):
        batch = [best.x + off for off in offsets[start : start + nworkers]]
        if nworkers == 1:
            results = [run(x0, 0.1) for x0 in batch]
        else:
            with ThreadPoolExecutor(nworkers) as pool:
                results = list(pool.map(lambda x0: run(x0, 0.1), batch))
        for res in results:
            if res.fun < best.fun:
                best = res
    polish = run(best.x, 0.01)
    if polish.fun <= best.fun:
        best = polish
    if best.fun > f_init:
        # Never hand back something worse than the starting guess.
        best = type(best)(x_init, f_init, False, 0, 0)

    params = _from_vector(best.x, par)
    try:
        metrics = resonator_metrics(params, freqs)
    except BoundaryExtremumError:
        metrics = None
    return FitResult(
        params=params,
        residual=float(best.fun),
        metrics=metrics,
        converged=bool(best.converged) and metrics is not None,
        seed=opts.seed,
        initial=p_init,
    )


class MbvdRegressor(RegressorMixin, BaseEstimator):
    """scikit-learn style wrapper around :func:`fit_mbvd`.

    ``X`` holds frequencies in Hz (shape ``(n,)`` or ``(n, 1)``), ``y`` the
    complex admittance. ``predict`` returns the model admittance and
    ``score`` the negative fit objective (higher is better), since the
    default R^2 is not defined for complex targets.
    """

    def __init__(
        self,
        max_iter=2000,
        restarts=8,
        tol=1e-10,
        weights=(1.0, 1.0),
        fit_parasitics=True,
        random_state=0,
        n_jobs=None,
    ):
        self.max_iter = max_iter
        self.restarts = restarts
        self.tol = tol
        self.weights = weights
        self.fit_parasitics = fit_parasitics
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _options(self):
        return FitOptions(
            max_iter=self.max_iter,
            restarts=self.restarts,
            tol=self.tol,
            weights=tuple(self.weights),
            fit_parasitics=self.fit_parasitics,
            seed=self.random_state,
            workers=self.n_jobs,
        )

    def fit(self, X, y):
        freqs = check_frequencies(X, name="X")
        result = fit_mbvd(freqs, y, self._options())
        self.result_ = result
        self.params_ = result.params
        self.metrics_ = result.metrics
        self.residual_ = result.residual
        self.converged_ = result.converged
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        return admittance(self.params_, check_frequencies(X, name="X"))

    def score(self, X, y, sample_weight=None):
        check_is_fitted(self, "params_")
        freqs = check_frequencies(X, name="X")
        y = check_complex(y, name="y", shape=freqs.shape)
        return -fit_objective(self.params_, freqs, y, tuple(self.weights))
