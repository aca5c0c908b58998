"""Modified Butterworth-Van Dyke (MBVD) resonator model.

Circuit: a motional branch ``rm + j w lm + 1/(j w cm)`` in parallel with the
static capacitance ``c0``; the pair sits behind routing parasitics ``rs`` and
``ls`` in series. The series ``ls``/``c0`` combination produces the
electromagnetic (EM) resonance seen above the acoustic band.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from ._validation import check_frequencies, check_nonnegative, check_positive
from .exceptions import BoundaryExtremumError, InputError
from .network import FrequencySweep

TWO_PI = 2.0 * math.pi
# Capacitance ratio cm/c0 per unit of coupling: cm/c0 = COUPLING_RATIO * k2.
COUPLING_RATIO = 8.0 / math.pi**2


@dataclass(frozen=True)
class MbvdParams:
    """Element values of one resonator (SI units)."""

    c0: float
    rm: float
    lm: float
    cm: float
    rs: float = 0.0
    ls: float = 0.0

    def __post_init__(self):
        for name in ("c0", "lm", "cm"):
            object.__setattr__(self, name, check_positive(getattr(self, name), name))
        for name in ("rm", "rs", "ls"):
            object.__setattr__(self, name, check_nonnegative(getattr(self, name), name))

    @property
    def fs_core(self):
        """Motional series resonance ``1 / (2 pi sqrt(lm cm))``."""
        return 1.0 / (TWO_PI * math.sqrt(self.lm * self.cm))

    @property
    def fp_core(self):
        """Lossless antiresonance of the core, ``fs sqrt(1 + cm/c0)``."""
        return self.fs_core * math.sqrt(1.0 + self.cm / self.c0)

    def core(self):
        """Copy without routing parasitics."""
        return MbvdParams(self.c0, self.rm, self.lm, self.cm)

    def lossless(self):
        """Copy with ``rm = rs = 0``; used to locate the reactive poles and zeros."""
        return MbvdParams(self.c0, 0.0, self.lm, self.cm, 0.0, self.ls)

    def scaled(self, factor):
        """Scale every element impedance by ``factor``."""
        return MbvdParams(
            self.c0 / factor,
            self.rm * factor,
            self.lm * factor,
            self.cm / factor,
            self.rs * factor,
            self.ls * factor,
        )


@dataclass(frozen=True)
class ResonatorSpec:
    """Resonator described by its series resonance, coupling and quality factor."""

    fs: float
    k2: float
    q: float
    c0: float
    rs: float = 0.0
    ls: float = 0.0

    def __post_init__(self):
        for name in ("fs", "q", "c0"):
            object.__setattr__(self, name, check_positive(getattr(self, name), name))
        k2 = float(self.k2)
        if not 0.0 < k2 < 1.0:
            raise InputError(f"k2 must lie in (0, 1), got {self.k2!r}")
        object.__setattr__(self, "k2", k2)
        for name in ("rs", "ls"):
            object.__setattr__(self, name, check_nonnegative(getattr(self, name), name))


@dataclass(frozen=True)
class ResonatorMetrics:
    fs_eff: float
    fp_eff: float
    k2: float
    q: float
    fom: float
    f_em: Optional[float] = None


def k2_from_freqs(fs, fp):
    """Electromechanical coupling ``(pi^2 / 8) (fp^2 / fs^2 - 1)``."""
    fs = float(fs)
    fp = float(fp)
    if not fs > 0:
        raise InputError(f"fs must be > 0, got {fs}")
    if fs > fp:
        raise InputError(f"fs ({fs}) must not exceed fp ({fp})")
    return (math.pi**2 / 8.0) * ((fp / fs) ** 2 - 1.0)


def fp_from_k2(fs, k2):
    """Inverse of :func:`k2_from_freqs` for fixed ``fs``."""
    return float(fs) * math.sqrt(1.0 + COUPLING_RATIO * float(k2))


def mbvd_from_spec(spec):
    """Element values that realize ``spec`` exactly for the core model."""
    cm = spec.c0 * COUPLING_RATIO * spec.k2
    ws = TWO_PI * spec.fs
    lm = 1.0 / (ws**2 * cm)
    rm = ws * lm / spec.q
    return MbvdParams(c0=spec.c0, rm=rm, lm=lm, cm=cm, rs=spec.rs, ls=spec.ls)


def admittance(p, f):
    """Terminal admittance in siemens at frequency ``f`` (scalar or array)."""
    f = np.asarray(f, dtype=float)
    if np.any(~np.isfinite(f)) or np.any(f <= 0):
        raise InputError("admittance needs finite frequencies > 0")
    jw = 1j * TWO_PI * f
    with np.errstate(divide="ignore", invalid="ignore"):
        y_core = jw * p.c0 + 1.0 / (p.rm + jw * p.lm + 1.0 / (jw * p.cm))
        if p.rs == 0 and p.ls == 0:
            y = y_core
        else:
            y = 1.0 / (p.rs + jw * p.ls + 1.0 / y_core)
    return complex(y) if y.ndim == 0 else y


def em_resonance_freq(p):
    """First-order routing LC resonance ``1 / (2 pi sqrt(ls c0))``, or ``None``."""
    if p.ls == 0:
        return None
    return 1.0 / (TWO_PI * math.sqrt(p.ls * p.c0))


def _grid_freqs(grid):
    if isinstance(grid, FrequencySweep):
        return grid.freqs
    return check_frequencies(grid, name="grid")


def _refine_vertex(f, v, i):
    """Vertex of the parabola through three points around index ``i``."""
    x0, x1, x2 = f[i - 1], f[i], f[i + 1]
    y0, y1, y2 = v[i - 1], v[i], v[i + 1]
    den = (x0 - x1) * (x0 - x2) * (x1 - x2)
    a = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / den
    b = (x2**2 * (y0 - y1) + x1**2 * (y2 - y0) + x0**2 * (y1 - y2)) / den
    if not np.isfinite(a) or a == 0 or not np.isfinite(b):
        return float(x1)
    xv = -b / (2 * a)
    if not (x0 <= xv <= x2):
        return float(x1)
    return float(xv)


def local_extrema(freqs, values):
    """Interior local maxima and minima of ``values``, refined in log scale.

    Returns two lists of ``(index, refined_frequency)`` tuples, maxima first.
    """
    f = np.asarray(freqs, dtype=float)
    with np.errstate(divide="ignore"):
        v = np.log(np.abs(np.asarray(values)))
    v = np.where(np.isfinite(v), v, np.where(v > 0, 1e300, -1e300))
    left = v[1:-1] - v[:-2]
    right = v[1:-1] - v[2:]
    max_idx = np.nonzero((left > 0) & (right >= 0))[0] + 1
    min_idx = np.nonzero((left < 0) & (right <= 0))[0] + 1
    maxima = [(int(i), _refine_vertex(f, v, i)) for i in max_idx]
    minima = [(int(i), _refine_vertex(f, v, i)) for i in min_idx]
    return maxima, minima


def resonance_extrema(p, grid):
    """Perceived series and parallel resonances from the ``|Y|`` extrema.

    ``fs_eff`` is the largest interior maximum of ``|Y|`` that is followed by
    a minimum (the EM peak of the routing parasitics has none above it), and
    ``fp_eff`` the first minimum after it. Both are refined by a three-point
    parabola in ``log|Y|``.

    Raises
    ------
    BoundaryExtremumError
        If the grid does not contain such a max/min pair.
    """
    f = _grid_freqs(grid)
    if f.size < 3:
        raise BoundaryExtremumError("grid needs at least three points")
    y = admittance(p, f)
    return _acoustic_pair(f, y)


def _acoustic_pair(f, y):
    maxima, minima = local_extrema(f, y)
    mag = np.abs(y)
    best = None
    for i, fi in maxima:
        after = [(j, fj) for j, fj in minima if j > i]
        if not after:
            continue
        if best is None or mag[i] > mag[best[0][0]]:
            best = ((i, fi), after[0])
    if best is None:
        raise BoundaryExtremumError(
            "no |Y| maximum followed by a minimum inside the grid; widen the sweep"
        )
    return best[0][1], best[1][1]


def _rising_zeros(func, f):
    """Roots of ``func`` where it crosses from negative to positive on ``f``."""

    def safe(x):
        v = func(x)
        hit = ~np.isfinite(v)
        if np.any(hit):
            # A point sitting exactly on a pole; step off it.
            v = np.where(hit, func(np.asarray(x) * (1.0 + 1e-12)), v)
        return v

    vals = safe(f)
    idx = np.nonzero((vals[:-1] < 0) & (vals[1:] > 0))[0]
    roots = []
    for i in idx:
        roots.append(
            brentq(lambda x: float(safe(x)), f[i], f[i + 1], xtol=1e-12 * f[i], rtol=1e-15)
        )
    exact = np.nonzero(vals == 0)[0]
    roots.extend(float(f[i]) for i in exact)
    return sorted(roots)


def lossless_immittance(p, f):
    """Terminal reactance ``X`` and susceptance ``B`` of ``p`` with ``rm = rs = 0``.

    Computed in real arithmetic so that poles give signed infinities rather
    than NaN.
    """
    w = TWO_PI * np.asarray(f, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_m = w * p.lm - 1.0 / (w * p.cm)
        b_core = w * p.c0 - 1.0 / x_m
        x = w * p.ls - 1.0 / b_core
        b = -1.0 / x
    return x, b


def reactive_resonances(p, grid):
    """Series and parallel resonances of the lossless counterpart of ``p``.

    With ``rm = rs = 0`` the terminal reactance ``X`` and susceptance ``B``
    are Foster functions, increasing between their poles. Series resonances
    are the rising zeros of ``X``, parallel resonances the rising zeros of
    ``B``. Returns ``(fs, fp, f_em)`` where ``fs`` is the last series
    resonance below ``fp`` and ``f_em`` the first one above it (``None`` if
    the grid shows none).
    """
    f = _grid_freqs(grid)

    def reactance(x):
        return lossless_immittance(p, x)[0]

    def susceptance(x):
        return lossless_immittance(p, x)[1]

    fp_roots = _rising_zeros(susceptance, f)
    if not fp_roots:
        raise BoundaryExtremumError("grid does not contain the parallel resonance")
    fp = fp_roots[0]
    fs_roots = _rising_zeros(reactance, f)
    below = [r for r in fs_roots if r < fp]
    above = [r for r in fs_roots if r > fp]
    if not below:
        raise BoundaryExtremumError("grid does not contain the series resonance")
    return below[-1], fp, (above[0] if above else None)


def resonator_metrics(p, grid):
    """Key resonator figures: ``fs``, ``fp``, ``k2``, motional ``Q``, FOM.

    ``fs_eff``/``fp_eff`` are the resonances of the lossless counterpart of
    the full model (routing inductance included), so they are exact for the
    core model at any ``Q``. ``Q = 2 pi fs_eff lm / rm`` and is ``inf`` for a
    lossless motional branch.
    """
    fs, fp, _ = reactive_resonances(p, grid)
    k2 = k2_from_freqs(fs, fp)
    q = math.inf if p.rm == 0 else TWO_PI * fs * p.lm / p.rm
    return ResonatorMetrics(
        fs_eff=fs, fp_eff=fp, k2=k2, q=q, fom=k2 * q, f_em=em_resonance_freq(p)
    )


def default_grid(fs, fp, points=2001, span=(0.8, 1.25)):
    """Geometric grid from ``span[0] * fs`` to ``span[1] * fp``."""
    return np.geomspace(span[0] * fs, span[1] * fp, points)
