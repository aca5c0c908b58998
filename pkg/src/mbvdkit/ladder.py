"""Ladder filters built from MBVD resonators.

A ladder is an ordered chain of shunt and series resonators between two
ports. The classic third-order layout is shunt - series - shunt: the shunt
resonators' series resonance sets the lower stopband notch, the series
resonator's antiresonance the upper one.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ._validation import check_frequencies, check_port_impedance
from .exceptions import InputError, MetricsError, SingularNetworkError, SynthesisError
from .mbvd import MbvdParams, ResonatorSpec, admittance, mbvd_from_spec
from .network import (
    FrequencySweep,
    abcd_sweep_to_s,
    cascade,
    renormalize_sweep,
    series_abcd,
    shunt_abcd,
    transducer_gain_from_s,
)
from .optimize import nelder_mead

PLACEMENTS = ("shunt", "series")

# Search box for static capacitances, log10(farads).
C0_LOG_BOUNDS = (-15.0, -12.0)


@dataclass(frozen=True)
class LadderDesign:
    """Ordered resonator stages plus port impedances.

    ``stages`` holds ``(placement, MbvdParams)`` pairs, ``placement`` being
    "shunt" or "series". ``port_z`` are the port 1 / port 2 impedances.
    """

    stages: tuple
    port_z: tuple = (50.0, 50.0)

    def __post_init__(self):
        stages = tuple((str(pl), res) for pl, res in self.stages)
        if not stages:
            raise InputError("a ladder needs at least one stage")
        for pl, res in stages:
            if pl not in PLACEMENTS:
                raise InputError(f"placement must be 'shunt' or 'series', got {pl!r}")
            if not isinstance(res, MbvdParams):
                raise InputError("ladder stages must carry MbvdParams")
        port_z = tuple(check_port_impedance(z) for z in self.port_z)
        if len(port_z) == 1:
            port_z = port_z * 2
        if len(port_z) != 2:
            raise InputError("port_z needs one or two impedances")
        object.__setattr__(self, "stages", stages)
        object.__setattr__(self, "port_z", port_z)

    def with_ports(self, zs, zl=None):
        return replace(self, port_z=(zs, zs if zl is None else zl))


@dataclass(frozen=True)
class FilterMetrics:
    """Passband figures taken from ``|S21|``; frequencies in Hz, levels in dB."""

    f_center: float
    il_db: float
    fbw_3db: float
    oob_rejection_db: float
    band_lo: float
    band_hi: float


def _ladder_abcd(design, freqs):
    """Per-frequency ABCD data and a mask of singular points."""
    freqs = np.asarray(freqs, dtype=float)
    flagged = np.zeros(freqs.size, dtype=bool)
    mats = []
    for placement, res in design.stages:
        y = np.atleast_1d(admittance(res, freqs))
        bad = ~np.isfinite(y)
        if placement == "series":
            bad |= y == 0
            with np.errstate(divide="ignore", invalid="ignore"):
                z = np.where(bad, 0.0, 1.0 / np.where(bad, 1.0, y))
            mats.append(series_abcd(z))
        else:
            mats.append(shunt_abcd(np.where(bad, 0.0, y)))
        flagged |= bad
    return cascade(mats), flagged


def build_ladder(design, f):
    """ABCD matrix of ``design`` at a single frequency ``f`` (Hz).

    Raises
    ------
    SingularNetworkError
        If a series resonator has zero admittance at ``f``.
    """
    f = float(f)
    if not (np.isfinite(f) and f > 0):
        raise InputError(f"frequency must be > 0, got {f}")
    m, flagged = _ladder_abcd(design, np.array([f]))
    if flagged[0]:
        raise SingularNetworkError(f"ladder is singular at {f} Hz")
    return m[0]


def simulate(design, freqs):
    """S-parameters of ``design`` over ``freqs`` with its own port impedances.

    Singular points are flagged in the returned sweep.
    """
    freqs = check_frequencies(freqs)
    abcd, flagged = _ladder_abcd(design, freqs)
    zs, zl = design.port_z
    return abcd_sweep_to_s(freqs, abcd, zs, zl, flagged)


def _db(x):
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(np.abs(x))


def _crossing(f, v, i_out, i_in, level):
    """Frequency where ``v`` crosses ``level`` between two neighbouring points."""
    fa, fb = f[i_out], f[i_in]
    va, vb = v[i_out], v[i_in]
    if vb == va:
        return float(fb)
    return float(fa + (level - va) * (fb - fa) / (vb - va))


def extract_metrics(sweep, guard_fraction=0.25):
    """Center, insertion loss, 3-dB bandwidth and out-of-band rejection.

    The passband is the contiguous run of points within 3 dB of the
    ``|S21|`` peak; its edges are interpolated linearly in dB. Out-of-band
    rejection is the worst transmission more than ``guard_fraction`` times
    the 3-dB bandwidth beyond either edge.

    Raises
    ------
    MetricsError
        Peak on the sweep boundary, passband reaching the edge of the sweep,
        or no points outside the guard band.
    """
    if sweep.kind != "s" or sweep.nports != 2:
        raise InputError("extract_metrics needs a two-port S sweep")
    if guard_fraction < 0:
        raise InputError("guard_fraction must be >= 0")
    keep = ~sweep.flagged
    f = sweep.freqs[keep]
    s21_db = _db(sweep.s21[keep])
    if f.size < 3:
        raise MetricsError("not enough valid points to extract metrics")
    k = int(np.argmax(s21_db))
    peak = float(s21_db[k])
    if k == 0 or k == f.size - 1:
        raise MetricsError("|S21| peaks on the sweep boundary; band not contained")
    level = peak - 3.0
    below = s21_db < level
    lo_idx = np.nonzero(below[:k])[0]
    hi_idx = np.nonzero(below[k + 1 :])[0]
    if lo_idx.size == 0 or hi_idx.size == 0:
        raise MetricsError("no 3-dB crossing on one side of the peak")
    i_lo = int(lo_idx[-1])
    i_hi = int(hi_idx[0]) + k + 1
    band_lo = _crossing(f, s21_db, i_lo, i_lo + 1, level)
    band_hi = _crossing(f, s21_db, i_hi, i_hi - 1, level)
    f_center = 0.5 * (band_lo + band_hi)
    bw = band_hi - band_lo
    g = guard_fraction * bw
    out = (f < band_lo - g) | (f > band_hi + g)
    if not np.any(out):
        raise MetricsError("sweep does not extend past the rejection guard band")
    return FilterMetrics(
        f_center=f_center,
        il_db=-peak,
        fbw_3db=100.0 * bw / f_center,
        oob_rejection_db=-float(np.max(s21_db[out])),
        band_lo=band_lo,
        band_hi=band_hi,
    )


def s21_db_trace(sweep):
    """``(freqs, |S21| dB, |S11| dB)`` columns for plotting."""
    return sweep.freqs, _db(sweep.s21), _db(sweep.s11)


# --- static capacitance synthesis -----------------------------------------


def _design_from_specs(specs, c0_shunt, c0_series, port_z):
    stages = []
    for placement, spec in specs:
        c0 = c0_shunt if placement == "shunt" else c0_series
        stages.append((placement, mbvd_from_spec(replace(spec, c0=c0))))
    return LadderDesign(tuple(stages), port_z)


def _check_specs(specs):
    specs = [(str(pl), sp) for pl, sp in specs]
    if not specs:
        raise InputError("template has no stages")
    for pl, sp in specs:
        if pl not in PLACEMENTS:
            raise InputError(f"placement must be 'shunt' or 'series', got {pl!r}")
        if not isinstance(sp, ResonatorSpec):
            raise InputError("template stages must carry ResonatorSpec values")
    return specs


def _band_masks(freqs, target_band, guard_fraction):
    lo, hi = float(target_band[0]), float(target_band[1])
    if not lo <= hi:
        raise InputError("target band must satisfy lo <= hi")
    in_band = (freqs >= lo) & (freqs <= hi)
    if not np.any(in_band):
        if freqs[0] <= lo <= freqs[-1]:
            in_band[np.argmin(np.abs(freqs - 0.5 * (lo + hi)))] = True
        else:
            raise SynthesisError("target band contains no grid frequencies")
    g = guard_fraction * (hi - lo)
    stop = (freqs < lo - g) | (freqs > hi + g)
    return in_band, stop


def band_objective(
    specs,
    freqs,
    target_band,
    port_z=(50.0, 50.0),
    *,
    min_rejection_db=14.4,
    guard_fraction=0.25,
    penalty=10.0,
):
    """Score maximized by :func:`optimize_static_caps`.

    Returns a callable of ``(log10 c0_shunt, log10 c0_series)`` giving the
    worst in-band ``|S21|`` in dB, minus ``penalty`` dB per dB by which the
    stopband transmission exceeds ``-min_rejection_db``. The stopband is
    every grid point more than ``guard_fraction`` band-widths outside
    ``target_band``. ``min_rejection_db=None`` drops the stopband term.
    """
    specs = _check_specs(specs)
    freqs = check_frequencies(freqs)
    port_z = tuple(check_port_impedance(z) for z in port_z)
    in_band, stop = _band_masks(freqs, target_band, guard_fraction)
    if min_rejection_db is None:
        stop[:] = False
    used = in_band | stop
    sub = freqs[used]
    sub_in = in_band[used]
    sub_stop = stop[used]

    def objective(log_c0):
        design = _design_from_specs(specs, 10.0 ** log_c0[0], 10.0 ** log_c0[1], port_z)
        abcd, flagged = _ladder_abcd(design, sub)
        if np.any(flagged):
            return -np.inf
        db = _db(abcd_sweep_to_s(sub, abcd, *port_z).s21)
        score = float(np.min(db[sub_in]))
        if np.any(sub_stop):
            excess = float(np.max(db[sub_stop])) + min_rejection_db
            score -= penalty * max(0.0, excess)
        return score

    return objective


@dataclass(frozen=True)
class SynthesisResult:
    c0_shunt: float
    c0_series: float
    metrics: FilterMetrics
    design: LadderDesign
    objective_db: float
    candidates: list = field(default_factory=list, repr=False)


def optimize_static_caps(
    specs,
    target_band,
    freqs,
    port_z=(50.0, 50.0),
    *,
    min_rejection_db=14.4,
    guard_fraction=0.25,
    penalty=10.0,
    starts_per_axis=4,
    max_iter=400,
    tol=1e-10,
):
    """Choose shunt and series static capacitances for minimum insertion loss.

    Every stage keeps its ``fs``, ``k2`` and ``Q``; only ``c0`` changes (one
    value shared by all shunt stages, one by all series stages). The score
    of :func:`band_objective` (worst in-band ``|S21|`` dB, subject to a
    stopband rejection floor) is maximized with Nelder-Mead in
    ``log10(c0)`` from a ``starts_per_axis`` square grid of starts spanning
    1 fF to 1 pF; the search is confined to that box. Without the floor the
    optimum degenerates to a through connection (vanishing shunt and
    shorted series capacitances) with no stopband at all.

    Candidates within 1e-9 dB of the best score are ranked by 3-dB
    bandwidth.

    Raises
    ------
    SynthesisError
        If no start yields a filter whose passband can be measured.
    """
    specs = _check_specs(specs)
    freqs = check_frequencies(freqs)
    port_z = tuple(check_port_impedance(z) for z in port_z)
    score = band_objective(
        specs,
        freqs,
        target_band,
        port_z,
        min_rejection_db=min_rejection_db,
        guard_fraction=guard_fraction,
        penalty=penalty,
    )
    lb, ub = C0_LOG_BOUNDS

    def cost(x):
        if np.any(x < lb) or np.any(x > ub):
            return np.inf
        return -score(x)

    axis = np.linspace(lb, ub, starts_per_axis)
    candidates = []
    for a in axis:
        for b in axis:
            # Start just inside the box so the simplex is not half outside it.
            x0 = np.clip([a, b], lb + 0.05, ub - 0.05)
            res = nelder_mead(cost, x0, step=0.2, max_iter=max_iter, tol=tol)
            candidates.append((res.fun, tuple(res.x)))

    scored = []
    for fun, x in candidates:
        design = _design_from_specs(specs, 10.0 ** x[0], 10.0 ** x[1], port_z)
        try:
            metrics = extract_metrics(simulate(design, freqs), guard_fraction)
        except MetricsError:
            continue
        scored.append((fun, x, design, metrics))
    if not scored:
        raise SynthesisError("no static capacitance choice produced a passband in the sweep")
    best_fun = min(s[0] for s in scored)
    ties = [s for s in scored if s[0] <= best_fun + 1e-9]
    fun, x, design, metrics = max(ties, key=lambda s: s[3].fbw_3db)
    return SynthesisResult(
        c0_shunt=10.0 ** x[0],
        c0_series=10.0 ** x[1],
        metrics=metrics,
        design=design,
        objective_db=-fun,
        candidates=candidates,
    )


# --- complex port matching -------------------------------------------------


@dataclass(frozen=True)
class MatchResult:
    z_source: complex
    z_load: complex
    gt_peak: float
    matched: Optional[FilterMetrics]
    reference: Optional[FilterMetrics]
    reference_z: complex
    matched_sweep: FrequencySweep = field(repr=False, default=None)


def _as_sweep(target, freqs):
    if isinstance(target, FrequencySweep):
        if target.kind != "s" or target.nports != 2:
            raise InputError("matching needs a two-port S sweep")
        ref = target.reference
        if any(z.imag != 0 for z in ref) or ref[0] != ref[1]:
            target = renormalize_sweep(target, 50.0, 50.0)
        return target
    if isinstance(target, LadderDesign):
        if freqs is None:
            raise InputError("matching a design needs a frequency grid")
        return simulate(target.with_ports(50.0), freqs)
    raise InputError("match target must be a LadderDesign or an S sweep")


def _metrics_or_none(sweep, guard_fraction):
    try:
        return extract_metrics(sweep, guard_fraction)
    except MetricsError:
        return None


def find_complex_match(
    target,
    freqs=None,
    *,
    r_range=(5.0, 200.0),
    x_range=(-100.0, 100.0),
    grid_step=2.0,
    independent_ports=False,
    band=None,
    guard_fraction=0.25,
):
    """Port impedance that maximizes the in-band peak power-wave transmission.

    ``target`` is a :class:`LadderDesign` (simulated on ``freqs``) or a
    measured two-port S sweep. By default both ports share one impedance
    ``r + jx``; it is found by a coarse ``grid_step`` search over
    ``r_range`` x ``x_range`` followed by Nelder-Mead refinement inside the
    same box. With ``independent_ports`` the refinement continues over both
    ports separately.

    ``band`` is the frequency range in which the peak is taken. It defaults
    to the 3-dB passband of the unmatched response, or the whole sweep when
    that response has no measurable passband. The sweep's own reference
    impedance is always a candidate, so the matched insertion loss never
    exceeds the unmatched one.
    """
    sweep = _as_sweep(target, freqs)
    z0 = sweep.reference[0].real
    reference = _metrics_or_none(sweep, guard_fraction)
    keep = ~sweep.flagged
    if band is None and reference is not None:
        band = (reference.band_lo, reference.band_hi)
    if band is not None:
        keep &= (sweep.freqs >= band[0]) & (sweep.freqs <= band[1])
    if not np.any(keep):
        raise InputError("no valid frequencies to match over")
    s = sweep.data[keep]

    def peak_gain(zs, zl):
        return np.max(transducer_gain_from_s(s, z0, zs, zl), axis=-1)

    r_lo, r_hi = r_range
    x_lo, x_hi = x_range
    if not 0 < r_lo <= r_hi or not x_lo <= x_hi:
        raise InputError("search box needs 0 < r_min <= r_max and x_min <= x_max")
    rs = np.arange(r_lo, r_hi + 1e-9, grid_step)
    xs = np.arange(x_lo, x_hi + 1e-9, grid_step)
    zgrid = (rs[:, None] + 1j * xs[None, :]).ravel()
    chunks = np.array_split(zgrid, max(1, zgrid.size // 256))
    gains = np.concatenate([peak_gain(c[:, None], c[:, None]) for c in chunks])
    k = int(np.argmax(gains))
    best_z, best_gain = complex(zgrid[k]), float(gains[k])
    ref_gain = float(peak_gain(z0, z0))
    if ref_gain >= best_gain:
        best_z, best_gain = complex(z0), ref_gain

    def inside(r, x):
        return r_lo <= r <= r_hi and x_lo <= x <= x_hi

    def cost_equal(v):
        if not inside(v[0], v[1]):
            return np.inf
        z = complex(v[0], v[1])
        return -float(peak_gain(z, z))

    res = nelder_mead(cost_equal, [best_z.real, best_z.imag], step=grid_step / 2, tol=1e-14)
    if -res.fun > best_gain:
        best_z, best_gain = complex(*res.x), -res.fun
    zs_opt = zl_opt = best_z

    if independent_ports:

        def cost_pair(v):
            if not (inside(v[0], v[1]) and inside(v[2], v[3])):
                return np.inf
            return -float(peak_gain(complex(v[0], v[1]), complex(v[2], v[3])))

        x0 = [best_z.real, best_z.imag, best_z.real, best_z.imag]
        res = nelder_mead(cost_pair, x0, step=grid_step / 2, tol=1e-14, max_iter=4000)
        if -res.fun > best_gain:
            zs_opt, zl_opt = complex(res.x[0], res.x[1]), complex(res.x[2], res.x[3])
            best_gain = -res.fun

    matched_sweep = renormalize_sweep(sweep, zs_opt, zl_opt)
    return MatchResult(
        z_source=zs_opt,
        z_load=zl_opt,
        gt_peak=best_gain,
        matched=_metrics_or_none(matched_sweep, guard_fraction),
        reference=reference,
        reference_z=complex(z0),
        matched_sweep=matched_sweep,
    )
