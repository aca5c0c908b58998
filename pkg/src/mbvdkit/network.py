"""Two-port network algebra in the frequency domain.

ABCD (transmission) matrices are plain complex arrays of shape ``(2, 2)`` or
``(N, 2, 2)`` for a frequency sweep. Scattering parameters use the usual
``[[S11, S12], [S21, S22]]`` layout.

Complex port references follow the power-wave definition

    a = (V + Z I) / (2 sqrt(Re Z)),   b = (V - conj(Z) I) / (2 sqrt(Re Z))

with port currents flowing into the network. For a real reference this
reduces to the ordinary travelling-wave S-parameters.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_complex, check_frequencies, check_port_impedance
from .exceptions import InputError, SingularNetworkError

SWEEP_KINDS = ("s", "abcd", "y")

# Reciprocal condition number below which a per-frequency solve is flagged.
_RCOND_LIMIT = 1e-13


@dataclass(frozen=True)
class FrequencySweep:
    """Network data on an ordered frequency grid.

    Parameters
    ----------
    freqs : array of float, shape (N,)
        Frequencies in Hz, strictly increasing.
    data : complex array
        ``(N, 2, 2)`` for ``kind`` "s"/"abcd", ``(N,)`` admittance in
        siemens for ``kind`` "y".
    kind : {"s", "abcd", "y"}
    reference : tuple of complex
        Port reference impedances in ohms (S data only). Two entries for a
        two-port, one for a one-port.
    flagged : bool array, shape (N,)
        Points where the computation was singular. Their data is NaN and
        metrics skip them.
    """

    freqs: np.ndarray
    data: np.ndarray
    kind: str = "s"
    reference: tuple = (50.0, 50.0)
    flagged: np.ndarray = field(default=None)

    def __post_init__(self):
        freqs = check_frequencies(self.freqs, allow_empty=True)
        if self.kind not in SWEEP_KINDS:
            raise InputError(f"unknown sweep kind {self.kind!r}")
        data = np.asarray(self.data, dtype=complex)
        if data.shape[:1] != freqs.shape:
            raise InputError(
                f"data length {data.shape[0] if data.ndim else 0} does not match "
                f"{freqs.size} frequencies"
            )
        if self.kind == "y" and data.ndim != 1:
            raise InputError("admittance sweeps hold one complex value per point")
        if self.kind in ("s", "abcd") and data.shape[1:] not in ((2, 2), (1, 1)):
            raise InputError(f"matrix sweeps need (N, 2, 2) data, got {data.shape}")
        flagged = (
            np.zeros(freqs.size, dtype=bool)
            if self.flagged is None
            else np.asarray(self.flagged, dtype=bool)
        )
        if flagged.shape != freqs.shape:
            raise InputError("flagged mask must match the frequency grid")
        if not np.all(np.isfinite(data[~flagged])):
            raise InputError("network data must be finite at unflagged points")
        reference = tuple(complex(z) for z in np.atleast_1d(self.reference))
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "flagged", flagged)
        object.__setattr__(self, "reference", reference)

    def __len__(self):
        return self.freqs.size

    @property
    def nports(self):
        return 1 if self.kind == "y" else self.data.shape[1]

    @property
    def s21(self):
        return self.data[:, 1, 0]

    @property
    def s11(self):
        return self.data[:, 0, 0]

    @property
    def s22(self):
        return self.data[:, 1, 1]


def series_abcd(z):
    """ABCD matrix of a series impedance ``z`` (ohms); vectorized over ``z``."""
    z = check_complex(z, name="series impedance")
    m = np.zeros(z.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = 1.0
    m[..., 0, 1] = z
    m[..., 1, 1] = 1.0
    return m


def shunt_abcd(y):
    """ABCD matrix of a shunt admittance ``y`` (siemens); vectorized over ``y``."""
    y = check_complex(y, name="shunt admittance")
    m = np.zeros(y.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = 1.0
    m[..., 1, 0] = y
    m[..., 1, 1] = 1.0
    return m


def cascade(stages):
    """Chain ABCD matrices left to right; port 1 is the input of ``stages[0]``."""
    stages = list(stages)
    if not stages:
        raise InputError("cannot cascade an empty list of stages")
    out = np.asarray(stages[0], dtype=complex)
    for m in stages[1:]:
        out = out @ np.asarray(m, dtype=complex)
    return out


def _abcd_parts(m):
    m = np.asarray(m, dtype=complex)
    if m.shape[-2:] != (2, 2):
        raise InputError(f"ABCD data must end in (2, 2), got {m.shape}")
    return m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]


def _abcd_to_s(m, z0):
    """Vectorized conversion returning ``(s, singular_mask)``."""
    a, b, c, d = _abcd_parts(m)
    den = a + b / z0 + c * z0 + d
    bad = ~np.isfinite(den) | (den == 0)
    den = np.where(bad, 1.0, den)
    det = a * d - b * c
    s = np.empty(np.shape(a) + (2, 2), dtype=complex)
    s[..., 0, 0] = (a + b / z0 - c * z0 - d) / den
    s[..., 0, 1] = 2.0 * det / den
    s[..., 1, 0] = 2.0 / den
    s[..., 1, 1] = (-a + b / z0 - c * z0 + d) / den
    s[bad] = np.nan
    return s, np.asarray(bad)


def abcd_to_s(m, z0=50.0):
    """Convert ABCD data to S-parameters referenced to a real ``z0``.

    Raises
    ------
    SingularNetworkError
        If ``A + B/z0 + C z0 + D`` vanishes at any point.
    """
    z0 = float(z0)
    if not (np.isfinite(z0) and z0 > 0):
        raise InputError(f"z0 must be a positive real number, got {z0}")
    s, bad = _abcd_to_s(m, z0)
    if np.any(bad):
        raise SingularNetworkError("ABCD to S conversion is singular")
    return s


def s_to_abcd(s, z0=50.0):
    """Inverse of :func:`abcd_to_s` for a real ``z0``; singular where S21 = 0."""
    s = np.asarray(s, dtype=complex)
    s11, s12, s21, s22 = s[..., 0, 0], s[..., 0, 1], s[..., 1, 0], s[..., 1, 1]
    if np.any(s21 == 0):
        raise SingularNetworkError("S21 = 0 has no ABCD representation")
    m = np.empty_like(s)
    m[..., 0, 0] = ((1 + s11) * (1 - s22) + s12 * s21) / (2 * s21)
    m[..., 0, 1] = z0 * ((1 + s11) * (1 + s22) - s12 * s21) / (2 * s21)
    m[..., 1, 0] = ((1 - s11) * (1 - s22) - s12 * s21) / (2 * s21 * z0)
    m[..., 1, 1] = ((1 - s11) * (1 + s22) + s12 * s21) / (2 * s21)
    return m


def transducer_gain(m, zs, zl):
    """Transducer gain and input power-wave reflection of a terminated two-port.

    The network is driven by a unit EMF with internal impedance ``zs`` and
    loaded by ``zl``. Solving the terminal equations directly,

        V2 = zl / (A zl + B + zs (C zl + D)),

    and ``gt = P_load / P_avail`` with ``P_avail = 1 / (8 Re zs)``.

    Returns
    -------
    gt : float or ndarray
    gamma_in : complex or ndarray
        ``(Z_in - conj(zs)) / (Z_in + zs)``, evaluated in a form that stays
        finite when ``Z_in`` is infinite.
    """
    zs = check_port_impedance(zs, "source impedance")
    zl = check_port_impedance(zl, "load impedance")
    a, b, c, d = _abcd_parts(m)
    num_in = a * zl + b  # Z_in = num_in / den_in
    den_in = c * zl + d
    den = num_in + zs * den_in
    if np.any(~np.isfinite(den) | (den == 0)):
        raise SingularNetworkError("terminated network has a singular node")
    v2 = zl / den
    p_load = 0.5 * np.abs(v2) ** 2 * zl.real / abs(zl) ** 2
    gt = p_load * 8.0 * zs.real
    gamma_in = (num_in - zs.conjugate() * den_in) / den
    if np.ndim(gt) == 0:
        return float(gt), complex(gamma_in)
    return gt, gamma_in


def _power_wave_solve(s, ref_in, ref_out):
    """Re-reference S data from power-wave ports ``ref_in`` to ``ref_out``.

    Each port is terminated in its new reference impedance and driven in turn
    with a unit EMF. The wave amplitudes at the ports follow from the linear
    system ``(D1 + D2 S) a = E``; port voltages and currents then give the
    new power waves. Returns ``(s_new, flagged)``.
    """
    n = s.shape[-1]
    zr = np.asarray(ref_in, dtype=complex)
    zn = np.asarray(ref_out, dtype=complex)
    sqr = np.sqrt(zr.real)
    sqn = np.sqrt(zn.real)
    d1 = (zr.conj() + zn) / sqr
    d2 = (zr - zn) / sqr
    mat = d1[:, None] * np.eye(n) + d2[:, None] * s
    flagged = np.zeros(s.shape[0], dtype=bool)
    with np.errstate(all="ignore"):
        rcond = 1.0 / np.linalg.cond(mat)
    flagged |= ~np.isfinite(rcond) | (rcond < _RCOND_LIMIT)
    mat[flagged] = np.eye(n)
    a = np.linalg.solve(mat, np.broadcast_to(np.eye(n), mat.shape))
    b = s @ a
    b[flagged] = 0.0
    v = (zr.conj()[:, None] * a + zr[:, None] * b) / sqr[:, None]
    i = (a - b) / sqr[:, None]
    a_new = (v + zn[:, None] * i) / (2 * sqn[:, None])
    b_new = (v - zn.conj()[:, None] * i) / (2 * sqn[:, None])
    # a_new is diagonal: only the driven port sees an incident wave.
    diag = np.diagonal(a_new, axis1=-2, axis2=-1)
    s_new = b_new / diag[:, None, :]
    s_new[flagged] = np.nan
    return s_new, flagged


def renormalize_sweep(sweep, zs, zl=None):
    """Re-reference an S-parameter sweep to power-wave ports ``(zs, zl)``.

    ``zl`` defaults to ``zs``. Renormalizing to the sweep's own reference is
    the identity; ``|S21'|**2`` equals :func:`transducer_gain` for the same
    terminations. Points where the terminated solve is ill-conditioned are
    flagged rather than raising.
    """
    if sweep.kind != "s":
        raise InputError("renormalize_sweep expects S-parameter data")
    zs = check_port_impedance(zs, "source impedance")
    zl = zs if zl is None else check_port_impedance(zl, "load impedance")
    n = sweep.nports
    ref_out = (zs,) if n == 1 else (zs, zl)
    if len(sweep) == 0:
        return FrequencySweep(sweep.freqs, sweep.data, "s", ref_out)
    ref_in = sweep.reference if len(sweep.reference) == n else sweep.reference[:1] * n
    data = np.where(sweep.flagged[:, None, None], 0.0, sweep.data)
    s_new, flagged = _power_wave_solve(data, ref_in, ref_out)
    flagged |= sweep.flagged
    s_new[flagged] = np.nan
    return FrequencySweep(sweep.freqs, s_new, "s", ref_out, flagged)


def transducer_gain_from_s(s, z0, zs, zl):
    """Transducer gain of S data (real ``z0``) between terminations ``zs``, ``zl``.

    Uses the reflection-coefficient form
    ``|S21|^2 (1-|Gs|^2)(1-|Gl|^2) / |(1-S11 Gs)(1-S22 Gl) - S12 S21 Gs Gl|^2``.
    ``zs`` and ``zl`` may be arrays broadcasting against the frequency axis.
    """
    s = np.asarray(s, dtype=complex)
    zs = np.asarray(zs, dtype=complex)
    zl = np.asarray(zl, dtype=complex)
    gs = (zs - z0) / (zs + z0)
    gl = (zl - z0) / (zl + z0)
    s11, s12, s21, s22 = s[..., 0, 0], s[..., 0, 1], s[..., 1, 0], s[..., 1, 1]
    den = (1 - s11 * gs) * (1 - s22 * gl) - s12 * s21 * gs * gl
    with np.errstate(all="ignore"):
        return np.abs(s21) ** 2 * (1 - np.abs(gs) ** 2) * (1 - np.abs(gl) ** 2) / np.abs(den) ** 2


def abcd_to_power_wave_s(m, zs, zl):
    """Power-wave S-parameters of ABCD data terminated in ``zs`` and ``zl``.

    Returns ``(s, singular_mask)``. All four entries share the denominator
    ``A zl + B + zs (C zl + D)`` of the terminated circuit, so a real
    ``zs == zl`` reproduces :func:`abcd_to_s`.
    """
    a, b, c, d = _abcd_parts(m)
    den = a * zl + b + zs * (c * zl + d)
    bad = np.asarray(~np.isfinite(den) | (den == 0))
    den = np.where(bad, 1.0, den)
    k = 2.0 * np.sqrt(zs.real * zl.real)
    s = np.empty(np.shape(a) + (2, 2), dtype=complex)
    s[..., 0, 0] = (a * zl + b - zs.conjugate() * (c * zl + d)) / den
    s[..., 0, 1] = k * (a * d - b * c) / den
    s[..., 1, 0] = k / den
    s[..., 1, 1] = (d * zs + b - zl.conjugate() * (c * zs + a)) / den
    s[bad] = np.nan
    return s, bad


def abcd_sweep_to_s(freqs, abcd, zs=50.0, zl=None, flagged=None):
    """Build an S sweep from per-frequency ABCD data and port impedances.

    ``zl`` defaults to ``zs``. Points already flagged, or where the
    terminated circuit is singular, are flagged in the result.
    """
    zs = check_port_impedance(zs, "port 1 impedance")
    zl = zs if zl is None else check_port_impedance(zl, "port 2 impedance")
    freqs = np.asarray(freqs, dtype=float)
    flagged = np.zeros(freqs.size, dtype=bool) if flagged is None else np.asarray(flagged)
    abcd = np.where(flagged[:, None, None], np.eye(2), abcd)
    s, bad = abcd_to_power_wave_s(abcd, zs, zl)
    bad = bad | flagged
    s[bad] = np.nan
    return FrequencySweep(freqs, s, "s", (zs, zl), bad)
