import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbvdkit import (
    BoundaryExtremumError,
    InputError,
    MbvdParams,
    ResonatorSpec,
    admittance,
    em_resonance_freq,
    fp_from_k2,
    k2_from_freqs,
    mbvd_from_spec,
    resonance_extrema,
    resonator_metrics,
)
from mbvdkit.mbvd import default_grid, reactive_resonances

from oracles import dense_argmax, lc_resonance, mbvd_y

REF = ResonatorSpec(fs=38e9, k2=0.41, q=10.0, c0=50e-15)


def params_tuple(p):
    return (p.c0, p.rm, p.lm, p.cm, p.rs, p.ls)


def test_k2_degenerate_and_errors():
    assert k2_from_freqs(38e9, 38e9) == 0.0
    with pytest.raises(InputError):
        k2_from_freqs(40e9, 39e9)
    with pytest.raises(InputError):
        k2_from_freqs(0.0, 1e9)


def test_k2_from_shunt_frequencies():
    assert k2_from_freqs(33e9, 38.55e9) == pytest.approx(0.450, abs=5e-4)


def test_k2_round_trip():
    fp = fp_from_k2(38e9, 0.41)
    assert fp == pytest.approx(43.86e9, rel=1e-4)
    assert k2_from_freqs(38e9, fp) == pytest.approx(0.41, abs=1e-12)


def test_spec_to_elements_closed_form():
    p = mbvd_from_spec(REF)
    assert p.cm == pytest.approx(16.62e-15, rel=1e-3)
    assert p.lm == pytest.approx(1.0557e-9, rel=1e-3)
    assert p.rm == pytest.approx(25.2, rel=1e-3)
    assert p.fs_core == pytest.approx(38e9, rel=1e-12)
    assert p.fp_core == pytest.approx(fp_from_k2(38e9, 0.41), rel=1e-12)


def test_spec_limits():
    weak = mbvd_from_spec(ResonatorSpec(fs=1e9, k2=1e-9, q=10, c0=1e-12))
    assert weak.cm < 1e-20
    sharp = mbvd_from_spec(ResonatorSpec(fs=1e9, k2=0.1, q=1e300, c0=1e-12))
    assert sharp.rm < 1e-280


def test_spec_invariants():
    for bad in (dict(k2=0.0), dict(k2=1.0), dict(q=-1.0), dict(fs=0.0), dict(c0=-1e-15)):
        kw = dict(fs=1e9, k2=0.1, q=10.0, c0=1e-12)
        kw.update(bad)
        with pytest.raises(InputError):
            ResonatorSpec(**kw)
    with pytest.raises(InputError):
        MbvdParams(c0=1e-12, rm=-1.0, lm=1e-9, cm=1e-14)


def test_admittance_at_fs_matches_oracle():
    p = mbvd_from_spec(REF)
    y = admittance(p, 38e9)
    assert y == pytest.approx(mbvd_y(38e9, *params_tuple(p)), rel=1e-12)
    assert y.real == pytest.approx(0.03968, rel=1e-3)
    assert y.imag == pytest.approx(0.01194, rel=1e-3)
    # Motional branch purely resistive at fs.
    assert (y - 1j * 2 * math.pi * 38e9 * p.c0).imag == pytest.approx(0.0, abs=1e-12)


def test_admittance_limits():
    p = mbvd_from_spec(REF)
    y = admittance(p, 1e9)
    assert y.imag == pytest.approx(2 * math.pi * 1e9 * (p.c0 + p.cm), rel=0.01)
    assert abs(y.imag - 4.19e-4) / 4.19e-4 < 0.01
    open_branch = MbvdParams(p.c0, 1e12, p.lm, p.cm)
    f = np.array([10e9, 40e9, 60e9])
    assert np.allclose(admittance(open_branch, f), 1j * 2 * math.pi * f * p.c0, rtol=1e-6)


@settings(max_examples=50, deadline=None)
@given(
    st.floats(1e9, 60e9),
    st.floats(0.01, 0.6),
    st.floats(5, 500),
    st.floats(5e-15, 500e-15),
)
def test_admittance_asymptotes(fs, k2, q, c0):
    p = mbvd_from_spec(ResonatorSpec(fs, k2, q, c0))
    low = np.linspace(fs / 1000, fs / 20, 20)
    y = admittance(p, low)
    w = 2 * math.pi * low
    assert np.all(np.abs(y - 1j * w * (p.c0 + p.cm)) / np.abs(y) < 0.01)
    high = np.linspace(3 * p.fp_core, 10 * p.fp_core, 20)
    y = admittance(p, high)
    w = 2 * math.pi * high
    assert np.all(np.abs(y - 1j * w * p.c0) / np.abs(y) < 0.05)


def test_admittance_vectorized_and_domain():
    p = mbvd_from_spec(REF)
    f = np.linspace(30e9, 50e9, 11)
    ref = np.array([mbvd_y(x, *params_tuple(p)) for x in f])
    assert np.allclose(admittance(p, f), ref, rtol=1e-12)
    with pytest.raises(InputError):
        admittance(p, 0.0)
    with pytest.raises(InputError):
        admittance(p, np.array([1e9, -1e9]))


def test_resonance_extrema_match_dense_search():
    # The |Y| extrema of a lossy resonator sit below fs / above fp; compare
    # the refined values with a brute-force argmax on a much finer grid.
    p = mbvd_from_spec(REF)
    grid = np.linspace(30e9, 50e9, 2001)
    fs_eff, fp_eff = resonance_extrema(p, grid)
    f_max, step = dense_argmax(lambda f: np.abs(admittance(p, f)), 36e9, 40e9)
    f_min, _ = dense_argmax(lambda f: -np.abs(admittance(p, f)), 42e9, 46e9)
    assert abs(fs_eff - f_max) < 2 * step
    assert abs(fp_eff - f_min) < 2 * step


def test_resonance_extrema_core_close_to_closed_form():
    # Loss moves the |Y| peak about 1.3% below fs at Q = 10; the parallel
    # extremum moves up by a similar amount.
    p = mbvd_from_spec(REF)
    fs_eff, fp_eff = resonance_extrema(p, default_grid(38e9, 43.86e9))
    assert fs_eff == pytest.approx(37.497e9, rel=5e-4)
    assert fp_eff > p.fp_core
    lossless_like = mbvd_from_spec(ResonatorSpec(38e9, 0.41, 1e5, 50e-15))
    fs_eff, fp_eff = resonance_extrema(lossless_like, default_grid(38e9, 43.86e9))
    assert fs_eff == pytest.approx(38e9, rel=5e-4)
    assert fp_eff == pytest.approx(43.86e9, rel=5e-4)


def test_routing_inductance_lowers_perceived_fs():
    core = mbvd_from_spec(REF)
    ls = 1 / ((2 * math.pi * 50e9) ** 2 * core.c0)
    routed = MbvdParams(core.c0, core.rm, core.lm, core.cm, 0.0, ls)
    grid = np.linspace(30e9, 48e9, 3001)
    assert resonance_extrema(routed, grid)[0] < resonance_extrema(core, grid)[0]
    assert resonator_metrics(routed, grid).fs_eff < resonator_metrics(core, grid).fs_eff


def test_lossless_extrema_return_grid_maximum():
    p = mbvd_from_spec(REF)
    lossless = MbvdParams(p.c0, 0.0, p.lm, p.cm)
    grid = np.linspace(30e9, 50e9, 1001)
    fs_eff, fp_eff = resonance_extrema(lossless, grid)
    k = int(np.argmax(np.abs(admittance(lossless, grid))))
    assert grid[k - 1] <= fs_eff <= grid[k + 1]
    assert fp_eff > fs_eff


def test_extrema_outside_grid():
    p = mbvd_from_spec(REF)
    with pytest.raises(BoundaryExtremumError):
        resonance_extrema(p, np.linspace(30e9, 36e9, 500))
    with pytest.raises(BoundaryExtremumError):
        resonator_metrics(p, np.linspace(39e9, 42e9, 500))


def test_em_resonance():
    p = mbvd_from_spec(REF)
    assert em_resonance_freq(p) is None
    q = MbvdParams(66.6e-15, p.rm, p.lm, p.cm, 0.0, 0.152e-9)
    assert em_resonance_freq(q) == pytest.approx(lc_resonance(0.152e-9, 66.6e-15), rel=1e-12)
    assert em_resonance_freq(q) == pytest.approx(50e9, rel=0.01)
    q2 = MbvdParams(66.6e-15, p.rm, p.lm, p.cm, 0.0, 0.304e-9)
    assert em_resonance_freq(q2) == pytest.approx(em_resonance_freq(q) / math.sqrt(2), rel=1e-12)


@pytest.mark.parametrize(
    "fs,k2,q",
    [(33e9, 0.30, 13.0), (38e9, 0.25, 10.0)],
)
def test_metrics_round_trip_measured_anchors(fs, k2, q):
    p = mbvd_from_spec(ResonatorSpec(fs, k2, q, 80e-15))
    m = resonator_metrics(p, default_grid(fs, fp_from_k2(fs, k2)))
    assert m.k2 == pytest.approx(k2, rel=5e-3)
    assert m.q == pytest.approx(q, rel=5e-3)
    assert m.fom == pytest.approx(k2 * q, rel=1e-2)
    assert m.fp_eff > m.fs_eff
    assert m.f_em is None


def test_shunt_fom():
    p = mbvd_from_spec(ResonatorSpec(33e9, 0.30, 13.0, 80e-15))
    m = resonator_metrics(p, default_grid(33e9, fp_from_k2(33e9, 0.3)))
    assert m.fom == pytest.approx(3.9, rel=1e-3)


def test_infinite_q_marker():
    p = mbvd_from_spec(REF)
    m = resonator_metrics(MbvdParams(p.c0, 0.0, p.lm, p.cm), default_grid(38e9, 43.86e9))
    assert math.isinf(m.q)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(1e9, 60e9),
    st.floats(0.01, 0.6),
    st.floats(5, 500),
    st.floats(5e-15, 500e-15),
)
def test_metrics_round_trip_property(fs, k2, q, c0):
    p = mbvd_from_spec(ResonatorSpec(fs, k2, q, c0))
    m = resonator_metrics(p, default_grid(fs, fp_from_k2(fs, k2)))
    assert m.fs_eff == pytest.approx(fs, rel=1e-3)
    assert m.k2 == pytest.approx(k2, rel=1e-3)
    assert m.q == pytest.approx(q, rel=1e-3)


def test_ratio_increases_with_coupling():
    grid = np.geomspace(20e9, 60e9, 4001)
    ratios = []
    for k2 in np.linspace(0.02, 0.6, 15):
        p = mbvd_from_spec(ResonatorSpec(33e9, k2, 13.0, 80e-15))
        m = resonator_metrics(p, grid)
        ratios.append(m.fp_eff / m.fs_eff)
    assert np.all(np.diff(ratios) > 0)


def test_reactive_resonances_report_em_zero():
    core = mbvd_from_spec(ResonatorSpec(33e9, 0.01, 13.0, 66e-15))
    routed = MbvdParams(core.c0, core.rm, core.lm, core.cm, 1.0, 0.152e-9)
    fs, fp, f_em = reactive_resonances(routed, np.linspace(25e9, 70e9, 4501))
    assert fs < core.fs_core < fp
    assert f_em == pytest.approx(50.4e9, rel=0.01)
