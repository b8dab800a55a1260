import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pinosc.analysis import (
    AnalysisConfig, FitFailure, OscillationMetrics, Spectrum, Thresholds, TimeTrace,
    analyze_trace, build_phase_map, classify_oscillation, fft_spectrum, fit_biexponential,
    fit_damped_cosine, fit_lorentzian_peak, lorentzian, max_frequency_vs_temperature,
)

DT = 10e-9


def _tone(f=1e6, n=3000, dt=DT, amp=1.0, tau=math.inf, phase=0.0, offset=0.0):
    t = np.arange(n) * dt
    x = offset + amp * np.exp(-t / tau) * np.cos(2 * np.pi * f * t + phase)
    return TimeTrace(0.0, dt, x, "arb", "x")


# ----------------------------------------------------------------------------
# traces

def test_trace_invariants_and_window():
    tr = TimeTrace(1.0, 0.5, np.arange(10.0))
    assert tr.duration == 4.5
    w = tr.window(1.0, 2.0)
    assert w.t0 == 2.0 and list(w.samples) == [2.0, 3.0, 4.0]
    with pytest.raises(ValueError):
        TimeTrace(0.0, 0.0, np.zeros(4))
    with pytest.raises(ValueError):
        TimeTrace(0.0, 1.0, np.zeros(1))
    with pytest.raises(ValueError):
        tr.window(100.0, 200.0)
    assert tr.scaled(2.0) == TimeTrace(1.0, 0.5, 2 * np.arange(10.0))


# ----------------------------------------------------------------------------
# spectrum

def test_cosine_on_bin_single_dominant_bin():
    n = 1024
    k = 37
    x = np.cos(2 * np.pi * k * np.arange(n) / n)
    spec = fft_spectrum(TimeTrace(0.0, DT, x), pad_factor=1, window="rectangular")
    assert spec.n_fft == n
    assert int(np.argmax(spec.magnitude)) == k
    assert spec.magnitude[k] == pytest.approx(1.0, rel=1e-12)
    others = np.delete(spec.magnitude, k)
    assert others.max() <= 1e-10


def test_constant_trace_has_zero_spectrum():
    spec = fft_spectrum(TimeTrace(0.0, DT, np.full(100, 3.7)))
    assert np.max(spec.magnitude) <= 1e-12


def test_tone_within_half_padded_bin():
    spec = fft_spectrum(_tone(1e6, 3000), pad_factor=16, window="hann")
    f_peak = spec.freqs[int(np.argmax(spec.magnitude))]
    assert abs(f_peak - 1e6) <= 0.5 * spec.bin_width


@settings(max_examples=50, deadline=None)
@given(f=st.floats(2e5, 2e7), n=st.integers(500, 4000), pad=st.integers(8, 32))
def test_tone_recovered_for_padding_of_eight_or_more(f, n, pad):
    if f * n * DT < 5:
        return
    spec = fft_spectrum(_tone(f, n), pad_factor=pad)
    f_peak = spec.freqs[int(np.argmax(spec.magnitude))]
    # the hann main lobe is 4/(n dt) wide; the padded grid resolves it to half a bin
    assert abs(f_peak - f) <= 0.5 * spec.bin_width + 0.05 / (n * DT)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(8, 600))
def test_spectrum_linearity(seed, n):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=n), rng.normal(size=n) * 1e3
    sa, sb, sab = (fft_spectrum(TimeTrace(0.0, DT, x), 1, "rectangular")
                   for x in (a, b, a + b))
    scale = np.abs(sab.values).max()
    assert np.allclose(sab.values, sa.values + sb.values, rtol=0, atol=1e-8 * scale)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(8, 600))
def test_parseval_unpadded(seed, n):
    x = np.random.default_rng(seed).normal(size=n)
    spec = fft_spectrum(TimeTrace(0.0, DT, x), 1, "rectangular")
    xc = x - x.mean()
    assert spec.energy() == pytest.approx(float(np.sum(xc * xc)), rel=1e-10)


def test_spectrum_argument_checks():
    tr = _tone()
    with pytest.raises(ValueError):
        fft_spectrum(TimeTrace(0.0, DT, np.zeros(7)))
    with pytest.raises(ValueError):
        fft_spectrum(tr, pad_factor=0)
    with pytest.raises(ValueError):
        fft_spectrum(tr, window="blackman")


# ----------------------------------------------------------------------------
# Lorentzian

def _synthetic_line(A=5.0, gamma=50e3, f0=2e6, noise=0.01, seed=0):
    f = np.arange(0.0, 10e6, 2e3)
    rng = np.random.default_rng(seed)
    power = lorentzian(f, A, gamma, f0) + noise * A * np.abs(rng.normal(size=f.size))
    return Spectrum.from_power(f, power)


@pytest.mark.parametrize("seed", range(10))
def test_lorentzian_recovered_with_noise(seed):
    fit = fit_lorentzian_peak(_synthetic_line(seed=seed), (1e6, 3e6))
    assert not fit.absent
    assert fit.A == pytest.approx(5.0, rel=0.05)
    assert fit.gamma == pytest.approx(50e3, rel=0.05)
    assert fit.f0 == pytest.approx(2e6, rel=0.05)


def test_flat_spectrum_is_absent():
    f = np.arange(0.0, 10e6, 2e3)
    fit = fit_lorentzian_peak(Spectrum.from_power(f, np.ones_like(f)), (1e6, 3e6))
    assert fit.absent and fit.A == 0.0 and math.isinf(fit.gamma) and math.isnan(fit.f0)


def test_lorentzian_band_checks():
    spec = _synthetic_line()
    with pytest.raises(ValueError):
        fit_lorentzian_peak(spec, (3e6, 1e6))
    with pytest.raises(ValueError):
        fit_lorentzian_peak(spec, (20e6, 30e6))


# ----------------------------------------------------------------------------
# damped cosine

def test_pure_cosine_flags_no_damping():
    fit = fit_damped_cosine(_tone(3e6, 2000), 2.9e6)
    assert fit.no_damping and math.isinf(fit.tau_d) and fit.gamma == 0.0
    assert fit.f == pytest.approx(3e6, rel=0.005)


def test_pure_exponential_is_not_an_oscillation():
    t = np.arange(2000) * DT
    tr = TimeTrace(0.0, DT, np.exp(-t / 3e-6))
    try:
        fit = fit_damped_cosine(tr, 1e6)
    except FitFailure:
        return
    # if a fit is returned it must not claim a well-fitted finite oscillation
    assert fit.f * tr.duration < 1.0 or fit.residual > 0.1


@pytest.mark.parametrize("seed", range(5))
def test_damped_cosine_recovered_with_noise(seed):
    rng = np.random.default_rng(seed)
    tr = _tone(3e6, 2000, tau=5e-6, phase=0.7)
    noisy = TimeTrace(0.0, DT, tr.samples + 0.02 * rng.normal(size=2000))
    fit = fit_damped_cosine(noisy, 3e6)
    assert fit.A0 == pytest.approx(1.0, rel=0.05)
    assert fit.f == pytest.approx(3e6, rel=0.05)
    assert fit.tau_d == pytest.approx(5e-6, rel=0.05)
    assert abs(fit.phase - 0.7) <= 0.05


def test_damped_cosine_needs_three_periods():
    with pytest.raises(ValueError):
        fit_damped_cosine(_tone(1e5, 200), 1e5)


@pytest.mark.parametrize("f, tau", [(2e6, 2e-6), (1e6, 4e-6), (5e6, 1e-6), (3e6, 3e-6)])
def test_linewidth_matches_decay_time(f, tau):
    # >= 10 periods and >= 5 decay constants of data
    n = int(round(6 * tau / DT))
    tr = _tone(f, n, tau=tau)
    assert f * tr.duration >= 10
    fit_t = fit_damped_cosine(tr, f)
    spec = fft_spectrum(tr, pad_factor=8, window="rectangular")
    fit_f = fit_lorentzian_peak(spec, (0.2 * f, 3 * f))
    assert fit_t.gamma == pytest.approx(1 / (math.pi * tau), rel=1e-3)
    assert fit_f.gamma == pytest.approx(fit_t.gamma, rel=0.15)


# ----------------------------------------------------------------------------
# bi-exponential

def _biexp(tau1=522e-9, tau2=2.39e-6, ratio=5.0, noise=0.01, seed=0, n=2000):
    t = np.arange(n) * DT
    clean = ratio * np.exp(-t / tau1) + np.exp(-t / tau2)
    rng = np.random.default_rng(seed)
    return TimeTrace(0.0, DT, clean * (1 + noise * rng.normal(size=n)), "ph/s", "decay")


@pytest.mark.parametrize("seed", range(10))
def test_biexponential_lifetimes_recovered(seed):
    fit = fit_biexponential(_biexp(seed=seed))
    assert not fit.single
    assert fit.tau1 == pytest.approx(522e-9, rel=0.03)
    assert fit.tau2 == pytest.approx(2.39e-6, rel=0.03)
    assert fit.A1 / fit.A2 == pytest.approx(5.0, rel=0.1)


def test_single_exponential_branch():
    t = np.arange(2000) * DT
    rng = np.random.default_rng(1)
    tr = TimeTrace(0.0, DT, np.exp(-t / 522e-9) + 0.002 * rng.normal(size=2000))
    fit = fit_biexponential(tr)
    assert fit.single and fit.A2 == 0.0
    assert fit.tau1 == pytest.approx(522e-9, rel=0.03)


@pytest.mark.parametrize("seed", range(3))
def test_equal_lifetimes_stay_bounded(seed):
    tr = _biexp(tau1=1e-6, tau2=1e-6, ratio=1.0, seed=seed)
    fit = fit_biexponential(tr)
    bound = 10 * np.ptp(tr.samples)
    assert abs(fit.A1) <= bound and abs(fit.A2) <= bound
    if not fit.single:
        assert fit.tau1 <= fit.tau2
    total = fit.A1 + fit.A2
    assert total == pytest.approx(2.0, rel=0.05)


# ----------------------------------------------------------------------------
# classification

CFG = AnalysisConfig()


def test_undamped_cosine_is_stable():
    m = analyze_trace(_tone(1e6, 3000), CFG)
    assert m.phase_class == "stable"
    assert m.peak_frequency == pytest.approx(1e6, rel=1e-3)
    assert m.strength == m.amplitude / m.linewidth


def test_tenth_span_decay_is_damped():
    tr = _tone(1e6, 3000, tau=3000 * DT / 10)
    m = analyze_trace(tr, CFG)
    # late / early quarter rms of the analyzed window: about exp(-0.75 span / tau)
    assert m.amplitude_ratio == pytest.approx(math.exp(-0.75 * 0.9 * 10), rel=0.3)
    assert m.phase_class == "damped"
    assert m.linewidth > 0


def test_white_noise_is_absent():
    absent = 0
    for seed in range(100):
        x = np.random.default_rng(seed).normal(size=3000)
        m = analyze_trace(TimeTrace(0.0, DT, x), CFG)
        absent += m.phase_class == "absent"
        if m.phase_class == "absent":
            assert m.strength == 0.0 and m.amplitude == 0.0 and math.isinf(m.linewidth)
    assert absent >= 99


def test_settled_trace_is_absent():
    x = 5.0 + 1e-9 * np.cos(2 * np.pi * 1e6 * np.arange(3000) * DT)
    assert analyze_trace(TimeTrace(0.0, DT, x), CFG).phase_class == "absent"


@settings(max_examples=40, deadline=None)
@given(c=st.floats(1e-9, 1e9), kind=st.sampled_from(["stable", "damped", "noise"]))
def test_class_invariant_under_scaling(c, kind):
    if kind == "stable":
        tr = _tone(1e6, 3000)
    elif kind == "damped":
        tr = _tone(1e6, 3000, tau=3e-6)
    else:
        tr = TimeTrace(0.0, DT, np.random.default_rng(3).normal(size=3000))
    a = analyze_trace(tr, CFG)
    b = analyze_trace(tr.scaled(c), CFG)
    assert a.phase_class == b.phase_class


def test_absolute_threshold_mode():
    tr = _tone(1e6, 3000)
    m = analyze_trace(tr, CFG)
    body = tr.window(0.1 * tr.duration, tr.duration)
    assert classify_oscillation(m, body, Thresholds(mode="absolute", strength=0.0)) == "stable"
    high = Thresholds(mode="absolute", strength=10 * m.strength)
    assert classify_oscillation(m, body, high) == "absent"


def test_metrics_dict_round_trip():
    m = analyze_trace(_tone(1e6, 3000), CFG)
    assert OscillationMetrics.from_dict(m.to_dict()) == m


# ----------------------------------------------------------------------------
# phase maps

def _m(cls, strength=1.0, f0=1e6):
    if cls == "absent":
        return OscillationMetrics(math.nan, 0.0, math.inf, 0.0, "absent", math.nan)
    return OscillationMetrics(f0, strength, 1.0, strength, cls, 0.01)


def _grid_cells():
    cells = []
    classes = {(8.0, 6.0): "stable", (8.5, 6.0): "stable", (8.5, 9.0): "damped"}
    for V in (7.5, 8.0, 8.5, 9.0):
        for T in (6.0, 9.0, 12.0):
            cls = classes.get((V, T), "absent")
            cells.append((V, T, _m(cls, strength=V * T, f0=1e6 * V / T)))
    return cells


def test_single_cell_map():
    pm = build_phase_map([(8.0, 6.0, _m("stable", 2.0))])
    assert pm.strength.shape == (1, 1) and pm.classes[0, 0] == "stable"
    assert pm.island_bounding_box() == (8.0, 8.0, 6.0, 6.0)


def test_all_absent_map():
    cells = [(V, T, _m("absent")) for V in (1.0, 2.0) for T in (3.0, 4.0)]
    pm = build_phase_map(cells)
    assert pm.island_bounding_box() is None
    assert max_frequency_vs_temperature(pm) == []
    assert pm.summary()["stable_island"] is None


def test_map_geometry_and_summaries():
    pm = build_phase_map(_grid_cells())
    assert pm.strength.shape == (3, 4)
    assert list(pm.voltages) == [7.5, 8.0, 8.5, 9.0]
    assert pm.island_bounding_box() == (8.0, 8.5, 6.0, 6.0)
    assert pm.island_bounding_box("damped") == (8.5, 8.5, 9.0, 9.0)
    assert max_frequency_vs_temperature(pm) == [(6.0, pytest.approx(8.5e6 / 6)),
                                               (9.0, pytest.approx(8.5e6 / 9))]
    assert pm.max_strength_cell() == (8.5, 9.0, 8.5 * 9.0)
    s = pm.summary()
    assert s["class_counts"] == {"stable": 2, "damped": 1, "absent": 9, "missing": 0}


def test_single_stable_cell_frequency():
    pm = build_phase_map([(8.0, 6.0, _m("stable", f0=2e6))])
    assert max_frequency_vs_temperature(pm) == [(6.0, 2e6)]


def test_missing_cells_flagged_not_zero():
    cells = _grid_cells()
    V, T, _ = cells[5]
    cells[5] = (V, T, None)
    pm = build_phase_map(cells)
    it = list(pm.temperatures).index(T)
    iv = list(pm.voltages).index(V)
    assert pm.missing[it, iv] and math.isnan(pm.strength[it, iv])
    assert pm.metrics[it][iv] is None
    assert pm.summary()["class_counts"]["missing"] == 1


def test_map_rejects_duplicates_and_holes():
    cells = _grid_cells()
    with pytest.raises(ValueError):
        build_phase_map(cells + [cells[0]])
    with pytest.raises(ValueError):
        build_phase_map(cells[1:])
    with pytest.raises(ValueError):
        build_phase_map([])


@settings(max_examples=30, deadline=None)
@given(st.randoms(use_true_random=False))
def test_map_independent_of_cell_order(rnd):
    cells = _grid_cells()
    shuffled = cells[:]
    rnd.shuffle(shuffled)
    a, b = build_phase_map(cells), build_phase_map(shuffled)
    assert np.array_equal(a.strength, b.strength)
    assert np.array_equal(a.classes, b.classes)
    assert a.metrics == b.metrics


def test_normalized_strength():
    pm = build_phase_map(_grid_cells())
    ns = pm.normalized_strength
    assert np.nanmax(ns) == 1.0
