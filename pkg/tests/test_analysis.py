import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpecho.analysis import (
    comb_echo_period,
    detect_echo_window,
    echo_efficiency,
    echo_fidelity,
    find_temporal_nodes,
    fourier_transform,
    measure_echoes,
    peak_time,
    spectrum,
)
from gpecho.constants import PhysicalConstants, redshift_gradient
from gpecho.errors import InsufficientNodes, NoEchoFound, TruncationWarning, UndefinedFidelity
from gpecho.solver import BoundaryRecord

T = np.arange(0.0, 400.0 + 1e-9, 0.02)


def gauss(t0, tau, amp=1.0, t=T):
    return amp * np.exp(-(((t - t0) / tau) ** 2)).astype(complex)


def rec(omega, label="r", t=T):
    return BoundaryRecord(t, np.asarray(omega, complex), label)


# -- spectra ------------------------------------------------------------------

def test_self_spectrum_peaks_at_one_at_zero():
    r = rec(gauss(50.0, 10.0))
    s = spectrum(r, r, 1 / 1740)
    assert s.s_values.max() == pytest.approx(1.0, rel=1e-12)
    assert s.omega_gamma0[np.argmax(s.s_values)] == pytest.approx(0.0, abs=1e-9)
    np.testing.assert_allclose(s.omega_gamma0[:3], [-400.0, -399.9, -399.8])


def test_gaussian_fourier_transform():
    r = rec(gauss(50.0, 10.0))
    omega, f = fourier_transform(r, -0.5, 0.01, 101)
    exact = 10.0 * math.sqrt(math.pi) * np.exp(-(omega ** 2) * 100 / 4) * np.exp(1j * omega * 50.0)
    np.testing.assert_allclose(f, exact, rtol=1e-9, atol=1e-12)


def test_parseval_on_full_grid():
    rng = np.random.default_rng(1)
    n = 2000
    t = np.arange(n) * 0.1
    r = rec(rng.normal(size=n) + 1j * rng.normal(size=n), t=t)
    d_omega = 2 * math.pi / (n * 0.1)
    _, f = fourier_transform(r, 0.0, d_omega, n)
    energy_t = np.sum(r.intensity) * 0.1
    energy_w = np.sum(np.abs(f) ** 2) * d_omega / (2 * math.pi)
    assert energy_w == pytest.approx(energy_t, rel=1e-6)


def test_spectrum_of_delayed_copy_is_unchanged():
    a = rec(gauss(50.0, 10.0))
    b = rec(gauss(150.0, 10.0, amp=0.5j))
    s = spectrum(b, a, 1 / 1740)
    np.testing.assert_allclose(s.s_values, 0.25 * spectrum(a, a, 1 / 1740).s_values, rtol=1e-9)


def test_truncation_warning():
    r = rec(gauss(395.0, 10.0))
    with pytest.warns(TruncationWarning):
        s = spectrum(r, r, 1 / 1740)
    assert s.truncated
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert not spectrum(rec(gauss(50.0, 10.0)), rec(gauss(50.0, 10.0)), 1 / 1740).truncated


def test_spectrum_errors():
    r = rec(gauss(50.0, 10.0))
    with pytest.raises(ValueError):
        spectrum(r, rec(np.zeros_like(T)), 1 / 1740)
    with pytest.raises(ValueError):
        spectrum(r, rec(gauss(50.0, 10.0)[:-1], t=T[:-1]), 1 / 1740)
    with pytest.raises(ValueError):
        spectrum(r, r, 1 / 1740, resolution=0.0)


def test_local_extremum():
    r = rec(gauss(50.0, 10.0) + gauss(150.0, 10.0))
    s = spectrum(r, rec(gauss(50.0, 10.0)), 1 / 1740, half_width=100.0)
    # cos^2 modulation with zeros at w = pi / 100 (2k+1)
    w, v = s.local_extremum(math.pi / 100 * 1740, 1.0, "min")
    assert w == pytest.approx(math.pi / 100 * 1740, abs=0.1)
    assert v < 1e-3
    assert s.local_extremum(0.0, 1.0, "max")[1] == pytest.approx(4.0, rel=1e-9)
    assert s.local_extremum(0.0, 0.01, "min") is None


# -- efficiency and fidelity ----------------------------------------------------

def test_efficiency_of_identical_record_is_one():
    r = rec(gauss(50.0, 10.0))
    assert echo_efficiency(r, r, (0.0, 400.0)) == pytest.approx(1.0, rel=1e-12)


def test_fidelity_of_delayed_copy_is_one():
    a = rec(gauss(50.0, 10.0))
    b = rec(gauss(130.0, 10.0, amp=0.3))
    assert echo_fidelity(b, a, (80.0, 180.0), 80.0) == pytest.approx(1.0, rel=1e-9)
    assert echo_fidelity(b, a, (80.0, 180.0), 70.0) < 0.8


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 100.0), st.floats(-math.pi, math.pi))
def test_fidelity_invariant_under_complex_scaling(mag, phase):
    a = rec(gauss(50.0, 10.0))
    b = rec(gauss(120.0, 12.0) + gauss(140.0, 5.0, amp=0.2j))
    f0 = echo_fidelity(b, a, (80.0, 200.0), 75.0)
    fb = echo_fidelity(rec(mag * np.exp(1j * phase) * b.omega), a, (80.0, 200.0), 75.0)
    assert fb == pytest.approx(f0, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 100.0))
def test_efficiency_scales_quadratically(s):
    a = rec(gauss(50.0, 10.0))
    b = rec(gauss(120.0, 12.0, amp=0.4))
    r0 = echo_efficiency(b, a, (80.0, 200.0))
    assert echo_efficiency(rec(s * b.omega), a, (80.0, 200.0)) == pytest.approx(s * s * r0, rel=1e-9)


def test_metric_errors():
    a = rec(gauss(50.0, 10.0))
    z = rec(np.zeros_like(T))
    with pytest.raises(UndefinedFidelity):
        echo_fidelity(z, a, (80.0, 200.0), 50.0)
    with pytest.raises(ValueError, match="empty window"):
        echo_efficiency(a, a, (100.0, 100.0))
    with pytest.raises(ValueError, match="outside"):
        echo_efficiency(a, a, (300.0, 500.0))
    with pytest.raises(NoEchoFound):
        echo_efficiency(a, z, (0.0, 100.0))


def test_peak_time_refines_between_samples():
    r = rec(gauss(100.013, 10.0))
    assert peak_time(r, (50.0, 150.0)) == pytest.approx(100.013, abs=1e-4)


# -- nodes ------------------------------------------------------------------------

def test_nodes_of_decaying_cosine():
    w0 = 0.3
    r = rec(np.exp(-0.01 * T) * np.cos(w0 * T))
    nodes = find_temporal_nodes(r, 0.0, 5)
    expected = [(2 * k + 1) * math.pi / (2 * w0) for k in range(5)]
    np.testing.assert_allclose(nodes, expected, atol=1e-4)
    assert find_temporal_nodes(r, 0.0, 0) == []
    later = find_temporal_nodes(r, 20.0, 1)[0]
    assert later == pytest.approx(5 * math.pi / (2 * w0), abs=1e-4)
    with pytest.raises(InsufficientNodes) as info:
        find_temporal_nodes(r, 0.0, 1000)
    assert info.value.requested == 1000


def test_fig2_reference_first_node(preset_run):
    _, res = preset_run("fig2-0")
    assert find_temporal_nodes(res.output, 70.0, 1)[0] == pytest.approx(74.8, abs=0.5)


# -- echo detection -------------------------------------------------------------

def test_detects_two_synthetic_echoes():
    a = rec(gauss(50.0, 10.0))
    b = rec(gauss(150.0, 10.0, amp=0.5) + gauss(250.0, 10.0, amp=0.3))
    wins = detect_echo_window(b, a)
    assert len(wins) == 2
    assert wins[0].a < 150 < wins[0].b <= wins[1].a < 250 < wins[1].b
    assert wins[0].b == pytest.approx(200.0, abs=0.5)
    assert [w.tau for w in wins] == pytest.approx([100.0, 200.0], abs=1e-3)
    ms = measure_echoes(b, a)
    assert [m.m for m in ms] == [1, 2]
    assert ms[0].R == pytest.approx(0.25, rel=1e-4)
    assert ms[0].F == pytest.approx(1.0, rel=1e-4)


def test_narrow_ripple_is_not_an_echo():
    a = rec(gauss(50.0, 10.0))
    b = rec(gauss(150.0, 10.0, amp=0.5) + gauss(100.0, 0.5, amp=0.3))
    wins = detect_echo_window(b, a)
    assert len(wins) == 1 and wins[0].tau == pytest.approx(100.0, abs=1e-3)


def test_zero_output_has_no_echo():
    a = rec(gauss(50.0, 10.0))
    with pytest.raises(NoEchoFound):
        detect_echo_window(rec(np.zeros_like(T)), a)
    with pytest.raises(NoEchoFound):
        measure_echoes(a, rec(np.zeros_like(T)))


def test_explicit_windows_with_and_without_tau():
    a = rec(gauss(50.0, 10.0))
    b = rec(gauss(150.0, 10.0, amp=0.5))
    m_fixed, m_auto = measure_echoes(b, a, [(100.0, 200.0, 90.0), (100.0, 200.0)])
    assert m_fixed.tau == 90.0 and m_fixed.F < 0.9
    assert m_auto.tau == pytest.approx(100.0, abs=1e-3)


def test_fig4_detected_window(preset_run):
    _, res = preset_run("fig4-none")
    w = detect_echo_window(res.output, res.input)[0]
    assert w.a == pytest.approx(80.0, abs=2.0)
    assert w.a < w.peak_time < w.b
    assert w.b >= 130.0


# -- comb period ----------------------------------------------------------------

def test_comb_period():
    g0 = 1 / 1740
    assert comb_echo_period(193.8 * g0) == pytest.approx(56.4, abs=0.1)
    assert comb_echo_period(redshift_gradient(PhysicalConstants()) * 0.08) == pytest.approx(56.4, abs=0.3)
    with pytest.raises(ValueError):
        comb_echo_period(0.0)


def test_fig4_strong_echoes_follow_comb_period(preset_run):
    _, res = preset_run("fig4-none")
    period = comb_echo_period(redshift_gradient(PhysicalConstants()) * 0.08)
    wins = detect_echo_window(res.output, res.input)
    strong = [w for w in wins if w.peak_time > 100]
    strong.sort(key=lambda w: -echo_efficiency(res.output, res.input, (w.a, w.b)))
    p1, p2 = sorted(w.peak_time for w in strong[:2])
    assert (p2 - p1) / period == pytest.approx(round((p2 - p1) / period), abs=2 / period)
