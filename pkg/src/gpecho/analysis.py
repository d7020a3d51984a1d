"""Spectra, echo windows, efficiency and fidelity of boundary records."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import czt, find_peaks, peak_widths

from .errors import InsufficientNodes, NoEchoFound, TruncationWarning, UndefinedFidelity
from .solver import BoundaryRecord

ECHO_THRESHOLD = 1e-4  # of the input peak intensity
ECHO_MIN_WIDTH = 0.5  # of the input FWHM; narrower peaks are transmission ripple
TRUNCATION_LEVEL = 1e-3  # of the record's peak amplitude


@dataclass
class SpectrumResult:
    omega: np.ndarray  # rad/s
    s_values: np.ndarray
    gamma0: float
    truncated: bool = False

    @property
    def omega_gamma0(self) -> np.ndarray:
        return self.omega / self.gamma0

    def at(self, omega_gamma0: float) -> float:
        return float(np.interp(omega_gamma0, self.omega_gamma0, self.s_values))

    def local_extremum(self, center_gamma0: float, half_width_gamma0: float, kind: str = "min"):
        """Position (in gamma0 units) and value of the interior local min/max nearest ``center``."""
        w = self.omega_gamma0
        s = self.s_values
        interior = np.arange(1, len(s) - 1)
        if kind == "min":
            ok = (s[interior] <= s[interior - 1]) & (s[interior] <= s[interior + 1])
        else:
            ok = (s[interior] >= s[interior - 1]) & (s[interior] >= s[interior + 1])
        idx = interior[ok & (np.abs(w[interior] - center_gamma0) <= half_width_gamma0)]
        if idx.size == 0:
            return None
        k = idx[np.argmin(np.abs(w[idx] - center_gamma0))]
        return float(w[k]), float(s[k])


@dataclass
class EchoWindow:
    a: float
    b: float
    tau: float
    peak_time: float


@dataclass
class EchoMetrics:
    m: int
    a: float
    b: float
    tau: float
    R: float
    F: float
    peak_time: float = math.nan

    def as_row(self) -> dict:
        return {"m": self.m, "a_m": self.a, "b_m": self.b, "tau_m": self.tau,
                "R_m": self.R, "F_m": self.F}


def _check_same_grid(a: BoundaryRecord, b: BoundaryRecord):
    if len(a) != len(b) or not np.allclose(a.times, b.times, rtol=0, atol=1e-9 * abs(a.dt)):
        raise ValueError("records must share the same sampling grid")


def fourier_transform(record: BoundaryRecord, omega_start: float, d_omega: float, count: int):
    """Integral of Omega(t) exp(i w t) dt on w = omega_start + k d_omega, k < count.

    Rectangle rule on the samples (a DFT of arbitrary padding), evaluated by
    the chirp-z transform.
    """
    dt = record.dt
    t_first = float(record.times[0])
    a = np.exp(-1j * omega_start * dt)
    w = np.exp(1j * d_omega * dt)
    omega = omega_start + d_omega * np.arange(count)
    values = czt(record.omega, count, w, a) * dt * np.exp(1j * omega * t_first)
    return omega, values


def _is_truncated(record: BoundaryRecord) -> bool:
    amp = np.abs(record.omega)
    peak = amp.max()
    return bool(peak > 0 and amp[-1] > TRUNCATION_LEVEL * peak)


def spectrum(output: BoundaryRecord, input: BoundaryRecord, gamma0: float, *,
             half_width: float = 400.0, resolution: float = 0.1) -> SpectrumResult:
    """Normalised spectrum |F[out]|^2 / max |F[in]|^2 over |w| <= half_width.

    ``half_width`` and ``resolution`` are in units of ``gamma0``. The maximum
    of the input spectrum is taken over the same band.
    """
    _check_same_grid(output, input)
    if resolution <= 0 or half_width <= 0:
        raise ValueError("half_width and resolution must be > 0")
    m = int(round(half_width / resolution))
    step = resolution * gamma0
    count = 2 * m + 1
    omega, f_out = fourier_transform(output, -m * step, step, count)
    _, f_in = fourier_transform(input, -m * step, step, count)
    norm = np.max(np.abs(f_in) ** 2)
    if norm == 0:
        raise ValueError("input record has an empty spectrum")
    truncated = _is_truncated(output)
    if truncated:
        warnings.warn(f"record '{output.label}' ends before the signal decays below "
                      f"{TRUNCATION_LEVEL:g} of its peak; spectrum has leakage",
                      TruncationWarning, stacklevel=2)
    return SpectrumResult(omega, np.abs(f_out) ** 2 / norm, gamma0, truncated)


def _window_slice(record: BoundaryRecord, window) -> slice:
    a, b = window
    t = record.times
    eps = 1e-9 * record.dt
    if not a < b:
        raise ValueError(f"empty window ({a}, {b})")
    if a < t[0] - eps or b > t[-1] + eps:
        raise ValueError(f"window ({a}, {b}) outside the record span [{t[0]}, {t[-1]}]")
    i = int(np.searchsorted(t, a - eps, side="left"))
    j = int(np.searchsorted(t, b + eps, side="right"))
    if j - i < 2:
        raise ValueError(f"window ({a}, {b}) holds fewer than two samples")
    return slice(i, j)


def input_energy(input: BoundaryRecord) -> float:
    return float(np.trapezoid(input.intensity, input.times))


def echo_efficiency(output: BoundaryRecord, input: BoundaryRecord, window) -> float:
    """Output energy inside ``window`` over the total input energy."""
    _check_same_grid(output, input)
    sl = _window_slice(output, window)
    e_in = input_energy(input)
    if e_in == 0:
        raise NoEchoFound("input record carries no energy")
    return float(np.trapezoid(output.intensity[sl], output.times[sl])) / e_in


def shifted(record: BoundaryRecord, tau: float, t) -> np.ndarray:
    """record(t - tau) by linear interpolation, zero outside the record."""
    s = np.asarray(t, float) - tau
    re = np.interp(s, record.times, record.omega.real, left=0.0, right=0.0)
    im = np.interp(s, record.times, record.omega.imag, left=0.0, right=0.0)
    return re + 1j * im


def echo_fidelity(output: BoundaryRecord, input: BoundaryRecord, window, tau: float) -> float:
    """Normalised overlap of the windowed output with the input delayed by ``tau``."""
    _check_same_grid(output, input)
    sl = _window_slice(output, window)
    t = output.times[sl]
    out = output.omega[sl]
    e_out = float(np.trapezoid(np.abs(out) ** 2, t))
    e_in = input_energy(input)
    if e_out == 0 or e_in == 0:
        raise UndefinedFidelity("fidelity undefined: no energy in the window or the input")
    overlap = np.trapezoid(np.conj(shifted(input, tau, t)) * out, t)
    return float(abs(overlap) ** 2 / (e_in * e_out))


def comb_echo_period(delta_comb: float) -> float:
    """Rephasing period 2 pi / spacing of an equally spaced frequency comb."""
    if not delta_comb > 0:
        raise ValueError("comb spacing must be > 0")
    return 2.0 * math.pi / delta_comb


def find_temporal_nodes(record: BoundaryRecord, after: float, count: int) -> list[float]:
    """First ``count`` zero crossings of Re Omega after ``after``, linearly interpolated."""
    if count <= 0:
        return []
    t = record.times
    y = record.omega.real
    start = int(np.searchsorted(t, after, side="right"))
    nodes: list[float] = []
    i = start
    while i < len(t) - 1 and len(nodes) < count:
        y0, y1 = y[i], y[i + 1]
        if y0 == 0.0:
            nodes.append(float(t[i]))
            i += 2 if y1 == 0.0 else 1
            continue
        if y0 * y1 < 0:
            nodes.append(float(t[i] - y0 * (t[i + 1] - t[i]) / (y1 - y0)))
        i += 1
    if len(nodes) < count:
        raise InsufficientNodes(len(nodes), count)
    return nodes


def _refine_peak(t, y, k) -> float:
    if 0 < k < len(y) - 1:
        den = y[k - 1] - 2 * y[k] + y[k + 1]
        if den < 0:
            return float(t[k] + 0.5 * (t[1] - t[0]) * (y[k - 1] - y[k + 1]) / den)
    return float(t[k])


def peak_time(record: BoundaryRecord, window) -> float:
    """Time of maximum |Omega|^2 inside ``window`` (parabolic refinement)."""
    sl = _window_slice(record, window)
    inten = record.intensity[sl]
    return _refine_peak(record.times[sl], inten, int(np.argmax(inten)))


def input_span(input: BoundaryRecord, threshold: float = ECHO_THRESHOLD) -> tuple[float, float]:
    """Peak time and end time (intensity below ``threshold`` of peak) of the input."""
    inten = input.intensity
    peak = inten.max()
    if peak == 0:
        raise NoEchoFound("input record is identically zero")
    k = int(np.argmax(inten))
    above = np.nonzero(inten >= threshold * peak)[0]
    return _refine_peak(input.times, inten, k), float(input.times[above[-1]])


def detect_echo_window(output: BoundaryRecord, input: BoundaryRecord,
                       input_end: float | None = None,
                       threshold: float = ECHO_THRESHOLD,
                       min_width: float = ECHO_MIN_WIDTH) -> list[EchoWindow]:
    """Bracket every post-input intensity maximum between its neighbouring minima."""
    _check_same_grid(output, input)
    t_peak_in, t_end_in = input_span(input, threshold)
    if input_end is None:
        input_end = t_end_in
    ref = input.intensity.max()
    start = int(np.searchsorted(output.times, input_end, side="left"))
    t = output.times[start:]
    inten = output.intensity[start:]
    if len(t) < 3:
        raise NoEchoFound("no samples after the input")
    level = threshold * ref
    peaks, _ = find_peaks(inten, height=level, prominence=level)
    if peaks.size == 0:
        raise NoEchoFound(f"no post-input peak above {threshold:g} of the input peak intensity")
    k_in = int(np.argmax(input.intensity))
    fwhm_in = peak_widths(input.intensity, [k_in])[0][0] * input.dt
    widths = peak_widths(inten, peaks)[0] * output.dt
    peaks = peaks[widths >= min_width * fwhm_in]
    if peaks.size == 0:
        raise NoEchoFound("only narrow transmission ripple after the input")
    bounds = [0] + [p0 + int(np.argmin(inten[p0:p1 + 1])) for p0, p1 in zip(peaks, peaks[1:])]
    bounds.append(len(t) - 1)
    out = []
    for k, p in enumerate(peaks):
        lo = bounds[0] + int(np.argmin(inten[: p + 1])) if k == 0 else bounds[k]
        hi = p + int(np.argmin(inten[p: bounds[k + 1] + 1]))
        tp = _refine_peak(t, inten, int(p))
        out.append(EchoWindow(float(t[lo]), float(t[hi]), tp - t_peak_in, tp))
    return out


def measure_echoes(output: BoundaryRecord, input: BoundaryRecord,
                   windows=None) -> list[EchoMetrics]:
    """Efficiency and fidelity per echo.

    ``windows`` is a list of ``(a, b)`` or ``(a, b, tau)``; a missing or None
    tau means the measured peak delay. Without windows the echoes are found
    by :func:`detect_echo_window`.
    """
    t_peak_in, _ = input_span(input)
    if windows is None:
        windows = [(w.a, w.b, None) for w in detect_echo_window(output, input)]
    metrics = []
    for m, win in enumerate(windows, start=1):
        a, b = win[0], win[1]
        tau = win[2] if len(win) > 2 else None
        tp = peak_time(output, (a, b))
        if tau is None:
            tau = tp - t_peak_in
        R = echo_efficiency(output, input, (a, b))
        try:
            F = echo_fidelity(output, input, (a, b), tau)
        except UndefinedFidelity as exc:
            raise NoEchoFound(str(exc)) from exc
        metrics.append(EchoMetrics(m, a, b, tau, R, F, tp))
    return metrics
