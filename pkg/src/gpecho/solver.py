"""Cascaded polarization/field integrator.

The polarization of every grid node obeys

    d rho/dt = -(gamma0/2 + gamma + i Delta) rho + (i/2) Omega

and the field is the instantaneous spatial integral d Omega/dx = i eta rho
(transit time through a slab is ~1e-10 s, so the retarded-time term is
dropped). The output of target n is the input of target n+1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from . import _kernels
from .constants import NumericsConvention, PhysicalConstants, redshift_gradient
from .detuning import RotationProtocol, Target, _cos, rotation_angle, transverse_doppler
from .errors import ConfigError, NumericalError

MAX_PHASE_PER_STEP = 0.05  # rad; resolution guard on dt * max|Delta|


@dataclass(frozen=True)
class InputPulse:
    t0: float
    tau_s: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.tau_s > 0:
            raise ValueError("tau_s must be > 0")

    def __call__(self, t):
        return gaussian_input(t, self)


def gaussian_input(t, pulse: InputPulse):
    """amplitude * exp(-((t - t0) / tau_s)^2) as complex."""
    t = np.asarray(t, dtype=float)
    out = pulse.amplitude * np.exp(-(((t - pulse.t0) / pulse.tau_s) ** 2)) + 0j
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class TimeGrid:
    t_end: float
    dt: float

    def __post_init__(self):
        if not (self.dt > 0 and self.t_end > 0):
            raise ValueError("t_end and dt must be > 0")
        ratio = self.t_end / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"t_end / dt must be an integer, got {ratio}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt


@dataclass
class BoundaryRecord:
    """Field envelope sampled uniformly at one target boundary."""

    times: np.ndarray
    omega: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.omega = np.asarray(self.omega, dtype=np.complex128)
        if self.times.shape != self.omega.shape or self.times.ndim != 1:
            raise ValueError("times and omega must be 1-D arrays of equal length")
        if len(self.times) < 2:
            raise ValueError("a record needs at least two samples")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.omega) ** 2

    def scaled(self, factor: complex) -> "BoundaryRecord":
        return BoundaryRecord(self.times, self.omega * factor, self.label)

    def __len__(self):
        return len(self.times)


def polarization_rhs(rho, omega, delta, conv: NumericsConvention):
    """Rate of change of the polarization for drive ``omega`` at detuning ``delta``."""
    return -(conv.coherence_decay + 1j * np.asarray(delta)) * rho + 0.5j * np.asarray(omega)


def steady_state_polarization(omega, delta, conv: NumericsConvention):
    return 0.5j * omega / (conv.coherence_decay + 1j * delta)


def propagate_field(rho_profile, omega_in: complex, eta: float, x) -> np.ndarray:
    """Field at every node of one target for a given polarization profile."""
    rho_profile = np.asarray(rho_profile, dtype=np.complex128)
    return omega_in + 1j * eta * cumulative_trapezoid(rho_profile, np.asarray(x, float), initial=0)


@dataclass(frozen=True)
class Medium:
    """All targets flattened onto one node axis, bottom target first."""

    targets: tuple[Target, ...]
    position: np.ndarray
    offset: np.ndarray
    weights: np.ndarray
    K: float
    decay: float
    starts: np.ndarray
    stops: np.ndarray

    @classmethod
    def build(cls, targets: Sequence[Target], consts: PhysicalConstants,
              conv: NumericsConvention) -> "Medium":
        if not targets:
            raise ConfigError("at least one target is required")
        pos, off, w, starts, stops = [], [], [], [], []
        n = 0
        for tgt in targets:
            x = tgt.x
            pos.append(tgt.z + x)
            off.append(np.full(tgt.n_x, transverse_doppler(tgt.v_t, consts)))
            dx = tgt.thickness / (tgt.n_x - 1)
            if n:
                w.append([0.0])
            w.append(np.full(tgt.n_x - 1, 0.5 * conv.coupling(tgt.xi, tgt.thickness) * dx))
            starts.append(n)
            n += tgt.n_x
            stops.append(n - 1)
        return cls(tuple(targets), np.concatenate(pos), np.concatenate(off),
                   np.concatenate(w).astype(float), redshift_gradient(consts),
                   conv.coherence_decay, np.array(starts), np.array(stops))

    @property
    def n_nodes(self) -> int:
        return self.position.shape[0]

    @property
    def boundary_nodes(self) -> np.ndarray:
        """Node indices for the input of target 1 and the output of every target."""
        return np.concatenate([[0], self.stops]).astype(np.int64)

    def detuning(self, theta) -> np.ndarray:
        return self.offset - self.K * self.position * _cos(theta)

    def max_abs_detuning(self, cos_values) -> float:
        lo, hi = float(np.min(cos_values)), float(np.max(cos_values))
        ends = [np.abs(self.offset - self.K * self.position * c) for c in (lo, hi)]
        return float(np.max(np.maximum(*ends)))

    def field(self, rho, drive: complex) -> np.ndarray:
        return _kernels.field_profile(np.asarray(rho, np.complex128), drive, self.weights)


def advance_step(rho, t: float, dt: float, medium: Medium, protocol: RotationProtocol,
                 drive: Callable[[float], complex]) -> np.ndarray:
    """One classic RK4 step of the polarization on every node.

    The field profile is rebuilt from the stage polarization at each stage,
    and theta and the drive are evaluated at the stage times.
    """
    ts = (t, t + 0.5 * dt, t + dt)
    c = [float(_cos(rotation_angle(s, protocol))) for s in ts]
    d = [complex(drive(s)) for s in ts]
    new, _ = _kernels.rk4_step_numpy(np.asarray(rho, np.complex128), dt, *c, *d,
                                     medium.position, medium.offset, medium.weights,
                                     medium.decay, medium.K)
    if not np.all(np.isfinite(new)):
        node = int(np.argmax(~np.isfinite(new)))
        raise NumericalError(f"non-finite polarization at t={t + dt:g} s, node {node}")
    return new


def _guard(dt: float, max_det: float):
    if dt * max_det > MAX_PHASE_PER_STEP:
        raise ConfigError(
            f"time step too coarse: dt={dt:g} s with max|Delta|={max_det:.6g} rad/s "
            f"gives {dt * max_det:.4g} rad per step (limit {MAX_PHASE_PER_STEP})")


def check_resolution(targets: Sequence[Target], protocol: RotationProtocol, grid: TimeGrid,
                     consts: PhysicalConstants, conv: NumericsConvention) -> float:
    """Raise ConfigError if dt * max|Delta| over the run exceeds the guard; return max|Delta|."""
    medium = Medium.build(targets, consts, conv)
    t_half = np.arange(2 * grid.n_steps + 1) * (0.5 * grid.dt)
    max_det = medium.max_abs_detuning(_cos(np.asarray(rotation_angle(t_half, protocol), float)))
    _guard(grid.dt, max_det)
    return max_det


@dataclass
class CascadeResult:
    """Boundary records of one run.

    ``records[0]`` is the input of target 1, ``records[n]`` the output of
    target n (and so the input of target n+1).
    """

    records: list[BoundaryRecord]
    theta: np.ndarray
    medium: Medium
    history: np.ndarray | None = None
    backend: str = ""

    @property
    def times(self) -> np.ndarray:
        return self.records[0].times

    @property
    def input(self) -> BoundaryRecord:
        return self.records[0]

    @property
    def output(self) -> BoundaryRecord:
        return self.records[-1]

    def target_input(self, n: int) -> BoundaryRecord:
        return self.records[n - 1]

    def target_output(self, n: int) -> BoundaryRecord:
        return self.records[n]


def simulate_cascade(targets: Sequence[Target], protocol: RotationProtocol, pulse,
                     grid: TimeGrid, consts: PhysicalConstants | None = None,
                     conv: NumericsConvention | None = None, *, keep_history: bool = False,
                     backend: str | None = None, rho0=None) -> CascadeResult:
    """Integrate the cascade from zero field and (by default) zero polarization.

    ``pulse`` is an :class:`InputPulse` or any callable t -> complex drive
    accepting arrays.
    """
    consts = consts or PhysicalConstants()
    conv = conv or NumericsConvention.from_tag("paper-numbers")
    medium = Medium.build(targets, consts, conv)

    n = grid.n_steps
    t_half = np.arange(2 * n + 1) * (0.5 * grid.dt)
    theta_half = np.asarray(rotation_angle(t_half, protocol), dtype=float)
    cos_half = np.ascontiguousarray(_cos(theta_half), dtype=float)
    drive_half = np.ascontiguousarray(np.asarray(pulse(t_half), dtype=np.complex128))
    if drive_half.shape != t_half.shape:
        drive_half = np.broadcast_to(drive_half, t_half.shape).copy()
    _guard(grid.dt, medium.max_abs_detuning(cos_half))

    if rho0 is None:
        rho0 = np.zeros(medium.n_nodes, dtype=np.complex128)
    else:
        rho0 = np.asarray(rho0, dtype=np.complex128)
        if rho0.shape != (medium.n_nodes,):
            raise ConfigError(f"rho0 must have shape ({medium.n_nodes},)")

    backend = backend or _kernels.default_backend()
    recs, hist, fail_step, fail_node = _kernels.rk4_cascade(
        rho0, medium.position, medium.offset, medium.weights, medium.decay, medium.K,
        cos_half, drive_half, grid.dt, medium.boundary_nodes, keep_history, backend=backend)
    if fail_step >= 0:
        raise NumericalError(
            f"non-finite polarization at t={fail_step * grid.dt:g} s, node {fail_node}")

    times = grid.times
    labels = ["input"] + [f"target{i + 1}_out" for i in range(len(medium.targets))]
    records = [BoundaryRecord(times, recs[:, k].copy(), labels[k]) for k in range(recs.shape[1])]
    return CascadeResult(records, theta_half[::2].copy(), medium,
                         hist if keep_history else None, backend)


def beer_lambert_transmission(xi: float, conv: NumericsConvention) -> float:
    """Steady-state resonant amplitude transmission exp(-gamma0 xi / (2 (gamma0 + 2 gamma)))."""
    return math.exp(-conv.gamma0_num * xi / (2.0 * (conv.gamma0_num + 2.0 * conv.gamma_deco)))
