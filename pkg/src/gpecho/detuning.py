"""Gravitational detuning, transverse Doppler shift and rotation schedules."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import PhysicalConstants


def _cos(theta):
    # cos(pi/2) is 6e-17 in floating point; the freeze protocol needs exact zero
    c = np.cos(theta)
    return np.where(np.abs(c) < 1e-15, 0.0, c)


@dataclass(frozen=True)
class Target:
    """One doped slab.

    ``z`` is the altitude of the slab centre relative to the rotation
    centre and ``thickness`` its extent along the (vertical) beam.
    """

    z: float
    thickness: float
    xi: float
    n_x: int = 16
    v_t: float = 0.0
    index: int = 1

    def __post_init__(self):
        if not self.thickness > 0:
            raise ValueError(f"target {self.index}: thickness must be > 0")
        if not self.xi >= 0:
            raise ValueError(f"target {self.index}: xi must be >= 0")
        if int(self.n_x) != self.n_x or self.n_x < 2:
            raise ValueError(f"target {self.index}: n_x must be an integer >= 2")
        if not 0 <= self.v_t:
            raise ValueError(f"target {self.index}: v_t must be >= 0")

    @property
    def x(self) -> np.ndarray:
        """Grid nodes across the slab, from -L/2 (entrance) to L/2."""
        return np.linspace(-0.5 * self.thickness, 0.5 * self.thickness, self.n_x)


@dataclass(frozen=True)
class Segment:
    t_switch: float
    theta: float
    ramp: float = 0.0


@dataclass(frozen=True)
class RotationProtocol:
    """Piecewise-linear polar angle schedule.

    Each segment starts turning at ``t_switch`` and reaches ``theta`` after
    ``ramp`` seconds. With ``ramp == 0`` the switch is a right-continuous step.
    """

    segments: tuple[Segment, ...] = field(default_factory=tuple)
    initial_theta: float = 0.0

    def __post_init__(self):
        segs = tuple(s if isinstance(s, Segment) else Segment(*s) for s in self.segments)
        object.__setattr__(self, "segments", segs)
        for s in segs:
            if s.ramp < 0:
                raise ValueError(f"negative ramp at t={s.t_switch}")
        for a, b in zip(segs, segs[1:]):
            if not b.t_switch > a.t_switch:
                raise ValueError("switch times must be strictly increasing")
            if a.t_switch + a.ramp > b.t_switch:
                raise ValueError(f"ramp starting at t={a.t_switch} overlaps the next switch")

    @classmethod
    def steps(cls, *pairs: tuple[float, float], ramp: float = 0.0, initial_theta: float = 0.0):
        return cls(tuple(Segment(t, th, ramp) for t, th in pairs), initial_theta)

    def __call__(self, t):
        return rotation_angle(t, self)

    def angles(self) -> list[float]:
        return [self.initial_theta] + [s.theta for s in self.segments]


def rotation_angle(t, protocol: RotationProtocol):
    """Polar angle theta(t); accepts scalars or arrays."""
    t = np.asarray(t, dtype=float)
    theta = np.full(t.shape, protocol.initial_theta)
    prev = protocol.initial_theta
    for seg in protocol.segments:
        if seg.ramp > 0:
            frac = np.clip((t - seg.t_switch) / seg.ramp, 0.0, 1.0)
            ramped = prev + (seg.theta - prev) * frac
            theta = np.where(t >= seg.t_switch, ramped, theta)
        else:
            theta = np.where(t >= seg.t_switch, seg.theta, theta)
        prev = seg.theta
    return theta[()] if theta.ndim == 0 else theta


def detuning(z, x, theta, K: float):
    """Gravitational detuning -K (z + x) cos(theta) in rad/s."""
    return -K * (np.asarray(z) + np.asarray(x)) * _cos(theta)


def transverse_doppler(v: float, consts: PhysicalConstants) -> float:
    """Second-order Doppler shift -(E_t / 2 hbar) (v / c)^2 for tangential speed v."""
    if not 0 <= v < consts.c:
        raise ValueError(f"tangential speed must satisfy 0 <= v < c, got {v!r}")
    return -0.5 * consts.transition_frequency * (v / consts.c) ** 2


def critical_speed(z: float, consts: PhysicalConstants) -> float:
    """Speed at which the Doppler shift equals the gravitational detuning at altitude |z|."""
    if z == 0:
        raise ValueError("critical speed is undefined at z = 0")
    return math.sqrt(2.0 * consts.G * consts.M_E * abs(z)) / consts.R_E


def shift_ratio(v: float, z: float, consts: PhysicalConstants) -> float:
    if z == 0:
        raise ValueError("shift ratio is undefined at z = 0")
    return v**2 * consts.R_E**2 / (2.0 * consts.G * consts.M_E * abs(z))
