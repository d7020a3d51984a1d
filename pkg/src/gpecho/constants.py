"""Physical constants and linewidth conventions.

Everything downstream takes its numbers from here so that a run can be
reproduced from one :class:`PhysicalConstants` and one
:class:`NumericsConvention`.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

EV = 1.602176634e-19  # J

CONVENTIONS = ("paper-numbers", "ln2-literal", "reciprocal")


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants entering the gravitational redshift gradient.

    ``c`` defaults to the rounded 3e8 m/s: with it the gradient gives the
    reference detunings (106.6, 193.8 and 387.6 linewidths at 4.4, 8 and
    16 cm). :meth:`codata` returns the exact value.
    """

    G: float = 6.67430e-11
    M_E: float = 5.9722e24
    R_E: float = 6.371e6
    c: float = 3.0e8
    hbar: float = 1.054571817e-34
    E_t: float = 8.4  # eV

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"constant {name} must be finite and > 0, got {value!r}")

    @classmethod
    def codata(cls, **overrides) -> "PhysicalConstants":
        return cls(**{"c": 299792458.0, **overrides})

    @property
    def transition_frequency(self) -> float:
        """E_t / hbar in rad/s."""
        return self.E_t * EV / self.hbar

    @property
    def surface_gravity(self) -> float:
        return self.G * self.M_E / self.R_E**2


@dataclass(frozen=True)
class NumericsConvention:
    """Numeric values of the natural linewidth and the extra decoherence.

    ``gamma0_num`` is also the unit in which detunings and spectra are
    reported.
    """

    gamma0_num: float
    gamma_deco: float
    convention_tag: str = "custom"

    def __post_init__(self):
        if not (math.isfinite(self.gamma0_num) and self.gamma0_num > 0):
            raise ValueError(f"gamma0_num must be > 0, got {self.gamma0_num!r}")
        if not (math.isfinite(self.gamma_deco) and self.gamma_deco >= 0):
            raise ValueError(f"gamma_deco must be >= 0, got {self.gamma_deco!r}")

    @classmethod
    def from_tag(cls, tag: str = "paper-numbers") -> "NumericsConvention":
        """Build one of the named conventions.

        ``paper-numbers``: gamma0 = 1/1740 and gamma = ln2/630 rad/s, the pair
        that reproduces the reference detunings, delays, efficiencies and
        fidelities of the comb presets. ``ln2-literal``: ln2/1740 and ln2/630. ``reciprocal``:
        1/1740 and 1/630.
        """
        ln2 = math.log(2.0)
        table = {
            "paper-numbers": (1.0 / 1740.0, ln2 / 630.0),
            "ln2-literal": (ln2 / 1740.0, ln2 / 630.0),
            "reciprocal": (1.0 / 1740.0, 1.0 / 630.0),
        }
        try:
            g0, gd = table[tag]
        except KeyError:
            raise ValueError(f"unknown convention {tag!r}; expected one of {CONVENTIONS}") from None
        return cls(g0, gd, tag)

    @property
    def coherence_decay(self) -> float:
        """Amplitude decay rate of the polarization, gamma0/2 + gamma."""
        return 0.5 * self.gamma0_num + self.gamma_deco

    def coupling(self, xi: float, thickness: float) -> float:
        """Light-nucleus coupling eta = gamma0 * xi / (2 L), rad s^-1 m^-1."""
        return self.gamma0_num * xi / (2.0 * thickness)


def redshift_gradient(consts: PhysicalConstants) -> float:
    """Detuning per metre of altitude, E_t G M_E / (hbar c^2 R_E^2)."""
    return consts.transition_frequency * consts.surface_gravity / consts.c**2
