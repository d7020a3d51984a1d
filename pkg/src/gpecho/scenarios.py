"""Named presets for the single-target gradient echo, the two-target beat
and node-inversion runs, and the five-target comb protocols."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

from .constants import NumericsConvention, PhysicalConstants
from .detuning import RotationProtocol, Segment, Target
from .solver import CascadeResult, InputPulse, TimeGrid, simulate_cascade

ANALYSES = ("records", "spectrum", "metrics", "nodes")
PI = math.pi


@dataclass(frozen=True)
class Scenario:
    name: str
    targets: tuple[Target, ...]
    protocol: RotationProtocol
    pulse: InputPulse
    grid: TimeGrid
    analyses: tuple[str, ...] = ("records",)
    windows: tuple[tuple, ...] | None = None  # (a, b, tau-or-None); None = detect
    convention: str = "paper-numbers"
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    spectrum_half_width: float = 400.0  # gamma0 units
    node_after: float = 70.0
    node_count: int = 13
    description: str = ""

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "analyses", tuple(self.analyses))
        if self.windows is not None:
            object.__setattr__(self, "windows", tuple(tuple(w) for w in self.windows))
        bad = set(self.analyses) - set(ANALYSES)
        if bad:
            raise ValueError(f"unknown analyses {sorted(bad)}; expected a subset of {ANALYSES}")
        if not self.targets:
            raise ValueError("a scenario needs at least one target")
        NumericsConvention.from_tag(self.convention)

    @property
    def numerics(self) -> NumericsConvention:
        return NumericsConvention.from_tag(self.convention)

    def simulate(self, **kwargs) -> CascadeResult:
        return simulate_cascade(self.targets, self.protocol, self.pulse, self.grid,
                                self.constants, self.numerics, **kwargs)


def _array(zs, thickness, xi, n_x):
    return tuple(Target(z, thickness, xi, n_x, index=i + 1) for i, z in enumerate(zs))


def preset_fig1(switch_time: float = 500.0, *, ramp: float = 0.0, dt: float = 0.02,
                n_x: int = 64, t_end: float = 1600.0) -> Scenario:
    """Single 4.8 cm target inverted once (gradient echo)."""
    return Scenario(
        name=f"fig1-{switch_time:g}",
        targets=_array([0.0], 0.048, 386.0, n_x),
        protocol=RotationProtocol((Segment(switch_time, PI, ramp),)),
        pulse=InputPulse(300.0, 100.0),
        grid=TimeGrid(t_end, dt),
        analyses=("records", "metrics"),
        description=f"single target, inverted at t={switch_time:g} s",
    )


def fig2_targets(n_x: int = 16, separation: float = 0.088):
    return _array([-0.5 * separation, 0.5 * separation], 1e-3, 38.6, n_x)


def preset_fig2(theta_final: float = 0.0, rotations: int | None = None, *,
                switch_time: float = 74.8, ramp: float = 0.0, dt: float = 0.02,
                n_x: int = 16, t_end: float = 1200.0, node_after: float = 70.0,
                rotation_after: float = 50.0) -> Scenario:
    """Two targets 8.8 cm apart.

    With ``rotations`` set, the pair is inverted (alternately to pi and back
    to 0) at the first ``rotations`` zero crossings of Re Omega of the
    unrotated reference run after ``rotation_after`` (the pulse centre, so
    the crossing in the transmitted tail is included); otherwise a single turn to ``theta_final`` at
    ``switch_time`` (no turn when ``theta_final == 0``).
    """
    base = Scenario(
        name="fig2-0",
        targets=fig2_targets(n_x),
        protocol=RotationProtocol(),
        pulse=InputPulse(50.0, 10.0),
        grid=TimeGrid(t_end, dt),
        analyses=("records", "spectrum", "nodes"),
        node_after=node_after,
        description="two targets, no rotation",
    )
    if rotations:
        from .analysis import find_temporal_nodes

        ref = base.simulate()
        nodes = find_temporal_nodes(ref.output, rotation_after, rotations)
        segs = tuple(Segment(t, PI if k % 2 == 0 else 0.0, ramp) for k, t in enumerate(nodes))
        return replace(base, name=f"fig3-{rotations}", protocol=RotationProtocol(segs),
                       analyses=("records", "spectrum"), node_after=rotation_after,
                       description=f"two targets inverted at the first {rotations} temporal nodes")
    if theta_final == 0:
        return base
    label = {PI / 2: "half", PI: "pi"}.get(theta_final, f"{theta_final / PI:g}pi")
    return replace(base, name=f"fig2-{label}",
                   protocol=RotationProtocol((Segment(switch_time, theta_final, ramp),)),
                   description=f"two targets, turned to {theta_final / PI:g} pi at t={switch_time:g} s")


FIG4_WINDOWS = {
    "none": ((80.0, 130.0, 53.8),),
    "invert": ((70.0, 120.0, 39.5),),
    "freeze_retrieve": ((110.0, 160.0, 83.4),),
    "halftime": ((90.0, 150.0, 69.0),),
}


def fig4_targets(n_x: int = 16, spacing: float = 0.08):
    return _array([k * spacing for k in (-2, -1, 0, 1, 2)], 1e-4, 241.0, n_x)


def preset_fig4(protocol_kind: str = "none", *, first: float = 70.0, second: float = 100.0,
                ramp: float = 0.0, dt: float = 0.02, n_x: int = 16,
                t_end: float = 250.0) -> Scenario:
    """Five-target comb with one of four rotation protocols."""
    protocols = {
        "none": (),
        "invert": (Segment(first, PI, ramp),),
        "freeze_retrieve": (Segment(first, PI / 2, ramp), Segment(second, 0.0, ramp)),
        "halftime": (Segment(first, PI / 2, ramp), Segment(second, PI, ramp)),
    }
    if protocol_kind not in protocols:
        raise ValueError(f"unknown protocol kind {protocol_kind!r}; expected one of {sorted(protocols)}")
    default_times = first == 70.0 and second == 100.0
    return Scenario(
        name=f"fig4-{protocol_kind}",
        targets=fig4_targets(n_x),
        protocol=RotationProtocol(protocols[protocol_kind]),
        pulse=InputPulse(50.0, 10.0),
        grid=TimeGrid(t_end, dt),
        analyses=("records", "spectrum", "metrics"),
        windows=FIG4_WINDOWS[protocol_kind] if default_times else None,
        spectrum_half_width=600.0,
        description=f"five-target comb, protocol '{protocol_kind}'",
    )


PRESETS: dict[str, tuple[Callable[[], Scenario], str]] = {
    "fig1-500": (lambda: preset_fig1(500.0), "single 4.8 cm target inverted at 500 s"),
    "fig1-700": (lambda: preset_fig1(700.0), "single 4.8 cm target inverted at 700 s"),
    "fig2-0": (lambda: preset_fig2(0.0), "two targets, no rotation (quantum beats)"),
    "fig2-half": (lambda: preset_fig2(PI / 2), "two targets turned to pi/2 at 74.8 s"),
    "fig2-pi": (lambda: preset_fig2(PI), "two targets inverted at 74.8 s"),
    "fig3-13": (lambda: preset_fig2(rotations=13), "two targets inverted at 13 temporal nodes"),
    "fig4-none": (lambda: preset_fig4("none"), "five-target comb, no rotation"),
    "fig4-invert": (lambda: preset_fig4("invert"), "five-target comb inverted at 70 s"),
    "fig4-freeze_retrieve": (lambda: preset_fig4("freeze_retrieve"),
                             "five-target comb held at pi/2 from 70 s to 100 s"),
    "fig4-halftime": (lambda: preset_fig4("halftime"), "five-target comb 0 -> pi/2 -> pi"),
}


def list_scenarios(registry: dict | None = None) -> list[tuple[str, str]]:
    registry = PRESETS if registry is None else registry
    return [(name, desc) for name, (_, desc) in registry.items()]


def get_scenario(name: str) -> Scenario:
    try:
        factory, _ = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; run 'gpecho list'") from None
    return factory()
