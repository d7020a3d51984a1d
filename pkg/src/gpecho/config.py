"""Run configuration: YAML schema, validation and scenario resolution."""
from __future__ import annotations

import dataclasses
import math
from pathlib import Path
from typing import Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .constants import CONVENTIONS, PhysicalConstants
from .detuning import RotationProtocol, Segment, Target
from .errors import ConfigError
from .scenarios import ANALYSES, PRESETS, Scenario, get_scenario
from .solver import InputPulse, TimeGrid, check_resolution

Convention = Literal["paper-numbers", "ln2-literal", "reciprocal"]
Analysis = Literal["records", "spectrum", "metrics", "nodes"]
assert set(Convention.__args__) == set(CONVENTIONS) and set(Analysis.__args__) == set(ANALYSES)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TargetCfg(_Strict):
    z: float
    thickness: float = Field(gt=0)
    xi: float = Field(ge=0)
    n_x: int = Field(16, ge=2)
    v_t: float = Field(0.0, ge=0)


class SegmentCfg(_Strict):
    time: float = Field(ge=0)
    angle: float  # units of pi
    ramp: float = Field(0.0, ge=0)


class ProtocolCfg(_Strict):
    initial_angle: float = 0.0
    segments: list[SegmentCfg] = []


class PulseCfg(_Strict):
    t0: float
    tau_s: float = Field(gt=0)
    amplitude: float = 1.0


class GridCfg(_Strict):
    t_end: float = Field(gt=0)
    dt: float = Field(gt=0)


class WindowCfg(_Strict):
    a: float
    b: float
    tau: Optional[float] = None

    @model_validator(mode="after")
    def _ordered(self):
        if not self.a < self.b:
            raise ValueError(f"window needs a < b, got ({self.a}, {self.b})")
        return self


class ScenarioCfg(_Strict):
    name: str
    description: str = ""
    targets: list[TargetCfg] = Field(min_length=1)
    protocol: ProtocolCfg = ProtocolCfg()
    pulse: PulseCfg
    grid: GridCfg
    analyses: list[Analysis] = ["records"]
    windows: Optional[list[WindowCfg]] = None
    convention: Convention = "paper-numbers"
    spectrum_half_width: float = Field(400.0, gt=0)
    node_after: float = 70.0
    node_count: int = Field(13, ge=0)


class ConstantsCfg(_Strict):
    G: Optional[float] = Field(None, gt=0)
    M_E: Optional[float] = Field(None, gt=0)
    R_E: Optional[float] = Field(None, gt=0)
    c: Optional[float] = Field(None, gt=0)
    hbar: Optional[float] = Field(None, gt=0)
    E_t: Optional[float] = Field(None, gt=0)


class OverridesCfg(_Strict):
    dt: Optional[float] = Field(None, gt=0)
    t_end: Optional[float] = Field(None, gt=0)
    n_x: Optional[int] = Field(None, ge=2)
    convention: Optional[Convention] = None
    ramp: Optional[float] = Field(None, ge=0)
    amplitude: Optional[float] = None
    spacing: Optional[float] = Field(None, gt=0)
    xi: Optional[float] = Field(None, ge=0)
    thickness: Optional[float] = Field(None, gt=0)
    switch_times: Optional[list[float]] = None
    windows: Optional[Union[Literal["auto"], list[WindowCfg]]] = None


OVERRIDE_KEYS = tuple(OverridesCfg.model_fields)


class OutputCfg(_Strict):
    dir: str = "out"
    formats: list[Literal["csv", "json"]] = ["csv"]


class RunConfig(_Strict):
    scenario: Optional[str] = None
    inline: Optional[ScenarioCfg] = None
    overrides: OverridesCfg = OverridesCfg()
    constants: ConstantsCfg = ConstantsCfg()
    output: OutputCfg = OutputCfg()
    backend: Optional[Literal["numba", "numpy"]] = None
    sweep: Optional[dict[str, list]] = None
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _one_scenario(self):
        if (self.scenario is None) == (self.inline is None):
            raise ValueError("give exactly one of 'scenario' (preset name) or 'inline'")
        if self.scenario is not None and self.scenario not in PRESETS:
            raise ValueError(f"unknown scenario {self.scenario!r}; known: {sorted(PRESETS)}")
        if self.sweep:
            bad = sorted(set(self.sweep) - set(OVERRIDE_KEYS))
            if bad:
                raise ValueError(f"sweep keys {bad} are not overrides; allowed: {list(OVERRIDE_KEYS)}")
            for key, values in self.sweep.items():
                if not values:
                    raise ValueError(f"sweep.{key} is empty")
        return self


def _format_validation(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{path}: {err['msg']}")
    return "invalid configuration:\n  " + "\n  ".join(lines)


def parse_config(data: dict | None) -> RunConfig:
    try:
        return RunConfig.model_validate(data or {})
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from None


def load_config(path: str | Path) -> RunConfig:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if data is not None and not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping at the top level")
    return parse_config(data)


def dump_config(config: RunConfig) -> str:
    return yaml.safe_dump(config_to_dict(config), sort_keys=False)


def config_to_dict(config: RunConfig) -> dict:
    return config.model_dump(mode="json", exclude_none=True)


# -- scenario <-> config ------------------------------------------------------

def scenario_to_cfg(sc: Scenario) -> ScenarioCfg:
    return ScenarioCfg(
        name=sc.name,
        description=sc.description,
        targets=[TargetCfg(z=t.z, thickness=t.thickness, xi=t.xi, n_x=t.n_x, v_t=t.v_t)
                 for t in sc.targets],
        protocol=ProtocolCfg(
            initial_angle=sc.protocol.initial_theta / math.pi,
            segments=[SegmentCfg(time=s.t_switch, angle=s.theta / math.pi, ramp=s.ramp)
                      for s in sc.protocol.segments]),
        pulse=PulseCfg(t0=sc.pulse.t0, tau_s=sc.pulse.tau_s, amplitude=sc.pulse.amplitude),
        grid=GridCfg(t_end=sc.grid.t_end, dt=sc.grid.dt),
        analyses=list(sc.analyses),
        windows=None if sc.windows is None else [
            WindowCfg(a=w[0], b=w[1], tau=w[2] if len(w) > 2 else None) for w in sc.windows],
        convention=sc.convention,
        spectrum_half_width=sc.spectrum_half_width,
        node_after=sc.node_after,
        node_count=sc.node_count,
    )


def scenario_to_config(sc: Scenario, **kwargs) -> RunConfig:
    """A RunConfig whose inline scenario and constants reproduce ``sc``."""
    consts = ConstantsCfg(**dataclasses.asdict(sc.constants))
    return RunConfig(inline=scenario_to_cfg(sc), constants=consts, **kwargs)


def scenario_from_cfg(cfg: ScenarioCfg, consts: PhysicalConstants | None = None) -> Scenario:
    return Scenario(
        name=cfg.name,
        description=cfg.description,
        targets=tuple(Target(t.z, t.thickness, t.xi, t.n_x, t.v_t, index=i + 1)
                      for i, t in enumerate(cfg.targets)),
        protocol=RotationProtocol(
            tuple(Segment(s.time, s.angle * math.pi, s.ramp) for s in cfg.protocol.segments),
            cfg.protocol.initial_angle * math.pi),
        pulse=InputPulse(cfg.pulse.t0, cfg.pulse.tau_s, cfg.pulse.amplitude),
        grid=TimeGrid(cfg.grid.t_end, cfg.grid.dt),
        analyses=tuple(cfg.analyses),
        windows=None if cfg.windows is None else tuple((w.a, w.b, w.tau) for w in cfg.windows),
        convention=cfg.convention,
        constants=consts or PhysicalConstants(),
        spectrum_half_width=cfg.spectrum_half_width,
        node_after=cfg.node_after,
        node_count=cfg.node_count,
    )


def _apply_overrides(sc: Scenario, ov: OverridesCfg) -> Scenario:
    rep = dataclasses.replace
    targets = list(sc.targets)
    windows = sc.windows
    geometry_changed = False
    if ov.n_x is not None:
        targets = [rep(t, n_x=ov.n_x) for t in targets]
    if ov.xi is not None:
        targets = [rep(t, xi=ov.xi) for t in targets]
        geometry_changed = True
    if ov.thickness is not None:
        targets = [rep(t, thickness=ov.thickness) for t in targets]
        geometry_changed = True
    if ov.spacing is not None:
        if len(targets) < 2:
            raise ConfigError("overrides.spacing: needs at least two targets")
        center = (len(targets) - 1) / 2
        targets = [rep(t, z=(i - center) * ov.spacing) for i, t in enumerate(targets)]
        geometry_changed = True

    protocol = sc.protocol
    segs = list(protocol.segments)
    if ov.switch_times is not None:
        if len(ov.switch_times) != len(segs):
            raise ConfigError(f"overrides.switch_times: expected {len(segs)} times, "
                              f"got {len(ov.switch_times)}")
        segs = [rep(s, t_switch=t) for s, t in zip(segs, ov.switch_times)]
        geometry_changed = True
    if ov.ramp is not None:
        segs = [rep(s, ramp=ov.ramp) for s in segs]
    protocol = RotationProtocol(tuple(segs), protocol.initial_theta)

    pulse = sc.pulse if ov.amplitude is None else rep(sc.pulse, amplitude=ov.amplitude)
    grid = TimeGrid(ov.t_end if ov.t_end is not None else sc.grid.t_end,
                    ov.dt if ov.dt is not None else sc.grid.dt)
    if ov.windows == "auto" or (geometry_changed and ov.windows is None):
        # preset windows only fit the preset geometry
        windows = None
    elif ov.windows is not None:
        windows = tuple((w.a, w.b, w.tau) for w in ov.windows)
    return rep(sc, targets=tuple(targets), protocol=protocol, pulse=pulse, grid=grid,
               windows=windows, convention=ov.convention or sc.convention)


def resolve_scenario(config: RunConfig) -> Scenario:
    """Build and fully validate the scenario a config describes (no time stepping,
    except the reference run a node-inversion preset needs)."""
    try:
        consts_kw = config.constants.model_dump(exclude_none=True)
        if config.inline is not None:
            sc = scenario_from_cfg(config.inline, PhysicalConstants(**consts_kw))
        else:
            sc = get_scenario(config.scenario)
            if consts_kw:
                sc = dataclasses.replace(
                    sc, constants=PhysicalConstants(**{**dataclasses.asdict(sc.constants), **consts_kw}))
        sc = _apply_overrides(sc, config.overrides)
        check_resolution(sc.targets, sc.protocol, sc.grid, sc.constants, sc.numerics)
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    return sc
