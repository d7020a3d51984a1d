"""Simulator for gravitationally induced photon echoes in cascaded nuclear targets."""

__version__ = "0.1.0"

from .analysis import (
    EchoMetrics,
    SpectrumResult,
    comb_echo_period,
    detect_echo_window,
    echo_efficiency,
    echo_fidelity,
    find_temporal_nodes,
    measure_echoes,
    spectrum,
)
from .constants import NumericsConvention, PhysicalConstants, redshift_gradient
from .detuning import (
    RotationProtocol,
    Segment,
    Target,
    critical_speed,
    detuning,
    rotation_angle,
    shift_ratio,
    transverse_doppler,
)
from .scenarios import Scenario, get_scenario, list_scenarios, preset_fig1, preset_fig2, preset_fig4
from .solver import (
    BoundaryRecord,
    InputPulse,
    TimeGrid,
    advance_step,
    gaussian_input,
    polarization_rhs,
    propagate_field,
    simulate_cascade,
)
