"""Cyber-attack window synthesis.

An attack against one substation's measurement stream is modeled as a data
splice: the target bus carries a previously captured (replay) or freshly
fabricated (fdi) fault signature while every other bus keeps its
normal-operation measurements. The two kinds are statistically identical
here and differ only as provenance tags.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ScenarioError, WindowError
from .faults import FaultSpec, LinearGridModel
from .network import NetworkModel
from .powerflow import PowerFlowSolution
from .windows import (
    EventWindow,
    NoiseConfig,
    WindowingConfig,
    apply_noise,
    base_grid_state,
    build_window,
    fault_grid_state,
)

ATTACK_KINDS = ("replay", "fdi")


@dataclass(frozen=True)
class AttackSpec:
    target_bus: int
    donor: FaultSpec          # fault whose signature is injected at the target
    kind: str = "fdi"

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ScenarioError(f"attack kind must be one of {ATTACK_KINDS}, got {self.kind!r}")

    def validate_against(self, net: NetworkModel) -> None:
        ln = net.line(self.donor.line)
        if self.target_bus not in (ln.from_bus, ln.to_bus):
            raise ScenarioError(
                f"attack target bus {self.target_bus} is not an endpoint of donor line {self.donor.line}"
            )


def splice_attack(normal: EventWindow, fault: EventWindow, target_bus: int) -> EventWindow:
    """Copy the target bus's V, I and frequency entries from the fault window
    into the normal window; every other bus is untouched."""
    if normal.n_frames != fault.n_frames or normal.frame_rate != fault.frame_rate:
        raise WindowError("windows differ in frame count or frame rate")
    if normal.bus_ids != fault.bus_ids:
        raise WindowError("windows differ in bus set")
    if target_bus not in normal.bus_ids:
        raise WindowError(f"unknown bus {target_bus}")
    bi = normal.bus_ids.index(target_bus)
    out = normal.copy()
    for field in ("v_mag", "v_ang", "i_mag", "i_ang", "freq"):
        getattr(out, field)[:, bi] = getattr(fault, field)[:, bi]
    return EventWindow(
        v_mag=out.v_mag, v_ang=out.v_ang, i_mag=out.i_mag, i_ang=out.i_ang,
        freq=out.freq, trip_index=fault.trip_index, frame_rate=normal.frame_rate,
        bus_ids=normal.bus_ids,
    )


def craft_attack_window(
    net: NetworkModel,
    pf: PowerFlowSolution,
    spec: AttackSpec,
    windowing: WindowingConfig | None = None,
    noise: NoiseConfig | None = None,
    stream_key: int = 0,
    base_model: LinearGridModel | None = None,
) -> EventWindow:
    """Synthesize one attack window: normal everywhere, donor-fault signature
    at the target bus, noise applied after splicing so target and non-target
    buses share one stream."""
    windowing = windowing or WindowingConfig()
    spec.validate_against(net)
    base = base_grid_state(net, pf, base_model=base_model)
    donor = fault_grid_state(net, pf, [spec.donor], base_model=base_model)
    normal_w = build_window(base, base, windowing, nominal_hz=net.nominal_hz)
    fault_w = build_window(base, donor, windowing, nominal_hz=net.nominal_hz)
    spliced = splice_attack(normal_w, fault_w, spec.target_bus)
    return apply_noise(spliced, noise, stream_key)
