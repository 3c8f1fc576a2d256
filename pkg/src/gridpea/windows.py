"""Measurement windows: per-bus phasor frames around a breaker trip.

A window holds n_pre steady-state frames followed by n_fault during-event
frames, each carrying per-phase voltage and injection-current phasors
(magnitude p.u., angle degrees) and a frequency reading per bus. Noise is
drawn from a stream keyed by (master seed, scenario index) so generation is
reproducible and order-independent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import WindowError
from .faults import FaultSolution, LinearGridModel, solve_fault, split_line, stamp_fault, to_phase_domain
from .network import NetworkModel
from .powerflow import PowerFlowSolution

PHASES = ("a", "b", "c")


@dataclass(frozen=True)
class WindowingConfig:
    n_pre: int = 2
    n_fault: int = 4
    frame_rate: float = 30.0

    def __post_init__(self):
        if self.n_pre < 1 or self.n_fault < 1:
            raise ValueError("n_pre and n_fault must both be at least 1")
        if self.frame_rate <= 0:
            raise ValueError("frame_rate must be positive")

    @property
    def n_frames(self) -> int:
        return self.n_pre + self.n_fault


@dataclass(frozen=True)
class NoiseConfig:
    sigma_mag: float = 0.005    # relative magnitude noise
    sigma_ang: float = 0.1      # degrees
    sigma_freq: float = 0.002   # Hz
    seed: int = 0               # master seed for all noise streams

    def __post_init__(self):
        if min(self.sigma_mag, self.sigma_ang, self.sigma_freq) < 0:
            raise ValueError("noise sigmas must be non-negative")


@dataclass(frozen=True)
class GridState:
    """One steady snapshot of the grid: per-bus, per-phase phasors."""

    v_mag: np.ndarray   # (n_bus, 3)
    v_ang: np.ndarray   # degrees
    i_mag: np.ndarray
    i_ang: np.ndarray


@dataclass(frozen=True)
class EventWindow:
    v_mag: np.ndarray   # (n_frames, n_bus, 3)
    v_ang: np.ndarray
    i_mag: np.ndarray
    i_ang: np.ndarray
    freq: np.ndarray    # (n_frames, n_bus)
    trip_index: int
    frame_rate: float
    bus_ids: tuple[int, ...]

    @property
    def n_frames(self) -> int:
        return self.v_mag.shape[0]

    @property
    def n_bus(self) -> int:
        return self.v_mag.shape[1]

    def equals(self, other: "EventWindow") -> bool:
        return (
            self.trip_index == other.trip_index
            and self.frame_rate == other.frame_rate
            and self.bus_ids == other.bus_ids
            and all(
                np.array_equal(getattr(self, f), getattr(other, f))
                for f in ("v_mag", "v_ang", "i_mag", "i_ang", "freq")
            )
        )

    def copy(self) -> "EventWindow":
        return EventWindow(
            v_mag=self.v_mag.copy(),
            v_ang=self.v_ang.copy(),
            i_mag=self.i_mag.copy(),
            i_ang=self.i_ang.copy(),
            freq=self.freq.copy(),
            trip_index=self.trip_index,
            frame_rate=self.frame_rate,
            bus_ids=self.bus_ids,
        )


def wrap_angle_deg(x):
    """Wrap angles into (-180, 180]."""
    r = np.asarray(x, dtype=float) % 360.0
    return np.where(r > 180.0, r - 360.0, r)


def state_from_solution(sol: FaultSolution) -> GridState:
    v = sol.bus_v_abc()
    return GridState(
        v_mag=np.abs(v),
        v_ang=np.degrees(np.angle(v)),
        i_mag=np.abs(sol.i_inj),
        i_ang=np.degrees(np.angle(sol.i_inj)),
    )


def build_window(pre: GridState, event: GridState, windowing: WindowingConfig,
                 nominal_hz: float = 60.0) -> EventWindow:
    """Stack pre-trip and during-event frames into one noiseless window."""
    n_bus = pre.v_mag.shape[0]
    if event.v_mag.shape != pre.v_mag.shape:
        raise WindowError("pre and event states have different shapes")

    def stack(field):
        a = getattr(pre, field)
        b = getattr(event, field)
        return np.concatenate(
            [np.repeat(a[None], windowing.n_pre, axis=0), np.repeat(b[None], windowing.n_fault, axis=0)]
        )

    return EventWindow(
        v_mag=stack("v_mag"),
        v_ang=stack("v_ang"),
        i_mag=stack("i_mag"),
        i_ang=stack("i_ang"),
        freq=np.full((windowing.n_frames, n_bus), float(nominal_hz)),
        trip_index=windowing.n_pre,
        frame_rate=windowing.frame_rate,
        bus_ids=tuple(range(n_bus)),
    )


def base_grid_state(net: NetworkModel, pf: PowerFlowSolution,
                    base_model: LinearGridModel | None = None) -> GridState:
    """Normal-operation snapshot from the unfaulted phase-domain solve."""
    model = base_model if base_model is not None else to_phase_domain(net, pf)
    return state_from_solution(solve_fault(model))


def fault_grid_state(net: NetworkModel, pf: PowerFlowSolution, specs,
                     base_model: LinearGridModel | None = None) -> GridState:
    """During-fault snapshot for one or more simultaneous faults."""
    model = base_model if base_model is not None else to_phase_domain(net, pf)
    for spec in specs:
        model, node = split_line(model, spec.line, spec.d)
        model = stamp_fault(model, node, spec.ftype, spec.zf)
    return state_from_solution(solve_fault(model))


def noise_rng(noise: NoiseConfig, stream_key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((noise.seed, int(stream_key))))


def apply_noise(window: EventWindow, noise: NoiseConfig | None, stream_key: int) -> EventWindow:
    """Measurement noise applied to every frame/feature of a window.

    Draw order is fixed (v_mag, v_ang, i_mag, i_ang, freq) so identical
    (noise config, stream key) pairs give byte-identical windows.
    """
    if noise is None:
        return window
    rng = noise_rng(noise, stream_key)
    sh = window.v_mag.shape
    v_mag = window.v_mag * (1.0 + noise.sigma_mag * rng.standard_normal(sh))
    v_ang = wrap_angle_deg(window.v_ang + noise.sigma_ang * rng.standard_normal(sh))
    i_mag = window.i_mag * (1.0 + noise.sigma_mag * rng.standard_normal(sh))
    i_ang = wrap_angle_deg(window.i_ang + noise.sigma_ang * rng.standard_normal(sh))
    freq = window.freq + noise.sigma_freq * rng.standard_normal(window.freq.shape)
    return EventWindow(
        v_mag=v_mag, v_ang=v_ang, i_mag=i_mag, i_ang=i_ang, freq=freq,
        trip_index=window.trip_index, frame_rate=window.frame_rate, bus_ids=window.bus_ids,
    )


def window_to_json_obj(window: EventWindow) -> dict:
    frames = []
    for f in range(window.n_frames):
        frame = {}
        for bi, bus in enumerate(window.bus_ids):
            entry = {}
            for pi, ph in enumerate(PHASES):
                entry[f"v{ph}"] = [window.v_mag[f, bi, pi], window.v_ang[f, bi, pi]]
            for pi, ph in enumerate(PHASES):
                entry[f"i{ph}"] = [window.i_mag[f, bi, pi], window.i_ang[f, bi, pi]]
            entry["f"] = window.freq[f, bi]
            frame[str(bus)] = entry
        frames.append(frame)
    return {
        "trip_index": window.trip_index,
        "frame_rate": window.frame_rate,
        "frames": frames,
    }


def window_from_json_obj(obj: dict) -> EventWindow:
    try:
        frames = obj["frames"]
        trip_index = int(obj["trip_index"])
        frame_rate = float(obj["frame_rate"])
    except (KeyError, TypeError, ValueError) as e:
        raise WindowError(f"malformed window document: {e}") from e
    if not frames:
        raise WindowError("window has no frames")
    bus_keys = sorted(frames[0].keys(), key=int)
    n_f, n_b = len(frames), len(bus_keys)
    v_mag = np.zeros((n_f, n_b, 3))
    v_ang = np.zeros((n_f, n_b, 3))
    i_mag = np.zeros((n_f, n_b, 3))
    i_ang = np.zeros((n_f, n_b, 3))
    freq = np.zeros((n_f, n_b))
    try:
        for f, frame in enumerate(frames):
            if sorted(frame.keys(), key=int) != bus_keys:
                raise WindowError("frames disagree on the bus set")
            for bi, key in enumerate(bus_keys):
                entry = frame[key]
                for pi, ph in enumerate(PHASES):
                    v_mag[f, bi, pi], v_ang[f, bi, pi] = entry[f"v{ph}"]
                    i_mag[f, bi, pi], i_ang[f, bi, pi] = entry[f"i{ph}"]
                freq[f, bi] = entry["f"]
    except (KeyError, TypeError, ValueError) as e:
        raise WindowError(f"malformed window frame: {e}") from e
    if not 0 <= trip_index <= n_f:
        raise WindowError(f"trip_index {trip_index} outside frame range")
    return EventWindow(
        v_mag=v_mag, v_ang=v_ang, i_mag=i_mag, i_ang=i_ang, freq=freq,
        trip_index=trip_index, frame_rate=frame_rate,
        bus_ids=tuple(int(k) for k in bus_keys),
    )


def write_window(window: EventWindow, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(window_to_json_obj(window), fh)


def read_window(path) -> EventWindow:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as e:
            raise WindowError(f"window file is not valid JSON: {e}") from e
    return window_from_json_obj(obj)
