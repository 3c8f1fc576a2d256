"""Campaign generation, feature extraction, and dataset serialization.

Feature layout is frame-major, then bus, then the 13 per-bus quantities
(|Va| |Vb| |Vc|  ang Va ang Vb ang Vc  |Ia| |Ib| |Ic|  ang Ia ang Ib ang Ic
frequency), giving 6 x 14 x 13 = 1092 features for the defaults. Datasets go
to CSV with a JSON meta sidecar; floats are written with 17 significant
digits so regeneration with the same seed is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .attacks import splice_attack
from .errors import DatasetError, ScenarioError, SchemaMismatchError
from .faults import FaultSpec, FaultType, to_phase_domain
from .network import NetworkModel, apply_outage, ieee14
from .powerflow import PowerFlowSolution, solve_nr
from .scenarios import (
    EventScenario,
    SIMUL_CLASSES,
    enumerate_n1,
    enumerate_simultaneous,
    enumerate_single,
)
from .windows import (
    EventWindow,
    GridState,
    NoiseConfig,
    WindowingConfig,
    apply_noise,
    base_grid_state,
    build_window,
    fault_grid_state,
)

QUANTITIES = (
    "va_mag", "vb_mag", "vc_mag",
    "va_ang", "vb_ang", "vc_ang",
    "ia_mag", "ib_mag", "ic_mag",
    "ia_ang", "ib_ang", "ic_ang",
    "freq",
)

LABEL_COLUMNS = ("event12", "combined202")
PROV_COLUMNS = (
    "kind", "line", "d", "zf", "ftype", "target_bus",
    "line2", "d2", "zf2", "ftype2", "target_bus2",
    "outage", "seed",
)

CAMPAIGNS = ("single", "n1", "simultaneous")


def schema_for(windowing: WindowingConfig, bus_ids) -> tuple[str, ...]:
    return tuple(
        f"t{f}_b{b}_{q}"
        for f in range(windowing.n_frames)
        for b in bus_ids
        for q in QUANTITIES
    )


def schema_hash(schema) -> str:
    return hashlib.sha256(",".join(schema).encode()).hexdigest()


def featurize(window: EventWindow, schema) -> np.ndarray:
    """Flatten a window into the documented feature order."""
    block = np.concatenate(
        [window.v_mag, window.v_ang, window.i_mag, window.i_ang, window.freq[..., None]],
        axis=2,
    )
    vec = block.ravel()
    if len(vec) != len(schema):
        raise SchemaMismatchError(
            f"window yields {len(vec)} features but schema has {len(schema)}"
        )
    return vec


@dataclass(frozen=True)
class Provenance:
    kind: str
    seed: int
    outage: int | None = None
    line: int | None = None
    d: float | None = None
    zf: float | None = None
    ftype: str | None = None
    target_bus: int | None = None
    line2: int | None = None
    d2: float | None = None
    zf2: float | None = None
    ftype2: str | None = None
    target_bus2: int | None = None


def _prov_slot(spec: FaultSpec | None, target: int | None):
    if spec is None:
        return (None, None, None, None, None)
    return (spec.line, spec.d, spec.zf, spec.ftype.code, target)


def provenance_for(scenario: EventScenario) -> Provenance:
    slots = [(None, None), (None, None)]  # (FaultSpec, target_bus)
    if scenario.kind == "fault":
        slots[0] = (scenario.faults[0], None)
    elif scenario.kind == "attack":
        a = scenario.attacks[0]
        slots[0] = (a.donor, a.target_bus)
    elif scenario.kind == "dual_fault":
        slots[0] = (scenario.faults[0], None)
        slots[1] = (scenario.faults[1], None)
    elif scenario.kind == "dual_attack":
        slots[0] = (scenario.attacks[0].donor, scenario.attacks[0].target_bus)
        slots[1] = (scenario.attacks[1].donor, scenario.attacks[1].target_bus)
    elif scenario.kind == "fault_attack":
        slots[0] = (scenario.faults[0], None)
        slots[1] = (scenario.attacks[0].donor, scenario.attacks[0].target_bus)
    l1, d1, z1, f1, t1 = _prov_slot(*slots[0])
    l2, d2, z2, f2, t2 = _prov_slot(*slots[1])
    return Provenance(
        kind=scenario.kind, seed=scenario.index, outage=scenario.outage,
        line=l1, d=d1, zf=z1, ftype=f1, target_bus=t1,
        line2=l2, d2=d2, zf2=z2, ftype2=f2, target_bus2=t2,
    )


@dataclass(frozen=True)
class LabeledSample:
    features: np.ndarray
    event12: int
    combined202: int
    provenance: Provenance


@dataclass
class Dataset:
    schema: tuple[str, ...]
    samples: list[LabeledSample]
    meta: dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return len(self.schema)

    def feature_matrix(self) -> np.ndarray:
        return np.vstack([s.features for s in self.samples])

    def labels(self, column: str = "combined202") -> np.ndarray:
        return np.array([getattr(s, column) for s in self.samples], dtype=int)

    def class_counts(self, column: str = "combined202") -> dict[int, int]:
        vals, cnts = np.unique(self.labels(column), return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnts)}


def validate_dataset(ds: Dataset) -> None:
    """Full-scan consistency checks: uniform feature length, finite values,
    label-scheme consistency, meta counts matching the samples."""
    n = ds.n_features
    space = ds.meta.get("label_space", "combined202")
    for i, s in enumerate(ds.samples):
        if len(s.features) != n:
            raise DatasetError(f"sample {i}: feature length {len(s.features)} != schema {n}")
        if not np.all(np.isfinite(s.features)):
            raise DatasetError(f"sample {i}: non-finite feature value")
        e, c = s.event12, s.combined202
        if space == "simul4":
            if e != c or not 0 <= e <= 3:
                raise DatasetError(f"sample {i}: bad simultaneous labels ({e},{c})")
        else:
            ok = (
                (c == 0 and e == 0)
                or (c == 201 and e == 11)
                or (1 <= c <= 200 and 1 <= e <= 10 and (c - 1) % 10 + 1 == e)
            )
            if not ok:
                raise DatasetError(f"sample {i}: inconsistent labels event12={e} combined202={c}")
    counts = ds.meta.get("class_counts")
    if counts is not None:
        actual = ds.class_counts("combined202")
        if {int(k): v for k, v in counts.items()} != actual:
            raise DatasetError("meta class_counts disagree with samples")


class WindowSynthesizer:
    """Shared state for a campaign: one power flow, one base model, and a
    cache of fault solutions keyed by the fault spec set."""

    def __init__(self, net: NetworkModel, windowing: WindowingConfig | None = None,
                 noise: NoiseConfig | None = None, pf: PowerFlowSolution | None = None):
        self.net = net
        self.windowing = windowing or WindowingConfig()
        self.noise = noise
        self.pf = pf if pf is not None else solve_nr(net, tol=1e-10)
        self.base_model = to_phase_domain(net, self.pf)
        self.base_state = base_grid_state(net, self.pf, base_model=self.base_model)
        self._fault_states: dict[tuple, GridState] = {}

    def _state_key(self, specs) -> tuple:
        return tuple((s.line, s.d, s.ftype.code, s.zf) for s in specs)

    def fault_state(self, specs) -> GridState:
        key = self._state_key(specs)
        state = self._fault_states.get(key)
        if state is None:
            state = fault_grid_state(self.net, self.pf, specs, base_model=self.base_model)
            self._fault_states[key] = state
        return state

    def _window(self, event_state: GridState) -> EventWindow:
        return build_window(self.base_state, event_state, self.windowing,
                            nominal_hz=self.net.nominal_hz)

    def noiseless_window(self, scenario: EventScenario) -> EventWindow:
        kind = scenario.kind
        if kind == "normal":
            return self._window(self.base_state)
        if kind in ("fault", "dual_fault"):
            return self._window(self.fault_state(scenario.faults))
        if kind in ("attack", "dual_attack", "fault_attack"):
            if scenario.faults:
                current = self._window(self.fault_state(scenario.faults))
            else:
                current = self._window(self.base_state)
            for atk in scenario.attacks:
                atk.validate_against(self.net)
                donor_w = self._window(self.fault_state([atk.donor]))
                current = splice_attack(current, donor_w, atk.target_bus)
            return current
        raise ScenarioError(f"unknown scenario kind {kind!r}")

    def window(self, scenario: EventScenario) -> EventWindow:
        return apply_noise(self.noiseless_window(scenario), self.noise, scenario.index)


def synthesize_window(net: NetworkModel, scenario: EventScenario,
                      windowing: WindowingConfig | None = None,
                      noise: NoiseConfig | None = None,
                      pf: PowerFlowSolution | None = None) -> EventWindow:
    """One-shot window synthesis for a single scenario. The noise stream is
    derived from (noise.seed, scenario.index)."""
    synth = WindowSynthesizer(net, windowing=windowing, noise=noise, pf=pf)
    return synth.window(scenario)


def generate_campaign(campaign: str = "single", net: NetworkModel | None = None,
                      outage: int | None = None, k: int = 1200, n_normal: int = 320,
                      windowing: WindowingConfig | None = None,
                      noise: NoiseConfig | None = None) -> Dataset:
    """Enumerate and synthesize a full campaign into a labeled dataset."""
    if campaign not in CAMPAIGNS:
        raise ScenarioError(f"campaign must be one of {CAMPAIGNS}")
    net = net if net is not None else ieee14()
    windowing = windowing or WindowingConfig()
    noise = noise if noise is not None else NoiseConfig()

    if campaign == "single":
        scenarios = enumerate_single(net, n_normal=n_normal)
        label_space = "combined202"
    elif campaign == "n1":
        if outage is None:
            raise ScenarioError("n1 campaign requires an outage line id")
        scenarios = enumerate_n1(net, outage, n_normal=n_normal)
        net = apply_outage(net, outage)
        label_space = "combined202"
    else:
        scenarios = enumerate_simultaneous(net, k=k, seed=noise.seed, n_normal=n_normal)
        label_space = "simul4"

    synth = WindowSynthesizer(net, windowing=windowing, noise=noise)
    schema = schema_for(windowing, tuple(range(net.n_bus)))

    samples = []
    for sc in scenarios:
        w = synth.window(sc)
        feats = featurize(w, schema)
        samples.append(
            LabeledSample(
                features=feats,
                event12=sc.event12(),
                combined202=sc.combined202(),
                provenance=provenance_for(sc),
            )
        )

    ds = Dataset(schema=schema, samples=samples, meta={})
    ds.meta = {
        "generator_version": __version__,
        "master_seed": noise.seed,
        "campaign": campaign,
        "label_space": label_space,
        "outage": outage,
        "n_normal": n_normal,
        "k": k if campaign == "simultaneous" else None,
        "windowing": {"n_pre": windowing.n_pre, "n_fault": windowing.n_fault,
                      "frame_rate": windowing.frame_rate},
        "noise": {"sigma_mag": noise.sigma_mag, "sigma_ang": noise.sigma_ang,
                  "sigma_freq": noise.sigma_freq},
        "schema_hash": schema_hash(schema),
        "class_counts": {str(k_): v for k_, v in ds.class_counts("combined202").items()},
    }
    return ds


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def meta_path(path) -> Path:
    p = Path(path)
    return p.with_suffix(".meta.json") if p.suffix == ".csv" else Path(str(p) + ".meta.json")


def write_csv(ds: Dataset, path) -> None:
    """Write the dataset CSV plus its JSON meta sidecar."""
    path = Path(path)
    header = list(ds.schema) + list(LABEL_COLUMNS) + list(PROV_COLUMNS)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for s in ds.samples:
            p = s.provenance
            row = [f"{v:.17g}" for v in s.features]
            row.append(str(s.event12))
            row.append(str(s.combined202))
            row.extend(
                _fmt(v)
                for v in (
                    p.kind, p.line, p.d, p.zf, p.ftype, p.target_bus,
                    p.line2, p.d2, p.zf2, p.ftype2, p.target_bus2,
                    p.outage, p.seed,
                )
            )
            fh.write(",".join(row) + "\n")
    with open(meta_path(path), "w", encoding="utf-8") as fh:
        json.dump(ds.meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _opt_int(v):
    return None if v == "" else int(v)


def _opt_float(v):
    return None if v == "" else float(v)


def _opt_str(v):
    return None if v == "" else v


def read_csv(path) -> Dataset:
    """Read a dataset CSV written by write_csv; round-trips exactly."""
    path = Path(path)
    try:
        df = pd.read_csv(
            path,
            float_precision="round_trip",
            dtype={c: str for c in PROV_COLUMNS},
            keep_default_na=False,
        )
    except (pd.errors.ParserError, ValueError) as e:
        raise DatasetError(f"malformed dataset CSV: {e}") from e

    cols = list(df.columns)
    expect_tail = list(LABEL_COLUMNS) + list(PROV_COLUMNS)
    if len(cols) <= len(expect_tail) or cols[-len(expect_tail):] != expect_tail:
        raise DatasetError("dataset CSV is missing the label or provenance columns")
    schema = tuple(cols[: -len(expect_tail)])

    feats = df[list(schema)].to_numpy(dtype=float)
    ev = df["event12"].to_numpy(dtype=int)
    cb = df["combined202"].to_numpy(dtype=int)

    samples = []
    for i in range(len(df)):
        r = df.iloc[i]
        prov = Provenance(
            kind=r["kind"], seed=int(r["seed"]),
            outage=_opt_int(r["outage"]),
            line=_opt_int(r["line"]), d=_opt_float(r["d"]), zf=_opt_float(r["zf"]),
            ftype=_opt_str(r["ftype"]), target_bus=_opt_int(r["target_bus"]),
            line2=_opt_int(r["line2"]), d2=_opt_float(r["d2"]), zf2=_opt_float(r["zf2"]),
            ftype2=_opt_str(r["ftype2"]), target_bus2=_opt_int(r["target_bus2"]),
        )
        samples.append(
            LabeledSample(features=feats[i], event12=int(ev[i]), combined202=int(cb[i]),
                          provenance=prov)
        )

    mp = meta_path(path)
    if mp.exists():
        with open(mp, encoding="utf-8") as fh:
            meta = json.load(fh)
    else:
        meta = {"schema_hash": schema_hash(schema)}
    ds = Dataset(schema=schema, samples=samples, meta=meta)
    validate_dataset(ds)
    return ds
