"""Event scenarios and label encoding.

Class scheme for the single-event campaigns: event label 0 is normal
operation, 1..10 the ten fault types, 11 cyber attack; the combined label
folds in line-level fault location as line_index*10 + type_index (1..200),
with 0 normal and 201 cyber attack. Simultaneous campaigns use a four-class
scheme instead: normal, dual fault, dual attack, fault plus attack.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attacks import AttackSpec
from .errors import ScenarioError
from .faults import FaultSpec, FaultType
from .network import NetworkModel, apply_outage

D_GRID = (0.2, 0.4, 0.6, 0.8)
ZF_GRID = (0.001, 0.05, 0.1, 0.15)

EVENT_NORMAL = 0
EVENT_ATTACK = 11
COMBINED_NORMAL = 0
COMBINED_ATTACK = 201

SIMUL_CLASSES = {"normal": 0, "dual_fault": 1, "dual_attack": 2, "fault_attack": 3}

SINGLE_KINDS = ("normal", "fault", "attack")
SIMUL_KINDS = ("normal", "dual_fault", "dual_attack", "fault_attack")


def combined_class(line: int, ftype: FaultType) -> int:
    return line * 10 + ftype.class_index


def decode_combined(label: int):
    """Map a combined class back to (category, line, ftype)."""
    if label == COMBINED_NORMAL:
        return "normal", None, None
    if label == COMBINED_ATTACK:
        return "attack", None, None
    if not 1 <= label <= 200:
        raise ValueError(f"combined class must be in 0..201, got {label}")
    line = (label - 1) // 10
    ftype = FaultType.from_class_index((label - 1) % 10 + 1)
    return "fault", line, ftype


@dataclass(frozen=True)
class EventScenario:
    index: int                      # position in the campaign, also the noise stream key
    kind: str
    faults: tuple[FaultSpec, ...] = ()
    attacks: tuple[AttackSpec, ...] = ()
    outage: int | None = None

    def __post_init__(self):
        if self.kind not in SINGLE_KINDS + SIMUL_KINDS:
            raise ScenarioError(f"unknown scenario kind {self.kind!r}")

    def event12(self) -> int:
        if self.kind == "normal":
            return EVENT_NORMAL
        if self.kind == "fault":
            return self.faults[0].ftype.class_index
        if self.kind == "attack":
            return EVENT_ATTACK
        return SIMUL_CLASSES[self.kind]

    def combined202(self) -> int:
        if self.kind == "normal":
            return COMBINED_NORMAL
        if self.kind == "fault":
            return combined_class(self.faults[0].line, self.faults[0].ftype)
        if self.kind == "attack":
            return COMBINED_ATTACK
        return SIMUL_CLASSES[self.kind]


def _fault_grid(lines):
    for line in lines:
        for d in D_GRID:
            for zf in ZF_GRID:
                for ftype in FaultType:
                    yield FaultSpec(line, d, ftype, zf)


def enumerate_single(net: NetworkModel, n_normal: int = 320) -> list[EventScenario]:
    """Default campaign: the full fault grid over all in-service lines, one
    attack per fault case (target = donor line's from-bus), plus normals."""
    lines = [ln.id for ln in net.in_service_lines()]
    scenarios: list[EventScenario] = []
    idx = 0
    fault_specs = list(_fault_grid(lines))
    for spec in fault_specs:
        scenarios.append(EventScenario(index=idx, kind="fault", faults=(spec,)))
        idx += 1
    for spec in fault_specs:
        kind = "replay" if idx % 2 == 0 else "fdi"
        target = net.line(spec.line).from_bus
        scenarios.append(
            EventScenario(index=idx, kind="attack",
                          attacks=(AttackSpec(target, spec, kind),))
        )
        idx += 1
    for _ in range(n_normal):
        scenarios.append(EventScenario(index=idx, kind="normal"))
        idx += 1
    return scenarios


def enumerate_n1(net: NetworkModel, outage: int, n_normal: int = 320) -> list[EventScenario]:
    """Same grid as the single campaign over the lines that remain in service
    after one outage. Rejects outages that disconnect the grid."""
    net_out = apply_outage(net, outage)
    scenarios = enumerate_single(net_out, n_normal=n_normal)
    return [
        EventScenario(index=s.index, kind=s.kind, faults=s.faults, attacks=s.attacks, outage=outage)
        for s in scenarios
    ]


def enumerate_simultaneous(net: NetworkModel, k: int = 1200, seed: int = 0,
                           n_normal: int = 320) -> list[EventScenario]:
    """k two-event scenarios sampled with a fixed seed, stratified over the
    three simultaneous classes, plus normals."""
    if k <= 0:
        raise ScenarioError("k must be positive")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x5EED)))
    lines = [ln.id for ln in net.in_service_lines()]

    def draw_fault(line):
        return FaultSpec(
            line=line,
            d=D_GRID[rng.integers(len(D_GRID))],
            ftype=list(FaultType)[rng.integers(len(FaultType))],
            zf=ZF_GRID[rng.integers(len(ZF_GRID))],
        )

    def draw_line_pair(distinct_targets=False):
        while True:
            la, lb = rng.choice(len(lines), size=2, replace=False)
            la, lb = lines[la], lines[lb]
            if distinct_targets and net.line(la).from_bus == net.line(lb).from_bus:
                continue
            return la, lb

    counts = {c: k // 3 for c in ("dual_fault", "dual_attack", "fault_attack")}
    for i, c in enumerate(("dual_fault", "dual_attack", "fault_attack")):
        if i < k % 3:
            counts[c] += 1

    scenarios: list[EventScenario] = []
    idx = 0
    for _ in range(counts["dual_fault"]):
        la, lb = draw_line_pair()
        scenarios.append(EventScenario(index=idx, kind="dual_fault",
                                       faults=(draw_fault(la), draw_fault(lb))))
        idx += 1
    for _ in range(counts["dual_attack"]):
        la, lb = draw_line_pair(distinct_targets=True)
        a1 = AttackSpec(net.line(la).from_bus, draw_fault(la), "replay")
        a2 = AttackSpec(net.line(lb).from_bus, draw_fault(lb), "fdi")
        scenarios.append(EventScenario(index=idx, kind="dual_attack", attacks=(a1, a2)))
        idx += 1
    for _ in range(counts["fault_attack"]):
        la, lb = draw_line_pair()
        atk = AttackSpec(net.line(lb).from_bus, draw_fault(lb), "fdi")
        scenarios.append(EventScenario(index=idx, kind="fault_attack",
                                       faults=(draw_fault(la),), attacks=(atk,)))
        idx += 1
    for _ in range(n_normal):
        scenarios.append(EventScenario(index=idx, kind="normal"))
        idx += 1
    return scenarios
