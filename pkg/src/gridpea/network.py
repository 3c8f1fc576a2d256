"""Network description and admittance construction.

The default case is the standard IEEE 14-bus load-flow data with the three
transformers modeled as lines (leakage impedance, unit tap), zero-sequence
line parameters set to three times the positive-sequence values, and typical
machine reactances for the five sources. The bus-9 shunt capacitor of the
published case is folded into the bus-9 load as a constant-power equivalent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from .errors import (
    CaseSchemaError,
    DisconnectedGraphError,
    DuplicateIdError,
    OutageError,
    SlackBusError,
    UnknownLineError,
)

BUS_KINDS = ("slack", "PV", "PQ")
YBUS_DOMAINS = ("positive", "negative", "zero")


@dataclass(frozen=True)
class Bus:
    id: int
    kind: str
    load: complex = 0j      # power demand, p.u. on base_mva
    pg: float = 0.0         # real-power setpoint, p.u. (PV and slack)
    vset: float = 1.0       # voltage-magnitude setpoint, p.u. (PV and slack)


@dataclass(frozen=True)
class Line:
    id: int
    from_bus: int
    to_bus: int
    r1: float
    x1: float
    b1: float               # total charging susceptance, p.u.
    r0: float
    x0: float
    in_service: bool = True

    @property
    def z1(self) -> complex:
        return complex(self.r1, self.x1)

    @property
    def z0(self) -> complex:
        return complex(self.r0, self.x0)


@dataclass(frozen=True)
class GeneratorDynamic:
    bus: int
    x1s: float              # subtransient reactance
    x2: float               # negative-sequence reactance
    x0: float               # zero-sequence reactance
    grounded: bool = True


@dataclass(frozen=True)
class NetworkModel:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    gens: tuple[GeneratorDynamic, ...]
    base_mva: float = 100.0
    nominal_hz: float = 60.0

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    @property
    def slack(self) -> int:
        return next(b.id for b in self.buses if b.kind == "slack")

    def line(self, line_id: int) -> Line:
        for ln in self.lines:
            if ln.id == line_id:
                return ln
        raise UnknownLineError(f"no line with id {line_id}")

    def in_service_lines(self) -> tuple[Line, ...]:
        return tuple(ln for ln in self.lines if ln.in_service)

    def gen_buses(self) -> tuple[int, ...]:
        return tuple(sorted({g.bus for g in self.gens}))


def _require(cond, exc, msg):
    if not cond:
        raise exc(msg)


def _parse_bus(obj) -> Bus:
    try:
        bid = int(obj["id"])
        kind = obj["kind"]
        p, q = obj["load"]
        gen = obj.get("gen")
    except (KeyError, TypeError, ValueError) as e:
        raise CaseSchemaError(f"bad bus entry: {obj!r}") from e
    _require(kind in BUS_KINDS, CaseSchemaError, f"bus {bid}: unknown kind {kind!r}")
    pg, vset = 0.0, 1.0
    if gen is not None:
        try:
            pg, vset = float(gen[0]), float(gen[1])
        except (TypeError, ValueError, IndexError) as e:
            raise CaseSchemaError(f"bus {bid}: bad gen entry {gen!r}") from e
    _require(float(p) >= 0.0, CaseSchemaError, f"bus {bid}: negative load P")
    _require(pg >= 0.0, CaseSchemaError, f"bus {bid}: negative generation setpoint")
    if kind in ("slack", "PV"):
        _require(gen is not None, CaseSchemaError, f"bus {bid}: {kind} bus needs a gen setpoint")
        _require(vset > 0.0, CaseSchemaError, f"bus {bid}: non-positive voltage setpoint")
    return Bus(id=bid, kind=kind, load=complex(float(p), float(q)), pg=pg, vset=vset)


def _parse_line(obj) -> Line:
    try:
        ln = Line(
            id=int(obj["id"]),
            from_bus=int(obj["from"]),
            to_bus=int(obj["to"]),
            r1=float(obj["r1"]),
            x1=float(obj["x1"]),
            b1=float(obj["b1"]),
            r0=float(obj["r0"]),
            x0=float(obj["x0"]),
            in_service=bool(obj.get("in_service", True)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise CaseSchemaError(f"bad line entry: {obj!r}") from e
    _require(ln.from_bus != ln.to_bus, CaseSchemaError, f"line {ln.id}: from == to")
    _require(ln.x1 > 0.0, CaseSchemaError, f"line {ln.id}: x1 must be positive")
    _require(
        abs(ln.z0) >= abs(ln.z1),
        CaseSchemaError,
        f"line {ln.id}: zero-sequence impedance magnitude below positive-sequence",
    )
    return ln


def _parse_gen(obj) -> GeneratorDynamic:
    try:
        g = GeneratorDynamic(
            bus=int(obj["bus"]),
            x1s=float(obj["x1s"]),
            x2=float(obj["x2"]),
            x0=float(obj["x0"]),
            grounded=bool(obj.get("grounded", True)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise CaseSchemaError(f"bad gen entry: {obj!r}") from e
    _require(g.x1s > 0 and g.x2 > 0 and g.x0 > 0, CaseSchemaError, f"gen at bus {g.bus}: reactances must be positive")
    return g


def connected_buses(n_bus: int, lines) -> set[int]:
    """Breadth-first reachability from bus 0 over in-service lines."""
    adj: dict[int, list[int]] = {i: [] for i in range(n_bus)}
    for ln in lines:
        if ln.in_service:
            adj[ln.from_bus].append(ln.to_bus)
            adj[ln.to_bus].append(ln.from_bus)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def is_connected(net: NetworkModel) -> bool:
    return len(connected_buses(net.n_bus, net.lines)) == net.n_bus


def load_case(text: str) -> NetworkModel:
    """Parse and validate a JSON case document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise CaseSchemaError(f"case is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise CaseSchemaError("case document must be a JSON object")
    for key in ("base_mva", "buses", "lines", "gens"):
        _require(key in doc, CaseSchemaError, f"case missing top-level key {key!r}")

    buses = [_parse_bus(b) for b in doc["buses"]]
    lines = [_parse_line(l) for l in doc["lines"]]
    gens = [_parse_gen(g) for g in doc["gens"]]

    bus_ids = [b.id for b in buses]
    _require(len(set(bus_ids)) == len(bus_ids), DuplicateIdError, "duplicate bus ids")
    _require(sorted(bus_ids) == list(range(len(buses))), CaseSchemaError, "bus ids must be dense 0..N-1")
    buses.sort(key=lambda b: b.id)

    line_ids = [l.id for l in lines]
    _require(len(set(line_ids)) == len(line_ids), DuplicateIdError, "duplicate line ids")
    _require(sorted(line_ids) == list(range(len(lines))), CaseSchemaError, "line ids must be dense 0..L-1")
    lines.sort(key=lambda l: l.id)

    n = len(buses)
    for ln in lines:
        _require(0 <= ln.from_bus < n and 0 <= ln.to_bus < n, CaseSchemaError, f"line {ln.id}: unknown bus")
    for g in gens:
        _require(0 <= g.bus < n, CaseSchemaError, f"gen: unknown bus {g.bus}")

    n_slack = sum(1 for b in buses if b.kind == "slack")
    if n_slack != 1:
        raise SlackBusError(f"expected exactly one slack bus, found {n_slack}")
    _require(any(g.grounded for g in gens), CaseSchemaError, "at least one grounded source is required")
    machine_buses = {g.bus for g in gens}
    for b in buses:
        if b.kind in ("slack", "PV"):
            _require(b.id in machine_buses, CaseSchemaError,
                     f"bus {b.id}: {b.kind} bus needs a machine entry in gens")

    net = NetworkModel(
        buses=tuple(buses),
        lines=tuple(lines),
        gens=tuple(gens),
        base_mva=float(doc["base_mva"]),
        nominal_hz=float(doc.get("nominal_hz", 60.0)),
    )
    if not is_connected(net):
        raise DisconnectedGraphError("in-service lines do not connect all buses")
    return net


def serialize_case(net: NetworkModel) -> str:
    """Inverse of load_case: emits a case document that reparses to an equal model."""
    doc = {
        "base_mva": net.base_mva,
        "nominal_hz": net.nominal_hz,
        "buses": [
            {
                "id": b.id,
                "kind": b.kind,
                "load": [b.load.real, b.load.imag],
                "gen": None if b.kind == "PQ" else [b.pg, b.vset],
            }
            for b in net.buses
        ],
        "lines": [
            {
                "id": l.id,
                "from": l.from_bus,
                "to": l.to_bus,
                "r1": l.r1,
                "x1": l.x1,
                "b1": l.b1,
                "r0": l.r0,
                "x0": l.x0,
                "in_service": l.in_service,
            }
            for l in net.lines
        ],
        "gens": [
            {"bus": g.bus, "x1s": g.x1s, "x2": g.x2, "x0": g.x0, "grounded": g.grounded}
            for g in net.gens
        ],
    }
    return json.dumps(doc, indent=2)


def ieee14_text() -> str:
    return resources.files("gridpea.data").joinpath("ieee14.json").read_text(encoding="utf-8")


def ieee14() -> NetworkModel:
    """The embedded IEEE 14-bus default case."""
    return load_case(ieee14_text())


def build_ybus(net: NetworkModel, domain: str = "positive", with_gens: bool = False) -> np.ndarray:
    """Nodal admittance matrix for one sequence network.

    Off-diagonal (i, j) carries minus the sum of series admittances of
    in-service lines between i and j. Line charging appears on the diagonal
    in the positive and negative sequences only. With with_gens=True the
    machine admittances (Norton shunts used by fault studies) are added:
    1/jx1s positive, 1/jx2 negative, and 1/jx0 zero sequence for grounded
    machines.
    """
    if domain not in YBUS_DOMAINS:
        raise ValueError(f"domain must be one of {YBUS_DOMAINS}")
    n = net.n_bus
    y = np.zeros((n, n), dtype=complex)
    for ln in net.in_service_lines():
        ys = 1.0 / (ln.z0 if domain == "zero" else ln.z1)
        i, j = ln.from_bus, ln.to_bus
        y[i, j] -= ys
        y[j, i] -= ys
        y[i, i] += ys
        y[j, j] += ys
        if domain != "zero":
            y[i, i] += 0.5j * ln.b1
            y[j, j] += 0.5j * ln.b1
    if with_gens:
        for g in net.gens:
            if domain == "positive":
                y[g.bus, g.bus] += 1.0 / (1j * g.x1s)
            elif domain == "negative":
                y[g.bus, g.bus] += 1.0 / (1j * g.x2)
            elif g.grounded:
                y[g.bus, g.bus] += 1.0 / (1j * g.x0)
    return y


def apply_outage(net: NetworkModel, line_id: int) -> NetworkModel:
    """Take one line out of service, rejecting outages that split the grid."""
    ln = net.line(line_id)
    if not ln.in_service:
        raise OutageError(f"line {line_id} is already out of service")
    lines = tuple(replace(l, in_service=False) if l.id == line_id else l for l in net.lines)
    out = replace(net, lines=lines)
    if not is_connected(out):
        raise DisconnectedGraphError(f"outage of line {line_id} disconnects the grid")
    return out
