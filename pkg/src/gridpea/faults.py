"""Phase-domain (abc) short-circuit engine with a sequence-network oracle.

During-fault voltages and currents come from a single linear solve of a
3(N+F)-node phase-domain admittance model: balanced line/load/machine
elements are stamped as 3x3 blocks obtained from their sequence admittances,
fault elements are stamped per phase. The same network is also solvable by
textbook symmetrical-components closed forms (sequence_oracle), which gives
an independent check on every single-fault solution.

Conventions: fault impedance is resistive, p.u. on the system base, and
clamped below at ZF_MIN; double-phase-ground faults connect each faulted
phase to ground through its own zf.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import FaultModelError
from .network import NetworkModel
from .powerflow import PowerFlowSolution, bus_injections

ZF_MIN = 1e-6

_A_OP = np.exp(2j * np.pi / 3)
# columns are the zero/positive/negative sequence phasor sets
_A = np.array(
    [
        [1, 1, 1],
        [1, _A_OP**2, _A_OP],
        [1, _A_OP, _A_OP**2],
    ],
    dtype=complex,
)
_AINV = np.linalg.inv(_A)
# per-phase factors of a positive-sequence set (a, b, c)
ALPHA = np.array([1.0, _A_OP**2, _A_OP], dtype=complex)
# basis blocks: seq_block(y0,y1,y2) = y0*_T[0] + y1*_T[1] + y2*_T[2]
_T = [_A @ np.diag(e) @ _AINV for e in np.eye(3)]


def seq_block(y0: complex, y1: complex, y2: complex) -> np.ndarray:
    """3x3 phase-domain block of a balanced element given per-sequence admittances."""
    return y0 * _T[0] + y1 * _T[1] + y2 * _T[2]


class FaultType(enum.Enum):
    AG = ("AG", 1, (0,), "slg")
    BG = ("BG", 2, (1,), "slg")
    CG = ("CG", 3, (2,), "slg")
    ABG = ("ABG", 4, (0, 1), "llg")
    BCG = ("BCG", 5, (1, 2), "llg")
    ACG = ("ACG", 6, (0, 2), "llg")
    AB = ("AB", 7, (0, 1), "ll")
    BC = ("BC", 8, (1, 2), "ll")
    AC = ("AC", 9, (0, 2), "ll")
    ABCG = ("ABCG", 10, (0, 1, 2), "abcg")

    def __init__(self, code, class_index, phases, kind):
        self.code = code
        self.class_index = class_index  # event class 1..10
        self.phases = phases
        self.kind = kind

    @classmethod
    def from_code(cls, code: str) -> "FaultType":
        for ft in cls:
            if ft.code == code.upper():
                return ft
        raise ValueError(f"unknown fault type {code!r}")

    @classmethod
    def from_class_index(cls, idx: int) -> "FaultType":
        for ft in cls:
            if ft.class_index == idx:
                return ft
        raise ValueError(f"no fault type with class index {idx}")


@dataclass(frozen=True)
class FaultSpec:
    line: int
    d: float                  # location fraction from the from-bus, in (0, 1)
    ftype: FaultType
    zf: float                 # fault resistance, p.u.

    def __post_init__(self):
        if not 0.0 < self.d < 1.0:
            raise ValueError(f"fault location fraction must be in (0,1), got {self.d}")
        if self.zf < 0.0:
            raise ValueError(f"fault impedance must be non-negative, got {self.zf}")


@dataclass(frozen=True)
class SeriesElement:
    u: int
    w: int
    y0: complex
    y1: complex
    y2: complex
    bsh_u: float              # positive-sequence charging susceptance at u
    bsh_w: float
    line_id: int | None = None


@dataclass(frozen=True)
class ShuntElement:
    node: int
    y0: complex
    y1: complex
    y2: complex
    tag: str = ""


@dataclass(frozen=True)
class FaultElement:
    node: int
    phase_p: int
    phase_q: int | None       # None: phase to ground
    zf: float

    @property
    def y(self) -> complex:
        return complex(1.0 / self.zf)


@dataclass(frozen=True)
class FaultNode:
    node: int
    line_id: int
    d: float


@dataclass(frozen=True)
class LinearGridModel:
    n_bus: int
    series: tuple[SeriesElement, ...]
    shunts: tuple[ShuntElement, ...]
    fault_elements: tuple[FaultElement, ...]
    fault_nodes: tuple[FaultNode, ...]
    i_src: np.ndarray          # positive-sequence Norton currents per node

    @property
    def n_nodes(self) -> int:
        return len(self.i_src)


@dataclass(frozen=True)
class FaultSolution:
    v_abc: np.ndarray          # complex (n_nodes, 3)
    i_fault: tuple[tuple[FaultElement, complex], ...]
    i_inj: np.ndarray          # complex (n_bus, 3), sum of line flows per bus
    n_bus: int

    def bus_v_abc(self) -> np.ndarray:
        return self.v_abc[: self.n_bus]

    def fault_phase_currents(self, node: int) -> np.ndarray:
        """Per-phase currents into the fault elements at one node.

        A phase-to-phase element contributes +I at its first phase and -I at
        the second, so the vector is directly comparable with the sequence
        oracle's per-phase currents.
        """
        out = np.zeros(3, dtype=complex)
        for elem, cur in self.i_fault:
            if elem.node != node:
                continue
            out[elem.phase_p] += cur
            if elem.phase_q is not None:
                out[elem.phase_q] -= cur
        return out


def _grid_elements(net: NetworkModel, pf: PowerFlowSolution):
    """Series/shunt element lists and Norton source currents shared by the
    phase-domain model and the sequence oracle."""
    series = []
    for ln in net.in_service_lines():
        y1 = 1.0 / ln.z1
        y0 = 1.0 / ln.z0
        series.append(
            SeriesElement(ln.from_bus, ln.to_bus, y0, y1, y1, 0.5 * ln.b1, 0.5 * ln.b1, ln.id)
        )

    shunts = []
    v = pf.v
    for bus in net.buses:
        if bus.load != 0:
            y_l = np.conj(bus.load) / abs(v[bus.id]) ** 2
            shunts.append(ShuntElement(bus.id, 0j, y_l, y_l, tag=f"load@{bus.id}"))

    s_inj = bus_injections(net, v)
    gen_y1 = {}
    for g in net.gens:
        y1 = 1.0 / (1j * g.x1s)
        y2 = 1.0 / (1j * g.x2)
        y0 = 1.0 / (1j * g.x0) if g.grounded else 0j
        shunts.append(ShuntElement(g.bus, y0, y1, y2, tag=f"gen@{g.bus}"))
        gen_y1[g.bus] = gen_y1.get(g.bus, 0j) + y1

    i_src = np.zeros(net.n_bus, dtype=complex)
    for b, y1g in gen_y1.items():
        s_gen = s_inj[b] + net.buses[b].load
        i_src[b] = np.conj(s_gen / v[b]) + y1g * v[b]
    return series, shunts, i_src


def to_phase_domain(net: NetworkModel, pf: PowerFlowSolution) -> LinearGridModel:
    """Build the phase-domain linear model around a converged power flow.

    Loads become constant shunt admittances at their power-flow consumption,
    machines become Norton equivalents behind subtransient reactance, lines
    keep balanced sequence data (negative = positive). Solving the unfaulted
    model reproduces the power-flow voltages.
    """
    series, shunts, i_src = _grid_elements(net, pf)
    return LinearGridModel(
        n_bus=net.n_bus,
        series=tuple(series),
        shunts=tuple(shunts),
        fault_elements=(),
        fault_nodes=(),
        i_src=i_src,
    )


def split_line(model: LinearGridModel, line_id: int, d: float) -> tuple[LinearGridModel, int]:
    """Insert an internal fault node at fraction d along a line.

    The line becomes two series segments with impedances d*z and (1-d)*z per
    sequence; its total charging is split d/(1-d) between the two endpoint
    buses, none at the new node.
    """
    if not 0.0 < d < 1.0:
        raise FaultModelError(f"split fraction must be in (0,1), got {d}")
    target = None
    for elem in model.series:
        if elem.line_id == line_id:
            target = elem
            break
    if target is None:
        raise FaultModelError(f"line {line_id} is not in service in this model")

    node = model.n_nodes
    b_total = target.bsh_u + target.bsh_w
    seg1 = SeriesElement(
        target.u, node, target.y0 / d, target.y1 / d, target.y2 / d,
        d * b_total, 0.0, line_id=None,
    )
    seg2 = SeriesElement(
        node, target.w, target.y0 / (1 - d), target.y1 / (1 - d), target.y2 / (1 - d),
        0.0, (1 - d) * b_total, line_id=None,
    )
    series = tuple(e for e in model.series if e is not target) + (seg1, seg2)
    i_src = np.concatenate([model.i_src, [0j]])
    return (
        replace(
            model,
            series=series,
            fault_nodes=model.fault_nodes + (FaultNode(node, line_id, d),),
            i_src=i_src,
        ),
        node,
    )


def stamp_fault(model: LinearGridModel, node: int, ftype: FaultType, zf: float) -> LinearGridModel:
    """Add the fault admittance elements of one fault at a node.

    Ground faults put 1/zf from each faulted phase to ground; phase-phase
    faults put 1/zf between the two phase nodes. zf below ZF_MIN is clamped.
    """
    if not 0 <= node < model.n_nodes:
        raise FaultModelError(f"node {node} does not exist")
    zf = max(float(zf), ZF_MIN)
    if ftype.kind == "ll":
        p, q = ftype.phases
        elems = (FaultElement(node, p, q, zf),)
    else:
        elems = tuple(FaultElement(node, p, None, zf) for p in ftype.phases)
    return replace(model, fault_elements=model.fault_elements + elems)


def assemble(model: LinearGridModel) -> tuple[np.ndarray, np.ndarray]:
    """Dense phase-domain admittance matrix and source current vector."""
    m = model.n_nodes
    y = np.zeros((3 * m, 3 * m), dtype=complex)
    for e in model.series:
        blk = seq_block(e.y0, e.y1, e.y2)
        su, sw = 3 * e.u, 3 * e.w
        y[su : su + 3, su : su + 3] += blk
        y[sw : sw + 3, sw : sw + 3] += blk
        y[su : su + 3, sw : sw + 3] -= blk
        y[sw : sw + 3, su : su + 3] -= blk
        if e.bsh_u:
            y[su : su + 3, su : su + 3] += seq_block(0j, 1j * e.bsh_u, 1j * e.bsh_u)
        if e.bsh_w:
            y[sw : sw + 3, sw : sw + 3] += seq_block(0j, 1j * e.bsh_w, 1j * e.bsh_w)
    for s in model.shunts:
        sn = 3 * s.node
        y[sn : sn + 3, sn : sn + 3] += seq_block(s.y0, s.y1, s.y2)
    for f in model.fault_elements:
        p = 3 * f.node + f.phase_p
        if f.phase_q is None:
            y[p, p] += f.y
        else:
            q = 3 * f.node + f.phase_q
            y[p, p] += f.y
            y[q, q] += f.y
            y[p, q] -= f.y
            y[q, p] -= f.y

    i = np.zeros(3 * m, dtype=complex)
    nz = np.nonzero(model.i_src)[0]
    for u in nz:
        i[3 * u : 3 * u + 3] = model.i_src[u] * ALPHA
    return y, i


def solve_fault(model: LinearGridModel) -> FaultSolution:
    """Solve the (possibly faulted) phase-domain network.

    Handles zero, one, or two fault stamps uniformly; simultaneous faults
    are just additional stamps in the same linear solve.
    """
    y, i = assemble(model)
    try:
        v = np.linalg.solve(y, i)
    except np.linalg.LinAlgError as e:
        raise FaultModelError("singular phase-domain admittance matrix") from e
    v_abc = v.reshape(model.n_nodes, 3)

    i_fault = []
    for f in model.fault_elements:
        vp = v_abc[f.node, f.phase_p]
        if f.phase_q is None:
            cur = f.y * vp
        else:
            cur = f.y * (vp - v_abc[f.node, f.phase_q])
        i_fault.append((f, complex(cur)))

    i_inj = np.zeros((model.n_bus, 3), dtype=complex)
    for e in model.series:
        blk = seq_block(e.y0, e.y1, e.y2)
        flow_u = blk @ (v_abc[e.u] - v_abc[e.w])
        flow_w = blk @ (v_abc[e.w] - v_abc[e.u])
        if e.bsh_u:
            flow_u = flow_u + seq_block(0j, 1j * e.bsh_u, 1j * e.bsh_u) @ v_abc[e.u]
        if e.bsh_w:
            flow_w = flow_w + seq_block(0j, 1j * e.bsh_w, 1j * e.bsh_w) @ v_abc[e.w]
        if e.u < model.n_bus:
            i_inj[e.u] += flow_u
        if e.w < model.n_bus:
            i_inj[e.w] += flow_w

    return FaultSolution(
        v_abc=v_abc,
        i_fault=tuple(i_fault),
        i_inj=i_inj,
        n_bus=model.n_bus,
    )


@dataclass(frozen=True)
class OracleResult:
    i_phase: np.ndarray        # complex (3,), per-phase fault-element current
    z_th: np.ndarray           # complex (3,), Thevenin (Z0, Z1, Z2) at the fault node
    vpre: complex              # pre-fault positive-sequence voltage at the fault node
    v_seq: np.ndarray          # complex (3,), (V0,V1,V2) in the canonical fault frame


def _sequence_matrices(net: NetworkModel, pf: PowerFlowSolution, spec: FaultSpec):
    """Per-sequence nodal matrices of the split network plus the source vector."""
    series, shunts, i_src_bus = _grid_elements(net, pf)
    n = net.n_bus
    node = n
    mats = [np.zeros((n + 1, n + 1), dtype=complex) for _ in range(3)]

    def stamp_series(u, w, ys, seq):
        m = mats[seq]
        m[u, u] += ys
        m[w, w] += ys
        m[u, w] -= ys
        m[w, u] -= ys

    def stamp_shunt(u, ys, seq):
        mats[seq][u, u] += ys

    split_found = False
    for e in series:
        ys_by_seq = (e.y0, e.y1, e.y2)
        if e.line_id == spec.line:
            split_found = True
            d = spec.d
            b_total = e.bsh_u + e.bsh_w
            for seq in range(3):
                stamp_series(e.u, node, ys_by_seq[seq] / d, seq)
                stamp_series(node, e.w, ys_by_seq[seq] / (1 - d), seq)
            for seq in (1, 2):
                stamp_shunt(e.u, 1j * d * b_total, seq)
                stamp_shunt(e.w, 1j * (1 - d) * b_total, seq)
        else:
            for seq in range(3):
                stamp_series(e.u, e.w, ys_by_seq[seq], seq)
            for seq in (1, 2):
                stamp_shunt(e.u, 1j * e.bsh_u, seq)
                stamp_shunt(e.w, 1j * e.bsh_w, seq)
    if not split_found:
        raise FaultModelError(f"line {spec.line} is not in service")

    for s in shunts:
        for seq, ys in ((0, s.y0), (1, s.y1), (2, s.y2)):
            if ys != 0:
                stamp_shunt(s.node, ys, seq)

    i1 = np.zeros(n + 1, dtype=complex)
    i1[:n] = i_src_bus
    return mats, i1, node


def sequence_oracle(net: NetworkModel, pf: PowerFlowSolution, spec: FaultSpec) -> OracleResult:
    """Closed-form symmetrical-components solution for a single fault.

    Thevenin impedances come from the per-sequence bus-impedance matrices of
    the same split network the phase-domain engine builds; the connection
    formulas match the stamp topology exactly (each grounded phase through
    its own zf), so both paths must agree to solver precision.
    """
    mats, i1, node = _sequence_matrices(net, pf, spec)
    vpre = complex(np.linalg.solve(mats[1], i1)[node])

    ek = np.zeros(node + 1, dtype=complex)
    ek[node] = 1.0
    z0 = complex(np.linalg.solve(mats[0], ek)[node])
    z1 = complex(np.linalg.solve(mats[1], ek)[node])
    z2 = complex(np.linalg.solve(mats[2], ek)[node])

    zf = max(float(spec.zf), ZF_MIN)
    ftype = spec.ftype
    a = _A_OP
    i_phase = np.zeros(3, dtype=complex)

    # frame factor: positive-sequence reference of the shifted frame in which
    # the fault takes its canonical phase positions (a for SLG, b-c for pairs)
    if ftype.kind == "slg":
        p = ftype.phases[0]
        beta = ALPHA[p]
        i1f = beta * vpre / (z1 + z2 + z0 + 3 * zf)
        i2f, i0f = i1f, i1f
        i_phase[p] = 3 * i1f
    elif ftype.kind == "ll":
        p, q = ftype.phases
        beta = {(1, 2): 1.0 + 0j, (0, 1): a, (0, 2): a * a}[(p, q)]
        i1f = beta * vpre / (z1 + z2 + zf)
        i2f, i0f = -i1f, 0j
        ib = (a * a - a) * i1f
        if (p, q) == (1, 2):
            i_phase[1], i_phase[2] = ib, -ib
        elif (p, q) == (0, 1):
            i_phase[0], i_phase[1] = ib, -ib
        else:  # (0, 2): canonical b maps to phase c, canonical c to phase a
            i_phase[2], i_phase[0] = ib, -ib
    elif ftype.kind == "llg":
        p, q = ftype.phases
        beta = {(1, 2): 1.0 + 0j, (0, 1): a, (0, 2): a * a}[(p, q)]
        den = (z1 + zf) + (z2 + zf) * (z0 + zf) / (z2 + z0 + 2 * zf)
        i1f = beta * vpre / den
        i2f = -i1f * (z0 + zf) / (z0 + z2 + 2 * zf)
        i0f = -i1f * (z2 + zf) / (z0 + z2 + 2 * zf)
        ib = i0f + a * a * i1f + a * i2f
        ic = i0f + a * i1f + a * a * i2f
        if (p, q) == (1, 2):
            i_phase[1], i_phase[2] = ib, ic
        elif (p, q) == (0, 1):
            i_phase[0], i_phase[1] = ib, ic
        else:  # (0, 2)
            i_phase[2], i_phase[0] = ib, ic
    else:  # abcg
        beta = 1.0 + 0j
        i1f = vpre / (z1 + zf)
        i2f, i0f = 0j, 0j
        i_phase[:] = i1f * ALPHA

    v_seq = np.array(
        [-z0 * i0f, beta * vpre - z1 * i1f, -z2 * i2f],
        dtype=complex,
    )
    return OracleResult(i_phase=i_phase, z_th=np.array([z0, z1, z2]), vpre=vpre, v_seq=v_seq)


def solve_single_fault(net: NetworkModel, pf: PowerFlowSolution, spec: FaultSpec) -> tuple[FaultSolution, int]:
    """Convenience composition: split, stamp, solve one fault. Returns the
    solution and the internal fault node id."""
    model = to_phase_domain(net, pf)
    model, node = split_line(model, spec.line, spec.d)
    model = stamp_fault(model, node, spec.ftype, spec.zf)
    return solve_fault(model), node
