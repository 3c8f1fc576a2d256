"""Newton-Raphson AC power flow.

Polar formulation with the full analytic Jacobian, dense LU solve, flat
start, no reactive-limit switching. The solver-side residuals come from the
trigonometric P/Q sums used to build the Jacobian; the public mismatch()
recomputes them independently from the complex power balance so the two
paths can be cross-checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergenceError, SingularJacobianError
from .network import NetworkModel, build_ybus


@dataclass(frozen=True)
class PowerFlowSolution:
    v: np.ndarray                 # complex bus voltage, p.u.
    iterations: int
    max_mismatch: float           # p.u. power residual, infinity norm
    residual_history: tuple[float, ...]

    def v_mag(self) -> np.ndarray:
        return np.abs(self.v)

    def v_ang_deg(self) -> np.ndarray:
        return np.degrees(np.angle(self.v))


def _bus_sets(net: NetworkModel):
    slack = [b.id for b in net.buses if b.kind == "slack"]
    pv = [b.id for b in net.buses if b.kind == "PV"]
    pq = [b.id for b in net.buses if b.kind == "PQ"]
    pvpq = sorted(pv + pq)
    return slack[0], sorted(pv), sorted(pq), pvpq


def _scheduled(net: NetworkModel):
    p = np.array([b.pg - b.load.real for b in net.buses])
    q = np.array([-b.load.imag for b in net.buses])
    return p, q


def _pq_calc(g, b, vm, th):
    """P/Q injections from the trigonometric sums (Jacobian-side path)."""
    dth = th[:, None] - th[None, :]
    c, s = np.cos(dth), np.sin(dth)
    f1 = g * c + b * s
    f2 = g * s - b * c
    p = vm * (f1 @ vm)
    q = vm * (f2 @ vm)
    return p, q, f1, f2


def solve_nr(net: NetworkModel, tol: float = 1e-8, max_iter: int = 20) -> PowerFlowSolution:
    """Solve the AC power flow from a flat start.

    Raises NonConvergenceError when the mismatch is still above tol after
    max_iter Newton updates, and SingularJacobianError if the Jacobian
    cannot be factorized.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    y = build_ybus(net, "positive")
    g, b = y.real, y.imag
    slack, pv, pq, pvpq = _bus_sets(net)
    psched, qsched = _scheduled(net)

    n = net.n_bus
    vm = np.ones(n)
    th = np.zeros(n)
    for bus in net.buses:
        if bus.kind in ("slack", "PV"):
            vm[bus.id] = bus.vset

    npvpq, npq = len(pvpq), len(pq)
    history = []
    iterations = 0
    while True:
        pcalc, qcalc, f1, f2 = _pq_calc(g, b, vm, th)
        dp = psched[pvpq] - pcalc[pvpq]
        dq = qsched[pq] - qcalc[pq]
        f = np.concatenate([dp, dq])
        norm = float(np.max(np.abs(f))) if f.size else 0.0
        history.append(norm)
        if norm <= tol:
            break
        if iterations >= max_iter:
            raise NonConvergenceError(
                f"no convergence after {max_iter} iterations (mismatch {norm:.3e})",
                final_mismatch=norm,
            )

        vv = vm[:, None] * vm[None, :]
        h = vv * f2
        nmat = vm[:, None] * f1
        k = -vv * f1
        l = vm[:, None] * f2
        di = np.arange(n)
        h[di, di] = -qcalc - b.diagonal() * vm**2
        nmat[di, di] = pcalc / vm + g.diagonal() * vm
        k[di, di] = pcalc - g.diagonal() * vm**2
        l[di, di] = qcalc / vm - b.diagonal() * vm

        jac = np.zeros((npvpq + npq, npvpq + npq))
        jac[:npvpq, :npvpq] = h[np.ix_(pvpq, pvpq)]
        jac[:npvpq, npvpq:] = nmat[np.ix_(pvpq, pq)]
        jac[npvpq:, :npvpq] = k[np.ix_(pq, pvpq)]
        jac[npvpq:, npvpq:] = l[np.ix_(pq, pq)]
        try:
            dx = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError as e:
            raise SingularJacobianError(f"singular Jacobian at iteration {iterations}") from e

        th[pvpq] += dx[:npvpq]
        vm[pq] += dx[npvpq:]
        iterations += 1

    v = vm * np.exp(1j * th)
    return PowerFlowSolution(
        v=v,
        iterations=iterations,
        max_mismatch=history[-1],
        residual_history=tuple(history),
    )


def mismatch(net: NetworkModel, v: np.ndarray) -> np.ndarray:
    """Power residuals from the complex balance S = V * conj(Y V).

    Returns scheduled-minus-calculated dP for every non-slack bus followed
    by dQ for every PQ bus, both in bus-id order. Independent of the
    Jacobian-side trigonometric path by construction.
    """
    v = np.asarray(v, dtype=complex)
    if v.shape != (net.n_bus,):
        raise ValueError(f"voltage vector must have shape ({net.n_bus},)")
    y = build_ybus(net, "positive")
    s = v * np.conj(y @ v)
    psched, qsched = _scheduled(net)
    _, _, pq, pvpq = _bus_sets(net)
    dp = psched[pvpq] - s.real[pvpq]
    dq = qsched[pq] - s.imag[pq]
    return np.concatenate([dp, dq])


def bus_injections(net: NetworkModel, v: np.ndarray) -> np.ndarray:
    """Complex power injected at every bus for a given voltage state."""
    y = build_ybus(net, "positive")
    return v * np.conj(y @ v)
