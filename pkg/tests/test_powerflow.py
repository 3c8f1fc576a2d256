import json

import numpy as np
import pytest

from gridpea.errors import NonConvergenceError
from gridpea.network import load_case
from gridpea.powerflow import _bus_sets, _pq_calc, mismatch, solve_nr
from gridpea.network import build_ybus

from conftest import make_case, two_bus_case


def test_zero_load_network_is_flat_in_zero_iterations():
    net = load_case(two_bus_case(load=(0.0, 0.0), vset=1.0))
    sol = solve_nr(net)
    assert sol.iterations == 0
    assert np.allclose(sol.v, 1.0 + 0j, atol=1e-15)


def test_two_bus_against_closed_form_quadratic():
    # receiving-end |V| solves u^2 + (2Qx - V1^2) u + x^2 (P^2 + Q^2) = 0
    p_load, q_load, x = 0.5, 0.2, 0.1
    disc = (1.0 - 2 * q_load * x) ** 2 - 4 * x * x * (p_load**2 + q_load**2)
    u = ((1.0 - 2 * q_load * x) + np.sqrt(disc)) / 2.0
    v2_mag_oracle = np.sqrt(u)

    # independent Gauss fixed-point iteration for the full complex voltage
    s = complex(p_load, q_load)
    v2 = 1.0 + 0j
    for _ in range(200):
        v2 = 1.0 - 1j * x * np.conj(s / v2)

    net = load_case(two_bus_case(load=(p_load, q_load), x=x))
    sol = solve_nr(net, tol=1e-12)
    assert abs(abs(sol.v[1]) - v2_mag_oracle) < 1e-9
    assert abs(sol.v[1] - v2) < 1e-9


def test_ieee14_converges_fast(net14):
    sol = solve_nr(net14, tol=1e-8, max_iter=10)
    assert sol.iterations <= 10
    assert sol.max_mismatch <= 1e-8
    # PV magnitudes pinned to setpoints
    for b in net14.buses:
        if b.kind in ("PV", "slack"):
            assert abs(abs(sol.v[b.id]) - b.vset) < 1e-10


def test_mismatch_oracle_agrees_with_jacobian_side(net14):
    sol = solve_nr(net14, tol=1e-10)
    y = build_ybus(net14, "positive")
    slack, pv, pq, pvpq = _bus_sets(net14)
    vm, th = np.abs(sol.v), np.angle(sol.v)
    pcalc, qcalc, _, _ = _pq_calc(y.real, y.imag, vm, th)
    psched = np.array([b.pg - b.load.real for b in net14.buses])
    qsched = np.array([-b.load.imag for b in net14.buses])
    trig = np.concatenate([psched[pvpq] - pcalc[pvpq], qsched[pq] - qcalc[pq]])
    assert np.max(np.abs(mismatch(net14, sol.v) - trig)) <= 1e-12


def test_flat_start_mismatch_is_minus_load_on_lossless_case():
    case = make_case(
        buses=[
            {"id": 0, "kind": "slack", "load": [0, 0], "gen": [0.0, 1.0]},
            {"id": 1, "kind": "PQ", "load": [0.3, 0.1], "gen": None},
            {"id": 2, "kind": "PQ", "load": [0.2, 0.05], "gen": None},
        ],
        lines=[
            {"id": 0, "from": 0, "to": 1, "r1": 0.0, "x1": 0.1, "b1": 0.0, "r0": 0.0, "x0": 0.3, "in_service": True},
            {"id": 1, "from": 1, "to": 2, "r1": 0.0, "x1": 0.2, "b1": 0.0, "r0": 0.0, "x0": 0.6, "in_service": True},
        ],
        gens=[{"bus": 0, "x1s": 0.2, "x2": 0.2, "x0": 0.1, "grounded": True}],
    )
    net = load_case(case)
    v_flat = np.ones(3, dtype=complex)
    res = mismatch(net, v_flat)
    # rows: dP bus1, dP bus2, dQ bus1, dQ bus2
    assert res[0] == pytest.approx(-0.3)
    assert res[1] == pytest.approx(-0.2)


def test_mismatch_ignores_slack_content(net14):
    sol = solve_nr(net14, tol=1e-10)
    doc = json.loads(__import__("gridpea.network", fromlist=["serialize_case"]).serialize_case(net14))
    doc["buses"][0]["load"] = [0.7, 0.3]  # slack bus load changes scheduled slack power only
    net_mod = load_case(json.dumps(doc))
    assert np.array_equal(mismatch(net14, sol.v), mismatch(net_mod, sol.v))


def test_quadratic_convergence_signature(net14):
    sol = solve_nr(net14, tol=1e-10)
    hist = sol.residual_history
    late_ratios = [hist[i + 1] / hist[i] for i in range(len(hist) - 2, len(hist) - 1)]
    assert all(r < 0.05 for r in late_ratios)


def test_determinism(net14):
    a = solve_nr(net14, tol=1e-10)
    b = solve_nr(net14, tol=1e-10)
    assert np.array_equal(a.v, b.v)
    assert a.residual_history == b.residual_history


def test_non_convergence_reports_final_mismatch(net14):
    with pytest.raises(NonConvergenceError) as exc:
        solve_nr(net14, tol=1e-20, max_iter=2)
    assert exc.value.final_mismatch is not None
    with pytest.raises(ValueError):
        solve_nr(net14, tol=0.0)
