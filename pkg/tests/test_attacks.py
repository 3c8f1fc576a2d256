import numpy as np
import pytest

from gridpea.attacks import AttackSpec, craft_attack_window, splice_attack
from gridpea.errors import ScenarioError, WindowError
from gridpea.faults import FaultSpec, FaultType
from gridpea.windows import (
    NoiseConfig,
    WindowingConfig,
    apply_noise,
    base_grid_state,
    build_window,
    fault_grid_state,
)

DONOR = FaultSpec(6, 0.4, FaultType.ABCG, 0.001)  # line 3-4


def test_attack_spec_validation(net14):
    AttackSpec(3, DONOR, "replay").validate_against(net14)
    AttackSpec(4, DONOR, "fdi").validate_against(net14)
    with pytest.raises(ScenarioError):
        AttackSpec(7, DONOR).validate_against(net14)
    with pytest.raises(ScenarioError):
        AttackSpec(3, DONOR, kind="mitm")


def test_splice_identity(net14, pf14):
    base = base_grid_state(net14, pf14)
    w = build_window(base, base, WindowingConfig())
    assert splice_attack(w, w, 5).equals(w)


def test_splice_locality(net14, pf14):
    base = base_grid_state(net14, pf14)
    normal = build_window(base, base, WindowingConfig())
    fault = build_window(base, fault_grid_state(net14, pf14, [DONOR]), WindowingConfig())
    out = splice_attack(normal, fault, 3)
    for bi in range(out.n_bus):
        for field in ("v_mag", "v_ang", "i_mag", "i_ang", "freq"):
            got = getattr(out, field)[:, bi]
            want = getattr(fault if bi == 3 else normal, field)[:, bi]
            assert np.array_equal(got, want)
    assert out.trip_index == fault.trip_index


def test_splice_shape_errors(net14, pf14):
    base = base_grid_state(net14, pf14)
    w6 = build_window(base, base, WindowingConfig(n_pre=2, n_fault=4))
    w5 = build_window(base, base, WindowingConfig(n_pre=1, n_fault=4))
    with pytest.raises(WindowError):
        splice_attack(w6, w5, 3)
    with pytest.raises(WindowError):
        splice_attack(w6, w6, 99)


def test_craft_matches_donor_at_target_without_noise(net14, pf14):
    spec = AttackSpec(3, DONOR, "fdi")
    w = craft_attack_window(net14, pf14, spec, WindowingConfig(), noise=None)
    fault = build_window(
        base_grid_state(net14, pf14),
        fault_grid_state(net14, pf14, [DONOR]),
        WindowingConfig(),
    )
    assert np.array_equal(w.v_mag[:, 3], fault.v_mag[:, 3])
    assert np.array_equal(w.i_ang[:, 3], fault.i_ang[:, 3])
    normal = build_window(base_grid_state(net14, pf14), base_grid_state(net14, pf14), WindowingConfig())
    for bi in range(14):
        if bi != 3:
            assert np.array_equal(w.v_mag[:, bi], normal.v_mag[:, bi])


def test_craft_determinism(net14, pf14):
    spec = AttackSpec(3, DONOR, "replay")
    a = craft_attack_window(net14, pf14, spec, noise=NoiseConfig(seed=4), stream_key=11)
    b = craft_attack_window(net14, pf14, spec, noise=NoiseConfig(seed=4), stream_key=11)
    assert a.equals(b)


def test_noise_applied_after_splice(net14, pf14):
    # non-target buses of a noisy attack window equal the noisy normal window
    spec = AttackSpec(3, DONOR, "fdi")
    noise = NoiseConfig(seed=8)
    w = craft_attack_window(net14, pf14, spec, WindowingConfig(), noise=noise, stream_key=2)
    base = base_grid_state(net14, pf14)
    normal = apply_noise(build_window(base, base, WindowingConfig()), noise, 2)
    for bi in range(14):
        if bi != 3:
            assert np.array_equal(w.v_mag[:, bi], normal.v_mag[:, bi])
