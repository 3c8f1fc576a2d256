import json

import numpy as np
import pytest

from gridpea.dataset import (
    Dataset,
    LabeledSample,
    Provenance,
    WindowSynthesizer,
    featurize,
    generate_campaign,
    meta_path,
    read_csv,
    schema_for,
    schema_hash,
    synthesize_window,
    validate_dataset,
    write_csv,
)
from gridpea.errors import DatasetError, SchemaMismatchError
from gridpea.scenarios import EventScenario, enumerate_single
from gridpea.windows import NoiseConfig, WindowingConfig


@pytest.fixture(scope="module")
def small_simul(net14):
    return generate_campaign("simultaneous", net=net14, k=6, n_normal=4,
                             noise=NoiseConfig(seed=11))


def test_schema_shape_and_hash(net14):
    schema = schema_for(WindowingConfig(), tuple(range(14)))
    assert len(schema) == 6 * 14 * 13 == 1092
    assert schema[0] == "t0_b0_va_mag"
    assert schema[3] == "t0_b0_va_ang"
    assert schema[12] == "t0_b0_freq"
    assert schema[13] == "t0_b1_va_mag"
    assert schema_hash(schema) == schema_hash(schema)
    assert schema_hash(schema) != schema_hash(schema[:-1])


def test_featurize_order(net14, pf14):
    synth = WindowSynthesizer(net14, noise=None)
    scenario = EventScenario(index=0, kind="normal")
    w = synth.window(scenario)
    schema = schema_for(WindowingConfig(), w.bus_ids)
    vec = featurize(w, schema)
    assert len(vec) == 1092
    assert vec[0] == w.v_mag[0, 0, 0]
    assert vec[1] == w.v_mag[0, 0, 1]
    assert vec[3] == w.v_ang[0, 0, 0]
    assert vec[6] == w.i_mag[0, 0, 0]
    assert vec[9] == w.i_ang[0, 0, 0]
    assert vec[12] == w.freq[0, 0]
    assert vec[13] == w.v_mag[0, 1, 0]
    assert vec[13 * 14] == w.v_mag[1, 0, 0]
    with pytest.raises(SchemaMismatchError):
        featurize(w, schema[:-1])


def test_angles_in_range(small_simul):
    x = small_simul.feature_matrix()
    schema = small_simul.schema
    ang_cols = [i for i, n in enumerate(schema) if n.endswith("_ang")]
    vals = x[:, ang_cols]
    assert np.all(vals > -180.0) and np.all(vals <= 180.0)


def test_synthesize_window_determinism(net14):
    scenario = enumerate_single(net14, n_normal=1)[40]
    w1 = synthesize_window(net14, scenario, noise=NoiseConfig(seed=9))
    w2 = synthesize_window(net14, scenario, noise=NoiseConfig(seed=9))
    assert w1.equals(w2)


def test_fault_window_content_matches_engine(net14):
    scenario = enumerate_single(net14, n_normal=1)[0]
    w = synthesize_window(net14, scenario, noise=None)
    synth = WindowSynthesizer(net14, noise=None)
    assert np.array_equal(w.v_mag[0], synth.base_state.v_mag)
    evt = synth.fault_state(scenario.faults)
    assert np.array_equal(w.v_mag[-1], evt.v_mag)


def test_campaign_validation_and_counts(small_simul):
    validate_dataset(small_simul)
    assert len(small_simul.samples) == 10
    assert small_simul.meta["label_space"] == "simul4"
    assert small_simul.meta["campaign"] == "simultaneous"
    counts = small_simul.class_counts("combined202")
    assert counts == {0: 4, 1: 2, 2: 2, 3: 2}


def test_validate_rejects_bad_labels(small_simul):
    ds = Dataset(schema=small_simul.schema,
                 samples=list(small_simul.samples), meta=dict(small_simul.meta))
    bad = ds.samples[0]
    ds.samples[0] = LabeledSample(features=bad.features, event12=7,
                                  combined202=1, provenance=bad.provenance)
    with pytest.raises(DatasetError):
        validate_dataset(ds)


def test_validate_rejects_nonfinite(small_simul):
    ds = Dataset(schema=small_simul.schema,
                 samples=list(small_simul.samples), meta=dict(small_simul.meta))
    feats = ds.samples[0].features.copy()
    feats[3] = np.nan
    ds.samples[0] = LabeledSample(features=feats, event12=ds.samples[0].event12,
                                  combined202=ds.samples[0].combined202,
                                  provenance=ds.samples[0].provenance)
    with pytest.raises(DatasetError):
        validate_dataset(ds)


def test_csv_round_trip(small_simul, tmp_path):
    path = tmp_path / "d.csv"
    write_csv(small_simul, path)
    assert meta_path(path).exists()
    with open(path) as fh:
        lines = fh.readlines()
    assert len(lines) == len(small_simul.samples) + 1
    back = read_csv(path)
    assert back.schema == small_simul.schema
    assert back.meta == small_simul.meta
    for a, b in zip(small_simul.samples, back.samples):
        assert np.array_equal(a.features, b.features)
        assert (a.event12, a.combined202) == (b.event12, b.combined202)
        assert a.provenance == b.provenance


def test_csv_regeneration_is_byte_identical(net14, tmp_path):
    a = generate_campaign("simultaneous", net=net14, k=3, n_normal=2, noise=NoiseConfig(seed=5))
    b = generate_campaign("simultaneous", net=net14, k=3, n_normal=2, noise=NoiseConfig(seed=5))
    pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(a, pa)
    write_csv(b, pb)
    assert pa.read_bytes() == pb.read_bytes()


def test_read_csv_rejects_missing_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(DatasetError):
        read_csv(path)


def test_provenance_round_trip_fields(small_simul):
    kinds = {s.provenance.kind for s in small_simul.samples}
    assert kinds == {"normal", "dual_fault", "dual_attack", "fault_attack"}
    for s in small_simul.samples:
        p = s.provenance
        if p.kind == "dual_attack":
            assert p.target_bus is not None and p.target_bus2 is not None
        if p.kind == "normal":
            assert p.line is None and p.ftype is None


def test_no_nan_in_features(small_simul):
    x = small_simul.feature_matrix()
    assert np.all(np.isfinite(x))
