import math

import numpy as np
import pytest

import geonet


def test_eight_transforms_form_a_group():
    ts = geonet.transforms()
    assert [t[0] for t in ts] == list(range(8))
    mats = {t[0]: np.array(t[1]) for t in ts}
    for a in range(8):
        assert geonet.compose(a, geonet.inverse(a)) == 0
        for b in range(8):
            c = geonet.compose(a, b)
            assert np.array_equal(mats[c], mats[a] @ mats[b])


def test_3d_enumeration_counts():
    assert geonet.count_3d() == (18, 12)


def test_apply_round_trip():
    img = np.random.default_rng(0).random((12, 7), dtype=np.float32)
    for label in range(8):
        out = geonet.apply(img, label)
        assert out.shape == ((7, 12) if label % 2 else (12, 7))
        assert np.array_equal(geonet.apply(out, geonet.inverse(label)), img)


def test_label_one_is_a_quarter_turn():
    img = np.array([[0.1, 0.2], [0.3, 0.4]], dtype=np.float32)
    out = geonet.apply(img, 1)
    assert sorted(out.ravel().tolist()) == sorted(img.ravel().tolist())
    assert not np.array_equal(out, img)


def test_clahe_and_histogram():
    flat = np.full((64, 64), 0.35, dtype=np.float32)
    assert np.array_equal(geonet.clahe(flat), flat)
    hist = geonet.histogram(flat)
    assert hist.sum() == 64 * 64
    assert hist[round(0.35 * 255)] == 64 * 64
    assert geonet.entropy(flat) == 0.0


def test_invalid_input_raises_value_error():
    with pytest.raises(ValueError):
        geonet.apply(np.zeros((2, 2, 2), dtype=np.float32), 0)
    with pytest.raises(ValueError):
        geonet.clahe(np.zeros((4, 4), dtype=np.float32))
    with pytest.raises(ValueError):
        geonet.synth_phantom(0, 8, 8)


def test_phantom_is_deterministic():
    a = geonet.synth_phantom(3, 48, 40)
    assert a.shape == (48, 40)
    assert np.array_equal(a, geonet.synth_phantom(3, 48, 40))
    assert 0.0 <= a.min() and a.max() <= 1.0


def test_tiny_training_run(tmp_path):
    model, metrics = geonet.train(epochs=2, batch_size=8, input_size=16, synthetic_slices=10, phantom_size=32, seed=1)
    assert [m["epoch"] for m in metrics] == [0, 1]
    for m in metrics:
        assert 0.0 <= m["test_acc"] <= 1.0
        assert math.isfinite(m["train_loss"])
    img = geonet.synth_phantom(7, 32, 32)
    label, probs = model.predict(img)
    assert 0 <= label < 8
    assert sum(probs) == pytest.approx(1.0, abs=1e-6)
    path = tmp_path / "m.ckpt"
    model.save(path)
    again = geonet.Model.load(path)
    assert again.input_size == 16
    assert again.predict(img) == (label, probs)
    assert again.fix(img).shape in {(32, 32)}
