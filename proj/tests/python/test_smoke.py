"""Smoke tests for the python bindings against the CMake-built module."""

import json
import math

import numpy as np
import pytest

import cornet


def test_version():
    assert cornet.__version__ == "0.1.0"


def test_build_cooccurrence_worked_example():
    r = cornet.build_cooccurrence(
        intervals=[(0, 1, 0), (0, 2, 1)], num_frames=2, n_classes=3
    )
    assert r.tolist() == [[1, 1, 0], [1, 2, 0], [0, 0, 0]]


def test_dense_targets():
    y = cornet.to_dense_targets(intervals=[(0, 2, 1)], num_frames=3, n_classes=2)
    assert y.tolist() == [[0, 1], [0, 1], [0, 0]]


def test_tape_autodiff():
    tape = cornet.Tape()
    p = tape.leaf(np.zeros((2, 2)), trainable=True)
    out = tape.apply("sigmoid", [p])
    assert np.allclose(tape.value(out), 0.5)
    loss = tape.apply("sum_all", [tape.apply("square", [out])])
    grads = tape.backward(loss)
    # d/dx sum(sigmoid(x)^2) at 0 = 2 * 0.5 * 0.25
    assert np.allclose(grads[p], 0.25)
    assert tape.replay_bitexact()


def test_tape_rejects_unknown_primitive():
    tape = cornet.Tape()
    p = tape.leaf(np.ones(3))
    with pytest.raises(RuntimeError):
        tape.apply("warp", [p])


def test_correlation_functions():
    rng = np.random.default_rng(0)
    f = rng.normal(size=(4, 3))
    m1 = cornet.correlate_m1(
        f,
        rng.normal(size=(3, 1)),
        rng.normal(size=1),
        rng.normal(size=(3, 1)),
        rng.normal(size=1),
    )
    assert m1.shape == (4, 4)
    assert ((m1 > 0) & (m1 < 1)).all()

    m2 = cornet.correlate_m2(f, rng.normal(size=(3, 2)), rng.normal(size=(3, 2)))
    assert np.allclose(m2.sum(axis=1), 1.0)


def test_param_count_reference_config():
    assert (
        cornet.param_count(d0=1024, dv=32, n_classes=65, d_e=768, d_k=16) == 57574
    )


def test_average_precision():
    assert cornet.average_precision([0.9, 0.8, 0.1], [1, 0, 1]) == pytest.approx(
        (1.0 + 2.0 / 3.0) / 2.0
    )


def test_per_frame_map():
    y = np.zeros((6, 2))
    y[1, 0] = 1.0
    y[4, 1] = 1.0
    report = cornet.per_frame_map(y, y, ["a", "b"])
    assert report["map"] == 1.0
    assert report["frames"] == 6


def test_synthetic_semantic_space_determinism():
    labels = [f"act {i}" for i in range(5)]
    a = cornet.synthetic_semantic_space(labels, 8, 3, affinity=[(0, 1)])
    b = cornet.synthetic_semantic_space(labels, 8, 3, affinity=[(0, 1)])
    assert (a == b).all()


def test_pipeline_end_to_end(tmp_path):
    spec = {
        "classes": 4,
        "feature_dim": 6,
        "train_videos": 2,
        "val_videos": 1,
        "frames": 24,
        "embed_dim": 8,
        "pairs": [[0, 1, 0.9]],
        "base_rate": 0.7,
        "segment_frames": [4, 10],
        "noise_sigma": 0.4,
        "seed": 3,
    }
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec))
    corpus = tmp_path / "corpus"
    cornet.synth(str(spec_path), str(corpus))
    assert (corpus / "manifest.json").exists()
    assert (corpus / "vocab.json").exists()

    config = {
        "encoder": {"d_in": 6, "d0": 8, "layers": 2, "kernel": 3},
        "corm": {"dv": 4, "d_k": 2},
        "lr": 0.002,
        "epochs": 2,
        "batch_size": 2,
        "balance": 0.001,
        "crop_len": 16,
        "seed": 5,
        "data": str(corpus),
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    run = cornet.train(str(config_path), str(tmp_path / "run"))
    assert len(run["rows"]) == 2
    assert all(math.isfinite(row["total"]) for row in run["rows"])
    assert (tmp_path / "run" / "log.csv").exists()

    report = cornet.evaluate(
        run["best_checkpoint"], str(corpus), str(tmp_path / "report.json"), "val"
    )
    assert 0.0 <= report["map"] <= 1.0
    saved = json.loads((tmp_path / "report.json").read_text())
    assert saved["map"] == report["map"]

    out_csv = tmp_path / "cooc.csv"
    cornet.cooc(str(corpus / "annotations.jsonl"), str(corpus / "vocab.json"),
                str(out_csv))
    header = out_csv.read_text().splitlines()[0]
    assert len(header.split(",")) == 4


def test_parse_error_maps_to_value_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ValueError):
        cornet.synth(str(bad), str(tmp_path / "out"))
