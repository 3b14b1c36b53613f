import math
import pathlib

import numpy as np
import pytest

import gazefuse as gf


TINY = {
    "feature_dim_in": 8,
    "embed_dim": 16,
    "encoder_layers": 2,
    "attention_heads": 2,
    "dropout": 0.0,
    "head_layer_sizes": [16, 8, 1],
    "tokens_per_view": 4,
}


def test_version():
    assert gf.__version__ == "0.1.0"


def test_bce_at_zero_logit_is_ln2():
    assert gf.bce_with_logits([0.0], [1.0]) == pytest.approx(math.log(2), abs=1e-6)


def test_threshold_metrics_and_auc():
    r = gf.threshold_metrics([0.9, 0.8, 0.3, 0.7, 0.2, 0.1], [1, 1, 1, 0, 0, 0])
    assert (r.accuracy, r.precision, r.recall) == pytest.approx((4 / 6, 2 / 3, 2 / 3))
    assert r.roc_auc == pytest.approx(8 / 9)
    assert gf.roc_auc([0.1, 0.5, 0.5, 0.9], [0, 0, 1, 1]) == pytest.approx(0.875)


def test_auc_single_class_raises():
    with pytest.raises(gf.UndefinedMetricError):
        gf.roc_auc([0.1, 0.2], [1, 1])


def test_aggregate_orders_min_mean_max():
    reports = [gf.threshold_metrics([0.9, 0.1, s], [1, 0, 1]) for s in (0.2, 0.6)]
    stats, csv = gf.aggregate_runs(reports)
    for mean, lo, hi in stats.values():
        assert lo <= mean <= hi
    assert csv.splitlines()[0] == "metric,mean,eminus,eplus"


def test_sync_recovers_offset():
    rate = 8000
    rng = np.random.default_rng(4)
    envelope = np.repeat(rng.random(100), rate // 10)
    a = (rng.standard_normal(rate * 10) * envelope).astype(np.float32)
    shift = int(0.37 * rate)
    b = np.concatenate([np.zeros(shift, np.float32), a])[: a.size]
    est = gf.estimate_audio_offset(a, b, rate)
    assert est["offset_s"] == pytest.approx(0.37, abs=0.02)
    assert not est["low_confidence"]


def test_sync_rejects_silence():
    silent = np.zeros(8000 * 4, np.float32)
    with pytest.raises(gf.LowConfidenceError):
        gf.estimate_audio_offset(silent, silent, 8000)


def test_fusion_model_predicts_probability():
    model = gf.FusionModel(TINY, seed=7)
    a = np.random.default_rng(0).random((4, 8))
    p = model.predict(a, a[::-1])
    assert 0.0 < p < 1.0
    assert model.predict(a, a[::-1]) == p
    assert gf.FusionModel(TINY, seed=7).predict(a, a[::-1]) == p
    assert model.parameter_count > 0
    assert model.config["encoder_layers"] == 2


def test_fusion_model_defaults_and_errors():
    cfg = gf.FusionModel(
        {"feature_dim_in": 8, "embed_dim": 16, "head_layer_sizes": [16, 1], "tokens_per_view": 4}).config
    assert cfg["attention_heads"] == 4 and cfg["dropout"] == pytest.approx(0.426)
    with pytest.raises(gf.ConfigError):
        gf.FusionModel({"embed_dims": 3})
    with pytest.raises(gf.DimensionError):
        gf.FusionModel(TINY).predict(np.zeros((4, 7)), np.zeros((4, 8)))


def test_backbone_is_deterministic():
    img = np.random.default_rng(1).random((32, 32, 3), dtype=np.float32)
    x = gf.toy_backbone_extract(img, (0.1, 0.1, 0.6, 0.7), grid=4, out_dim=16, seed=3)
    assert x.shape == (16, 16)
    np.testing.assert_array_equal(x, gf.toy_backbone_extract(img, (0.1, 0.1, 0.6, 0.7), grid=4, out_dim=16, seed=3))


def test_balance_is_exact_and_seeded():
    labels = [1] * 30 + [0] * 130
    kept = gf.balance_labels(labels, 5)
    assert sum(labels[i] for i in kept) == 30 and len(kept) == 60
    assert kept == sorted(kept)
    assert kept == gf.balance_labels(labels, 5)
    with pytest.raises(gf.BalancingError):
        gf.balance_labels([1, 1], 0)


def test_prediction_csv_round_trip_and_errors():
    rows = [
        {"session": "s1", "timestamp_s": 0.0, "task": "MG", "probability": 0.25, "label": 0},
        {"session": "s1", "timestamp_s": 1.0, "task": "MG", "probability": 0.75, "label": None},
    ]
    text = gf.write_predictions(rows)
    assert gf.read_predictions(text) == rows
    with pytest.raises(gf.InputError, match=":3:"):
        gf.read_predictions(text.replace("0.75", "1.3"))
    with pytest.raises(gf.FormatError, match=":1:"):
        gf.read_predictions("bad\n")


def test_timeline_export():
    preds = [{"session": "s1", "timestamp_s": float(t), "task": "JA", "probability": 0.6, "label": None}
             for t in (0, 2)]
    doc = gf.export_timeline("s1", preds)
    assert doc.startswith("GAZEFUSE-TIMELINE 1\nsession s1\n")
    assert "p 1 -" in doc and "slots 3" in doc


def test_cli_fixture_end_to_end(tmp_path: pathlib.Path):
    code, _, err = gf.run_cli(["fixture", "--out", str(tmp_path), "--sessions", "2", "--duration", "20"])
    assert code == 0, err
    cfg = str(tmp_path / "config.json")
    for args in (["sync"], ["sample"], ["featurize"], ["dataset", "build", "--task", "MG"],
                 ["dataset", "split", "--task", "MG"], ["dataset", "balance", "--task", "MG"],
                 ["train", "--task", "MG", "--seeds", "1"], ["eval", "--task", "MG", "--seeds", "1"]):
        code, out, err = gf.run_cli(["-c", cfg] + args)
        assert code == 0, (args, out, err)
    assert (tmp_path / "work" / "mg" / "eval" / "aggregate.csv").exists()


def test_cli_usage_error_exit_code():
    code, _, err = gf.run_cli(["no-such-command"])
    assert code == 2 and err
