import math
import os

import pytest

import ratex

DATA = os.environ.get("RATEX_TEST_DATA_DIR", "")

SMALL = [
    "model.embed_dim=8",
    "model.hidden_dim=12",
    "data.train_examples=64",
    "data.dev_examples=32",
    "train.max_epochs=2",
    "train.batch_size=16",
]


def test_topk():
    assert ratex.topk_mask([0.9, 0.1, 0.5, 0.3], 50) == [1, 0, 1, 0]
    assert ratex.topk_cardinality(20, 50) == 10
    with pytest.raises(ValueError):
        ratex.topk_mask([], 50)


def test_imle_and_aimle():
    grad, differing = ratex.imle_gradient([2, 1, 0], [0, 0, -5], 1, lam=1.0, noise_scale=0.0)
    assert grad == [1, 0, -1]
    assert differing == 1
    c = ratex.AimleController(initial_lambda=1.0)
    c.update([0] * 8)
    assert c.lam == pytest.approx(1.1)


def test_gumbel_mean():
    draws = ratex.gumbel_sample(200000, 1.0, seed=3)
    assert sum(draws) / len(draws) == pytest.approx(0.5772, abs=0.01)


def test_losses():
    assert ratex.sufficiency_loss(0.9, 0.7, 0.1) == pytest.approx(0.3)
    assert ratex.comprehensiveness_loss(0.7, 2.0, 0.2) == 0.0
    logit = lambda p: math.log(p / (1 - p))
    assert ratex.plausibility_loss([logit(0.9), logit(0.1)], [1, 0]) == pytest.approx(0.1054, abs=1e-4)


def test_metrics():
    assert ratex.aopc([0.9], [[0.4]]) == pytest.approx(0.5)
    s = ratex.token_scores([1, 1, 0, 0], [1, 0, 1, 0])
    assert s["f1"] == pytest.approx(0.5)
    assert s["iou"] == pytest.approx(1 / 3)
    assert ratex.average_precision([0.9, 0.8, 0.1], [1, 0, 1]) == pytest.approx(0.8333, abs=1e-4)
    assert ratex.classification_metrics([0, 0, 0, 0], [0, 1, 0, 1], 2) == pytest.approx((0.5, 1 / 3))


def test_nrg_table():
    with open(os.path.join(DATA, "esnli_benchmark.csv")) as f:
        text = f.read()
    rows = [line.split(",") for line in text.strip().splitlines()[1:]]
    got = ratex.nrg_compose([[float(v) for v in r[1:6]] for r in rows])
    for r, g in zip(rows, got):
        for want, have in zip(r[6:10], g):
            assert abs(float(want) - have) <= 5e-4


def test_synthetic_and_subsample():
    data = ratex.generate_synthetic(num_examples=50, seed=1)
    assert len(data) == 50
    assert ratex.generate_synthetic(num_examples=50, seed=1) == data
    kept = ratex.subsample_gold(data, 0.2, seed=0)
    assert sum(ex["rationale"] is not None for ex in kept) == 10


def test_train_then_evaluate():
    out = ratex.train(overrides=SMALL)
    log = out["run_log"]
    assert log["best_epoch"] >= 1
    dev = ratex.generate_synthetic(num_examples=96, seed=0)[64:]
    for ex in dev:
        ex["rationale"] = None
    report = ratex.evaluate(out["checkpoint"], dev, overrides=SMALL)
    assert report["count"] == 32
    assert report["tf1"] is None
    assert -1.0 <= report["suff_aopc"] <= 1.0


def test_bad_config():
    with pytest.raises(ValueError):
        ratex.train("[loss]\nalpha_q = 1\n")


def test_gradcheck():
    outcomes = ratex.gradcheck(seed=1)
    assert len(outcomes) == 16
    assert all(o["passed"] for o in outcomes)
