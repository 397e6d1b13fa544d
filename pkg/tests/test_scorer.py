import math
import random

import numpy as np
import pytest

from fedsearch.domain import (
    ClickKind,
    ClickLogEntry,
    PrimaryIndividual,
    Vertical,
)
from fedsearch.errors import DegenerateLabels, NoEligibleVertical, NonFiniteLoss
from fedsearch.scorer import (
    Hyperparams,
    Label,
    ScorerModel,
    TrainingExample,
    label_clicklog,
    loss_and_gradient,
    randomize_serp,
    score,
    train_logreg,
    vocabulary_hash,
)
from fedsearch.vertical_engine import VerticalResultList
from conftest import block, click, member, sdoc, serp


# --- skip-above labeling ------------------------------------------------

def _labels(entry):
    return (
        {e.position for e in label_clicklog(entry) if e.label is Label.Positive},
        {e.position for e in label_clicklog(entry) if e.label is Label.Negative},
    )


def test_label_single_click(jobs_serp_4):
    pos, neg = _labels(ClickLogEntry(jobs_serp_4, (click(2),)))
    assert pos == {2}
    assert neg == {0, 1}


def test_label_no_clicks(jobs_serp_4):
    assert label_clicklog(ClickLogEntry(jobs_serp_4, ())) == []


def test_label_two_clicks(jobs_serp_4):
    pos, neg = _labels(ClickLogEntry(jobs_serp_4, (click(0), click(2))))
    assert pos == {0, 2}
    assert neg == {1}


def test_label_never_below_last_click():
    rng = random.Random(42)
    for _ in range(500):
        n = rng.randint(1, 10)
        items = [PrimaryIndividual(sdoc(f"j{i}", score=1.0)) for i in range(n)]
        entry = ClickLogEntry(
            serp(items),
            tuple(click(p) for p in sorted(rng.sample(range(n), rng.randint(0, n)))),
        )
        examples = label_clicklog(entry)
        if not entry.clicks:
            assert examples == []
            continue
        last = max(c.position for c in entry.clicks)
        assert all(e.position <= last for e in examples)
        clicked = {c.position for c in entry.clicks}
        for e in examples:
            assert (e.label is Label.Positive) == (e.position in clicked)


# --- randomized SERP construction --------------------------------------

def _vrl(vertical, n):
    return VerticalResultList(
        vertical,
        tuple(sdoc(f"{vertical.value}-{i}", vertical, float(n - i)) for i in range(n)),
    )


THREE_VERTICALS = {
    Vertical.Jobs: _vrl(Vertical.Jobs, 4),
    Vertical.People: _vrl(Vertical.People, 3),
    Vertical.Groups: _vrl(Vertical.Groups, 2),
}


def test_randomize_single_eligible():
    results = {Vertical.Jobs: _vrl(Vertical.Jobs, 3), Vertical.People: _vrl(Vertical.People, 0)}
    s = randomize_serp("q", member(), results, rng_seed=1)
    assert s.primary_vertical is Vertical.Jobs
    assert all(isinstance(i, PrimaryIndividual) for i in s.items)
    assert s.randomized


def test_randomize_no_eligible():
    with pytest.raises(NoEligibleVertical):
        randomize_serp("q", member(), {Vertical.Jobs: _vrl(Vertical.Jobs, 0)}, rng_seed=1)


def test_randomize_deterministic():
    a = randomize_serp("q", member(), THREE_VERTICALS, rng_seed=99)
    b = randomize_serp("q", member(), THREE_VERTICALS, rng_seed=99)
    assert a == b


def test_randomize_preserves_primary_order():
    for seed in range(200):
        s = randomize_serp("q", member(), THREE_VERTICALS, rng_seed=seed)
        expected = list(THREE_VERTICALS[s.primary_vertical].results)
        assert s.primary_subsequence() == expected
        blocks = [i for i in s.items if not isinstance(i, PrimaryIndividual)]
        assert len(blocks) == 2
        assert all(b.vertical != s.primary_vertical for b in blocks)


def test_randomize_uniform_primary_choice():
    counts = {v: 0 for v in THREE_VERTICALS}
    n = 3000
    for seed in range(n):
        counts[randomize_serp("q", member(), THREE_VERTICALS, rng_seed=seed).primary_vertical] += 1
    for v, c in counts.items():
        assert abs(c / n - 1 / 3) < 0.03


# --- logistic regression -----------------------------------------------

def _ex(features, positive, i=0):
    return TrainingExample(
        features, Label.Positive if positive else Label.Negative, f"s{i}", 0
    )


def test_train_zero_epochs_scores_half():
    examples = [_ex({"a": 1.0}, True), _ex({"a": -1.0}, False)]
    model = train_logreg(examples, Hyperparams(epochs=0))
    assert model.weights == {}
    assert model.intercept == 0.0
    assert score(model, {"a": 5.0}) == pytest.approx(0.5)


def test_train_degenerate_labels():
    with pytest.raises(DegenerateLabels):
        train_logreg([_ex({"a": 1.0}, True), _ex({"b": 1.0}, True)])


def test_train_nonfinite_loss_on_lr_blowup():
    examples = [
        _ex({"a": 1e4 * (1 if i % 2 == 0 else -1)}, i % 2 == 0, i) for i in range(8)
    ]
    with pytest.raises(NonFiniteLoss):
        train_logreg(examples, Hyperparams(learning_rate=1e12, epochs=10, l2_lambda=1e8))


def test_train_sign_check():
    examples = [_ex({"up": 1.0}, True), _ex({"down": 1.0}, False)]
    model = train_logreg(examples, Hyperparams(epochs=200))
    assert model.weights["up"] > 0
    assert model.weights["down"] < 0


def _separable_toy(n, rng):
    examples = []
    for i in range(n):
        positive = i % 2 == 0
        x = rng.normal(2.0 if positive else -2.0, 0.3)
        y = rng.normal(1.0 if positive else -1.0, 0.3)
        examples.append(_ex({"f1": x, "f2": y}, positive, i))
    return examples


def test_train_separable_toy():
    rng = np.random.default_rng(5)
    train = _separable_toy(20, rng)
    model = train_logreg(train, Hyperparams(epochs=300))
    acc = sum(
        (score(model, e.features) >= 0.5) == (e.label is Label.Positive) for e in train
    ) / len(train)
    assert acc == 1.0
    held = _separable_toy(200, rng)
    held_acc = sum(
        (score(model, e.features) >= 0.5) == (e.label is Label.Positive) for e in held
    ) / len(held)
    assert held_acc >= 0.99


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(17)
    for _ in range(50):
        n, d = int(rng.integers(3, 12)), int(rng.integers(1, 5))
        X = rng.normal(size=(n, d))
        y = (rng.random(n) < 0.5).astype(float)
        if y.min() == y.max():
            y[0] = 1 - y[0]
        w = rng.normal(scale=0.5, size=d)
        b = float(rng.normal(scale=0.5))
        lam = float(rng.choice([0.0, 1e-4, 1e-2]))
        loss, gw, gb = loss_and_gradient(w, b, X, y, lam)
        eps = 1e-6
        for j in range(d):
            wp, wm = w.copy(), w.copy()
            wp[j] += eps
            wm[j] -= eps
            fd = (
                loss_and_gradient(wp, b, X, y, lam)[0]
                - loss_and_gradient(wm, b, X, y, lam)[0]
            ) / (2 * eps)
            assert abs(gw[j] - fd) <= 1e-5 * max(1.0, abs(fd))
        fd_b = (
            loss_and_gradient(w, b + eps, X, y, lam)[0]
            - loss_and_gradient(w, b - eps, X, y, lam)[0]
        ) / (2 * eps)
        assert abs(gb - fd_b) <= 1e-5 * max(1.0, abs(fd_b))


def test_calibration_in_aggregate():
    rng = np.random.default_rng(23)
    examples = []
    for i in range(300):
        positive = rng.random() < 0.3
        x = rng.normal(0.5 if positive else -0.5)
        examples.append(_ex({"f": x}, positive, i))
    model = train_logreg(examples, Hyperparams(epochs=2000, batch_size=300))
    mean_pred = np.mean([score(model, e.features) for e in examples])
    pos_rate = np.mean([e.label is Label.Positive for e in examples])
    assert abs(mean_pred - pos_rate) < 1e-2


def test_train_deterministic():
    rng = np.random.default_rng(5)
    examples = _separable_toy(40, rng)
    m1 = train_logreg(examples, Hyperparams(seed=3))
    m2 = train_logreg(examples, Hyperparams(seed=3))
    assert m1 == m2


# --- scoring ------------------------------------------------------------

def _model(weights, intercept=0.0):
    return ScorerModel(weights, intercept, vocabulary_hash(sorted(weights)))


def test_score_empty_features():
    assert score(_model({}), {}) == pytest.approx(0.5)


def test_score_closed_form():
    assert score(_model({"a": 1.0}, intercept=0.0), {"a": -1.0}) == pytest.approx(
        1 / (1 + math.e), abs=1e-5
    )


def test_score_ignores_unknown_features():
    m = _model({"a": 2.0}, intercept=0.5)
    assert score(m, {"a": 1.0}) == score(m, {"a": 1.0, "zzz": 99.0})


def test_score_monotone_in_positive_weight():
    m = _model({"a": 1.5})
    values = [score(m, {"a": v}) for v in (-2, -1, 0, 1, 2)]
    assert values == sorted(values)


def test_model_roundtrip():
    import json

    m = ScorerModel({"b": 1.0, "a": -2.0}, 0.3, "h", Hyperparams(seed=9))
    assert ScorerModel.from_dict(json.loads(json.dumps(m.to_dict()))) == m
