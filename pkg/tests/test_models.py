"""Loss, optimizer, training loop, and classifier behavior."""

import math

import numpy as np
import pytest

from stmtkit.embeddings import Vocabulary, index_paragraph
from stmtkit.models import (
    Adam,
    EarlyStopping,
    EmbeddedLogisticClassifier,
    MlpClassifier,
    TrainConfig,
    TrainingDivergedError,
    ZeroRuleClassifier,
    class_weights,
    forward_logits,
    init_params,
    loss_and_grads,
    make_featurizer,
    predict_proba,
    softmax,
    train,
    weighted_cross_entropy,
)


def toy_vocab(n_tokens=12, dimension=6, seed=7):
    rng = np.random.default_rng(seed)
    tokens = [f"tok{i}" for i in range(n_tokens)]
    return Vocabulary(tokens, rng.normal(size=(n_tokens, dimension)))


class TestSoftmax:
    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(3)
        probs = softmax(rng.normal(size=(40, 13)) * 30)
        assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-6

    def test_zero_logits_give_uniform(self):
        probs = softmax(np.zeros((2, 13)))
        np.testing.assert_allclose(probs, 1.0 / 13.0)

    def test_argmax_invariant_under_constant_shift(self):
        rng = np.random.default_rng(5)
        logits = rng.normal(size=(25, 13))
        shifted = logits + 123.456
        assert (softmax(logits).argmax(1) == softmax(shifted).argmax(1)).all()
        np.testing.assert_allclose(softmax(logits), softmax(shifted), atol=1e-12)


class TestWeightedCrossEntropy:
    def test_uniform_probs_uniform_weights(self):
        # 13 equally likely classes, unit weights: loss is log 13
        probs = np.full((4, 13), 1.0 / 13.0)
        labels = np.array([0, 5, 12, 3])
        loss = weighted_cross_entropy(probs, labels, np.ones(13))
        assert abs(loss - math.log(13)) < 1e-4
        assert abs(loss - 2.5649) < 1e-3

    def test_half_prob_double_weight(self):
        probs = np.zeros((1, 13))
        probs[0, 0] = 0.5
        probs[0, 1] = 0.5
        weights = np.ones(13)
        weights[1] = 2.0
        loss = weighted_cross_entropy(probs, np.array([1]), weights)
        assert abs(loss - 2 * math.log(2)) < 1e-4
        assert abs(loss - 1.3863) < 1e-3

    def test_rows_must_sum_to_one(self):
        probs = np.full((1, 13), 1.0 / 13.0)
        probs[0, 0] += 1e-3
        with pytest.raises(ValueError, match="sum to 1"):
            weighted_cross_entropy(probs, np.array([0]), np.ones(13))

    def test_negative_probability_rejected(self):
        probs = np.full((1, 4), 0.25)
        probs[0, 0] = -0.25
        probs[0, 1] = 0.75
        with pytest.raises(ValueError, match="negative"):
            weighted_cross_entropy(probs, np.array([0]), np.ones(4))

    def test_zero_probability_clamped_finite(self):
        probs = np.zeros((1, 3))
        probs[0, 0] = 1.0
        loss = weighted_cross_entropy(probs, np.array([2]), np.ones(3))
        assert math.isfinite(loss)
        assert abs(loss - (-math.log(1e-12))) < 1e-6

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="one label per"):
            weighted_cross_entropy(np.full((2, 3), 1 / 3), np.array([0]), np.ones(3))


class TestClassWeights:
    def test_inverse_frequency_mean_normalized(self):
        weights = class_weights(np.array([0, 0, 0, 1]), 2)
        np.testing.assert_allclose(weights, [4 / 6, 4 / 2])

    def test_equal_counts_give_unit_weights(self):
        weights = class_weights(np.array([0, 1, 2, 0, 1, 2]), 3)
        np.testing.assert_allclose(weights, 1.0)

    def test_uniform_scheme(self):
        np.testing.assert_array_equal(class_weights(np.array([0, 0]), 5, "uniform"), np.ones(5))

    def test_absent_class_gets_zero(self):
        assert class_weights(np.array([0, 0]), 3)[2] == 0.0

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ValueError, match="scheme"):
            class_weights(np.array([0]), 2, "quadratic")


class TestAdam:
    def test_zero_gradient_leaves_params_unchanged(self):
        params = {"w": np.array([1.5, -2.0])}
        opt = Adam()
        opt.step(params, {"w": np.zeros(2)})
        np.testing.assert_array_equal(params["w"], [1.5, -2.0])
        assert opt.step_count == 1

    def test_first_step_unit_gradient(self):
        # defaults, p=0, g=1: the first update is -learning_rate
        params = {"p": np.array([0.0])}
        Adam().step(params, {"p": np.array([1.0])})
        assert abs(params["p"][0] + 0.001) < 1e-9

    def test_quadratic_descent_matches_reference(self):
        # reference implementation kept separate from the module on purpose
        def reference_run(steps):
            p, m, v = 0.0, 0.0, 0.0
            lr, b1, b2, eps = 0.001, 0.9, 0.999, 1e-8
            trace = []
            for t in range(1, steps + 1):
                g = 2.0 * (p - 3.0)
                m = b1 * m + (1 - b1) * g
                v = b2 * v + (1 - b2) * g * g
                p -= lr * (m / (1 - b1**t)) / (math.sqrt(v / (1 - b2**t)) + eps)
                trace.append(p)
            return trace

        params = {"p": np.array([0.0])}
        opt = Adam()
        mine = []
        for _ in range(100):
            grad = 2.0 * (params["p"] - 3.0)
            opt.step(params, {"p": grad})
            mine.append(float(params["p"][0]))
        np.testing.assert_allclose(mine, reference_run(100), rtol=0, atol=1e-12)
        losses = [(0.0 - 3.0) ** 2] + [(p - 3.0) ** 2 for p in mine]
        assert all(b < a for a, b in zip(losses, losses[1:]))

    def test_non_finite_gradient_aborts_with_name(self):
        params = {"W": np.zeros(3)}
        with pytest.raises(TrainingDivergedError, match="'W'"):
            Adam().step(params, {"W": np.array([1.0, np.nan, 0.0])})
        with pytest.raises(TrainingDivergedError, match="step 1"):
            Adam().step({"b": np.zeros(1)}, {"b": np.array([np.inf])})


class TestEarlyStopping:
    def test_slow_improvement_stops_after_fourth_epoch(self):
        stopper = EarlyStopping(min_delta=0.001, patience=3)
        decisions = [stopper.update(v) for v in [1.0, 0.9995, 0.9991, 0.9990]]
        assert decisions == [False, False, False, True]

    def test_real_improvement_resets_patience(self):
        stopper = EarlyStopping(min_delta=0.001, patience=2)
        assert not stopper.update(1.0)
        assert not stopper.update(0.9999)
        assert not stopper.update(0.5)
        assert not stopper.update(0.4999)
        assert stopper.update(0.4998)


def independent_loss(params, features, labels, weights):
    """Hand-rolled forward pass for finite-difference checks."""
    if "W1" in params:
        hidden = np.maximum(features @ params["W1"] + params["b1"], 0.0)
        logits = hidden @ params["W2"] + params["b2"]
    else:
        logits = features @ params["W"] + params["b"]
    exp = np.exp(logits - logits.max(axis=1, keepdims=True))
    probs = exp / exp.sum(axis=1, keepdims=True)
    picked = probs[np.arange(len(labels)), labels]
    return float(np.mean(-weights[labels] * np.log(picked)))


def numerical_grads(params, features, labels, weights, eps=1e-6):
    grads = {}
    for name in params:
        flat = params[name].ravel()
        out = np.zeros_like(flat)
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + eps
            above = independent_loss(params, features, labels, weights)
            flat[i] = saved - eps
            below = independent_loss(params, features, labels, weights)
            flat[i] = saved
            out[i] = (above - below) / (2 * eps)
        grads[name] = out.reshape(params[name].shape)
    return grads


def max_relative_error(analytic, numeric):
    worst = 0.0
    for name in analytic:
        a, n = analytic[name], numeric[name]
        denom = np.maximum(np.abs(a) + np.abs(n), 1e-8)
        worst = max(worst, float((np.abs(a - n) / denom).max()))
    return worst


class TestGradients:
    @pytest.mark.parametrize("kind", ["logreg", "mlp"])
    def test_analytic_matches_central_differences(self, kind):
        rng = np.random.default_rng(11)
        features = rng.normal(size=(6, 5))
        labels = rng.integers(0, 3, size=6)
        weights = rng.uniform(0.5, 2.0, size=3)
        if kind == "logreg":
            params = {"W": rng.normal(size=(5, 3)), "b": rng.normal(size=3)}
        else:
            params = {
                "W1": rng.normal(size=(5, 4)),
                "b1": rng.normal(size=4),
                "W2": rng.normal(size=(4, 3)),
                "b2": rng.normal(size=3),
            }
        _, analytic = loss_and_grads(params, features, labels, weights)
        numeric = numerical_grads(params, features, labels, weights)
        assert max_relative_error(analytic, numeric) <= 1e-4


def separable_task(vocab, n_per_class=60, window=8, seed=13):
    """Three classes, each drawing tokens from its own third of the vocabulary."""
    rng = np.random.default_rng(seed)
    third = len(vocab.tokens) // 3
    rows, labels = [], []
    for cls in range(3):
        pool = vocab.tokens[cls * third : (cls + 1) * third]
        for _ in range(n_per_class):
            tokens = list(rng.choice(pool, size=window))
            rows.append(index_paragraph(tokens, vocab, window=window))
            labels.append(cls)
    order = rng.permutation(len(labels))
    return np.vstack(rows)[order], np.array(labels)[order]


class TestTraining:
    def test_learns_separable_task(self):
        vocab = toy_vocab()
        X, y = separable_task(vocab)
        config = TrainConfig(batch_size=16, max_epochs=20, seed=1)
        result = train("logreg-embedded", X, y, 3, vocab, config)
        featurize, _ = make_featurizer("logreg-embedded", vocab, X.shape[1])
        accuracy = (predict_proba(result.params, featurize, X).argmax(1) == y).mean()
        assert accuracy >= 0.95

    def test_same_seed_identical_weights(self):
        vocab = toy_vocab()
        X, y = separable_task(vocab, n_per_class=20)
        config = TrainConfig(batch_size=16, max_epochs=5, seed=42)
        first = train("logreg-embedded", X, y, 3, vocab, config)
        second = train("logreg-embedded", X, y, 3, vocab, config)
        for name in first.params:
            np.testing.assert_array_equal(first.params[name], second.params[name])

    def test_returns_best_validation_snapshot(self):
        vocab = toy_vocab()
        X, y = separable_task(vocab, n_per_class=25)
        config = TrainConfig(batch_size=16, max_epochs=8, seed=3)
        result = train("logreg-embedded", X, y, 3, vocab, config)
        history = result.history
        assert history.best_epoch >= 1
        assert min(history.val_losses) == history.val_losses[history.best_epoch - 1]
        # monotone early stopping: nothing after the snapshot beats it
        assert all(v >= min(history.val_losses) - 1e-12 for v in history.val_losses)

    def test_single_class_warns(self):
        vocab = toy_vocab()
        X = np.ones((8, 4), dtype=np.int64)
        with pytest.warns(UserWarning, match="single class"):
            train("logreg-index", X, np.zeros(8, dtype=int), 3, vocab, TrainConfig(max_epochs=1))

    def test_probabilities_sum_to_one(self):
        vocab = toy_vocab()
        X, y = separable_task(vocab, n_per_class=15)
        result = train("mlp", X, y, 3, vocab, TrainConfig(max_epochs=2, hidden_units=8, seed=2))
        featurize, _ = make_featurizer("mlp", vocab, X.shape[1])
        probs = predict_proba(result.params, featurize, X)
        assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-6

    def test_fresh_model_predicts_uniform(self):
        # zero weights mean zero logits, so every class gets 1/13
        params = init_params("logreg-index", 480, 13, TrainConfig())
        probs = softmax(forward_logits(params, np.random.default_rng(0).random((5, 480))))
        np.testing.assert_allclose(probs, 1.0 / 13.0)

    def test_mlp_hidden_width_configurable(self):
        params = init_params("mlp", 40, 13, TrainConfig(hidden_units=9))
        assert params["W1"].shape == (40, 9)
        assert params["W2"].shape == (9, 13)

    def test_index_mode_scales_into_unit_interval(self):
        vocab = toy_vocab(n_tokens=12)
        featurize, width = make_featurizer("logreg-index", vocab, 6)
        batch = np.array([[0, 1, 12, 6, 0, 0]])
        scaled = featurize(batch)
        assert width == 6
        assert scaled.min() == 0.0 and scaled.max() == 1.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="one label per"):
            train("logreg-index", np.ones((3, 4), dtype=int), np.zeros(2, dtype=int), 3, toy_vocab())

    def test_empty_data_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            train("logreg-index", np.empty((0, 4), dtype=int), np.empty(0, dtype=int), 3, toy_vocab())


class TestZeroRule:
    def test_predicts_most_frequent(self):
        model = ZeroRuleClassifier().fit(None, np.array([2, 2, 1, 2, 0]))
        assert model.majority_ == 2
        np.testing.assert_array_equal(model.predict(np.zeros((4, 1))), [2, 2, 2, 2])

    def test_tie_breaks_to_lowest_index(self):
        model = ZeroRuleClassifier().fit(None, np.array([3, 1, 3, 1]))
        assert model.majority_ == 1

    def test_probabilities_are_training_distribution(self):
        model = ZeroRuleClassifier().fit(None, np.array([0, 1, 1, 1]))
        np.testing.assert_allclose(model.predict_proba(np.zeros((2, 1))), [[0.25, 0.75]] * 2)

    def test_empty_labels_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            ZeroRuleClassifier().fit(None, np.array([], dtype=int))


class TestSklearnWrappers:
    def test_fit_predict_round_trip(self):
        vocab = toy_vocab()
        X, y = separable_task(vocab, n_per_class=30)
        model = EmbeddedLogisticClassifier(
            vocab=vocab, n_classes=3, batch_size=16, max_epochs=15, seed=4
        ).fit(X, y)
        assert (model.predict(X) == y).mean() >= 0.9
        probs = model.predict_proba(X)
        assert probs.shape == (len(y), 3)
        assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-6

    def test_get_params_supports_cloning(self):
        from sklearn.base import clone

        vocab = toy_vocab()
        model = MlpClassifier(vocab=vocab, hidden_units=16, seed=9)
        cloned = clone(model)
        assert cloned.hidden_units == 16
        assert cloned.vocab.tokens == vocab.tokens
