import numpy as np
import pytest

from activepool import LinearModel, TrainConfig, macro_f1, predict, predict_proba, train
from activepool.learner import loss_and_grads


def central_difference_grads(model, X, Y, l2, h=1e-6):
    gw = np.zeros_like(model.weights)
    gb = np.zeros_like(model.bias)
    for idx in np.ndindex(*model.weights.shape):
        w = model.weights.copy()
        w[idx] += h
        up, _, _ = loss_and_grads(LinearModel(w, model.bias), X, Y, l2)
        w[idx] -= 2 * h
        down, _, _ = loss_and_grads(LinearModel(w, model.bias), X, Y, l2)
        gw[idx] = (up - down) / (2 * h)
    for j in range(len(model.bias)):
        b = model.bias.copy()
        b[j] += h
        up, _, _ = loss_and_grads(LinearModel(model.weights, b), X, Y, l2)
        b[j] -= 2 * h
        down, _, _ = loss_and_grads(LinearModel(model.weights, b), X, Y, l2)
        gb[j] = (up - down) / (2 * h)
    return gw, gb


class TestGradients:
    @pytest.mark.parametrize("l2", [0.0, 1e-4, 0.1])
    def test_matches_finite_differences(self, l2):
        gen = np.random.default_rng(100)
        for _ in range(5):
            n, d, c = 6, 3, 3
            X = gen.normal(size=(n, d))
            y = gen.integers(c, size=n)
            Y = np.eye(c)[y]
            model = LinearModel(gen.normal(size=(c, d)) * 0.5, gen.normal(size=c) * 0.5)
            _, gw, gb = loss_and_grads(model, X, Y, l2)
            nw, nb = central_difference_grads(model, X, Y, l2)
            assert np.max(np.abs(gw - nw)) / max(np.max(np.abs(nw)), 1e-8) < 1e-4
            assert np.max(np.abs(gb - nb)) / max(np.max(np.abs(nb)), 1e-8) < 1e-4

    def test_loss_includes_penalty(self):
        X = np.array([[1.0, 0.0]])
        Y = np.array([[1.0, 0.0]])
        W = np.array([[2.0, 0.0], [0.0, 0.0]])
        model = LinearModel(W.copy(), np.zeros(2))
        l0, _, _ = loss_and_grads(model, X, Y, 0.0)
        l1, _, _ = loss_and_grads(model, X, Y, 0.5)
        assert l1 - l0 == pytest.approx(0.5 * 0.5 * 4.0)


class TestTraining:
    def test_zero_init_first_probs_uniform(self):
        model = LinearModel(np.zeros((3, 2)), np.zeros(3))
        P = predict_proba(model, [[1.0, -2.0], [0.5, 4.0]])
        assert np.allclose(P, 1 / 3)

    def test_loss_decreases_monotonically(self):
        gen = np.random.default_rng(5)
        X = gen.normal(size=(30, 4))
        y = (X[:, 0] > 0).astype(int)
        Y = np.eye(2)[y]
        model = LinearModel(np.zeros((2, 4)), np.zeros(2))
        prev = np.inf
        cfg = TrainConfig(learning_rate=0.1, epochs=1)
        for _ in range(50):
            loss, gw, gb = loss_and_grads(model, X, Y, cfg.l2)
            assert loss <= prev + 1e-12
            prev = loss
            model.weights -= cfg.learning_rate * gw
            model.bias -= cfg.learning_rate * gb

    def test_separable_blobs_high_f1(self):
        gen = np.random.default_rng(6)
        n = 200
        X = np.vstack(
            [gen.normal(-3, 0.5, size=(n, 2)), gen.normal(3, 0.5, size=(n, 2))]
        )
        y = np.array([0] * n + [1] * n)
        model = train(X, y)
        assert macro_f1(predict(model, X), y) >= 0.99

    def test_deterministic(self):
        gen = np.random.default_rng(7)
        X = gen.normal(size=(40, 3))
        y = gen.integers(2, size=40)
        a = train(X, y)
        b = train(X, y)
        assert np.array_equal(a.weights, b.weights)
        assert np.array_equal(a.bias, b.bias)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            train(np.zeros((4, 2)), [1, 1, 1, 1])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            train(np.array([[np.inf], [0.0]]), [0, 1])

    def test_bad_config(self):
        with pytest.raises(ValueError):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            TrainConfig(l2=-1.0)


class TestPredict:
    def test_rows_sum_to_one(self):
        gen = np.random.default_rng(8)
        model = LinearModel(gen.normal(size=(4, 3)), gen.normal(size=4))
        P = predict_proba(model, gen.normal(size=(9, 3)))
        assert np.allclose(P.sum(axis=1), 1.0)
        assert np.all(P > 0)

    def test_dimension_mismatch(self):
        model = LinearModel(np.zeros((2, 3)), np.zeros(2))
        with pytest.raises(ValueError):
            predict_proba(model, np.zeros((2, 4)))

    def test_logit_shift_invariance(self):
        # adding the same constant to every class bias leaves softmax unchanged
        model = LinearModel(np.array([[1.0, 0.0], [0.0, 1.0]]), np.zeros(2))
        X = np.random.default_rng(9).normal(size=(5, 2))
        biased = LinearModel(model.weights, model.bias + 3.0)
        assert np.allclose(predict_proba(model, X), predict_proba(biased, X))


class TestMacroF1:
    def test_perfect(self):
        assert macro_f1([0, 1, 0, 1], [0, 1, 0, 1]) == 1.0

    def test_one_class_right_one_wrong(self):
        # pred [0,0,1,1] vs gold [0,0,0,0]: class 0 F1 = 2*2/(4+0+2) ... hand:
        # c0 tp=2 fp=0 fn=2 -> 2*2/6 = 2/3; c1 tp=0 fp=2 fn=0 -> 0
        assert macro_f1([0, 0, 1, 1], [0, 0, 0, 0]) == pytest.approx(1 / 3)

    def test_half_fixture(self):
        # c0: tp=1 fp=1 fn=1 -> 0.5; c1: tp=1 fp=1 fn=1 -> 0.5
        assert macro_f1([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.5)

    def test_absent_class_counts_zero(self):
        # gold has class 2, never predicted: contributes 0 to the mean
        got = macro_f1([0, 1, 0], [0, 1, 2])
        c0 = 2 * 1 / (2 * 1 + 1 + 0)
        assert got == pytest.approx((c0 + 1.0 + 0.0) / 3)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            macro_f1([0], [0, 1])

    def test_empty(self):
        with pytest.raises(ValueError):
            macro_f1([], [])
