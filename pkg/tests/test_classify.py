import numpy as np
import pytest

from ferfuse.classify import (
    MlpModel,
    forest,
    knn_predict,
    load_forest,
    load_mlp,
    loss_and_grads,
    mlp_init,
    mlp_predict,
    mlp_train,
    rf_predict,
    rf_train,
    save_forest,
    save_mlp,
)
from ferfuse.errors import DimensionMismatchError, KTooLargeError, SingleClassError


def threshold_data(n=60, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, size=(n, 1))
    y = (x[:, 0] > 0).astype(np.int64)
    return x, y


class TestRandomForest:
    def test_separable_single_tree(self):
        x, y = threshold_data()
        model = rf_train(x, y, n_trees=1, max_depth=None, seed=0)
        assert np.array_equal(rf_predict(model, x), y)

    def test_forest_of_one_equals_its_tree(self, rng):
        x = rng.normal(size=(50, 3))
        y = rng.integers(0, 3, size=50)
        if len(np.unique(y)) < 2:
            y[0] = (y[0] + 1) % 3
        model = rf_train(x, y, n_trees=1, seed=4)
        assert np.array_equal(rf_predict(model, x), model.trees[0].predict(x))

    def test_deterministic_serialized_blobs(self, tmp_path, rng):
        x = rng.normal(size=(40, 4))
        y = rng.integers(0, 2, size=40)
        a = rf_train(x, y, n_trees=5, seed=11)
        b = rf_train(x, y, n_trees=5, seed=11)
        pa, pb = tmp_path / "a.blob", tmp_path / "b.blob"
        save_forest(a, pa)
        save_forest(b, pb)
        assert pa.read_bytes() == pb.read_bytes()

    def test_majority_vote_matches_tally_oracle(self, rng):
        x = rng.normal(size=(80, 5))
        y = rng.integers(0, 4, size=80)
        model = rf_train(x, y, n_trees=15, seed=2)
        queries = rng.normal(size=(50, 5))
        pred = rf_predict(model, queries)
        votes = np.zeros((50, model.n_classes), dtype=np.int64)
        for tree in model.trees:
            tp = tree.predict(queries)
            for i, c in enumerate(tp):
                votes[i, c] += 1
        expected = np.argmax(votes, axis=1)  # argmax ties to smaller index
        assert np.array_equal(pred, expected)

    def test_tie_breaks_to_smaller_class(self):
        # two stumps voting differently -> class 0 wins the tie
        t0 = forest.DecisionTree(
            feature=np.array([-1]),
            threshold=np.array([0.0]),
            left=np.array([-1]),
            right=np.array([-1]),
            histogram=np.array([[5, 0]]),
        )
        t1 = forest.DecisionTree(
            feature=np.array([-1]),
            threshold=np.array([0.0]),
            left=np.array([-1]),
            right=np.array([-1]),
            histogram=np.array([[0, 5]]),
        )
        model = forest.ForestModel(
            trees=[t0, t1], n_trees=2, seed=0, m_try=1, n_features=1, n_classes=2
        )
        assert rf_predict(model, np.zeros((1, 1)))[0] == 0

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassError):
            rf_train(np.zeros((4, 2)), [1, 1, 1, 1])

    def test_dimension_mismatch(self):
        x, y = threshold_data()
        model = rf_train(x, y, n_trees=2, seed=0)
        with pytest.raises(DimensionMismatchError):
            rf_predict(model, np.zeros((2, 3)))

    def test_unlimited_depth_fits_bootstrap(self, rng):
        # duplicate-free rows: every tree must classify its own bootstrap
        # sample perfectly when grown to purity
        x = rng.normal(size=(30, 3))
        y = rng.integers(0, 3, size=30)
        if len(np.unique(y)) < 2:
            y[0] = (y[0] + 1) % 3
        streams = np.random.SeedSequence(6).spawn(5)
        model = rf_train(x, y, n_trees=5, max_depth=None, seed=6)
        for t, tree in enumerate(model.trees):
            boot = np.random.default_rng(streams[t]).integers(0, 30, size=30)
            assert np.array_equal(tree.predict(x[boot]), y[boot])

    def test_save_load_round_trip(self, tmp_path, rng):
        x = rng.normal(size=(40, 4))
        y = rng.integers(0, 3, size=40)
        model = rf_train(x, y, n_trees=4, seed=9)
        path = tmp_path / "forest.blob"
        save_forest(model, path)
        back = load_forest(path)
        q = rng.normal(size=(10, 4))
        assert np.array_equal(rf_predict(model, q), rf_predict(back, q))


class TestKnn:
    def test_training_row_self_match(self, rng):
        x = rng.normal(size=(20, 3))
        y = rng.integers(0, 4, size=20)
        pred = knn_predict(x, y, x[5:6], k=1)
        assert pred[0] == y[5]

    def test_vote_tie_to_smaller_class(self):
        x = np.array([[0.0], [2.0]])
        y = np.array([3, 1])
        assert knn_predict(x, y, np.array([[1.0]]), k=2)[0] == 1

    def test_distance_tie_to_smaller_index(self):
        x = np.array([[1.0], [-1.0], [1.0]])
        y = np.array([2, 0, 1])
        # query at 0: all same distance; k=1 must pick train index 0
        assert knn_predict(x, y, np.array([[0.0]]), k=1)[0] == 2

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_brute_force_votes(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(100, 4))
        y = rng.integers(0, 5, size=100)
        q = rng.normal(size=(20, 4))
        pred = knn_predict(x, y, q, k=5)
        for i in range(20):
            d = np.linalg.norm(x - q[i], axis=1)
            nearest = np.argsort(d, kind="stable")[:5]
            votes = np.bincount(y[nearest], minlength=5)
            assert pred[i] == np.argmax(votes)

    def test_scale_invariance(self, rng):
        x = rng.normal(size=(50, 3))
        y = rng.integers(0, 3, size=50)
        q = rng.normal(size=(10, 3))
        a = knn_predict(x, y, q, k=5)
        b = knn_predict(x * 37.5, y, q * 37.5, k=5)
        assert np.array_equal(a, b)

    def test_k_too_large(self):
        with pytest.raises(KTooLargeError):
            knn_predict(np.zeros((3, 1)), [0, 1, 0], np.zeros((1, 1)), k=4)


class TestMlp:
    def test_one_epoch_changes_parameters(self, rng):
        x = rng.normal(size=(32, 4))
        y = rng.integers(0, 3, size=32)
        init = mlp_init(4, (8,), 3, seed=1)
        trained = mlp_train(x, y, hidden=(8,), epochs=1, seed=1)
        deltas = [np.linalg.norm(a - b) for a, b in zip(init.weights, trained.weights)]
        assert all(d > 0 for d in deltas)

    def test_zero_epochs_rejected(self, rng):
        with pytest.raises(ValueError):
            mlp_train(rng.normal(size=(4, 2)), [0, 1, 0, 1], epochs=0)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(6, 4))
        y = rng.integers(0, 3, size=6)
        model = mlp_init(4, (5,), 3, seed=3)
        loss0, gw, gb = loss_and_grads(model, x, y)
        h = 1e-5
        for l in range(len(model.weights)):
            w = model.weights[l]
            for idx in [(0, 0), (w.shape[0] - 1, w.shape[1] - 1)]:
                w[idx] += h
                lp, _, _ = loss_and_grads(model, x, y)
                w[idx] -= 2 * h
                lm, _, _ = loss_and_grads(model, x, y)
                w[idx] += h
                fd = (lp - lm) / (2 * h)
                denom = max(abs(fd), abs(gw[l][idx]), 1e-8)
                assert abs(gw[l][idx] - fd) / denom < 1e-4

    def test_xor_learnable(self):
        x = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0, 1, 1, 0])
        model = mlp_train(x, y, hidden=(8,), epochs=2000, lr=0.5, batch_size=4, seed=0)
        assert np.array_equal(mlp_predict(model, x), y)

    def test_all_zero_weights_predict_class_zero(self):
        model = MlpModel(
            weights=[np.zeros((3, 4))],
            biases=[np.zeros(4)],
        )
        pred = mlp_predict(model, np.random.default_rng(0).normal(size=(5, 3)))
        assert np.all(pred == 0)

    def test_forward_matches_hand_arithmetic(self):
        from ferfuse.classify.mlp import forward

        w = np.array([[1.0, 0.0, 2.0], [0.0, -1.0, 1.0]])
        b = np.array([0.5, 0.0, -0.5])
        model = MlpModel(weights=[w], biases=[b])
        x = np.array([[2.0, 3.0]])
        z = x @ w + b
        expected = np.exp(z - z.max()) / np.exp(z - z.max()).sum()
        assert np.allclose(forward(model, x)[-1], expected, atol=1e-12)

    def test_softmax_rows_sum_to_one(self, rng):
        from ferfuse.classify.mlp import forward

        model = mlp_init(4, (6,), 3, seed=2)
        probs = forward(model, rng.normal(size=(10, 4)))[-1]
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-9)

    def test_loss_decreases_on_separable_data(self):
        x, y = threshold_data(n=64, seed=1)
        model = mlp_train(x, y, hidden=(8,), epochs=2, seed=0)
        assert model.loss_history[1] < model.loss_history[0]

    def test_save_load_round_trip(self, tmp_path, rng):
        x = rng.normal(size=(32, 3))
        y = rng.integers(0, 2, size=32)
        model = mlp_train(x, y, hidden=(4,), epochs=2, seed=5)
        path = tmp_path / "mlp.blob"
        save_mlp(model, path)
        back = load_mlp(path)
        q = rng.normal(size=(6, 3))
        assert np.array_equal(mlp_predict(model, q), mlp_predict(back, q))

    def test_deterministic(self, rng):
        x = rng.normal(size=(40, 4))
        y = rng.integers(0, 3, size=40)
        a = mlp_train(x, y, hidden=(6,), epochs=3, seed=8)
        b = mlp_train(x, y, hidden=(6,), epochs=3, seed=8)
        for wa, wb in zip(a.weights, b.weights):
            assert np.array_equal(wa, wb)
