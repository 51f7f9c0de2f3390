import numpy as np
import pytest

from conftest import random_dataset
from costlab.cart import (
    CartPredictor,
    TreeParams,
    best_split,
    grow,
    predict_tree,
    predict_tree_batch,
)
from costlab.errors import EmptyTrainError, UnsupportedMissingError
from costlab.metrics import mape


def brute_force_split(X, y, min_leaf=1):
    """Independent exhaustive enumeration in pure Python."""
    n = len(y)
    best = None

    def sse(values):
        if not values:
            return 0.0
        mean = sum(values) / len(values)
        return sum((v - mean) ** 2 for v in values)

    parent = sse(list(y))
    for f in range(X.shape[1]):
        distinct = sorted(set(X[:, f]))
        for a, b in zip(distinct, distinct[1:]):
            threshold = (a + b) / 2
            left = [y[i] for i in range(n) if X[i, f] <= threshold]
            right = [y[i] for i in range(n) if X[i, f] > threshold]
            if len(left) < min_leaf or len(right) < min_leaf:
                continue
            gain = parent - sse(left) - sse(right)
            if gain > 0 and (best is None or gain > best[2]):
                best = (f, threshold, gain)
    return best


class TestBestSplit:
    def test_hand_example(self):
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        y = np.array([0.0, 0.0, 10.0, 10.0])
        feature, threshold, gain = best_split(X, y)
        assert (feature, threshold) == (0, 2.5)
        assert gain == pytest.approx(100.0, rel=1e-12)

    def test_constant_target_gives_none(self):
        X = np.array([[1.0], [2.0], [3.0]])
        assert best_split(X, np.array([7.0, 7.0, 7.0])) is None

    def test_constant_feature_gives_none(self):
        X = np.ones((5, 2))
        assert best_split(X, np.arange(5.0)) is None

    def test_min_samples_leaf_respected(self):
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        y = np.array([0.0, 10.0, 10.0, 10.0])
        result = best_split(X, y, min_samples_leaf=2)
        assert result is not None
        assert result[1] == 2.5  # the 1-vs-3 split at 1.5 is forbidden

    def test_matches_brute_force_on_random_data(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            n = int(rng.integers(2, 13))
            X = rng.uniform(0, 10, (n, 2))
            y = rng.uniform(0, 100, n)
            mine = best_split(X, y)
            oracle = brute_force_split(X, y)
            if oracle is None:
                assert mine is None
            else:
                assert mine is not None
                assert mine[0] == oracle[0]
                assert mine[1] == oracle[1]
                assert mine[2] == pytest.approx(oracle[2], rel=1e-9)

    def test_tie_breaks_to_lowest_feature(self):
        # identical columns induce identical partitions and exactly equal gains
        X = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0], [4.0, 4.0]])
        y = np.array([0.0, 0.0, 10.0, 10.0])
        feature, threshold, _ = best_split(X, y)
        assert (feature, threshold) == (0, 2.5)


class TestGrow:
    def test_depth_zero_is_single_leaf(self):
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        y = np.array([1.0, 2.0, 3.0, 6.0])
        tree = grow(X, y, TreeParams(max_depth=0, min_samples_leaf=1, min_samples_split=2))
        assert tree.root.is_leaf
        assert tree.root.value == pytest.approx(3.0)

    def test_recovers_two_leaf_step_function(self):
        X = np.array([[1.0], [2.0], [3.0], [10.0], [11.0], [12.0]])
        y = np.array([5.0, 5.0, 5.0, 9.0, 9.0, 9.0])
        tree = grow(X, y)
        root = tree.root
        assert not root.is_leaf
        assert root.feature == 0 and root.threshold == 6.5
        assert root.left.is_leaf and root.left.value == 5.0
        assert root.right.is_leaf and root.right.value == 9.0

    def test_empty_train_rejected(self):
        with pytest.raises(EmptyTrainError):
            grow(np.empty((0, 2)), np.array([]))

    def test_every_training_row_predicts_its_leaf_mean(self):
        rng = np.random.default_rng(1)
        X = rng.uniform(0, 10, (40, 4))
        y = rng.uniform(0, 100, 40)
        tree = grow(X, y)
        members: dict[int, list[float]] = {}
        for i in range(40):
            members.setdefault(id(_route(tree, X[i])), []).append(y[i])
        for i in range(40):
            leaf = _route(tree, X[i])
            assert leaf.value == pytest.approx(np.mean(members[id(leaf)]), rel=1e-12)
            assert leaf.n == len(members[id(leaf)])

    def test_mass_conservation(self):
        rng = np.random.default_rng(2)
        for trial in range(10):
            X = rng.uniform(0, 10, (50, 3))
            y = rng.uniform(0, 100, 50)
            tree = grow(X, y)
            total = sum(leaf.n * leaf.value for leaf in tree.leaves())
            assert total == pytest.approx(float(np.sum(y)), rel=1e-9)

    def test_deeper_trees_never_increase_training_sse(self):
        rng = np.random.default_rng(3)
        X = rng.uniform(0, 10, (60, 4))
        y = rng.uniform(0, 100, 60)
        previous = None
        for depth in range(7):
            tree = grow(X, y, TreeParams(max_depth=depth, min_samples_leaf=2, min_samples_split=4))
            sse = float(np.sum((predict_tree_batch(tree, X) - y) ** 2))
            if previous is not None:
                assert sse <= previous + 1e-9
            previous = sse

    def test_training_mape_non_increasing_in_depth_recorded_seed(self):
        train = random_dataset(80, seed=17, noise=0.1)
        X, y = train.features_matrix, train.targets
        previous = None
        for depth in range(7):
            tree = grow(X, y, TreeParams(max_depth=depth, min_samples_leaf=2, min_samples_split=4))
            err = mape(y, predict_tree_batch(tree, X))
            if previous is not None:
                assert err <= previous + 1e-9
            previous = err


def _route(tree, x):
    node = tree.root
    while not node.is_leaf:
        node = node.left if x[node.feature] <= node.threshold else node.right
    return node


class TestPredictTree:
    def test_single_leaf_constant(self):
        tree = grow(np.array([[1.0], [2.0]]), np.array([4.0, 6.0]), TreeParams(max_depth=0))
        for v in (-100.0, 0.0, 55.0):
            assert predict_tree(tree, [v]) == 5.0

    def test_threshold_boundary_goes_left(self):
        X = np.array([[1.0], [2.0], [3.0], [10.0], [11.0], [12.0]])
        y = np.array([5.0, 5.0, 5.0, 9.0, 9.0, 9.0])
        tree = grow(X, y)
        assert predict_tree(tree, [tree.root.threshold]) == tree.root.left.value

    def test_missing_rejected_without_default_directions(self):
        X = np.array([[1.0], [2.0], [3.0], [10.0], [11.0], [12.0]])
        y = np.array([5.0, 5.0, 5.0, 9.0, 9.0, 9.0])
        tree = grow(X, y)
        with pytest.raises(UnsupportedMissingError):
            predict_tree(tree, [np.nan])


class TestCartPredictor:
    def test_fit_predict_round_trip(self):
        train = random_dataset(30, seed=4, noise=0.05)
        p = CartPredictor().fit(train)
        preds = [p.predict(rec.features) for rec in train]
        assert all(np.isfinite(v) for v in preds)

    def test_dump_contains_rules(self):
        train = random_dataset(30, seed=5, noise=0.05)
        p = CartPredictor().fit(train)
        text = p.dump()
        assert "if p" in text and "predict" in text
        assert text.count("predict") == len(p.tree.leaves())
