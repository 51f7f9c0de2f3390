"""Ensembles over CART base learners.

Six families: bagging, random forest, extra trees, AdaBoost.R2, gradient
boosting (stochastic when subsampled), and a regularized second-order booster
whose split gain and leaf weights follow the penalized objective
gain = 0.5 * [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda)] - gamma,
w* = -G/(H+lambda), with per-split default directions learned for missing
feature values (squared loss, so h = 1 per row).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .cart import Node, RegressionTree, TreeParams, grow, predict_tree, predict_tree_batch
from .core import Predictor
from .data import Dataset, FeatureVector
from .errors import EmptyTrainError

RF_FEATURE_SUBSET = 2  # ceil(sqrt(4)) of the four drivers


class CombineRule(Enum):
    MEAN = "mean"
    WEIGHTED_MEDIAN = "weighted_median"
    ADDITIVE = "additive"


@dataclass(frozen=True)
class ForestConfig:
    n_members: int = 100
    tree: TreeParams = TreeParams()
    seed: int = 0

    def __post_init__(self):
        if self.n_members < 1:
            raise ValueError("n_members must be >= 1")


@dataclass(frozen=True)
class BoostConfig:
    n_rounds: int = 100
    learning_rate: float = 0.1
    lam: float = 1.0
    gamma: float = 0.0
    subsample: float = 1.0
    tree: TreeParams = TreeParams()
    seed: int = 0

    def __post_init__(self):
        if self.n_rounds < 1:
            raise ValueError("n_rounds must be >= 1")
        # learning_rate 0 is allowed as the degenerate base-score model
        if not (0.0 <= self.learning_rate <= 1.0):
            raise ValueError("learning_rate must be in [0, 1]")
        if self.lam < 0 or self.gamma < 0:
            raise ValueError("lam and gamma must be >= 0")
        if not (0.0 < self.subsample <= 1.0):
            raise ValueError("subsample must be in (0, 1]")


@dataclass
class EnsembleModel:
    members: list[tuple[RegressionTree, float]]
    combine: CombineRule
    family: str
    base_score: float = 0.0
    member_indices: tuple[np.ndarray, ...] = ()

    def predict(self, x: Sequence[float]) -> float:
        outputs = np.array([predict_tree(tree, x) for tree, _ in self.members])
        weights = np.array([w for _, w in self.members])
        if self.combine is CombineRule.MEAN:
            return float(outputs.mean())
        if self.combine is CombineRule.WEIGHTED_MEDIAN:
            return weighted_median(outputs, weights)
        return self.base_score + float(np.dot(weights, outputs))

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.predict(row) for row in np.asarray(X, dtype=float)])


def weighted_median(values: Sequence[float], weights: Sequence[float]) -> float:
    """Smallest value whose cumulative weight reaches half the total."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    half = 0.5 * cum[-1]
    idx = int(np.searchsorted(cum, half))
    return float(values[order[min(idx, values.size - 1)]])


def bootstrap_indices(n: int, rng: np.random.Generator) -> np.ndarray:
    """Size-n draw with replacement."""
    return rng.integers(0, n, size=n)


def bootstrap_sample(train: Dataset, rng: np.random.Generator) -> tuple[Dataset, np.ndarray]:
    """Bootstrap replica of the training set plus the drawn indices."""
    if len(train) == 0:
        raise EmptyTrainError("cannot bootstrap an empty dataset")
    indices = bootstrap_indices(len(train), rng)
    return train.subset(indices), indices


def _check_nonempty(y: np.ndarray) -> None:
    if y.size == 0:
        raise EmptyTrainError("empty training set")


def fit_bagging(X: np.ndarray, y: np.ndarray, cfg: ForestConfig) -> EnsembleModel:
    """CART members on bootstrap replicas, combined by mean."""
    X, y = np.asarray(X, dtype=float), np.asarray(y, dtype=float)
    _check_nonempty(y)
    rng = np.random.default_rng(cfg.seed)
    members, drawn = [], []
    for _ in range(cfg.n_members):
        idx = bootstrap_indices(y.size, rng)
        members.append((grow(X[idx], y[idx], cfg.tree), 1.0))
        drawn.append(idx)
    return EnsembleModel(members, CombineRule.MEAN, "bagging", member_indices=tuple(drawn))


def fit_random_forest(X: np.ndarray, y: np.ndarray, cfg: ForestConfig) -> EnsembleModel:
    """Bagging plus a random feature subset of size 2 at every split."""
    X, y = np.asarray(X, dtype=float), np.asarray(y, dtype=float)
    _check_nonempty(y)
    rng = np.random.default_rng(cfg.seed)
    members, drawn = [], []
    for _ in range(cfg.n_members):
        idx = bootstrap_indices(y.size, rng)
        tree = grow(X[idx], y[idx], cfg.tree, rng=rng, n_feature_subset=RF_FEATURE_SUBSET)
        members.append((tree, 1.0))
        drawn.append(idx)
    return EnsembleModel(members, CombineRule.MEAN, "random_forest", member_indices=tuple(drawn))


def fit_extra_trees(X: np.ndarray, y: np.ndarray, cfg: ForestConfig) -> EnsembleModel:
    """Full-sample members with random feature subsets and random cut points."""
    X, y = np.asarray(X, dtype=float), np.asarray(y, dtype=float)
    _check_nonempty(y)
    rng = np.random.default_rng(cfg.seed)
    members = []
    for _ in range(cfg.n_members):
        tree = grow(
            X,
            y,
            cfg.tree,
            rng=rng,
            n_feature_subset=RF_FEATURE_SUBSET,
            random_thresholds=True,
        )
        members.append((tree, 1.0))
    return EnsembleModel(members, CombineRule.MEAN, "extra_trees")


def fit_adaboost_r2(X: np.ndarray, y: np.ndarray, cfg: ForestConfig) -> EnsembleModel:
    """Sequential reweighting with linear loss; weighted-median combination.

    Each round trains on a weight-resampled replica, stops when the weighted
    average loss reaches 0.5, and stops immediately after a perfect round.
    """
    X, y = np.asarray(X, dtype=float), np.asarray(y, dtype=float)
    _check_nonempty(y)
    rng = np.random.default_rng(cfg.seed)
    n = y.size
    w = np.full(n, 1.0 / n)
    members: list[tuple[RegressionTree, float]] = []
    for _ in range(cfg.n_members):
        idx = rng.choice(n, size=n, replace=True, p=w)
        tree = grow(X[idx], y[idx], cfg.tree)
        err = np.abs(predict_tree_batch(tree, X) - y)
        max_err = float(err.max())
        if max_err == 0.0:
            members.append((tree, 1.0))
            break
        loss = err / max_err
        avg_loss = float(np.dot(w, loss))
        if avg_loss >= 0.5:
            if not members:
                members.append((tree, 1.0))
            break
        beta = avg_loss / (1.0 - avg_loss)
        members.append((tree, math.log(1.0 / beta)))
        w = w * beta ** (1.0 - loss)
        w = w / w.sum()
    return EnsembleModel(members, CombineRule.WEIGHTED_MEDIAN, "adaboost_r2")


def fit_gradient_boosting(X: np.ndarray, y: np.ndarray, cfg: BoostConfig) -> EnsembleModel:
    """Squared-loss boosting: each round fits CART to current residuals.

    ``subsample`` < 1 draws a without-replacement row fraction per round
    (the stochastic variant); 1.0 is plain gradient boosting.
    """
    X, y = np.asarray(X, dtype=float), np.asarray(y, dtype=float)
    _check_nonempty(y)
    rng = np.random.default_rng(cfg.seed)
    n = y.size
    base = float(np.mean(y))
    pred = np.full(n, base)
    members: list[tuple[RegressionTree, float]] = []
    for _ in range(cfg.n_rounds):
        residual = y - pred
        if cfg.subsample < 1.0:
            m = max(1, int(round(cfg.subsample * n)))
            idx = rng.choice(n, size=m, replace=False)
        else:
            idx = np.arange(n)
        tree = grow(X[idx], residual[idx], cfg.tree)
        pred = pred + cfg.learning_rate * predict_tree_batch(tree, X)
        members.append((tree, cfg.learning_rate))
    return EnsembleModel(members, CombineRule.ADDITIVE, "gradient_boosting", base_score=base)


# -- regularized second-order booster -----------------------------------------


def split_gain(
    g_left: float,
    h_left: float,
    g_right: float,
    h_right: float,
    lam: float,
    gamma: float,
) -> float:
    """Penalized gain of one candidate split."""
    g_total = g_left + g_right
    h_total = h_left + h_right
    return 0.5 * (
        g_left * g_left / (h_left + lam)
        + g_right * g_right / (h_right + lam)
        - g_total * g_total / (h_total + lam)
    ) - gamma


def leaf_weight(g_sum: float, h_sum: float, lam: float) -> float:
    return -g_sum / (h_sum + lam)


def _best_regularized_split(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    cfg: BoostConfig,
) -> tuple[int, float, bool, np.ndarray, float] | None:
    """Exact greedy search over features, thresholds, and default directions.

    Returns (feature, threshold, default_left, left row mask, gain); missing
    rows are sent down whichever side yields the higher gain.
    """
    n = g.size
    min_leaf = cfg.tree.min_samples_leaf
    best: tuple[int, float, bool, np.ndarray, float] | None = None
    for f in range(X.shape[1]):
        col = X[:, f]
        present = ~np.isnan(col)
        if present.sum() < 2:
            continue
        g_miss = float(g[~present].sum())
        h_miss = float(h[~present].sum())
        n_miss = int(n - present.sum())
        distinct = np.unique(col[present])
        if distinct.size < 2:
            continue
        for threshold in (distinct[:-1] + distinct[1:]) / 2.0:
            left_present = present & (col <= threshold)
            right_present = present & (col > threshold)
            gl = float(g[left_present].sum())
            hl = float(h[left_present].sum())
            gr = float(g[right_present].sum())
            hr = float(h[right_present].sum())
            nl, nr = int(left_present.sum()), int(right_present.sum())
            for default_left in (True, False):
                if default_left:
                    gain = split_gain(gl + g_miss, hl + h_miss, gr, hr, cfg.lam, cfg.gamma)
                    n_left, n_right = nl + n_miss, nr
                else:
                    gain = split_gain(gl, hl, gr + g_miss, hr + h_miss, cfg.lam, cfg.gamma)
                    n_left, n_right = nl, nr + n_miss
                if n_left < min_leaf or n_right < min_leaf:
                    continue
                if gain > 0 and (best is None or gain > best[4]):
                    mask = left_present | (~present if default_left else np.zeros(n, bool))
                    best = (f, float(threshold), default_left, mask, float(gain))
    return best


def _grow_regularized(
    X: np.ndarray, g: np.ndarray, h: np.ndarray, depth: int, cfg: BoostConfig
) -> Node:
    node = Node(value=leaf_weight(float(g.sum()), float(h.sum()), cfg.lam), n=int(g.size))
    if depth >= cfg.tree.max_depth or g.size < cfg.tree.min_samples_split:
        return node
    split = _best_regularized_split(X, g, h, cfg)
    if split is None:
        return node
    feature, threshold, default_left, mask, _ = split
    node.feature = feature
    node.threshold = threshold
    node.default_left = default_left
    node.left = _grow_regularized(X[mask], g[mask], h[mask], depth + 1, cfg)
    node.right = _grow_regularized(X[~mask], g[~mask], h[~mask], depth + 1, cfg)
    return node


def fit_regularized_booster(X: np.ndarray, y: np.ndarray, cfg: BoostConfig) -> EnsembleModel:
    """Second-order boosting with leaf-weight shrinkage and missing support."""
    X, y = np.asarray(X, dtype=float), np.asarray(y, dtype=float)
    _check_nonempty(y)
    n = y.size
    base = float(np.mean(y))
    pred = np.full(n, base)
    h = np.ones(n)
    members: list[tuple[RegressionTree, float]] = []
    for _ in range(cfg.n_rounds):
        g = pred - y
        root = _grow_regularized(X, g, h, 0, cfg)
        tree = RegressionTree(root=root, params=cfg.tree, n_train=n)
        pred = pred + cfg.learning_rate * predict_tree_batch(tree, X)
        members.append((tree, cfg.learning_rate))
    return EnsembleModel(members, CombineRule.ADDITIVE, "regularized_booster", base_score=base)


# -- zoo wrappers --------------------------------------------------------------


class _EnsemblePredictor(Predictor):
    def __init__(self):
        super().__init__()
        self.model: EnsembleModel | None = None

    def _predict(self, x: FeatureVector) -> float:
        return self.model.predict(x.to_array())


class BaggingPredictor(_EnsemblePredictor):
    model_kind = "bagging"

    def __init__(self, config: ForestConfig = ForestConfig()):
        super().__init__()
        self.config = config

    def _fit(self, train: Dataset, y: np.ndarray) -> None:
        self.model = fit_bagging(train.features_matrix, y, self.config)


class RandomForestPredictor(_EnsemblePredictor):
    model_kind = "random_forest"

    def __init__(self, config: ForestConfig = ForestConfig()):
        super().__init__()
        self.config = config

    def _fit(self, train: Dataset, y: np.ndarray) -> None:
        self.model = fit_random_forest(train.features_matrix, y, self.config)


class ExtraTreesPredictor(_EnsemblePredictor):
    model_kind = "extra_trees"

    def __init__(self, config: ForestConfig = ForestConfig()):
        super().__init__()
        self.config = config

    def _fit(self, train: Dataset, y: np.ndarray) -> None:
        self.model = fit_extra_trees(train.features_matrix, y, self.config)


class AdaBoostPredictor(_EnsemblePredictor):
    model_kind = "adaboost_r2"

    def __init__(self, config: ForestConfig = ForestConfig()):
        super().__init__()
        self.config = config

    def _fit(self, train: Dataset, y: np.ndarray) -> None:
        self.model = fit_adaboost_r2(train.features_matrix, y, self.config)


class GradientBoostingPredictor(_EnsemblePredictor):
    model_kind = "gradient_boosting"

    def __init__(self, config: BoostConfig = BoostConfig()):
        super().__init__()
        self.config = config
        if config.subsample < 1.0:
            self.model_kind = "stochastic_gradient_boosting"

    def _fit(self, train: Dataset, y: np.ndarray) -> None:
        self.model = fit_gradient_boosting(train.features_matrix, y, self.config)


class RegularizedBoosterPredictor(_EnsemblePredictor):
    model_kind = "regularized_boosting"
    supports_missing = True

    def __init__(self, config: BoostConfig = BoostConfig()):
        super().__init__()
        self.config = config

    def _fit(self, train: Dataset, y: np.ndarray) -> None:
        self.model = fit_regularized_booster(train.features_matrix, y, self.config)
