"""CART regression tree: variance-reduction splits, mean-valued leaves.

The standalone tree model and the base learner for every ensemble family.
Split gain is SSE(parent) - SSE(left) - SSE(right) over candidate thresholds
at midpoints between consecutive distinct feature values; ties break toward
the lowest feature index, then the lowest threshold. SSE terms are computed
from row masks in fixed row order, so candidates inducing the same partition
produce bit-identical gains.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Predictor
from .data import Dataset, FEATURE_NAMES, FeatureVector
from .errors import EmptyTrainError, UnsupportedMissingError


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 6
    min_samples_leaf: int = 2
    min_samples_split: int = 4

    def __post_init__(self):
        if self.max_depth < 0 or self.min_samples_leaf < 1 or self.min_samples_split < 2:
            raise ValueError(f"invalid tree parameters: {self}")


@dataclass
class Node:
    value: float
    n: int
    feature: int | None = None
    threshold: float | None = None
    left: "Node | None" = None
    right: "Node | None" = None
    default_left: bool | None = None  # route for missing values; None = unsupported

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class RegressionTree:
    root: Node
    params: TreeParams
    n_train: int

    def leaves(self) -> list[Node]:
        out, stack = [], [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack.extend((node.right, node.left))
        return out


def _subset_sse(mask: np.ndarray, y: np.ndarray, count: int) -> float:
    total = float(mask @ y)
    mean = total / count
    return float(mask @ ((y - mean) ** 2))


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    features: Sequence[int] | None = None,
    min_samples_leaf: int = 1,
) -> tuple[int, float, float] | None:
    """Highest-gain (feature, threshold, gain), or None when nothing helps."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < 2 or np.all(y == y[0]):
        return None
    if features is None:
        features = range(X.shape[1])
    ones = np.ones(n)
    sse_parent = _subset_sse(ones, y, n)
    best: tuple[int, float, float] | None = None
    for f in features:
        col = X[:, f]
        distinct = np.unique(col)
        if distinct.size < 2:
            continue
        for threshold in (distinct[:-1] + distinct[1:]) / 2.0:
            left = (col <= threshold).astype(float)
            n_left = int(left.sum())
            n_right = n - n_left
            if n_left < min_samples_leaf or n_right < min_samples_leaf:
                continue
            gain = sse_parent - _subset_sse(left, y, n_left) - _subset_sse(1.0 - left, y, n_right)
            if gain > 0 and (best is None or gain > best[2]):
                best = (int(f), float(threshold), float(gain))
    return best


def _random_split(
    X: np.ndarray,
    y: np.ndarray,
    features: Sequence[int],
    min_samples_leaf: int,
    rng: np.random.Generator,
) -> tuple[int, float, float] | None:
    """Extra-trees variant: one uniform threshold per candidate feature."""
    n = y.size
    if n < 2 or np.all(y == y[0]):
        return None
    ones = np.ones(n)
    sse_parent = _subset_sse(ones, y, n)
    best: tuple[int, float, float] | None = None
    for f in features:
        col = X[:, f]
        lo, hi = float(col.min()), float(col.max())
        if lo == hi:
            continue
        threshold = float(rng.uniform(lo, hi))
        left = (col <= threshold).astype(float)
        n_left = int(left.sum())
        n_right = n - n_left
        if n_left < min_samples_leaf or n_right < min_samples_leaf:
            continue
        gain = sse_parent - _subset_sse(left, y, n_left) - _subset_sse(1.0 - left, y, n_right)
        if gain > 0 and (best is None or gain > best[2]):
            best = (int(f), threshold, float(gain))
    return best


def _grow_node(
    X: np.ndarray,
    y: np.ndarray,
    depth: int,
    params: TreeParams,
    rng: np.random.Generator | None,
    n_feature_subset: int | None,
    random_thresholds: bool,
) -> Node:
    node = Node(value=float(np.mean(y)), n=int(y.size))
    if depth >= params.max_depth or y.size < params.min_samples_split:
        return node
    if n_feature_subset is not None:
        features = np.sort(rng.choice(X.shape[1], size=n_feature_subset, replace=False))
    else:
        features = np.arange(X.shape[1])
    if random_thresholds:
        split = _random_split(X, y, features, params.min_samples_leaf, rng)
    else:
        split = best_split(X, y, features, params.min_samples_leaf)
    if split is None:
        return node
    feature, threshold, _ = split
    mask = X[:, feature] <= threshold
    node.feature = feature
    node.threshold = threshold
    node.left = _grow_node(
        X[mask], y[mask], depth + 1, params, rng, n_feature_subset, random_thresholds
    )
    node.right = _grow_node(
        X[~mask], y[~mask], depth + 1, params, rng, n_feature_subset, random_thresholds
    )
    return node


def grow(
    X: np.ndarray,
    y: np.ndarray,
    params: TreeParams = TreeParams(),
    rng: np.random.Generator | None = None,
    n_feature_subset: int | None = None,
    random_thresholds: bool = False,
) -> RegressionTree:
    """Recursive greedy growth until depth, size, or gain stops it."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise EmptyTrainError("cannot grow a tree on an empty training set")
    root = _grow_node(X, y, 0, params, rng, n_feature_subset, random_thresholds)
    return RegressionTree(root=root, params=params, n_train=int(y.size))


def predict_tree(tree: RegressionTree, x: Sequence[float]) -> float:
    """Route one row to its leaf; x <= threshold goes left."""
    x = np.asarray(x, dtype=float)
    node = tree.root
    while not node.is_leaf:
        value = x[node.feature]
        if np.isnan(value):
            if node.default_left is None:
                raise UnsupportedMissingError(
                    "tree was grown without missing-value default directions"
                )
            node = node.left if node.default_left else node.right
        else:
            node = node.left if value <= node.threshold else node.right
    return node.value


def predict_tree_batch(tree: RegressionTree, X: np.ndarray) -> np.ndarray:
    return np.array([predict_tree(tree, row) for row in np.asarray(X, dtype=float)])


def format_tree(tree: RegressionTree, feature_names: Sequence[str] = FEATURE_NAMES) -> str:
    """Indented if/else rule dump of the fitted tree."""
    lines: list[str] = []

    def walk(node: Node, indent: int):
        pad = "  " * indent
        if node.is_leaf:
            lines.append(f"{pad}predict {node.value!r} (n={node.n})")
            return
        name = feature_names[node.feature]
        lines.append(f"{pad}if {name} <= {node.threshold!r}:")
        walk(node.left, indent + 1)
        lines.append(f"{pad}else:")
        walk(node.right, indent + 1)

    walk(tree.root, 0)
    return "\n".join(lines) + "\n"


class CartPredictor(Predictor):
    """Zoo wrapper for a single regression tree."""

    model_kind = "cart"

    def __init__(self, params: TreeParams = TreeParams()):
        super().__init__()
        self.params = params
        self.tree: RegressionTree | None = None

    def _fit(self, train: Dataset, y: np.ndarray) -> None:
        self.tree = grow(train.features_matrix, y, self.params)

    def _predict(self, x: FeatureVector) -> float:
        return predict_tree(self.tree, x.to_array())

    def dump(self) -> str:
        return format_tree(self.tree)
