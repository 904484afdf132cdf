"""Classification trees and a bagged forest, grown from scratch.

Splits minimize weighted Gini impurity. A node keeps splitting while it
is impure and any feature still separates two rows, even when the best
split leaves the weighted impurity unchanged; those zero-gain splits
are what let checkerboard patterns resolve a level deeper. Ties break
to the lowest weighted impurity, then the lowest feature index, then
the lowest threshold.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..util import rng_for
from .models import ShallowModel, _check_xy, register_model


def _best_split(Xsub: np.ndarray, ysub: np.ndarray):
    """Best (column, threshold) over the given submatrix, or None.

    Returns column indices local to Xsub; the caller maps them back to
    global feature ids. Candidate thresholds are midpoints between
    distinct consecutive sorted values; a midpoint that rounds up to
    the higher value falls back to the lower value so the right side
    stays non-empty under the `x <= threshold` test.
    """
    n = Xsub.shape[0]
    if n < 2:
        return None
    order = np.argsort(Xsub, axis=0, kind="stable")
    svals = np.take_along_axis(Xsub, order, axis=0)
    sy = ysub[order]
    prefix1 = np.cumsum(sy, axis=0)
    total1 = prefix1[-1]

    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    ones_left = prefix1[:-1]
    ones_right = total1[None, :] - ones_left
    zeros_left = n_left - ones_left
    zeros_right = n_right - ones_right
    gini_left = 1.0 - (ones_left ** 2 + zeros_left ** 2) / n_left ** 2
    gini_right = 1.0 - (ones_right ** 2 + zeros_right ** 2) / n_right ** 2
    weighted = (n_left * gini_left + n_right * gini_right) / n
    weighted[svals[:-1] >= svals[1:]] = np.inf

    flat = np.argmin(weighted.T.ravel())
    col, pos = divmod(int(flat), n - 1)
    if not np.isfinite(weighted[pos, col]):
        return None
    lo = svals[pos, col]
    hi = svals[pos + 1, col]
    thr = (lo + hi) / 2.0
    if thr >= hi:
        thr = lo
    return col, float(thr)


@register_model
class DecisionTree(ShallowModel):
    kind = "tree"

    def __init__(self, max_depth: int | None = None,
                 min_samples_split: int = 2):
        if max_depth is not None and max_depth < 0:
            raise ConfigError("max_depth must be >= 0")
        if min_samples_split < 2:
            raise ConfigError("min_samples_split must be >= 2")
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.feature: np.ndarray | None = None
        self.threshold: np.ndarray | None = None
        self.left: np.ndarray | None = None
        self.right: np.ndarray | None = None
        self.value: np.ndarray | None = None

    def fit(self, X, y, rng: np.random.Generator | None = None,
            features_per_node: int | None = None):
        """Grows the tree; a forest threads in its rng so each node can
        draw `features_per_node` candidate columns (all columns, in
        order, when that covers the whole matrix)."""
        X, y = _check_xy(X, y)
        n, n_features = X.shape
        sample_cols = (features_per_node is not None
                       and features_per_node < n_features)
        if sample_cols and rng is None:
            raise ConfigError("column sampling needs an rng")

        feature: list[int] = []
        threshold: list[float] = []
        left: list[int] = []
        right: list[int] = []
        value: list[float] = []

        def new_node() -> int:
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(0.0)
            return len(feature) - 1

        root = new_node()
        stack = [(root, np.arange(n), 0)]
        while stack:
            slot, idx, depth = stack.pop()
            ones = float(y[idx].sum())
            value[slot] = ones / idx.shape[0]
            pure = ones == 0.0 or ones == idx.shape[0]
            capped = self.max_depth is not None and depth >= self.max_depth
            if pure or capped or idx.shape[0] < self.min_samples_split:
                continue
            if sample_cols:
                cols = np.sort(rng.choice(
                    n_features, size=features_per_node, replace=False))
            else:
                cols = np.arange(n_features)
            found = _best_split(X[np.ix_(idx, cols)], y[idx])
            if found is None:
                continue
            col, thr = found
            feat = int(cols[col])
            goes_left = X[idx, feat] <= thr
            feature[slot] = feat
            threshold[slot] = thr
            left[slot] = new_node()
            right[slot] = new_node()
            # push right first so the left subtree is grown first
            stack.append((right[slot], idx[~goes_left], depth + 1))
            stack.append((left[slot], idx[goes_left], depth + 1))

        self.feature = np.array(feature, dtype=np.int64)
        self.threshold = np.array(threshold, dtype=np.float64)
        self.left = np.array(left, dtype=np.int64)
        self.right = np.array(right, dtype=np.int64)
        self.value = np.array(value, dtype=np.float64)
        return self

    def predict_score(self, X):
        if self.feature is None:
            raise ConfigError("model is not fitted")
        X = np.asarray(X, dtype=np.float64)
        scores = np.empty(X.shape[0])
        for i, row in enumerate(X):
            node = 0
            while self.feature[node] >= 0:
                if row[self.feature[node]] <= self.threshold[node]:
                    node = self.left[node]
                else:
                    node = self.right[node]
            scores[i] = self.value[node]
        return scores

    @property
    def node_count(self) -> int:
        return 0 if self.feature is None else self.feature.shape[0]

    def depth(self) -> int:
        if self.feature is None:
            return 0
        best = 0
        stack = [(0, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if self.feature[node] >= 0:
                stack.append((self.left[node], d + 1))
                stack.append((self.right[node], d + 1))
        return best

    def _meta(self):
        return {"max_depth": self.max_depth,
                "min_samples_split": self.min_samples_split}

    def _blocks(self):
        if self.feature is None:
            raise ConfigError("cannot save an unfitted model")
        return [self.feature.astype(np.float64), self.threshold,
                self.left.astype(np.float64), self.right.astype(np.float64),
                self.value]

    @classmethod
    def _from(cls, meta, blocks):
        model = cls(meta["max_depth"], meta["min_samples_split"])
        model.feature = blocks[0].astype(np.int64)
        model.threshold = blocks[1]
        model.left = blocks[2].astype(np.int64)
        model.right = blocks[3].astype(np.int64)
        model.value = blocks[4]
        return model


@register_model
class RandomForest(ShallowModel):
    """Bagged trees voting by majority; the score is the vote fraction.

    Each tree draws its own bootstrap sample and, at every node, a
    floor(sqrt(features)) column subset, from a generator keyed by the
    forest seed and the tree index.
    """

    kind = "forest"

    def __init__(self, n_trees: int = 100, max_depth: int | None = None,
                 min_samples_split: int = 2, bootstrap: bool = True,
                 features_per_node: int | None = None, seed: int = 0):
        if n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.bootstrap = bootstrap
        self.features_per_node = features_per_node
        self.seed = seed
        self.trees: list[DecisionTree] = []

    def fit(self, X, y):
        X, y = _check_xy(X, y)
        n, n_features = X.shape
        m = self.features_per_node
        if m is None:
            m = max(1, int(np.sqrt(n_features)))
        self.trees = []
        for t in range(self.n_trees):
            rng = rng_for(self.seed, "tree", t)
            if self.bootstrap:
                idx = rng.integers(0, n, size=n)
            else:
                idx = np.arange(n)
            tree = DecisionTree(self.max_depth, self.min_samples_split)
            tree.fit(X[idx], y[idx], rng=rng, features_per_node=m)
            self.trees.append(tree)
        return self

    def predict_score(self, X):
        if not self.trees:
            raise ConfigError("model is not fitted")
        X = np.asarray(X, dtype=np.float64)
        votes = np.zeros(X.shape[0])
        for tree in self.trees:
            votes += tree.predict(X)
        return votes / self.n_trees

    def _meta(self):
        return {"n_trees": self.n_trees, "max_depth": self.max_depth,
                "min_samples_split": self.min_samples_split,
                "bootstrap": self.bootstrap,
                "features_per_node": self.features_per_node,
                "seed": self.seed,
                "tree_sizes": [t.node_count for t in self.trees]}

    def _blocks(self):
        if not self.trees:
            raise ConfigError("cannot save an unfitted model")
        blocks = []
        for tree in self.trees:
            blocks.extend(tree._blocks())
        return blocks

    @classmethod
    def _from(cls, meta, blocks):
        model = cls(meta["n_trees"], meta["max_depth"],
                    meta["min_samples_split"], meta["bootstrap"],
                    meta["features_per_node"], meta["seed"])
        if len(blocks) != 5 * len(meta["tree_sizes"]):
            raise ConfigError("forest checkpoint block count mismatch")
        for t in range(len(meta["tree_sizes"])):
            tree = DecisionTree(meta["max_depth"], meta["min_samples_split"])
            chunk = blocks[5 * t:5 * t + 5]
            model.trees.append(DecisionTree._from(tree._meta(), chunk))
        return model
