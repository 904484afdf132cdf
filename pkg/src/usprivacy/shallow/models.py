"""Shallow classifiers trained from scratch on dense feature matrices.

Every model exposes fit(X, y), predict_score(X) returning a float in
[0, 1] per row, and predict(X) thresholding at score > 0.5 (an exact
0.5 goes to class 0). Models persist through the shared checkpoint
container; load_model dispatches on the stored kind.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, DataError
from ..neuralkit import MAGIC_MODEL, read_container, write_container
from ..util import rng_for, sigmoid


class ShallowModel:
    kind = "model"

    def fit(self, X: np.ndarray, y: np.ndarray) -> "ShallowModel":
        raise NotImplementedError

    def predict_score(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_score(X) > 0.5).astype(np.int64)

    def _meta(self) -> dict:
        return {}

    def _blocks(self) -> list[np.ndarray]:
        return []

    @classmethod
    def _from(cls, meta: dict, blocks: list[np.ndarray]) -> "ShallowModel":
        raise NotImplementedError

    def save(self, path) -> None:
        meta = {"kind": self.kind, **self._meta()}
        write_container(path, MAGIC_MODEL, meta, self._blocks())


MODEL_REGISTRY: dict[str, type[ShallowModel]] = {}


def register_model(cls: type[ShallowModel]) -> type[ShallowModel]:
    MODEL_REGISTRY[cls.kind] = cls
    return cls


def load_model(path) -> ShallowModel:
    meta, blocks = read_container(path, MAGIC_MODEL)
    kind = meta.get("kind")
    if kind not in MODEL_REGISTRY:
        raise DataError(f"checkpoint holds unknown model kind {kind!r}")
    return MODEL_REGISTRY[kind]._from(meta, blocks)


def _check_xy(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise DataError(f"feature matrix must be rank 2, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise DataError(
            f"labels shape {y.shape} does not match {X.shape[0]} rows"
        )
    if X.shape[0] == 0:
        raise DataError("cannot fit on an empty matrix")
    if not np.isin(y, (0.0, 1.0)).all():
        raise DataError("labels must be 0 or 1")
    return X, y


def _fit_standardizer(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature mean and deviation; constant features get deviation 1
    so they standardize to exactly zero instead of dividing by zero."""
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    return mu, np.where(sd > 0.0, sd, 1.0)


@register_model
class LogisticRegression(ShallowModel):
    """Ridge-penalized logistic regression by full-batch gradient descent.

    Inputs are standardized per feature with statistics taken at fit
    time; gradient descent on the raw scales stalls whenever features
    live on scales far from one (category fractions sit near 0.05).

    The step size 1 / (0.25 * (max row norm^2 + 1) + lambda) bounds the
    gradient's Lipschitz constant (the +1 covers the intercept), so
    descent never overshoots. Stops early when the gradient norm falls
    below tol.
    """

    kind = "logreg"

    def __init__(self, lambda_: float = 1e-4, max_iter: int = 1000,
                 tol: float = 1e-6):
        if lambda_ < 0:
            raise ConfigError("lambda_ must be >= 0")
        self.lambda_ = lambda_
        self.max_iter = max_iter
        self.tol = tol
        self.w: np.ndarray | None = None
        self.b = 0.0
        self.mu: np.ndarray | None = None
        self.sd: np.ndarray | None = None

    def _transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mu) / self.sd

    def fit(self, X, y):
        X, y = _check_xy(X, y)
        self.mu, self.sd = _fit_standardizer(X)
        X = self._transform(X)
        n, d = X.shape
        w = np.zeros(d)
        b = 0.0
        row_sq = (X * X).sum(axis=1).max() if n else 0.0
        step = 1.0 / (0.25 * (row_sq + 1.0) + self.lambda_)
        for _ in range(self.max_iter):
            p = sigmoid(X @ w + b)
            err = (p - y) / n
            gw = X.T @ err + self.lambda_ * w
            gb = err.sum()
            gnorm = np.sqrt((gw * gw).sum() + gb * gb)
            if gnorm < self.tol:
                break
            w -= step * gw
            b -= step * gb
        self.w, self.b = w, float(b)
        return self

    def loss(self, X, y) -> float:
        """Mean BCE plus the ridge term over the standardized inputs;
        the quantity fit() descends."""
        X, y = _check_xy(X, y)
        if self.mu is not None:
            X = self._transform(X)
        w = self.w if self.w is not None else np.zeros(X.shape[1])
        p = np.clip(sigmoid(X @ w + self.b), 1e-12, 1 - 1e-12)
        bce = -np.mean(y * np.log(p) + (1 - y) * np.log(1 - p))
        return float(bce + 0.5 * self.lambda_ * (w * w).sum())

    def predict_score(self, X):
        if self.w is None:
            raise ConfigError("model is not fitted")
        X = self._transform(np.asarray(X, dtype=np.float64))
        return sigmoid(X @ self.w + self.b)

    def _meta(self):
        return {"lambda_": self.lambda_, "max_iter": self.max_iter,
                "tol": self.tol, "b": self.b}

    def _blocks(self):
        if self.w is None:
            raise ConfigError("cannot save an unfitted model")
        return [self.w, self.mu, self.sd]

    @classmethod
    def _from(cls, meta, blocks):
        model = cls(meta["lambda_"], meta["max_iter"], meta["tol"])
        model.w, model.mu, model.sd = blocks
        model.b = meta["b"]
        return model


@register_model
class LinearSVM(ShallowModel):
    """Primal linear SVM trained with the Pegasos subgradient method,
    with standardized inputs, a bounded step size, and final-epoch
    iterate averaging.

    Inputs are standardized per feature with statistics taken at fit
    time; hinge margins on raw scales force the weights toward the
    1/sqrt(lambda) norm cap when features live near 0.05.

    The textbook 1/(lambda*t) step starts enormous for small lambda and
    can park the unregularised bias somewhere the data never recovers
    from, so the step is capped at 1; averaging the last epoch's
    iterates smooths the subgradient noise on small feature sets.

    Scores squash the margin, scaled by the weight norm, through a
    sigmoid so they live in [0, 1] like every other model's scores.
    """

    kind = "svm"

    def __init__(self, lambda_: float = 1e-4, epochs: int = 20, seed: int = 0):
        if lambda_ <= 0:
            raise ConfigError("lambda_ must be > 0")
        if epochs < 1:
            raise ConfigError("epochs must be >= 1")
        self.lambda_ = lambda_
        self.epochs = epochs
        self.seed = seed
        self.w: np.ndarray | None = None
        self.b = 0.0
        self.mu: np.ndarray | None = None
        self.sd: np.ndarray | None = None

    def _transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mu) / self.sd

    def fit(self, X, y):
        X, y = _check_xy(X, y)
        self.mu, self.sd = _fit_standardizer(X)
        X = self._transform(X)
        n, d = X.shape
        sign = 2.0 * y - 1.0
        w = np.zeros(d)
        b = 0.0
        t = 0
        w_sum = np.zeros(d)
        b_sum = 0.0
        kept = 0
        last = self.epochs - 1
        for epoch in range(self.epochs):
            order = rng_for(self.seed, "epoch", epoch).permutation(n)
            for i in order:
                t += 1
                eta = 1.0 / (self.lambda_ * t + 1.0)
                margin = sign[i] * (X[i] @ w + b)
                w *= 1.0 - eta * self.lambda_
                if margin < 1.0:
                    w += eta * sign[i] * X[i]
                    b += eta * sign[i]
                if epoch == last:
                    w_sum += w
                    b_sum += b
                    kept += 1
        self.w, self.b = w_sum / kept, float(b_sum / kept)
        return self

    def predict_score(self, X):
        if self.w is None:
            raise ConfigError("model is not fitted")
        X = self._transform(np.asarray(X, dtype=np.float64))
        scale = max(float(np.sqrt((self.w * self.w).sum())), 1e-12)
        return sigmoid((X @ self.w + self.b) / scale)

    def _meta(self):
        return {"lambda_": self.lambda_, "epochs": self.epochs,
                "seed": self.seed, "b": self.b}

    def _blocks(self):
        if self.w is None:
            raise ConfigError("cannot save an unfitted model")
        return [self.w, self.mu, self.sd]

    @classmethod
    def _from(cls, meta, blocks):
        model = cls(meta["lambda_"], meta["epochs"], meta["seed"])
        model.w, model.mu, model.sd = blocks
        model.b = meta["b"]
        return model


@register_model
class GaussianNaiveBayes(ShallowModel):
    """Per-class independent Gaussians with additive variance smoothing.

    Every class variance gets 1e-3 times the largest overall feature
    variance added (1e-3 outright when the data is constant), so
    zero-variance features never divide by zero. The floor is deliberately
    coarse: a feature that is constant inside one class but not the other
    must not turn into a near-delta spike whose log-likelihood swamps
    every informative dimension.
    """

    kind = "gnb"

    SMOOTHING = 1e-3

    def __init__(self):
        self.priors: np.ndarray | None = None
        self.means: np.ndarray | None = None
        self.variances: np.ndarray | None = None

    def fit(self, X, y):
        X, y = _check_xy(X, y)
        eps = self.SMOOTHING * float(X.var(axis=0).max())
        if eps == 0.0:
            eps = self.SMOOTHING
        priors = np.zeros(2)
        means = np.zeros((2, X.shape[1]))
        variances = np.full((2, X.shape[1]), eps)
        for c in (0, 1):
            rows = X[y == c]
            priors[c] = rows.shape[0] / X.shape[0]
            if rows.shape[0]:
                means[c] = rows.mean(axis=0)
                variances[c] = rows.var(axis=0) + eps
        self.priors, self.means, self.variances = priors, means, variances
        return self

    def _log_joint(self, X):
        X = np.asarray(X, dtype=np.float64)
        out = np.full((X.shape[0], 2), -np.inf)
        for c in (0, 1):
            if self.priors[c] == 0.0:
                continue
            diff = X - self.means[c]
            ll = -0.5 * (np.log(2.0 * np.pi * self.variances[c])
                         + diff * diff / self.variances[c]).sum(axis=1)
            out[:, c] = np.log(self.priors[c]) + ll
        return out

    def predict_score(self, X):
        if self.priors is None:
            raise ConfigError("model is not fitted")
        joint = self._log_joint(X)
        if self.priors[0] == 0.0:
            return np.ones(joint.shape[0])
        if self.priors[1] == 0.0:
            return np.zeros(joint.shape[0])
        top = joint.max(axis=1, keepdims=True)
        shifted = np.exp(joint - top)
        return shifted[:, 1] / shifted.sum(axis=1)

    def _meta(self):
        return {}

    def _blocks(self):
        if self.priors is None:
            raise ConfigError("cannot save an unfitted model")
        return [self.priors, self.means, self.variances]

    @classmethod
    def _from(cls, meta, blocks):
        model = cls()
        model.priors, model.means, model.variances = blocks
        return model


@register_model
class KNearestNeighbors(ShallowModel):
    """Exact k-nearest-neighbor voting by squared euclidean distance.

    Neighbor order is a stable sort of the distances, so equal
    distances resolve to the lower training-row index. The score is the
    positive fraction among the k neighbors.
    """

    kind = "knn"

    def __init__(self, k: int = 5):
        if k < 1:
            raise ConfigError("k must be >= 1")
        self.k = k
        self.X: np.ndarray | None = None
        self.y: np.ndarray | None = None

    def fit(self, X, y):
        self.X, self.y = _check_xy(X, y)
        return self

    def predict_score(self, X):
        if self.X is None:
            raise ConfigError("model is not fitted")
        X = np.asarray(X, dtype=np.float64)
        k = min(self.k, self.X.shape[0])
        scores = np.empty(X.shape[0])
        for i, row in enumerate(X):
            d2 = ((self.X - row) ** 2).sum(axis=1)
            nearest = np.argsort(d2, kind="stable")[:k]
            scores[i] = self.y[nearest].mean()
        return scores

    def _meta(self):
        return {"k": self.k}

    def _blocks(self):
        if self.X is None:
            raise ConfigError("cannot save an unfitted model")
        return [self.X, self.y]

    @classmethod
    def _from(cls, meta, blocks):
        model = cls(meta["k"])
        model.X, model.y = blocks
        return model
