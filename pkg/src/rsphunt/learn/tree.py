"""Gini decision trees and bootstrap tree ensembles, written from scratch on numpy.

Both estimators follow the scikit-learn estimator protocol (``get_params``,
``fit``, ``predict_proba``, ``predict``) so they drop into pipelines and
model-selection utilities, but the tree induction itself is implemented here.

Split search details:

* impurity is weighted Gini; a node is split by the candidate minimising the
  weighted sum of child impurities, ties broken by lowest feature index, then
  lowest threshold;
* thresholds are midpoints between consecutive distinct values, and samples
  with ``x <= threshold`` go left;
* ``max_features`` features are drawn per split among the features that are
  not constant within the node;
* trees grow until leaves are pure or hold a single distinct sample.
"""

from __future__ import annotations

import math
import numbers

import numpy as np
import scipy.sparse as sp
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..errors import DegenerateDatasetError, DimensionMismatchError

FORMAT_NAME = "rsphunt.tree_ensemble"
FORMAT_VERSION = 1
_COST_RTOL = 1e-10


class Tree:
    """Array-backed binary tree. ``feature[i] == -1`` marks a leaf."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self, feature, threshold, left, right, value):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.float64)

    @property
    def node_count(self) -> int:
        return len(self.feature)

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row of ``X``."""
        n = X.shape[0]
        node = np.zeros(n, dtype=np.int64)
        active = np.arange(n)
        while active.size:
            f = self.feature[node[active]]
            internal = f >= 0
            active = active[internal]
            if not active.size:
                break
            f = f[internal]
            cur = node[active]
            if sp.issparse(X):
                vals = np.asarray(X[active, f]).ravel()
            else:
                vals = X[active, f]
            node[active] = np.where(vals <= self.threshold[cur], self.left[cur], self.right[cur])
        return node

    def predict_proba(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Tree:
        return cls(d["feature"], d["threshold"], d["left"], d["right"], d["value"])


def _resolve_max_features(max_features, n_features: int) -> int:
    if max_features is None:
        return n_features
    if isinstance(max_features, str):
        if max_features == "sqrt":
            return max(1, int(math.sqrt(n_features)))
        if max_features == "log2":
            return max(1, int(math.log2(n_features)))
        raise ValueError(f"unknown max_features {max_features!r}")
    if isinstance(max_features, numbers.Integral):
        if max_features < 1:
            raise ValueError("max_features must be >= 1")
        return min(int(max_features), n_features)
    if isinstance(max_features, numbers.Real) and 0.0 < max_features <= 1.0:
        return max(1, int(max_features * n_features))
    raise ValueError(f"invalid max_features {max_features!r}")


def _node_candidates(X, idx, n_pick, rng):
    """Non-constant features at the node, subsampled to ``n_pick``; returns (features, dense columns)."""
    if sp.issparse(X):
        sub = X[idx]
        nnz = np.bincount(sub.indices, minlength=X.shape[1])
        cand = np.nonzero(nnz)[0]
        # a column with an implicit zero at the node varies unless it is all non-zero
        full = cand[nnz[cand] == idx.size]
        if full.size:
            block = sub[:, full].toarray()
            constant = full[block.min(axis=0) == block.max(axis=0)]
            cand = np.setdiff1d(cand, constant, assume_unique=True)
        if cand.size > n_pick:
            cand = cand[np.sort(rng.choice(cand.size, size=n_pick, replace=False))]
        if cand.size == 0:
            return cand, None
        return cand, sub[:, cand].toarray()
    cand = np.arange(X.shape[1])
    dense = X[idx]
    varying = dense.min(axis=0) != dense.max(axis=0)
    cand, dense = cand[varying], dense[:, varying]
    if cand.size > n_pick:
        pos = np.sort(rng.choice(cand.size, size=n_pick, replace=False))
        cand, dense = cand[pos], dense[:, pos]
    return cand, dense


def _best_split(cols, features, yw):
    """Best (feature, threshold) over the given dense columns, or None."""
    n = cols.shape[0]
    order = np.argsort(cols, axis=0, kind="stable")
    vals = np.take_along_axis(cols, order, axis=0)
    cum = np.cumsum(yw[order], axis=0)  # (n, k, C)
    total = cum[-1]
    left = cum[:-1]
    right = total[None, :, :] - left
    wl = left.sum(axis=-1)
    wr = right.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cost = (wl - (left ** 2).sum(axis=-1) / wl) + (wr - (right ** 2).sum(axis=-1) / wr)
    valid = (vals[1:] > vals[:-1]) & (wl > 0) & (wr > 0)
    if n < 2 or not valid.any():
        return None
    cost = np.where(valid, cost, np.inf)
    best = cost.min()
    tol = _COST_RTOL * max(1.0, float(total[0].sum()))
    pos, col = np.nonzero(cost <= best + tol)
    thresholds = (vals[pos, col] + vals[pos + 1, col]) / 2.0
    # guard against midpoints rounding up onto the right-hand value
    thresholds = np.where(thresholds >= vals[pos + 1, col], vals[pos, col], thresholds)
    feats = features[col]
    pick = np.lexsort((thresholds, feats))[0]
    return int(feats[pick]), float(thresholds[pick])


def build_tree(X, y_idx, weights, n_classes, max_features, rng) -> Tree:
    """Grow one tree on rows with positive weight. ``y_idx`` holds class indices."""
    n_pick = _resolve_max_features(max_features, X.shape[1])
    yw = np.zeros((X.shape[0], n_classes))
    yw[np.arange(X.shape[0]), y_idx] = weights

    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        dist = yw[idx].sum(axis=0)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(dist / dist.sum())
        return len(feature) - 1

    root_idx = np.nonzero(weights > 0)[0]
    stack = [(new_node(root_idx), root_idx)]
    while stack:
        node, idx = stack.pop()
        if idx.size < 2 or np.count_nonzero(value[node]) < 2:
            continue
        features, cols = _node_candidates(X, idx, n_pick, rng)
        if features.size == 0:
            continue
        split = _best_split(cols, features, yw[idx])
        if split is None:
            continue
        f, thr = split
        go_left = cols[:, np.nonzero(features == f)[0][0]] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        # right pushed first so the left subtree is expanded first (stable node numbering)
        stack.append((right[node], ri))
        stack.append((left[node], li))
    return Tree(feature, threshold, left, right, np.vstack(value))


def _class_weights(class_weight, y_idx, n_classes) -> np.ndarray:
    if class_weight is None:
        return np.ones(n_classes)
    if class_weight == "balanced":
        counts = np.bincount(y_idx, minlength=n_classes).astype(float)
        return len(y_idx) / (n_classes * counts)
    if isinstance(class_weight, dict):
        raise ValueError("dict class weights are not supported; use None or 'balanced'")
    raise ValueError(f"invalid class_weight {class_weight!r}")


class _TreeClassifierBase(ClassifierMixin, BaseEstimator):
    def _validate_fit(self, X, y):
        X = check_array(X, accept_sparse="csr", dtype=np.float64)
        y = np.asarray(y)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DimensionMismatchError(f"X has {X.shape[0]} rows but y has shape {y.shape}")
        classes, y_idx = np.unique(y, return_inverse=True)
        if classes.size < 2:
            raise DegenerateDatasetError(
                f"training data holds a single class ({classes.tolist()}); at least two are required"
            )
        self.classes_ = classes
        self.n_features_in_ = X.shape[1]
        return X, y_idx

    def _check_X(self, X):
        check_is_fitted(self, "trees_")
        X = check_array(X, accept_sparse="csr", dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatchError(
                f"model expects {self.n_features_in_} features, got {X.shape[1]}"
            )
        return X

    def predict_proba(self, X) -> np.ndarray:
        """Mean of the leaf class distributions across trees, shape (n, n_classes)."""
        X = self._check_X(X)
        proba = np.zeros((X.shape[0], len(self.classes_)))
        for tree in self.trees_:
            proba += tree.predict_proba(X)
        return proba / len(self.trees_)

    def positive_proba(self, X) -> np.ndarray:
        """Probability of the positive class for binary models."""
        if len(self.classes_) != 2:
            raise ValueError("positive_proba is defined for binary models only")
        return self.predict_proba(X)[:, self._pos_index()]

    def _pos_index(self) -> int:
        pos_label = getattr(self, "pos_label", None)
        if pos_label is None:
            return len(self.classes_) - 1
        matches = np.nonzero(self.classes_ == pos_label)[0]
        if not matches.size:
            raise ValueError(f"pos_label {pos_label!r} not among classes {self.classes_.tolist()}")
        return int(matches[0])

    def predict(self, X) -> np.ndarray:
        proba = self.predict_proba(X)
        if len(self.classes_) == 2:
            pos = self._pos_index()
            positive = proba[:, pos] >= self.decision_threshold
            return np.where(positive, self.classes_[pos], self.classes_[1 - pos])
        return self.classes_[np.argmax(proba, axis=1)]

    def validate(self) -> None:
        """Check structural invariants of the fitted trees."""
        check_is_fitted(self, "trees_")
        for tree in self.trees_:
            internal = tree.feature >= 0
            if np.any(tree.feature[internal] >= self.n_features_in_):
                raise ValueError("split feature index out of range")
            leaves = tree.value[~internal]
            if not np.allclose(leaves.sum(axis=1), 1.0, atol=1e-9, rtol=0):
                raise ValueError("leaf distribution does not sum to 1")

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        check_is_fitted(self, "trees_")
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "estimator": type(self).__name__,
            "params": _jsonable(self.get_params()),
            "classes": self.classes_.tolist(),
            "n_features": int(self.n_features_in_),
            "feature_order": list(self.feature_order) if self.feature_order else None,
            "trees": [t.to_dict() for t in self.trees_],
        }

    @classmethod
    def from_dict(cls, d: dict):
        if d.get("format") != FORMAT_NAME:
            raise ValueError(f"not a serialized tree ensemble: format={d.get('format')!r}")
        if d.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model version {d.get('version')!r}")
        est_cls = _ESTIMATORS[d["estimator"]]
        params = dict(d["params"])
        if params.get("feature_order") is not None:
            params["feature_order"] = tuple(params["feature_order"])
        model = est_cls(**params)
        model.classes_ = np.asarray(d["classes"])
        model.n_features_in_ = d["n_features"]
        model.trees_ = [Tree.from_dict(t) for t in d["trees"]]
        return model


def _jsonable(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if isinstance(v, tuple):
            v = list(v)
        elif isinstance(v, np.generic):
            v = v.item()
        out[k] = v
    return out


class DecisionTreeClassifier(_TreeClassifierBase):
    """Single Gini tree (splitter=best, unlimited depth, min_samples_split=2, min_samples_leaf=1)."""

    def __init__(
        self,
        max_features=None,
        class_weight=None,
        decision_threshold: float = 0.5,
        pos_label=None,
        feature_order=None,
        random_state=None,
    ):
        self.max_features = max_features
        self.class_weight = class_weight
        self.decision_threshold = decision_threshold
        self.pos_label = pos_label
        self.feature_order = feature_order
        self.random_state = random_state

    def fit(self, X, y, sample_weight=None):
        X, y_idx = self._validate_fit(X, y)
        n_classes = len(self.classes_)
        w = _class_weights(self.class_weight, y_idx, n_classes)[y_idx]
        if sample_weight is not None:
            w = w * np.asarray(sample_weight, dtype=float)
        rng = np.random.default_rng(self.random_state)
        self.trees_ = [build_tree(X, y_idx, w, n_classes, self.max_features, rng)]
        return self


class TreeEnsembleClassifier(_TreeClassifierBase):
    """Bagged Gini trees with per-split feature subsampling (a random forest).

    Defaults follow the binary IPT classifier: 91 trees, one candidate feature
    per split, bootstrap samples the size of the training set.
    """

    def __init__(
        self,
        n_estimators: int = 91,
        max_features=1,
        bootstrap: bool = True,
        class_weight=None,
        decision_threshold: float = 0.5,
        pos_label=None,
        feature_order=None,
        random_state=None,
        n_jobs=None,
    ):
        self.n_estimators = n_estimators
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.class_weight = class_weight
        self.decision_threshold = decision_threshold
        self.pos_label = pos_label
        self.feature_order = feature_order
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y, sample_weight=None):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if not 0.0 <= self.decision_threshold <= 1.0:
            raise ValueError("decision_threshold must lie in [0, 1]")
        X, y_idx = self._validate_fit(X, y)
        n_classes = len(self.classes_)
        base_w = _class_weights(self.class_weight, y_idx, n_classes)[y_idx]
        if sample_weight is not None:
            base_w = base_w * np.asarray(sample_weight, dtype=float)
        seeds = np.random.SeedSequence(self.random_state).spawn(self.n_estimators)
        n = X.shape[0]

        def fit_one(seed):
            rng = np.random.default_rng(seed)
            if self.bootstrap:
                counts = np.bincount(rng.integers(0, n, size=n), minlength=n)
                w = base_w * counts
            else:
                w = base_w
            return build_tree(X, y_idx, w, n_classes, self.max_features, rng)

        if self.n_jobs in (None, 1):
            self.trees_ = [fit_one(s) for s in seeds]
        else:
            self.trees_ = Parallel(n_jobs=self.n_jobs)(delayed(fit_one)(s) for s in seeds)
        return self


_ESTIMATORS = {c.__name__: c for c in (DecisionTreeClassifier, TreeEnsembleClassifier)}


def train_tree_ensemble(samples, params: dict | None = None, seed=None) -> TreeEnsembleClassifier:
    """Fit an ensemble on ``[(feature_vector, class), ...]``."""
    samples = list(samples)
    if not samples:
        raise DegenerateDatasetError("no training samples")
    dims = {len(x) for x, _ in samples}
    if len(dims) != 1:
        raise DimensionMismatchError(f"feature vectors have mixed dimensions {sorted(dims)}")
    X = np.asarray([x for x, _ in samples], dtype=np.float64)
    y = np.asarray([c for _, c in samples])
    params = dict(params or {})
    if seed is not None:
        params["random_state"] = seed
    return TreeEnsembleClassifier(**params).fit(X, y)


def predict_proba(model: _TreeClassifierBase, features) -> np.ndarray:
    """Class distribution(s) for one feature vector or a 2-D batch."""
    X = np.asarray(features, dtype=np.float64)
    single = X.ndim == 1
    proba = model.predict_proba(X.reshape(1, -1) if single else X)
    return proba[0] if single else proba
