"""One-vs-rest multi-label category classifier over hashed character n-grams.

Input features are hashed character 1-3-gram counts (2**15 buckets) with the
seven binary-IPT features appended. Each label gets its own tree ensemble.
"""

from __future__ import annotations

from collections import Counter
from typing import Hashable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.feature_extraction.text import HashingVectorizer
from sklearn.utils.validation import check_is_fitted

from ..errors import DegenerateDatasetError, InsufficientLabelSupportError
from ..records import CategoryLabel
from ..textfeat import BinaryIptFeaturizer
from .tree import TreeEnsembleClassifier

FORMAT_NAME = "rsphunt.multilabel"
FORMAT_VERSION = 1


def _label_key(label) -> str:
    return label.value if isinstance(label, CategoryLabel) else str(label)


def _restore_label(value: str):
    try:
        return CategoryLabel(value)
    except ValueError:
        return value


class CharNgramFeaturizer(BaseEstimator):
    """Hashed char n-gram counts concatenated with the binary IPT features (CSR output)."""

    def __init__(self, hash_dim: int = 2**15, ngram_range=(1, 3)):
        self.hash_dim = hash_dim
        self.ngram_range = ngram_range

    def fit(self, X=None, y=None):
        if self.hash_dim <= 0 or self.hash_dim & (self.hash_dim - 1):
            raise ValueError(f"hash_dim must be a power of two, got {self.hash_dim}")
        return self

    def transform(self, texts) -> sp.csr_matrix:
        hasher = HashingVectorizer(
            analyzer="char",
            ngram_range=tuple(self.ngram_range),
            n_features=self.hash_dim,
            alternate_sign=False,
            norm=None,
            lowercase=True,
        )
        grams = hasher.transform(texts)
        dense = sp.csr_matrix(BinaryIptFeaturizer().fit().transform(texts))
        return sp.hstack([grams, dense], format="csr", dtype=np.float64)

    @property
    def n_features(self) -> int:
        return self.hash_dim + len(BinaryIptFeaturizer.feature_names)


class MultiLabelIptClassifier(ClassifierMixin, BaseEstimator):
    """Assigns each text one or more category labels.

    A label is predicted when its ensemble's positive probability reaches
    ``threshold``; a text with no such label gets the single highest-scoring
    one. If both ``Benign`` and illicit labels pass, ``Benign`` is dropped.
    """

    def __init__(
        self,
        labels: Sequence[Hashable] | None = None,
        n_estimators: int = 25,
        max_features="sqrt",
        class_weight="balanced",
        threshold: float = 0.5,
        hash_dim: int = 2**15,
        ngram_range=(1, 3),
        min_df: int = 2,
        min_label_support: int = 5,
        random_state=None,
        n_jobs=None,
    ):
        self.labels = labels
        self.n_estimators = n_estimators
        self.max_features = max_features
        self.class_weight = class_weight
        self.threshold = threshold
        self.hash_dim = hash_dim
        self.ngram_range = ngram_range
        self.min_df = min_df
        self.min_label_support = min_label_support
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _featurizer(self) -> CharNgramFeaturizer:
        return CharNgramFeaturizer(self.hash_dim, self.ngram_range).fit()

    def fit(self, texts: Sequence[str], label_sets: Sequence[Iterable[Hashable]]):
        texts = list(texts)
        label_sets = [frozenset(s) for s in label_sets]
        if len(texts) != len(label_sets):
            raise ValueError("texts and label_sets differ in length")
        support = Counter(label for s in label_sets for label in s)
        if self.labels is not None:
            labels = list(self.labels)
        else:
            order = {lab: i for i, lab in enumerate(CategoryLabel)}
            labels = sorted(support, key=lambda lab: (order.get(lab, len(order)), _label_key(lab)))
        for label in labels:
            if support.get(label, 0) < self.min_label_support:
                raise InsufficientLabelSupportError(_label_key(label), support.get(label, 0), self.min_label_support)
            if support[label] == len(texts):
                raise DegenerateDatasetError(f"label {_label_key(label)!r} is present on every sample")

        X = self._featurizer().transform(texts)
        df = np.bincount(X.indices, minlength=X.shape[1])
        active = np.nonzero(df >= self.min_df)[0]
        self.active_columns_ = active
        Xa = X[:, active]
        seeds = np.random.SeedSequence(self.random_state).generate_state(len(labels))
        self.estimators_ = []
        for label, seed in zip(labels, seeds):
            y = np.array([label in s for s in label_sets], dtype=int)
            est = TreeEnsembleClassifier(
                n_estimators=self.n_estimators,
                max_features=self.max_features,
                class_weight=self.class_weight,
                decision_threshold=self.threshold,
                pos_label=1,
                random_state=int(seed),
                n_jobs=self.n_jobs,
            ).fit(Xa, y)
            self.estimators_.append(est)
        self.labels_ = labels
        return self

    def _features(self, texts) -> sp.csr_matrix:
        check_is_fitted(self, "estimators_")
        return self._featurizer().transform(list(texts))[:, self.active_columns_]

    def decision_scores(self, texts: Sequence[str]) -> np.ndarray:
        """Positive-class probability per label, shape (n_texts, n_labels)."""
        X = self._features(texts)
        if X.shape[0] == 0:
            return np.zeros((0, len(self.labels_)))
        return np.column_stack([est.positive_proba(X) for est in self.estimators_])

    def predict(self, texts: Sequence[str]) -> list[frozenset]:
        scores = self.decision_scores(texts)
        out = []
        for row in scores:
            chosen = [lab for lab, s in zip(self.labels_, row) if s >= self.threshold]
            if not chosen:
                chosen = [self.labels_[int(np.argmax(row))]]
            if CategoryLabel.BENIGN in chosen and len(chosen) > 1:
                chosen = [lab for lab in chosen if lab != CategoryLabel.BENIGN]
            out.append(frozenset(chosen))
        return out

    def classify(self, text: str) -> frozenset:
        """``text -> label set``; the contract other modules depend on."""
        return self.predict([text])[0]

    def to_dict(self) -> dict:
        check_is_fitted(self, "estimators_")
        params = self.get_params()
        params["labels"] = None
        params["ngram_range"] = list(self.ngram_range)
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "params": params,
            "labels": [_label_key(lab) for lab in self.labels_],
            "active_columns": self.active_columns_.tolist(),
            "estimators": [est.to_dict() for est in self.estimators_],
        }

    @classmethod
    def from_dict(cls, d: dict) -> MultiLabelIptClassifier:
        if d.get("format") != FORMAT_NAME or d.get("version") != FORMAT_VERSION:
            raise ValueError("not a serialized multi-label model of a supported version")
        params = dict(d["params"])
        params["ngram_range"] = tuple(params["ngram_range"])
        model = cls(**params)
        model.labels_ = [_restore_label(v) for v in d["labels"]]
        model.labels = None
        model.active_columns_ = np.asarray(d["active_columns"], dtype=np.int64)
        model.estimators_ = [TreeEnsembleClassifier.from_dict(e) for e in d["estimators"]]
        return model


def train_multilabel(corpus: Iterable[tuple[str, Iterable[Hashable]]], labels=None, **params) -> MultiLabelIptClassifier:
    corpus = list(corpus)
    texts = [t for t, _ in corpus]
    sets = [frozenset(s) for _, s in corpus]
    return MultiLabelIptClassifier(labels=labels, **params).fit(texts, sets)
