"""Text classifiers made of a named hand-crafted featurizer plus a tree ensemble."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .tree import TreeEnsembleClassifier

FORMAT_NAME = "rsphunt.text_tree"
FORMAT_VERSION = 1


def featurizer_registry() -> dict:
    # imported lazily: extract depends on learn, not the other way round
    from ..extract.contacts import ContactTypeFeaturizer
    from ..textfeat import BinaryIptFeaturizer, ContactSegmentFeaturizer

    return {
        "binary_ipt": BinaryIptFeaturizer,
        "contact_segment": ContactSegmentFeaturizer,
        "contact_type": ContactTypeFeaturizer,
    }


class TextTreeClassifier(ClassifierMixin, BaseEstimator):
    """``fit(texts, y)`` / ``predict(texts)`` over one of the registered featurizers.

    The ensemble parameters are passed through unchanged; see
    :class:`TreeEnsembleClassifier`.
    """

    def __init__(
        self,
        featurizer: str = "binary_ipt",
        n_estimators: int = 91,
        max_features=1,
        class_weight="balanced",
        decision_threshold: float = 0.5,
        pos_label=None,
        random_state=None,
        n_jobs=None,
    ):
        self.featurizer = featurizer
        self.n_estimators = n_estimators
        self.max_features = max_features
        self.class_weight = class_weight
        self.decision_threshold = decision_threshold
        self.pos_label = pos_label
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _featurizer(self):
        registry = featurizer_registry()
        if self.featurizer not in registry:
            raise ValueError(f"unknown featurizer {self.featurizer!r}; choose from {sorted(registry)}")
        return registry[self.featurizer]().fit(None)

    def features(self, texts: Sequence[str]) -> np.ndarray:
        return self._featurizer().transform(list(texts))

    def fit(self, texts: Sequence[str], y):
        feat = self._featurizer()
        X = feat.transform(list(texts))
        self.ensemble_ = TreeEnsembleClassifier(
            n_estimators=self.n_estimators,
            max_features=self.max_features,
            class_weight=self.class_weight,
            decision_threshold=self.decision_threshold,
            pos_label=self.pos_label,
            feature_order=tuple(feat.feature_names),
            random_state=self.random_state,
            n_jobs=self.n_jobs,
        ).fit(X, np.asarray(y))
        self.classes_ = self.ensemble_.classes_
        return self

    def predict_proba(self, texts: Sequence[str]) -> np.ndarray:
        check_is_fitted(self, "ensemble_")
        return self.ensemble_.predict_proba(self.features(texts))

    def positive_proba(self, texts: Sequence[str]) -> np.ndarray:
        check_is_fitted(self, "ensemble_")
        return self.ensemble_.positive_proba(self.features(texts))

    def predict(self, texts: Sequence[str]) -> np.ndarray:
        check_is_fitted(self, "ensemble_")
        return self.ensemble_.predict(self.features(texts))

    def to_dict(self) -> dict:
        check_is_fitted(self, "ensemble_")
        params = self.get_params()
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "params": params,
            "ensemble": self.ensemble_.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> TextTreeClassifier:
        if d.get("format") != FORMAT_NAME or d.get("version") != FORMAT_VERSION:
            raise ValueError("not a serialized text tree classifier of a supported version")
        model = cls(**d["params"])
        model.ensemble_ = TreeEnsembleClassifier.from_dict(d["ensemble"])
        model.classes_ = model.ensemble_.classes_
        return model
