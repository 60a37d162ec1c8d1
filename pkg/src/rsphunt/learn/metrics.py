"""Evaluation metrics for multi-label (and binary, as a one-label case) predictors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from ..errors import EmptyEvaluationSetError


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    support: int


@dataclass(frozen=True)
class EvalReport:
    per_class: dict[Hashable, ClassMetrics]
    micro_precision: float
    micro_recall: float
    micro_f1: float
    lrap: float | None
    n_samples: int
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "micro_precision": self.micro_precision,
            "micro_recall": self.micro_recall,
            "micro_f1": self.micro_f1,
            "lrap": self.lrap,
            "per_class": {
                str(getattr(k, "value", k)): vars(v) for k, v in self.per_class.items()
            },
        }


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def label_ranking_average_precision(y_true, scores) -> float:
    """Mean over samples of the average precision of the true labels under the score ranking.

    For a true label j of a sample, its rank is the number of labels scored at
    least as high as j, and its precision is the fraction of those that are
    true. Samples whose true-label set is empty or complete contribute 1.
    """
    y_true = np.asarray(y_true, dtype=bool)
    scores = np.asarray(scores, dtype=float)
    if y_true.shape != scores.shape or y_true.ndim != 2:
        raise ValueError("y_true and scores must be 2-D arrays of the same shape")
    if y_true.shape[0] == 0:
        raise EmptyEvaluationSetError("no samples to score")
    total = 0.0
    for truth, s in zip(y_true, scores):
        n_true = truth.sum()
        if n_true == 0 or n_true == truth.size:
            total += 1.0
            continue
        ap = 0.0
        for j in np.nonzero(truth)[0]:
            at_least = s >= s[j]
            ap += (at_least & truth).sum() / at_least.sum()
        total += ap / n_true
    return total / y_true.shape[0]


def evaluate_label_sets(
    y_true: Sequence[set],
    y_pred: Sequence[set],
    labels: Sequence[Hashable],
    scores=None,
) -> EvalReport:
    """Per-class and pooled (micro) precision/recall/F1 over label sets; LRAP when scores are given."""
    if len(y_true) == 0:
        raise EmptyEvaluationSetError("held-out set is empty")
    if len(y_true) != len(y_pred):
        raise ValueError("y_true and y_pred differ in length")
    per_class = {}
    TP = FP = FN = 0
    for label in labels:
        tp = sum(1 for t, p in zip(y_true, y_pred) if label in t and label in p)
        fp = sum(1 for t, p in zip(y_true, y_pred) if label not in t and label in p)
        fn = sum(1 for t, p in zip(y_true, y_pred) if label in t and label not in p)
        p, r, f = _prf(tp, fp, fn)
        per_class[label] = ClassMetrics(p, r, f, tp, fp, fn, tp + fn)
        TP, FP, FN = TP + tp, FP + fp, FN + fn
    mp, mr, mf = _prf(TP, FP, FN)
    lrap = None
    if scores is not None:
        truth = np.array([[label in t for label in labels] for t in y_true])
        lrap = label_ranking_average_precision(truth, scores)
    return EvalReport(per_class, mp, mr, mf, lrap, len(y_true))


def evaluate(model, held_out: Sequence[tuple[str, set]]) -> EvalReport:
    """Score ``model`` on ``[(text, true_label_set), ...]``.

    ``model`` must expose ``labels_``, ``predict(texts) -> list of label sets``
    and ``decision_scores(texts) -> (n, n_labels)``.
    """
    held_out = list(held_out)
    if not held_out:
        raise EmptyEvaluationSetError("held-out set is empty")
    labels = list(model.labels_)
    unknown = set().union(*(set(t) for _, t in held_out)) - set(labels)
    if unknown:
        raise ValueError(f"held-out labels not known to the model: {sorted(map(str, unknown))}")
    texts = [text for text, _ in held_out]
    y_true = [set(t) for _, t in held_out]
    y_pred = [set(p) for p in model.predict(texts)]
    scores = model.decision_scores(texts)
    return evaluate_label_sets(y_true, y_pred, labels, scores)


def binary_precision_recall(y_true, y_pred, positive=1) -> tuple[float, float, float]:
    y_true = np.asarray(y_true) == positive
    y_pred = np.asarray(y_pred) == positive
    tp = int((y_true & y_pred).sum())
    fp = int((~y_true & y_pred).sum())
    fn = int((y_true & ~y_pred).sum())
    return _prf(tp, fp, fn)
