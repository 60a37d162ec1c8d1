from __future__ import annotations

import json
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import label_ranking_average_precision_score

from rsphunt.errors import DegenerateDatasetError, DimensionMismatchError, InsufficientLabelSupportError
from rsphunt.learn.metrics import (
    binary_precision_recall,
    evaluate,
    evaluate_label_sets,
    label_ranking_average_precision,
)
from rsphunt.learn.multilabel import MultiLabelIptClassifier
from rsphunt.learn.text_models import TextTreeClassifier
from rsphunt.learn.tree import (
    DecisionTreeClassifier,
    Tree,
    TreeEnsembleClassifier,
    predict_proba,
    train_tree_ensemble,
)

from oracles import forest_proba_by_hand, lrap_by_definition

# -- trees ---------------------------------------------------------------


def toy_xy(n=200, d=4, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = (X[:, 0] + 0.5 * X[:, 1] > 0).astype(int)
    return X, y


def test_threshold_separable_1d():
    x = np.concatenate([np.linspace(-5, -0.1, 50), np.linspace(0, 5, 50)])
    y = np.array(["A"] * 50 + ["B"] * 50)
    model = TreeEnsembleClassifier(n_estimators=15, random_state=0).fit(x.reshape(-1, 1), y)
    held = np.array([-3.3, -0.05, 0.01, 2.2, 4.9]).reshape(-1, 1)
    assert list(model.predict(held)) == ["A", "A", "B", "B", "B"]


def test_balanced_weights_help_minority_recall():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(300, 3))
    y = (X[:, 0] > 1.28).astype(int)  # roughly 10% positives
    X[:, 1] += y * 0.5
    Xt = rng.normal(size=(300, 3))
    yt = (Xt[:, 0] > 1.28).astype(int)
    Xt[:, 1] += yt * 0.5
    plain = TreeEnsembleClassifier(n_estimators=31, random_state=1).fit(X, y)
    bal = TreeEnsembleClassifier(n_estimators=31, class_weight="balanced", random_state=1).fit(X, y)
    r_plain = binary_precision_recall(yt, plain.predict(Xt))[1]
    r_bal = binary_precision_recall(yt, bal.predict(Xt))[1]
    assert r_bal >= r_plain


def test_single_class_is_degenerate():
    with pytest.raises(DegenerateDatasetError):
        TreeEnsembleClassifier().fit(np.zeros((5, 2)), [1] * 5)


def test_dimension_mismatch():
    X, y = toy_xy()
    model = TreeEnsembleClassifier(n_estimators=3, random_state=0).fit(X, y)
    with pytest.raises(DimensionMismatchError):
        model.predict(np.zeros((2, 5)))
    with pytest.raises(DimensionMismatchError):
        train_tree_ensemble([([0, 1], 0), ([1], 1)])


def test_constant_leaf_model_returns_leaf_distribution():
    model = TreeEnsembleClassifier(n_estimators=1)
    model.classes_ = np.array([0, 1])
    model.n_features_in_ = 2
    model.trees_ = [Tree([-1], [0.0], [-1], [-1], [[0.25, 0.75]])]
    np.testing.assert_array_equal(predict_proba(model, [9.0, -9.0]), [0.25, 0.75])


def test_two_tree_vote_averages():
    model = TreeEnsembleClassifier(n_estimators=2)
    model.classes_ = np.array([0, 1])
    model.n_features_in_ = 1
    model.trees_ = [Tree([-1], [0.0], [-1], [-1], [[1.0, 0.0]]), Tree([-1], [0.0], [-1], [-1], [[0.0, 1.0]])]
    assert predict_proba(model, [0.0])[1] == 0.5


def test_proba_matches_hand_tree_walk():
    X, y = toy_xy(120, 3, seed=5)
    model = TreeEnsembleClassifier(n_estimators=7, max_features=2, random_state=2).fit(X, y)
    d = model.to_dict()
    pts = np.random.default_rng(8).normal(size=(10, 3))
    for p in pts:
        np.testing.assert_allclose(predict_proba(model, p), forest_proba_by_hand(d, p.tolist()), atol=1e-12)


def test_seeded_determinism():
    X, y = toy_xy()
    a = TreeEnsembleClassifier(n_estimators=9, random_state=42).fit(X, y).to_dict()
    b = TreeEnsembleClassifier(n_estimators=9, random_state=42).fit(X, y).to_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_parallel_fit_equals_serial():
    X, y = toy_xy()
    a = TreeEnsembleClassifier(n_estimators=6, random_state=3).fit(X, y)
    b = TreeEnsembleClassifier(n_estimators=6, random_state=3, n_jobs=2).fit(X, y)
    assert a.to_dict()["trees"] == b.to_dict()["trees"]


def test_proba_bounds_and_validate():
    X, y = toy_xy(seed=1)
    model = TreeEnsembleClassifier(n_estimators=11, random_state=0).fit(X, y)
    model.validate()
    P = model.predict_proba(np.random.default_rng(2).normal(size=(50, 4)))
    assert ((P >= 0) & (P <= 1)).all()
    np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-9)


def test_one_tree_no_subsampling_equals_single_tree():
    X, y = toy_xy(seed=4)
    forest = TreeEnsembleClassifier(n_estimators=1, max_features=None, bootstrap=False, random_state=0).fit(X, y)
    tree = DecisionTreeClassifier(random_state=0).fit(X, y)
    Xt = np.random.default_rng(6).normal(size=(100, 4))
    np.testing.assert_array_equal(forest.predict(Xt), tree.predict(Xt))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_raising_threshold_never_adds_positives(t1, t2):
    lo, hi = sorted((t1, t2))
    X, y = toy_xy(80, 2, seed=7)
    model = TreeEnsembleClassifier(n_estimators=5, random_state=0).fit(X, y)
    model.decision_threshold = lo
    n_lo = int((model.predict(X) == 1).sum())
    model.decision_threshold = hi
    assert int((model.predict(X) == 1).sum()) <= n_lo


def test_threshold_tie_counts_as_positive():
    model = TreeEnsembleClassifier(n_estimators=1, pos_label=1, decision_threshold=0.5)
    model.classes_ = np.array([0, 1])
    model.n_features_in_ = 1
    model.trees_ = [Tree([-1], [0.0], [-1], [-1], [[0.5, 0.5]])]
    assert model.predict(np.zeros((1, 1)))[0] == 1


def test_tie_break_prefers_lowest_feature_index():
    # two identical columns: the split must use column 0
    X = np.array([[0, 0], [1, 1], [2, 2], [3, 3]], dtype=float)
    tree = DecisionTreeClassifier(random_state=0).fit(X, [0, 0, 1, 1])
    assert tree.trees_[0].feature[0] == 0


def test_serialization_round_trip():
    X, y = toy_xy()
    model = TreeEnsembleClassifier(n_estimators=4, random_state=0).fit(X, y)
    again = TreeEnsembleClassifier.from_dict(json.loads(json.dumps(model.to_dict())))
    np.testing.assert_array_equal(again.predict_proba(X), model.predict_proba(X))


def test_text_tree_classifier_round_trip():
    texts = ["加微信abc", "hello world", "tg:@ts775 bet", "今天天气", "qq 123456", "open hours"] * 4
    y = [1, 0, 1, 0, 1, 0] * 4
    m = TextTreeClassifier(n_estimators=5, random_state=0, pos_label=1).fit(texts, y)
    again = TextTreeClassifier.from_dict(json.loads(json.dumps(m.to_dict())))
    np.testing.assert_array_equal(again.predict(texts), m.predict(texts))
    assert m.features(texts).shape == (24, 7)


# -- multi-label ---------------------------------------------------------

G, C = "Gambling", "Fake Certificate"
VOCAB = {G: ["bet", "casino", "jackpot", "poker"], C: ["diploma", "certificate", "transcript", "degree"]}


def two_label_corpus(n, seed):
    rng = random.Random(seed)
    rows = []
    for i in range(n):
        label = G if i % 2 else C
        words = rng.sample(VOCAB[label], 2) + [rng.choice(["now", "cheap", "fast", "online"])]
        rows.append((" ".join(words), {label}))
    return rows


def test_disjoint_vocabularies_reach_perfect_micro_f1():
    train, held = two_label_corpus(40, 0), two_label_corpus(20, 1)
    model = MultiLabelIptClassifier(n_estimators=15, min_df=1, random_state=0).fit(
        [t for t, _ in train], [s for _, s in train])
    report = evaluate(model, held)
    assert report.micro_f1 == 1.0
    assert model.classify("casino bet diploma certificate") == frozenset({G, C})


def test_missing_label_support():
    train = two_label_corpus(40, 0)
    with pytest.raises(InsufficientLabelSupportError):
        MultiLabelIptClassifier(labels=[G, C, "Drug Sales"], n_estimators=3).fit(
            [t for t, _ in train], [s for _, s in train])


def test_multilabel_round_trip():
    train = two_label_corpus(40, 0)
    model = MultiLabelIptClassifier(n_estimators=5, min_df=1, random_state=0).fit(
        [t for t, _ in train], [s for _, s in train])
    again = MultiLabelIptClassifier.from_dict(json.loads(json.dumps(model.to_dict())))
    texts = [t for t, _ in two_label_corpus(10, 5)]
    assert again.predict(texts) == model.predict(texts)


# -- metrics -------------------------------------------------------------

LRAP_CASES = [
    # (y_true, scores, hand-computed value)
    ([[1, 0, 1, 0]], [[0.9, 0.8, 0.7, 0.1]], 5 / 6),
    ([[0, 0, 1], [1, 0, 0]], [[0.75, 0.5, 1.0], [1.0, 0.2, 0.1]], 1.0),
    ([[1, 0, 0], [0, 0, 1]], [[0.75, 0.5, 1.0], [1.0, 0.2, 0.1]], (1 / 2 + 1 / 3) / 2),
]


@pytest.mark.parametrize("y, s, expected", LRAP_CASES)
def test_lrap_hand_cases(y, s, expected):
    assert abs(label_ranking_average_precision(y, s) - expected) < 1e-9
    assert abs(lrap_by_definition(y, s) - expected) < 1e-9


def test_lrap_agrees_with_sklearn_on_random_scores():
    rng = np.random.default_rng(0)
    for _ in range(20):
        y = rng.integers(0, 2, size=(15, 6))
        s = rng.random((15, 6)).round(1)  # rounding forces ties
        ours = label_ranking_average_precision(y, s)
        assert abs(ours - label_ranking_average_precision_score(y, s)) < 1e-9
        assert abs(ours - lrap_by_definition(y.tolist(), s.tolist())) < 1e-9


@settings(max_examples=100)
@given(st.lists(st.integers(-50, 50), min_size=4, max_size=4).map(lambda v: [x / 10 for x in v]),
       st.lists(st.booleans(), min_size=4, max_size=4))
def test_lrap_invariant_under_monotone_transform(scores, truth):
    a = label_ranking_average_precision([truth], [scores])
    b = label_ranking_average_precision([truth], [[np.exp(x) * 3 + 1 for x in scores]])
    assert abs(a - b) < 1e-12


def test_perfect_predictor_scores_one():
    y_true = [{"a"}, {"b"}, {"a", "b"}]
    scores = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
    r = evaluate_label_sets(y_true, y_true, ["a", "b"], scores)
    assert (r.micro_precision, r.micro_recall, r.micro_f1, r.lrap) == (1.0, 1.0, 1.0, 1.0)
    assert all(m.f1 == 1.0 for m in r.per_class.values())


def test_always_wrong_binary_predictor():
    assert binary_precision_recall([1, 0, 1, 0], [0, 1, 0, 1])[:2] == (0.0, 0.0)
