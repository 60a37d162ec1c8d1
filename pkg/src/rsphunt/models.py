"""The set of trained models the pipeline needs, with directory persistence."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from . import synth
from .learn.multilabel import MultiLabelIptClassifier
from .learn.text_models import TextTreeClassifier

log = logging.getLogger(__name__)

BUNDLE_FILES = {
    "binary": "binary.json",
    "segment": "segment.json",
    "contact_type": "contact_type.json",
    "multilabel": "multilabel.json",
}


@dataclass
class ModelBundle:
    binary: TextTreeClassifier
    segment: TextTreeClassifier
    contact_type: TextTreeClassifier
    multilabel: MultiLabelIptClassifier

    def is_ipt(self, texts) -> list[bool]:
        texts = list(texts)
        if not texts:
            return []
        return [bool(p == 1) for p in self.binary.predict(texts)]

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for attr, name in BUNDLE_FILES.items():
            payload = getattr(self, attr).to_dict()
            (directory / name).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, directory: str | Path) -> ModelBundle:
        directory = Path(directory)
        parts = {}
        for attr, name in BUNDLE_FILES.items():
            path = directory / name
            data = json.loads(path.read_text(encoding="utf-8"))
            loader = MultiLabelIptClassifier if attr == "multilabel" else TextTreeClassifier
            parts[attr] = loader.from_dict(data)
        return cls(**parts)


def train_binary(corpus, seed: int = 0, **params) -> TextTreeClassifier:
    texts = [t for t, _ in corpus]
    y = [int(label) for _, label in corpus]
    params = {"n_estimators": 91, "max_features": 1, "class_weight": "balanced", "pos_label": 1, **params}
    return TextTreeClassifier("binary_ipt", random_state=seed, **params).fit(texts, y)


def train_segment(corpus, seed: int = 0, **params) -> TextTreeClassifier:
    texts = [t for t, _ in corpus]
    y = [int(label) for _, label in corpus]
    params = {"n_estimators": 51, "max_features": "sqrt", "class_weight": "balanced", "pos_label": 1, **params}
    return TextTreeClassifier("contact_segment", random_state=seed, **params).fit(texts, y)


def train_contact_type(corpus, seed: int = 0, **params) -> TextTreeClassifier:
    texts = [t for t, _ in corpus]
    y = [str(label) for _, label in corpus]
    params = {"n_estimators": 51, "max_features": "sqrt", "class_weight": "balanced", **params}
    return TextTreeClassifier("contact_type", random_state=seed, **params).fit(texts, y)


def train_desk_bundle(seed: int = 0, scale: int = 1) -> ModelBundle:
    """Train all four models on the synthetic desk corpora (deterministic for a seed)."""
    log.info("training desk models (seed=%d, scale=%d)", seed, scale)
    binary = train_binary(synth.binary_corpus(600 * scale, seed=seed), seed=seed)
    segment = train_segment(synth.segment_corpus(600 * scale, seed=seed + 1), seed=seed)
    ctype = train_contact_type(synth.contact_type_corpus(420 * scale, seed=seed + 2), seed=seed)
    corpus = synth.multilabel_corpus(900 * scale, seed=seed + 3)
    multilabel = MultiLabelIptClassifier(random_state=seed).fit(
        [t for t, _ in corpus], [s for _, s in corpus]
    )
    return ModelBundle(binary, segment, ctype, multilabel)
