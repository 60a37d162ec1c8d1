from __future__ import annotations

import numpy as np

from ..records import IptRecord
from ..textfeat import contact_segment_features
from .segment import segment_ipt
from .urls import url_host


def _positive(model, segments: list[str]) -> list[bool]:
    if not segments:
        return []
    if getattr(model, "featurizer", None) == "contact_segment":
        pred = model.predict(segments)
        ens = model.ensemble_
    else:
        X = np.asarray([contact_segment_features(s).as_array() for s in segments], dtype=np.float64)
        pred = model.predict(X)
        ens = model
    pos = ens.classes_[ens._pos_index()]
    return [p == pos for p in pred]


def extract_keywords(ipt: IptRecord | str, segment_model) -> list[str]:
    """Search keywords in an IPT: URL hosts plus candidate segments the model marks as contacts.

    Keywords come out in text order without duplicates. ``segment_model`` is a
    binary contact-segment classifier (a ``contact_segment`` text model or a
    bare ensemble over the 8 contact-segment features).
    """
    text = ipt.text if isinstance(ipt, IptRecord) else ipt
    segments = segment_ipt(text)
    candidates = [s.text for s in segments if s.kind == "candidate"]
    verdicts = iter(_positive(segment_model, candidates))
    out: list[str] = []
    for seg in segments:
        if seg.kind == "url":
            keyword = url_host(seg.text)
        elif next(verdicts):
            keyword = seg.text
        else:
            continue
        if keyword not in out:
            out.append(keyword)
    return out
