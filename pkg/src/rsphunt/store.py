"""Append-only JSON-lines record store.

Layout: ``<root>/<kind>.jsonl``, one JSON object per line. A record appended
again under an existing id becomes a new line; readers keep the latest version
per id and report ids in order of first insertion. A trailing line without a
newline (a write in progress) is ignored, so readers always see a consistent
prefix.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from pathlib import Path
from typing import Any, Callable, Iterator

from .errors import StorageError
from .records import RECORD_TYPES, IptRecord

logger = logging.getLogger(__name__)


class RecordStore:
    def __init__(self, root: str | os.PathLike, fsync: bool = False):
        self.root = Path(root)
        self.fsync = fsync
        self._lock = threading.Lock()
        # kind -> id -> latest JSON object; dicts keep first-insertion order
        self._index: dict[str, dict[str, dict[str, Any]]] = {}
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot create store at {self.root}: {exc}") from exc
        for kind in RECORD_TYPES:
            self._index[kind] = self._load(kind)

    def path(self, kind: str) -> Path:
        return self.root / f"{kind}.jsonl"

    def _load(self, kind: str) -> dict[str, dict[str, Any]]:
        index: dict[str, dict[str, Any]] = {}
        path = self.path(kind)
        if not path.exists():
            return index
        try:
            data = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise StorageError(f"cannot read {path}: {exc}") from exc
        for line in data.split("\n")[:-1]:  # last element: partial line or ""
            if line:
                obj = json.loads(line)
                index[obj["id"]] = obj
        return index

    def _check_kind(self, kind: str) -> type:
        try:
            return RECORD_TYPES[kind]
        except KeyError:
            raise ValueError(f"unknown record kind {kind!r}; expected one of {sorted(RECORD_TYPES)}") from None

    def append(self, record) -> str:
        """Validate and append ``record``; returns its id.

        An ``IptRecord`` whose id is already stored is merged (sources unioned,
        ``last_seen`` advanced) rather than duplicated. Other kinds are skipped
        when an identical version is already stored.
        """
        kind = record.kind
        self._check_kind(kind)
        record.validate()
        with self._lock:
            index = self._index[kind]
            rid = record.id
            if isinstance(record, IptRecord) and rid in index:
                record = IptRecord.from_json(index[rid]).merged_with(record)
            obj = record.to_json()
            if index.get(rid) == obj:
                return rid
            line = json.dumps(obj, ensure_ascii=False) + "\n"
            try:
                with open(self.path(kind), "a", encoding="utf-8") as fh:
                    fh.write(line)
                    fh.flush()
                    if self.fsync:
                        os.fsync(fh.fileno())
            except OSError as exc:
                raise StorageError(f"cannot append to {self.path(kind)}: {exc}") from exc
            index[rid] = obj
        return rid

    def get(self, kind: str, rid: str):
        cls = self._check_kind(kind)
        obj = self._index[kind].get(rid)
        return None if obj is None else cls.from_json(obj)

    def query(self, kind: str, predicate: Callable[[Any], bool] | None = None) -> Iterator[Any]:
        """Yield stored records of ``kind`` matching ``predicate`` in insertion order."""
        cls = self._check_kind(kind)
        for obj in list(self._index[kind].values()):
            rec = cls.from_json(obj)
            if predicate is None or predicate(rec):
                yield rec

    def count(self, kind: str) -> int:
        self._check_kind(kind)
        return len(self._index[kind])

    def refresh(self) -> None:
        """Re-read all files (for readers following another process's writes)."""
        with self._lock:
            for kind in RECORD_TYPES:
                self._index[kind] = self._load(kind)


def append_record(store: RecordStore, record) -> str:
    return store.append(record)


def query_records(store: RecordStore, kind: str, predicate: Callable[[Any], bool] | None = None) -> Iterator[Any]:
    return store.query(kind, predicate)
