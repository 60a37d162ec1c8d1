"""A small table type rendered as aligned text or CSV."""

from __future__ import annotations

import csv
import io
import unicodedata
from dataclasses import dataclass, field
from typing import Any, Sequence


def _width(s: str) -> int:
    return sum(2 if unicodedata.east_asian_width(ch) in "WF" else 1 for ch in s)


def _cell(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.2f}"
    return str(v)


@dataclass
class ReportTable:
    title: str
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    provenance: str = ""
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> list[Any]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_text(self) -> str:
        cells = [self.columns] + [[_cell(v) for v in r] for r in self.rows]
        widths = [max(_width(row[i]) for row in cells) for i in range(len(self.columns))]
        lines = [self.title]
        if self.provenance:
            lines.append(f"({self.provenance})")
        for n, row in enumerate(cells):
            padded = []
            for i, v in enumerate(row):
                pad = " " * (widths[i] - _width(v))
                padded.append(v + pad if i == 0 else pad + v)
            lines.append("  ".join(padded).rstrip())
            if n == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for r in self.rows:
            writer.writerow([_cell(v) for v in r])
        return buf.getvalue()

    def render(self, fmt: str = "text") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "text":
            return self.to_text()
        raise ValueError(f"unknown format {fmt!r}")

    def to_json(self) -> dict:
        return {"title": self.title, "columns": list(self.columns), "rows": self.rows, "provenance": self.provenance}


def sort_rows(rows: Sequence[list], share_index: int, key_index: int = 0) -> list[list]:
    """Descending share, ties broken by the key column."""
    return sorted(rows, key=lambda r: (-r[share_index], str(r[key_index])))
