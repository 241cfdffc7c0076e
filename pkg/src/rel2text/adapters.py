"""Drop-in verbalizer adapters for downstream preprocessing tasks.

A verbalizer here is any callable from TripleRecord to sentence string
(copy_verbalize, a template_verbalize closure, or a remote-model wrapper).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from .data import KG, RelationRecord, TripleRecord
from .errors import ToolkitError

Verbalizer = Callable[[TripleRecord], str]


@dataclass(frozen=True)
class InfoTable:
    title: str
    rows: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if not self.title:
            raise ValueError("table title must be nonempty")
        for key, _ in self.rows:
            if not key:
                raise ValueError("table keys must be nonempty")


def load_info_table(path: str | Path) -> InfoTable:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    return InfoTable(
        title=obj["title"], rows=tuple((key, value) for key, value in obj["rows"])
    )


def _cell_triple(title: str, key: str, value: str) -> TripleRecord:
    relation = RelationRecord(id="", label=key, source=KG.WIKIDATA)
    return TripleRecord(head=title, relation=relation, tail=value)


def table_to_paragraph(table: InfoTable, verbalizer: Verbalizer) -> str:
    """One sentence per row, row order preserved, joined with single spaces.

    Each row becomes the triple (title, key, value) and goes through the
    verbalizer; verbalizer failures are annotated with the row index.
    """
    sentences = []
    for index, (key, value) in enumerate(table.rows):
        try:
            sentences.append(verbalizer(_cell_triple(table.title, key, value)))
        except ToolkitError as exc:
            exc.args = (f"row {index}: {exc}",)
            raise
    return " ".join(sentences)


def graph_first_stage(
    triples: Sequence[TripleRecord], verbalizer: Verbalizer
) -> list[str]:
    """Verbalize each triple of a document-context set, order preserved."""
    sentences = []
    for index, triple in enumerate(triples):
        try:
            sentences.append(verbalizer(triple))
        except ToolkitError as exc:
            exc.args = (f"triple {index}: {exc}",)
            raise
    return sentences
