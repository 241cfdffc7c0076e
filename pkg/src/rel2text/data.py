"""Canonical data model and persistence for triple-verbalization datasets.

The on-disk format is JSONL, one example per line:

    {"triple": {"head", "relation": {"label", "description", "source", "id"},
                "tail", "head_description", "tail_description"},
     "reference": {"text", "quality", "annotator_id", "entity_overrides"}}

An optional top-level "split" key carries a split tag when one is assigned.
Datasets are immutable after load; every transformation returns new objects.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    DuplicateTripleId,
    EntityNotFound,
    IOFailure,
    OverlappingEntities,
    SchemaViolation,
)


class KG(str, Enum):
    WIKIDATA = "Wikidata"
    DBPEDIA = "DBPedia"
    YAGO = "YAGO"


class Quality(str, Enum):
    OK = "OK"
    NOISY = "Noisy"
    CORRUPTED = "Corrupted"
    EXTRA_INFO = "ExtraInfo"
    UNREVIEWED = "Unreviewed"


@dataclass(frozen=True)
class RelationRecord:
    id: str
    label: str
    source: KG
    description: str | None = None


@dataclass(frozen=True)
class TripleRecord:
    head: str
    relation: RelationRecord
    tail: str
    head_description: str | None = None
    tail_description: str | None = None

    @property
    def triple_id(self) -> str:
        """Stable identity: the (head, relation label, tail) surface tuple."""
        return json.dumps(
            [self.head, self.relation.label, self.tail],
            ensure_ascii=False,
            separators=(",", ":"),
        )


@dataclass(frozen=True)
class VerbalizationRecord:
    triple_ref: str
    text: str
    quality: Quality = Quality.UNREVIEWED
    annotator_id: str = ""
    entity_overrides: dict[str, str] | None = None


@dataclass(frozen=True)
class Example:
    triple: TripleRecord
    reference: VerbalizationRecord
    split_tag: str | None = None

    @property
    def example_id(self) -> str:
        return self.triple.triple_id


@dataclass(frozen=True)
class Dataset:
    examples: tuple[Example, ...]
    path: str | None = None

    def __len__(self) -> int:
        return len(self.examples)

    def relation_labels(self) -> list[str]:
        """Distinct relation labels in first-appearance order."""
        seen: dict[str, None] = {}
        for example in self.examples:
            seen.setdefault(example.triple.relation.label, None)
        return list(seen)

    def by_id(self) -> dict[str, Example]:
        return {example.example_id: example for example in self.examples}


def effective_head(example: Example) -> str:
    """Head surface with any annotator override applied."""
    overrides = example.reference.entity_overrides or {}
    return overrides.get("head", example.triple.head)


def effective_tail(example: Example) -> str:
    overrides = example.reference.entity_overrides or {}
    return overrides.get("tail", example.triple.tail)


# ---------------------------------------------------------------------------
# Delexicalization

# Placeholders are the standalone characters X and Y (not flanked by
# alphanumerics), so "Xavier" never counts as a placeholder.
_PLACEHOLDER = re.compile(r"(?<![A-Za-z0-9])[XY](?![A-Za-z0-9])")


class PlaceholderCollision(OverlappingEntities):
    """The delexicalized pattern would be ambiguous to substitute back."""


@dataclass(frozen=True)
class DelexTemplate:
    pattern: str

    def substitute(self, head: str, tail: str) -> str:
        """Replace X with head and Y with tail in one simultaneous pass."""
        return _PLACEHOLDER.sub(
            lambda m: head if m.group(0) == "X" else tail, self.pattern
        )


def delexicalize(text: str, head: str, tail: str) -> DelexTemplate:
    """Replace one occurrence of each entity with X (head) / Y (tail).

    Matching is exact-substring, leftmost occurrence, longest entity first
    (stable: head before tail on equal lengths). Fails with EntityNotFound
    when an entity never occurs, OverlappingEntities when the only occurrence
    of one entity sits inside the other's replaced span, and
    PlaceholderCollision when the resulting pattern would not substitute back
    to the input byte-exactly (stray standalone X/Y, mid-word matches).
    """
    order = sorted(
        [("\x00", "X", head, "head"), ("\x01", "Y", tail, "tail")],
        key=lambda item: len(item[2]),
        reverse=True,
    )
    pattern = text
    for sentinel, placeholder, surface, slot in order:
        if surface not in pattern:
            if surface and surface in text:
                raise OverlappingEntities(
                    f"{slot} entity {surface!r} only occurs inside the other entity"
                )
            raise EntityNotFound(slot, surface)
        pattern = pattern.replace(surface, sentinel, 1)
    pattern = pattern.replace("\x00", "X").replace("\x01", "Y")

    template = DelexTemplate(pattern)
    if sorted(_PLACEHOLDER.findall(pattern)) != ["X", "Y"]:
        raise PlaceholderCollision(f"ambiguous placeholders in {pattern!r}")
    if template.substitute(head, tail) != text:
        raise PlaceholderCollision(f"pattern {pattern!r} does not round-trip")
    return template


def is_delexicalizable(example: Example) -> bool:
    """True iff the reference text delexicalizes against effective surfaces."""
    try:
        delexicalize(
            example.reference.text, effective_head(example), effective_tail(example)
        )
    except (EntityNotFound, OverlappingEntities):
        return False
    return True


# ---------------------------------------------------------------------------
# Quality filtering

def quality_filter(records: Sequence[Example], keep: set[Quality]) -> list[Example]:
    """Order-preserving subset of rows whose reference quality is kept.

    Applies no per-triple selection; compose with select_one_per_triple to
    build the curated one-reference-per-triple dataset.
    """
    return [record for record in records if record.reference.quality in keep]


def select_one_per_triple(records: Sequence[Example]) -> list[Example]:
    """Keep one row per triple id, first by (annotator_id, input order).

    Output preserves the input order of the selected rows.
    """
    best: dict[str, tuple[tuple[str, int], int]] = {}
    for index, record in enumerate(records):
        key = (record.reference.annotator_id, index)
        triple_id = record.example_id
        if triple_id not in best or key < best[triple_id][0]:
            best[triple_id] = (key, index)
    selected = sorted(index for _, index in best.values())
    return [records[index] for index in selected]


# ---------------------------------------------------------------------------
# Persistence

_REQUIRED_TRIPLE_FIELDS = ("head", "relation", "tail")
_REQUIRED_RELATION_FIELDS = ("label", "source")
_REQUIRED_REFERENCE_FIELDS = ("text", "quality")


def parse_triple(triple_obj, line: int = 0) -> TripleRecord:
    """Parse and validate the triple sub-object of the dataset schema."""
    if not isinstance(triple_obj, dict):
        raise SchemaViolation(line, "triple", "missing or not an object")
    for name in _REQUIRED_TRIPLE_FIELDS:
        if name not in triple_obj:
            raise SchemaViolation(line, f"triple.{name}", "missing")
    relation_obj = triple_obj["relation"]
    if not isinstance(relation_obj, dict):
        raise SchemaViolation(line, "triple.relation", "not an object")
    for name in _REQUIRED_RELATION_FIELDS:
        if name not in relation_obj:
            raise SchemaViolation(line, f"triple.relation.{name}", "missing")
    label = relation_obj["label"]
    if not isinstance(label, str) or not label.strip():
        raise SchemaViolation(line, "triple.relation.label", "empty label")
    try:
        source = KG(relation_obj["source"])
    except ValueError:
        raise SchemaViolation(
            line, "triple.relation.source", f"unknown KG {relation_obj['source']!r}"
        ) from None
    relation = RelationRecord(
        id=str(relation_obj.get("id", "")),
        label=label,
        source=source,
        description=relation_obj.get("description"),
    )
    head, tail = triple_obj["head"], triple_obj["tail"]
    for name, value in (("head", head), ("tail", tail)):
        if not isinstance(value, str) or not value:
            raise SchemaViolation(line, f"triple.{name}", "empty entity")
    return TripleRecord(
        head=head,
        relation=relation,
        tail=tail,
        head_description=triple_obj.get("head_description"),
        tail_description=triple_obj.get("tail_description"),
    )


def triple_to_obj(triple: TripleRecord) -> dict:
    relation = triple.relation
    return {
        "head": triple.head,
        "relation": {
            "label": relation.label,
            "description": relation.description,
            "source": relation.source.value,
            "id": relation.id,
        },
        "tail": triple.tail,
        "head_description": triple.head_description,
        "tail_description": triple.tail_description,
    }


def _parse_example(obj: dict, line: int) -> Example:
    if not isinstance(obj, dict):
        raise SchemaViolation(line, "", "expected a JSON object")
    triple = parse_triple(obj.get("triple"), line)

    reference_obj = obj.get("reference")
    if not isinstance(reference_obj, dict):
        raise SchemaViolation(line, "reference", "missing or not an object")
    for name in _REQUIRED_REFERENCE_FIELDS:
        if name not in reference_obj:
            raise SchemaViolation(line, f"reference.{name}", "missing")
    text = reference_obj["text"]
    if not isinstance(text, str) or not text:
        raise SchemaViolation(line, "reference.text", "empty text")
    try:
        quality = Quality(reference_obj["quality"])
    except ValueError:
        raise SchemaViolation(
            line, "reference.quality", f"unknown quality {reference_obj['quality']!r}"
        ) from None
    overrides = reference_obj.get("entity_overrides")
    if overrides is not None:
        if not isinstance(overrides, dict) or not set(overrides) <= {"head", "tail"}:
            raise SchemaViolation(
                line, "reference.entity_overrides", "keys must be head/tail"
            )
    reference = VerbalizationRecord(
        triple_ref=triple.triple_id,
        text=text,
        quality=quality,
        annotator_id=str(reference_obj.get("annotator_id", "")),
        entity_overrides=overrides,
    )
    return Example(triple=triple, reference=reference, split_tag=obj.get("split"))


def example_to_obj(example: Example) -> dict:
    """Serialize one example in the declared schema key order."""
    obj: dict = {
        "triple": triple_to_obj(example.triple),
        "reference": {
            "text": example.reference.text,
            "quality": example.reference.quality.value,
            "annotator_id": example.reference.annotator_id,
            "entity_overrides": example.reference.entity_overrides,
        },
    }
    if example.split_tag is not None:
        obj["split"] = example.split_tag
    return obj


def load_triples(path: str | Path) -> list[TripleRecord]:
    """Parse a triples-only JSONL file: {"triple": {...}} per line.

    This is the pre-annotation form the ingest pipeline emits; annotated
    datasets add the reference object.
    """
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from exc
    triples = []
    for line_no, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(line_no, "", f"invalid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise SchemaViolation(line_no, "", "expected a JSON object")
        triples.append(parse_triple(obj.get("triple"), line_no))
    return triples


def save_triples(triples: Iterable[TripleRecord], path: str | Path) -> None:
    lines = [
        json.dumps({"triple": triple_to_obj(triple)}, ensure_ascii=False)
        for triple in triples
    ]
    try:
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


def load_examples(path: str | Path) -> list[Example]:
    """Parse a dataset JSONL file without any uniqueness constraint.

    Use for raw multi-response releases where one triple carries several
    annotator responses.
    """
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from exc
    examples = []
    for line_no, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(line_no, "", f"invalid JSON: {exc}") from exc
        examples.append(_parse_example(obj, line_no))
    return examples


def load_dataset(path: str | Path) -> Dataset:
    """Load a curated dataset: valid schema and one example per triple id."""
    examples = load_examples(path)
    seen: set[str] = set()
    for line_no, example in enumerate(examples, start=1):
        if example.example_id in seen:
            raise DuplicateTripleId(example.example_id, line_no)
        seen.add(example.example_id)
    return Dataset(examples=tuple(examples), path=str(path))


def save_examples(examples: Iterable[Example], path: str | Path) -> None:
    """Write examples as UTF-8 JSONL with LF line endings."""
    lines = [
        json.dumps(example_to_obj(example), ensure_ascii=False) for example in examples
    ]
    try:
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


def dataset_stats(dataset: Dataset) -> dict:
    """Deterministic counts report for a loaded dataset."""
    per_source: dict[str, int] = {}
    per_quality: dict[str, int] = {}
    non_delex = 0
    for example in dataset.examples:
        source = example.triple.relation.source.value
        per_source[source] = per_source.get(source, 0) + 1
        quality = example.reference.quality.value
        per_quality[quality] = per_quality.get(quality, 0) + 1
        if not is_delexicalizable(example):
            non_delex += 1
    total = len(dataset.examples)
    fraction = 1.0 if total == 0 else (total - non_delex) / total
    return {
        "examples": total,
        "relations": len(dataset.relation_labels()),
        "per_source": dict(sorted(per_source.items())),
        "per_quality": dict(sorted(per_quality.items())),
        "non_delexicalizable": non_delex,
        "delexicalizable_fraction": round(fraction, 6),
    }


def with_split_tag(example: Example, tag: str) -> Example:
    return replace(example, split_tag=tag)
