"""Triple verbalizers: copy baseline, placeholder templates, remote models.

Template patterns come in two dialects. Table entries use the placeholder
convention "X lasted for Y." (X = head, Y = tail, standalone characters,
each exactly once). Default patterns may instead use named fields {head},
{tail} and optionally {rel}. Both always embed the entity surfaces verbatim.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .data import DelexTemplate, TripleRecord, _PLACEHOLDER
from .errors import IOFailure, LengthMismatch, MalformedTemplate
from .net import post_json
from .transforms import LinearizedInput, split_camel_case

DEFAULT_PATTERN = "The {rel} of {head} is {tail}."
DEFAULT_PATTERN_PLURAL = "The {rel} of {head} are {tail}."


def copy_verbalize(triple: TripleRecord, split_relation: bool = True) -> str:
    """Concatenate head, relation label, and tail with single spaces.

    The relation label is camel-case split by default, matching the
    preprocessing every system sees; pass split_relation=False for the raw
    label form.
    """
    label = split_camel_case(triple.relation.label) if split_relation else triple.relation.label
    return f"{triple.head} {label} {triple.tail}"


@dataclass(frozen=True)
class TemplateEntry:
    relation_label: str
    pattern: str


def _validate_pattern(pattern: str) -> None:
    if "{head}" in pattern or "{tail}" in pattern:
        for slot in ("{head}", "{tail}"):
            if pattern.count(slot) != 1:
                raise MalformedTemplate(
                    f"pattern {pattern!r} must contain {slot} exactly once"
                )
        return
    if sorted(_PLACEHOLDER.findall(pattern)) != ["X", "Y"]:
        raise MalformedTemplate(
            f"pattern {pattern!r} must contain standalone X and Y exactly once each"
        )


def _apply_pattern(pattern: str, triple: TripleRecord) -> str:
    if "{head}" in pattern or "{tail}" in pattern:
        return pattern.format(
            head=triple.head,
            tail=triple.tail,
            rel=split_camel_case(triple.relation.label),
        )
    return DelexTemplate(pattern).substitute(triple.head, triple.tail)


def load_template_table(path: str | Path) -> dict[str, str]:
    """Load a JSON {relation label -> pattern} table, validating patterns."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IOFailure(f"cannot read template table {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedTemplate(f"template table {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedTemplate("template table must be a JSON object")
    table: dict[str, str] = {}
    for label, pattern in raw.items():
        _validate_pattern(pattern)
        table[split_camel_case(label)] = pattern
    return table


def template_verbalize(
    triple: TripleRecord,
    table: dict[str, str] | Iterable[TemplateEntry] | None = None,
    default_pattern: str = DEFAULT_PATTERN,
) -> str:
    """Verbalize via the table entry for the relation, or the default pattern.

    Lookup normalizes both sides with the camel-case splitter, so "musicBy"
    in the table serves a triple whose label reads "music by".
    """
    normalized: dict[str, str] = {}
    if table is not None:
        if isinstance(table, dict):
            items = table.items()
        else:
            items = ((entry.relation_label, entry.pattern) for entry in table)
        normalized = {split_camel_case(label): pattern for label, pattern in items}
    pattern = normalized.get(split_camel_case(triple.relation.label), default_pattern)
    _validate_pattern(pattern)
    return _apply_pattern(pattern, triple)


def remote_verbalize(
    inputs: list[LinearizedInput | str],
    endpoint: str,
    batch_size: int = 32,
    timeout: float = 60.0,
) -> list[str]:
    """Send linearized inputs to a generation endpoint, order-preserving.

    Speaks the wire protocol POST /generate {"inputs": [...], "decoding":
    "greedy"} -> {"outputs": [...]}. Output strings pass through untouched; a
    count mismatch is a protocol violation, never silent truncation.
    """
    if not inputs:
        return []
    texts = [item.text if isinstance(item, LinearizedInput) else item for item in inputs]
    url = endpoint.rstrip("/") + "/generate"
    outputs: list[str] = []
    for start in range(0, len(texts), batch_size):
        batch = texts[start : start + batch_size]
        body = post_json(url, {"inputs": batch, "decoding": "greedy"}, timeout=timeout)
        got = body.get("outputs")
        if not isinstance(got, list) or len(got) != len(batch):
            raise LengthMismatch(
                f"endpoint returned {len(got) if isinstance(got, list) else 'no'} "
                f"outputs for a batch of {len(batch)}"
            )
        outputs.extend(str(item) for item in got)
    return outputs
