"""Input-side text transforms: camel-case splitting, linearization, masking.

All transforms are pure string functions. Linearized inputs follow the marker
convention "<head> H <rel> R <tail> T" with an optional "<rel_desc> D" suffix;
marker tokens may never occur inside content, which keeps parsing exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import MarkerCollision, MissingDescription

HEAD_MARKER = "<head>"
REL_MARKER = "<rel>"
TAIL_MARKER = "<tail>"
DESC_MARKER = "<rel_desc>"
MASK_TOKEN = "<mask>"

MARKERS = (HEAD_MARKER, REL_MARKER, TAIL_MARKER, DESC_MARKER, MASK_TOKEN)

# Word boundaries: lower-or-digit to upper, caps run to capitalized word,
# and letter/digit transitions in both directions.
_BOUNDARY = re.compile(
    r"(?<=[a-z0-9])(?=[A-Z])"
    r"|(?<=[A-Z])(?=[A-Z][a-z])"
    r"|(?<=[A-Za-z])(?=[0-9])"
    r"|(?<=[0-9])(?=[A-Za-z])"
)

# An all-caps run of length >= 2 is an acronym and keeps its case.
_ACRONYM = re.compile(r"[A-Z]{2,}")


class Variant(str, Enum):
    """Linearization variants; mask variants differ only in pipeline wiring."""

    PLAIN = "plain"
    MASK_TEST = "mask-test"
    MASK_TRAIN = "mask-train"
    MASK_ALL = "mask-all"
    DESC_REPL = "desc-repl"
    DESC_CAT = "desc-cat"


MASK_VARIANTS = frozenset({Variant.MASK_TEST, Variant.MASK_TRAIN, Variant.MASK_ALL})
DESC_VARIANTS = frozenset({Variant.DESC_REPL, Variant.DESC_CAT})


@dataclass(frozen=True)
class LinearizedInput:
    text: str
    variant: Variant


def split_camel_case(label: str) -> str:
    """Split camel-cased words and lowercase them, preserving acronyms.

    A space is inserted at every lowercase-or-digit to uppercase boundary, at
    the end of a capital run followed by a capitalized word, and at letter /
    digit transitions. Words are lowercased unless they are all-caps runs of
    length >= 2 ("musicBy" -> "music by", "firstAirDateABC" ->
    "first air date ABC", "ChEMBL ID" -> "ch EMBL ID"). Idempotent.
    """
    words: list[str] = []
    for chunk in label.split():
        for word in _BOUNDARY.split(chunk):
            if _ACRONYM.fullmatch(word):
                words.append(word)
            else:
                words.append(word.lower())
    return " ".join(words)


def _check_markers(content: str) -> None:
    for marker in MARKERS:
        if marker in content:
            raise MarkerCollision(marker, content)


def linearize(triple, variant: Variant, description: str | None = None) -> LinearizedInput:
    """Serialize a triple into one marker-delimited string.

    The relation slot carries the camel-case-split label (Plain, DescCat), the
    mask token (mask variants), or the relation description (DescRepl).
    """
    variant = Variant(variant)
    head, tail = triple.head, triple.tail
    rel = split_camel_case(triple.relation.label)
    for content in (head, rel, tail):
        _check_markers(content)

    if variant in DESC_VARIANTS:
        if description is None:
            raise MissingDescription(
                f"variant {variant.value} needs a relation description"
            )
        _check_markers(description)

    if variant in MASK_VARIANTS:
        rel_slot = MASK_TOKEN
    elif variant is Variant.DESC_REPL:
        rel_slot = description
    else:
        rel_slot = rel

    text = f"{HEAD_MARKER} {head} {REL_MARKER} {rel_slot} {TAIL_MARKER} {tail}"
    if variant is Variant.DESC_CAT:
        text = f"{text} {DESC_MARKER} {description}"
    return LinearizedInput(text=text, variant=variant)


_PARSE = re.compile(
    r"^<head> (?P<head>.*) <rel> (?P<rel>.*) <tail> (?P<tail>.*?)"
    r"(?: <rel_desc> (?P<desc>.*))?$",
    re.DOTALL,
)


def parse_linearized(text: str) -> tuple[str, str, str, str | None]:
    """Invert linearize: recover (head, rel slot, tail, description or None)."""
    match = _PARSE.match(text)
    if match is None:
        raise ValueError(f"not a linearized input: {text!r}")
    return (
        match.group("head"),
        match.group("rel"),
        match.group("tail"),
        match.group("desc"),
    )


def mask_coverage_check(input: LinearizedInput, relation_label: str) -> bool:
    """True iff no token of the split relation label leaks outside entity spans.

    Entity spans (head and tail content) are exempt: an entity may legitimately
    contain label words. The relation slot and any description slot must hold
    no label token besides the mask token itself. Comparison is lowercased.
    """
    _, rel_slot, _, desc = parse_linearized(input.text)
    label_tokens = {token.lower() for token in split_camel_case(relation_label).split()}
    exposed = [token for token in rel_slot.split() if token != MASK_TOKEN]
    if desc is not None:
        exposed.extend(desc.split())
    return not any(token.lower() in label_tokens for token in exposed)
