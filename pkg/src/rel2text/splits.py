"""Leakage-aware train/val/test construction and nested few-shot splits.

Relations are the unit of leakage control: a relation goes to the test side
only if its label neither exactly matches nor embeds too closely (cosine
strictly above the threshold) to any reference-list label. Whole relations
move to one side, so test and train/val never share a label. All random
selection uses random.Random(seed), documented here as the PRNG.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .data import Dataset, Example
from .errors import (
    DimensionMismatch,
    IOFailure,
    MissingEmbedding,
    NotEnoughRelations,
    ZeroVector,
)
from .transforms import split_camel_case

SIMILARITY_THRESHOLD = 0.9
FEWSHOT_SIZES = (25, 50, 100, 200)


def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionMismatch(f"shapes {u.shape} and {v.shape}")
    norm_u = float(np.linalg.norm(u))
    norm_v = float(np.linalg.norm(v))
    if norm_u == 0.0 or norm_v == 0.0:
        raise ZeroVector("cosine similarity undefined for zero vectors")
    return float(np.dot(u, v) / (norm_u * norm_v))


def load_embeddings(path: str | Path) -> dict[str, np.ndarray]:
    """Load a JSONL {"label", "vector"} embedding table, dimension-checked."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot read embeddings {path}: {exc}") from exc
    table: dict[str, np.ndarray] = {}
    dim: int | None = None
    for line_no, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        obj = json.loads(line)
        vector = np.asarray(obj["vector"], dtype=float)
        if dim is None:
            dim = vector.size
        elif vector.size != dim:
            raise DimensionMismatch(
                f"line {line_no}: dimension {vector.size}, expected {dim}"
            )
        if float(np.linalg.norm(vector)) == 0.0:
            raise ZeroVector(f"line {line_no}: zero vector for {obj['label']!r}")
        table[obj["label"]] = vector
    return table


@dataclass(frozen=True)
class Exclusion:
    label: str
    reason: str  # "exact-match" or "similarity"
    detail: str  # matching reference list, or nearest label
    similarity: float | None = None

    def to_obj(self) -> dict:
        obj = {"label": self.label, "reason": self.reason, "detail": self.detail}
        if self.similarity is not None:
            obj["similarity"] = round(self.similarity, 6)
        return obj


def _embedding_for(embeddings: Mapping[str, np.ndarray], label: str) -> np.ndarray:
    key = split_camel_case(label)
    if key in embeddings:
        return embeddings[key]
    if label in embeddings:
        return embeddings[label]
    raise MissingEmbedding(key)


def exclusion_set(
    candidates: Sequence[str],
    reference_lists: Mapping[str, Sequence[str]],
    embeddings: Mapping[str, np.ndarray] | None,
    threshold: float = SIMILARITY_THRESHOLD,
) -> dict[str, Exclusion]:
    """Labels that may not enter the test side, keyed by candidate label.

    A candidate is excluded on an exact label match (after camel-case
    normalization of both sides) with any reference label, or when its
    maximum cosine similarity to the reference labels strictly exceeds the
    threshold. Every label must have an embedding when a table is supplied;
    a missing one is an error, not a silent skip.
    """
    excluded: dict[str, Exclusion] = {}
    normalized_refs: list[tuple[str, str, str]] = []  # (normalized, raw, list name)
    for list_name, labels in reference_lists.items():
        for label in labels:
            normalized_refs.append((split_camel_case(label), label, list_name))

    exact_index: dict[str, str] = {}
    for normalized, _, list_name in normalized_refs:
        exact_index.setdefault(normalized, list_name)

    for candidate in candidates:
        normalized = split_camel_case(candidate)
        if normalized in exact_index:
            excluded[candidate] = Exclusion(
                label=candidate, reason="exact-match", detail=exact_index[normalized]
            )

    if embeddings is not None and normalized_refs:
        ref_matrix = np.stack(
            [_embedding_for(embeddings, raw) for _, raw, _ in normalized_refs]
        )
        ref_norms = np.linalg.norm(ref_matrix, axis=1)
        for candidate in candidates:
            if candidate in excluded:
                continue
            vector = _embedding_for(embeddings, candidate)
            sims = ref_matrix @ vector / (ref_norms * float(np.linalg.norm(vector)))
            best = int(np.argmax(sims))
            if float(sims[best]) > threshold:
                excluded[candidate] = Exclusion(
                    label=candidate,
                    reason="similarity",
                    detail=normalized_refs[best][1],
                    similarity=float(sims[best]),
                )
    return excluded


@dataclass(frozen=True)
class DatasetSplit:
    name: str
    example_ids: tuple[str, ...]
    seed: int
    exclusion_manifest: tuple[Exclusion, ...] = ()

    def to_obj(self) -> dict:
        return {
            "name": self.name,
            "seed": self.seed,
            "size": len(self.example_ids),
            "example_ids": list(self.example_ids),
            "exclusions": [entry.to_obj() for entry in self.exclusion_manifest],
        }


@dataclass(frozen=True)
class SplitResult:
    train: DatasetSplit
    val: DatasetSplit
    test: DatasetSplit
    manifest: dict
    warning: bool = False


def _group_by_relation(dataset: Dataset) -> dict[str, list[int]]:
    groups: dict[str, list[int]] = {}
    for index, example in enumerate(dataset.examples):
        groups.setdefault(example.triple.relation.label, []).append(index)
    return groups


def build_splits(
    dataset: Dataset,
    excluded: Mapping[str, Exclusion] | Iterable[str],
    test_fraction: float = 0.15,
    val_fraction_of_rest: float = 0.10,
    seed: int = 0,
) -> SplitResult:
    """Partition the dataset into train/val/test at the stated fractions.

    Test relations are drawn (seed-shuffled) from the non-excluded relations
    until the example budget is met; a relation joins test only if that
    brings the running count at least as close to the target as skipping it.
    The remaining examples split 90/10 into train/val at the example level.
    When eligible relations cannot fill the budget, the maximum achievable
    test set is returned with the warning flag set.
    """
    if isinstance(excluded, Mapping):
        exclusion_entries = dict(excluded)
    else:
        exclusion_entries = {
            label: Exclusion(label=label, reason="exact-match", detail="caller")
            for label in excluded
        }
    groups = _group_by_relation(dataset)
    eligible = [label for label in groups if label not in exclusion_entries]
    rng = random.Random(seed)
    rng.shuffle(eligible)

    target = round(test_fraction * len(dataset.examples))
    test_indices: list[int] = []
    chosen: list[str] = []
    for label in eligible:
        if len(test_indices) >= target:
            break
        size = len(groups[label])
        if abs(len(test_indices) + size - target) <= abs(len(test_indices) - target):
            chosen.append(label)
            test_indices.extend(groups[label])
    warning = len(test_indices) < target and len(chosen) == len(eligible)

    test_set = set(test_indices)
    rest = [index for index in range(len(dataset.examples)) if index not in test_set]
    rest_shuffled = rest[:]
    rng.shuffle(rest_shuffled)
    val_count = round(val_fraction_of_rest * len(rest))
    val_set = set(rest_shuffled[:val_count])

    def ids_of(indices: Iterable[int]) -> tuple[str, ...]:
        return tuple(dataset.examples[index].example_id for index in sorted(indices))

    exclusions = tuple(
        exclusion_entries[label] for label in sorted(exclusion_entries)
    )
    test = DatasetSplit("test", ids_of(test_set), seed, exclusions)
    val = DatasetSplit("val", ids_of(val_set), seed)
    train = DatasetSplit("train", ids_of(set(rest) - val_set), seed)

    total = len(dataset.examples)
    eligible_examples = sum(len(groups[label]) for label in eligible)
    manifest = {
        "seed": seed,
        "test_fraction_target": test_fraction,
        "val_fraction_of_rest": val_fraction_of_rest,
        "counts": {"train": len(train.example_ids), "val": len(val.example_ids), "test": len(test.example_ids)},
        "test_fraction_of_all": len(test.example_ids) / total if total else 0.0,
        "test_fraction_of_eligible": (
            len(test.example_ids) / eligible_examples if eligible_examples else 0.0
        ),
        "test_relations": sorted(chosen),
        "excluded_relations": [entry.to_obj() for entry in exclusions],
        "warning_insufficient_eligible": warning,
    }
    return SplitResult(train=train, val=val, test=test, manifest=manifest, warning=warning)


def build_fewshot(
    dataset: Dataset,
    train_ids: Sequence[str],
    sizes: Sequence[int] = FEWSHOT_SIZES,
    seed: int = 0,
) -> dict[int, DatasetSplit]:
    """Nested few-shot splits: N relations, one example each, prefix-nested.

    The train relations are shuffled once and each size takes a prefix; the
    per-relation example is drawn once, so smaller splits are subsets of
    larger ones for any seed.
    """
    by_id = dataset.by_id()
    train_examples = [by_id[example_id] for example_id in train_ids]
    groups: dict[str, list[Example]] = {}
    for example in train_examples:
        groups.setdefault(example.triple.relation.label, []).append(example)

    sizes = sorted(sizes)
    if sizes and sizes[-1] > len(groups):
        raise NotEnoughRelations(
            f"need {sizes[-1]} distinct relations, train side has {len(groups)}"
        )
    rng = random.Random(seed)
    order = sorted(groups)
    rng.shuffle(order)
    choice = {label: rng.choice(groups[label]) for label in order}

    splits: dict[int, DatasetSplit] = {}
    for size in sizes:
        ids = tuple(choice[label].example_id for label in order[:size])
        splits[size] = DatasetSplit(f"fewshot-{size}", ids, seed)
    return splits


def save_split(split: DatasetSplit, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(split.to_obj(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def load_split(path: str | Path) -> DatasetSplit:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    exclusions = tuple(
        Exclusion(
            label=entry["label"],
            reason=entry["reason"],
            detail=entry["detail"],
            similarity=entry.get("similarity"),
        )
        for entry in obj.get("exclusions", ())
    )
    return DatasetSplit(
        name=obj["name"],
        example_ids=tuple(obj["example_ids"]),
        seed=obj["seed"],
        exclusion_manifest=exclusions,
    )
