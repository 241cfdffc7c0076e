"""KG relation and triple retrieval with the collection-side filters.

Each fetch operation works in two modes. Offline mode (first-class) reads a
local dump in the dataset JSONL schema, so tests and reproduction runs never
depend on a live endpoint. Live mode speaks SPARQL-over-HTTP with bounded
retries and a per-endpoint request rate cap.
"""

from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .data import KG, RelationRecord, TripleRecord, load_examples, load_triples
from .errors import MalformedResponse, RelationUnknown, SchemaViolation
from .net import RateLimiter, request_json
from .transforms import split_camel_case

logger = logging.getLogger(__name__)

MAX_ENTITY_LENGTH = 64  # Unicode scalar values
BANNED_LABEL_TOKENS = frozenset({"id", "number", "code"})
RESERVED_DESCRIPTION = "reserved for dbpedia"
META_ENTITY_MARKERS = ("Category:", "XMLSchema#")

_URL_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*://")

ENDPOINT_ENV_VARS = {
    KG.WIKIDATA: "R2T_WIKIDATA_ENDPOINT",
    KG.DBPEDIA: "R2T_DBPEDIA_ENDPOINT",
}
DEFAULT_ENDPOINTS = {
    KG.WIKIDATA: "https://query.wikidata.org/sparql",
    KG.DBPEDIA: "https://dbpedia.org/sparql",
}

# Dedupe precedence for identical normalized labels (highest first).
KG_PRECEDENCE = (KG.DBPEDIA, KG.YAGO, KG.WIKIDATA)


class FilterReason(str, Enum):
    META_ENTITY = "MetaEntity"
    URL_ENTITY = "UrlEntity"
    ENTITY_TOO_LONG = "EntityTooLong"
    LABEL_ID_NUMBER_CODE = "LabelIdNumberCode"
    RESERVED_FOR_DBPEDIA = "ReservedForDBpedia"
    DUPLICATE_LABEL = "DuplicateLabelLowerPrecedence"
    NONE = "None"


@dataclass(frozen=True)
class FilterVerdict:
    kept: bool
    reason: FilterReason = FilterReason.NONE

    def __post_init__(self) -> None:
        assert self.kept == (self.reason is FilterReason.NONE)


@dataclass(frozen=True)
class EndpointConfig:
    url: str | None = None
    fixture_path: str | Path | None = None
    rate_per_sec: float = 2.0
    attempts: int = 3
    timeout: float = 30.0

    def resolve_url(self, source: KG) -> str:
        if self.url:
            return self.url
        env_var = ENDPOINT_ENV_VARS.get(source)
        if env_var and os.environ.get(env_var):
            return os.environ[env_var]
        if source in DEFAULT_ENDPOINTS:
            return DEFAULT_ENDPOINTS[source]
        raise MalformedResponse(f"no endpoint configured for {source.value}")


# ---------------------------------------------------------------------------
# Filtering heuristics

def filter_relation(relation: RelationRecord) -> FilterVerdict:
    """Drop identifier-style relations and reserved DBPedia properties.

    Banned substrings ("id", "number", "code") match case-insensitively on
    word tokens of the camel-case-split label, never on raw substrings, so
    "video" and "president" survive while "ChEMBL ID" does not.
    """
    tokens = {token.lower() for token in split_camel_case(relation.label).split()}
    if tokens & BANNED_LABEL_TOKENS:
        return FilterVerdict(False, FilterReason.LABEL_ID_NUMBER_CODE)
    description = relation.description or ""
    if RESERVED_DESCRIPTION in description.lower():
        return FilterVerdict(False, FilterReason.RESERVED_FOR_DBPEDIA)
    return FilterVerdict(True)


def _entity_verdict(entity: str) -> FilterVerdict:
    if any(marker in entity for marker in META_ENTITY_MARKERS):
        return FilterVerdict(False, FilterReason.META_ENTITY)
    if _URL_SCHEME.match(entity) or entity.startswith("www."):
        return FilterVerdict(False, FilterReason.URL_ENTITY)
    if len(entity) > MAX_ENTITY_LENGTH:
        return FilterVerdict(False, FilterReason.ENTITY_TOO_LONG)
    return FilterVerdict(True)


def filter_triple(triple: TripleRecord) -> FilterVerdict:
    """Drop triples whose entities are meta-markers, URLs, or over-long."""
    for entity in (triple.head, triple.tail):
        verdict = _entity_verdict(entity)
        if not verdict.kept:
            return verdict
    return FilterVerdict(True)


def normalized_label(label: str) -> str:
    return split_camel_case(label).lower()


def dedupe_relations(per_kg_lists: dict[KG, list[RelationRecord]]) -> list[RelationRecord]:
    """Keep one relation per normalized label, by KG precedence.

    DBPedia beats YAGO beats Wikidata; within one KG the first occurrence
    wins. The output is ordered by (precedence, relation id) so merges are
    deterministic regardless of input interleaving.
    """
    survivors: dict[str, RelationRecord] = {}
    for source in KG_PRECEDENCE:
        for relation in per_kg_lists.get(source, []):
            key = normalized_label(relation.label)
            if key not in survivors:
                survivors[key] = relation
            else:
                logger.debug(
                    "dropping %s:%s (%s): label duplicates %s",
                    relation.source.value,
                    relation.id,
                    FilterReason.DUPLICATE_LABEL.value,
                    survivors[key].id,
                )
    precedence_rank = {source: rank for rank, source in enumerate(KG_PRECEDENCE)}
    return sorted(
        survivors.values(), key=lambda rel: (precedence_rank[rel.source], rel.id)
    )


# ---------------------------------------------------------------------------
# Fetching

_RELATION_QUERIES = {
    KG.WIKIDATA: """
SELECT ?property ?label ?description WHERE {
  ?property a wikibase:Property .
  ?property rdfs:label ?label . FILTER(LANG(?label) = "en")
  OPTIONAL { ?property schema:description ?description . FILTER(LANG(?description) = "en") }
}
""",
    KG.DBPEDIA: """
SELECT DISTINCT ?property ?label ?description WHERE {
  ?property a rdf:Property .
  ?property rdfs:label ?label . FILTER(LANG(?label) = "en")
  OPTIONAL { ?property rdfs:comment ?description . FILTER(LANG(?description) = "en") }
}
""",
}

_TRIPLE_QUERY = """
SELECT ?head ?tail ?headDescription ?tailDescription WHERE {{
  ?s <{property_uri}> ?o .
  ?s rdfs:label ?head . FILTER(LANG(?head) = "en")
  ?o rdfs:label ?tail . FILTER(LANG(?tail) = "en")
  OPTIONAL {{ ?s schema:description ?headDescription . FILTER(LANG(?headDescription) = "en") }}
  OPTIONAL {{ ?o schema:description ?tailDescription . FILTER(LANG(?tailDescription) = "en") }}
}}
LIMIT {limit}
"""


def parse_sparql_bindings(payload: dict) -> list[dict[str, str]]:
    """Flatten a SPARQL JSON result into one {var: value} dict per row."""
    try:
        rows = payload["results"]["bindings"]
    except (KeyError, TypeError) as exc:
        raise MalformedResponse(
            f"missing results.bindings in SPARQL payload: {str(payload)[:200]!r}"
        ) from exc
    flattened = []
    for row in rows:
        flattened.append({var: cell.get("value", "") for var, cell in row.items()})
    return flattened


def _run_query(config: EndpointConfig, source: KG, query: str) -> list[dict[str, str]]:
    payload = request_json(
        "GET",
        config.resolve_url(source),
        params={"query": query, "format": "json"},
        headers={"Accept": "application/sparql-results+json"},
        attempts=config.attempts,
        timeout=config.timeout,
        rate=RateLimiter(config.rate_per_sec),
    )
    return parse_sparql_bindings(payload)


def _fixture_examples(path: str | Path):
    """A fixture may be an annotated dataset or a triples-only dump."""
    try:
        return [example.triple for example in load_examples(path)]
    except SchemaViolation:
        return load_triples(path)


def fetch_relations(source: KG, config: EndpointConfig) -> list[RelationRecord]:
    """All relations of one KG, with English labels and descriptions.

    Offline mode collects the distinct relations of the fixture file (first
    appearance order); live mode pages through the KG-appropriate property
    query. Relation order is recorded order, kept for reproducibility.
    """
    if config.fixture_path is not None:
        seen: dict[str, RelationRecord] = {}
        for triple in _fixture_examples(config.fixture_path):
            relation = triple.relation
            if relation.source is source and relation.id not in seen:
                seen[relation.id] = relation
        return list(seen.values())
    if source not in _RELATION_QUERIES:
        raise MalformedResponse(
            f"{source.value} has no live relation query; provide a dump file"
        )
    records = []
    for row in _run_query(config, source, _RELATION_QUERIES[source]):
        label = row.get("label", "").strip()
        if not label:
            continue
        records.append(
            RelationRecord(
                id=row.get("property", "").rsplit("/", 1)[-1],
                label=label,
                source=source,
                description=row.get("description") or None,
            )
        )
    return records


def fetch_triples(
    relation: RelationRecord, limit: int = 5, config: EndpointConfig | None = None
) -> list[TripleRecord]:
    """Up to `limit` triples using the relation, in endpoint/fixture order."""
    if config is None:
        config = EndpointConfig()
    if limit <= 0:
        raise ValueError("limit must be positive")
    if config.fixture_path is not None:
        triples = [
            triple
            for triple in _fixture_examples(config.fixture_path)
            if triple.relation.id == relation.id
            and triple.relation.source is relation.source
        ]
        return triples[:limit]
    property_uri = relation.id
    if not property_uri:
        raise RelationUnknown(f"relation {relation.label!r} has no id to query")
    if relation.source is KG.WIKIDATA and not property_uri.startswith("http"):
        property_uri = f"http://www.wikidata.org/prop/direct/{property_uri}"
    rows = _run_query(
        config,
        relation.source,
        _TRIPLE_QUERY.format(property_uri=property_uri, limit=limit),
    )
    triples = []
    for row in rows:
        head, tail = row.get("head", ""), row.get("tail", "")
        if not head or not tail:
            continue
        triples.append(
            TripleRecord(
                head=head,
                relation=relation,
                tail=tail,
                head_description=row.get("headDescription") or None,
                tail_description=row.get("tailDescription") or None,
            )
        )
    return triples[:limit]


def ingest(
    source: KG,
    config: EndpointConfig,
    triples_per_relation: int = 5,
) -> list[TripleRecord]:
    """fetch -> filter -> fetch triples -> filter, for one KG."""
    kept_relations = [
        relation
        for relation in fetch_relations(source, config)
        if filter_relation(relation).kept
    ]
    result: list[TripleRecord] = []
    for relation in kept_relations:
        for triple in fetch_triples(relation, triples_per_relation, config):
            if filter_triple(triple).kept:
                result.append(triple)
    return result
