"""Build the released corpus artifacts under data/.

Every artifact is synthetic: relation labels, entity names, and reference
texts come from seeded generators. The generator parameters below were
calibrated so the frozen release reproduces the documented corpus
statistics: record and quality counts exactly, and the test-split diversity
and copy-baseline metrics within their acceptance windows.

Usage:
    python3 scripts/build_corpus.py --calibrate   # print stats, write nothing
    python3 scripts/build_corpus.py --out data    # write the release

The release is deterministic for a fixed --seed (default: the frozen one).
"""

from __future__ import annotations

import argparse
import json
import random
import sys

import numpy as np
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rel2text import cli, metrics, splits
from rel2text.data import (
    KG,
    Dataset,
    Example,
    Quality,
    RelationRecord,
    TripleRecord,
    VerbalizationRecord,
    is_delexicalizable,
    quality_filter,
    save_examples,
    select_one_per_triple,
)
from rel2text.transforms import split_camel_case
from rel2text.verbalize import copy_verbalize

SEED = 20240117
SPLIT_SEED = 26

# Exact release counts.
QUALITY_COUNTS = {
    Quality.OK: 4469,
    Quality.NOISY: 1314,
    Quality.CORRUPTED: 2246,
    Quality.EXTRA_INFO: 235,
}
CURATED_EXAMPLES = 4097
CURATED_RELATIONS = 1522
FULL_TRIPLES = 7334
FULL_RELATIONS = 1716
NON_DELEX = 57

# Calibrated generator knobs (see notes/decisions.md for the trace).
NAME_POOL_SIZE = 2400          # distinct entity name tokens in circulation
TAIL_POOL_PER_RELATION = 2     # tail entities a relation draws from
HEAD_TOKENS = ([1, 2, 3], [0.08, 0.32, 0.60])
TAIL_TOKENS = ([1, 2, 3], [0.18, 0.48, 0.34])
P_ENTITY_PREFIX = 0.13         # multi-token entities opening with a shared prefix
P_TERSE = 0.20                 # reference repeats the copy string verbatim
P_BROKEN_JUNCTION = 0.42       # connector inserted between label and tail
P_SUFFIX = 0.21                # trailing clause on the reference
P_CONNECTOR = 0.26             # hedging phrase between copula and tail
P_INVERTED = 0.14              # tail-first phrasing for noun labels
P_NOUN_FRAME = 0.46            # noun labels phrased with a copular frame
P_VERB_LABEL = 0.40            # share of relations with verb-initial labels
PREPS_PER_OPENER = 3           # label openers pair with this many connectors
NOUN_PARTNERS = 5              # compound partners per opening noun

EMBED_DIM = 64
WEBNLG_LIST_SIZE = 354
KELM_LIST_SIZE = 810

SYLLABLES = [
    "ba", "bel", "bor", "bra", "ca", "cel", "dan", "del", "dor", "dra",
    "el", "fa", "fen", "fir", "ga", "gar", "gol", "ha", "hel", "hol",
    "ir", "ja", "jor", "ka", "kal", "ken", "la", "lim", "lor", "lu",
    "ma", "mel", "mir", "mon", "na", "nor", "nu", "ol", "pa", "pel",
    "quin", "ra", "rel", "rin", "ro", "sa", "sel", "sor", "su", "ta",
    "tel", "tor", "tu", "ul", "va", "vel", "vin", "vo", "wa", "wen",
    "yor", "za", "zel", "zu",
]

VERB_STEMS = [
    "located", "born", "written", "produced", "founded", "directed", "used",
    "made", "held", "signed", "based", "formed", "named", "known", "shown",
    "played", "built", "set", "run", "kept", "placed", "raised", "drawn",
    "cast", "voiced", "backed", "hosted", "owned", "paired", "staged",
    "traded", "earned", "filed", "worn", "sold", "grown", "trained",
    "issued", "coined", "carved", "minted", "penned", "scored", "seated",
    "housed", "buried", "docked", "joined", "listed", "mapped", "merged",
    "opened", "parked", "phased", "pinned", "pooled", "ported", "posted",
    "routed", "sailed", "served", "shared", "shipped", "sorted", "stored",
    "styled", "taught", "tested", "timed", "titled", "towed", "tracked",
    "valued", "vested", "viewed", "walked", "weighed", "wired", "zoned",
    "argued", "banked",
]
PREPS = ["in", "by", "of", "at", "from", "for", "on", "with", "near", "under"]
NOUN_STEMS = [
    "place", "date", "year", "name", "label", "field", "work", "country",
    "city", "member", "author", "parent", "team", "genre", "owner", "league",
    "spouse", "capital", "language", "height", "area", "status", "series",
    "season", "group", "party", "region", "school", "club", "award", "title",
    "role", "unit", "site", "source", "basis", "origin", "family", "partner",
    "agency", "market", "sector", "branch", "agent", "honor", "motto",
    "anthem", "emblem", "crest", "venue", "river", "planet", "album",
    "anchor", "badge", "banner", "basin", "border", "bridge", "cabin",
    "canal", "castle", "chapter", "charter", "circuit", "coast", "colony",
    "column", "comet", "council", "county", "course", "crater", "crew",
    "crown", "depot", "design", "device", "district", "domain", "editor",
    "engine", "estate", "fleet", "forest", "fort", "garden", "harbor",
    "hill", "island", "lake", "manor", "mayor", "mentor", "mill", "mine",
    "mission", "mount", "museum", "office", "orbit", "parish", "patron",
    "peak", "pier", "port", "press", "prize", "quarter", "ridge", "road",
    "route", "shore", "square", "stage", "station", "street", "summit",
    "temple", "terrace", "tower", "trail", "valley", "ward", "wing",
]
QUALIFIERS = [
    "first", "last", "main", "home", "prior", "final", "joint", "lead",
    "north", "south", "upper", "lower",
]

COPULAS = ["is", "was", "remains", "became"]
COPULA_WEIGHTS = [0.40, 0.35, 0.15, 0.10]
ENTITY_PREFIXES = [
    "New", "Fort", "Lake", "Old", "Port", "Mount", "San", "East", "West",
    "Cape",
]
CONNECTORS = [
    "known to be", "said to be", "listed as", "recorded as", "counted as",
    "held to be", "seen as", "taken to be", "billed as", "cited as",
    "regarded as", "reckoned as",
]
VERB_LEADS = [
    "has long been", "came to be", "has been", "would later be", "was once",
    "is still", "had been", "is reportedly", "was briefly", "is officially",
]
PARAPHRASES = [
    "belongs to", "stands with", "comes from", "sits within", "goes under",
    "works beside", "appears alongside", "runs through", "answers to",
    "lines up with", "traces back to", "leans on", "ties into",
    "falls under", "pairs off with", "grew out of", "stems from",
    "stays close to", "speaks for", "reaches toward", "nods toward",
    "circles back to", "drifts toward", "clings to", "owes much to",
    "takes after", "looks toward", "bends toward", "points back at",
    "settles beneath", "gravitates toward", "harks back to", "sides with",
    "melds into", "threads through", "anchors itself to", "veers toward",
    "defers to", "orbits around", "hinges on",
]
SUFFIX_PREPS = [
    "across", "after", "amid", "before", "beyond", "during", "despite",
    "throughout", "following", "per",
]
SUFFIX_ADJS = [
    "quiet", "long", "brief", "early", "later", "minor", "steady", "busy",
    "lean", "golden", "turbulent", "formative", "harsh", "calm", "festive",
    "rainy", "crowded", "sparse", "prosperous", "contested",
]
SUFFIX_NOUNS = [
    "seasons", "decades", "campaigns", "tenures", "stretches", "spells",
    "revivals", "upheavals", "winters", "summers", "elections",
    "renovations", "negotiations", "festivals", "recessions", "tours",
    "mandates", "droughts", "booms", "reforms",
]
YEAR_PREPS = [
    "in", "since", "until", "after", "around", "by", "before", "circa",
    "toward", "past", "through", "near",
]
JUNCTION_ARTICLES = ["the", "a", "its"]
FIXED_SUFFIXES = [
    "to this day", "by most accounts", "at the time", "for many years",
    "against expectations", "behind closed doors", "between tours",
    "without serious rivals", "pending formal approval",
    "save rare exceptions", "despite sparse archives",
    "per disputed tallies", "beyond coastal hamlets", "amid fervent debates",
    "following hasty repairs", "under gentler stewardship",
]
EXTRA_CLAUSES = [
    "and it also holds the {noun} of {name}",
    "and the {noun} later moved to {name}",
    "which earned the {noun} award from {name}",
    "and critics linked it with {name} as well",
]
CORRUPTED_TEXTS = [
    "n/a", "-", "ok", "good", "asdf gh", "???", "see above", "same",
    "dont know", "skip this one", "qwer ty", "xx", "..", "no idea",
]
DESCRIPTION_SHAPES = [
    "the {a} associated with the subject",
    "who or what the subject is {a}",
    "the {a} that applies to this entry",
    "identifies the {a} linked with the item",
    "relates the item to its {a}",
    "the {a} recorded for the subject",
]


# ---------------------------------------------------------------------------
# Name and label inventories


def build_name_pool(rng: random.Random, size: int) -> list[str]:
    pool: list[str] = []
    seen = set()
    while len(pool) < size:
        token = "".join(rng.choice(SYLLABLES) for _ in range(rng.choice((2, 2, 3))))
        token = token.capitalize()
        if token not in seen:
            seen.add(token)
            pool.append(token)
    return pool


def build_labels(rng: random.Random, count: int) -> list[tuple[str, bool]]:
    """(label, verb_initial) pairs, distinct raw labels.

    Each opening word pairs with a small fixed set of continuations, which
    keeps within-label word transitions concentrated across the corpus.
    """
    verb_preps = {verb: rng.sample(PREPS, PREPS_PER_OPENER) for verb in VERB_STEMS}
    noun_preps = {noun: rng.sample(PREPS, PREPS_PER_OPENER) for noun in NOUN_STEMS}
    noun_partners = {
        noun: rng.sample([m for m in NOUN_STEMS if m != noun], NOUN_PARTNERS)
        for noun in NOUN_STEMS
    }
    qualifier_nouns = {q: rng.sample(NOUN_STEMS, 10) for q in QUALIFIERS}

    candidates: list[tuple[str, bool]] = []
    for noun in NOUN_STEMS:
        candidates.append((noun, False))
    for verb, preps in verb_preps.items():
        for prep in preps:
            candidates.append((f"{verb}{prep.capitalize()}", True))
    for noun, preps in noun_preps.items():
        for prep in preps:
            candidates.append((f"{noun}{prep.capitalize()}", False))
    for qualifier, nouns in qualifier_nouns.items():
        for noun in nouns:
            candidates.append((f"{qualifier}{noun.capitalize()}", False))
    for noun, partners in noun_partners.items():
        for partner in partners:
            candidates.append((f"{noun}{partner.capitalize()}", False))
    # three-word labels reuse each noun's fixed connector set
    for qualifier, nouns in qualifier_nouns.items():
        for noun in nouns:
            for prep in noun_preps[noun][:2]:
                candidates.append(
                    (f"{qualifier}{noun.capitalize()}{prep.capitalize()}", False)
                )

    unique: dict[str, bool] = {}
    for label, verb_initial in candidates:
        unique.setdefault(label, verb_initial)
    items = list(unique.items())
    rng.shuffle(items)
    verb_labels = [c for c in items if c[1]]
    noun_labels = [c for c in items if not c[1]]
    n_verb = min(len(verb_labels), round(count * P_VERB_LABEL))
    chosen = verb_labels[:n_verb] + noun_labels[: count - n_verb]
    if len(chosen) < count:
        raise RuntimeError(f"label inventory too small: {len(chosen)} < {count}")
    rng.shuffle(chosen)
    return chosen


def make_description(rng: random.Random, label: str) -> str:
    words = split_camel_case(label)
    return rng.choice(DESCRIPTION_SHAPES).format(a=words)


# ---------------------------------------------------------------------------
# Corpus assembly


class Generator:
    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.names = build_name_pool(self.rng, NAME_POOL_SIZE)
        self.annotators = [f"a{n:02d}" for n in range(1, 61)]
        self.year_pool = [str(y) for y in range(1902, 2024)]

    def entity(self, n_tokens: int) -> str:
        tokens = [self.rng.choice(self.names) for _ in range(n_tokens)]
        if n_tokens >= 2 and self.rng.random() < P_ENTITY_PREFIX:
            tokens[0] = self.rng.choice(ENTITY_PREFIXES)
        return " ".join(tokens)

    def sample_entity(self, spec) -> str:
        sizes, weights = spec
        return self.entity(self.rng.choices(sizes, weights)[0])

    def suffix(self) -> str:
        roll = self.rng.random()
        if roll < 0.25:
            return (f"{self.rng.choice(SUFFIX_PREPS)} "
                    f"{self.rng.choice(SUFFIX_ADJS)} {self.rng.choice(SUFFIX_NOUNS)}")
        if roll < 0.50:
            return f"{self.rng.choice(SUFFIX_PREPS)} {self.rng.choice(SUFFIX_NOUNS)}"
        if roll < 0.75:
            return f"{self.rng.choice(YEAR_PREPS)} {self.rng.choice(self.year_pool)}"
        return self.rng.choice(FIXED_SUFFIXES)

    def copula(self) -> str:
        return self.rng.choices(COPULAS, COPULA_WEIGHTS)[0]

    def ok_text(self, head: str, label_words: str, tail: str, verb_label: bool) -> str:
        roll = self.rng.random()
        suffix = f" {self.suffix()}" if self.rng.random() < P_SUFFIX else ""
        tail_clause = f"{tail}{suffix}"
        if roll < P_TERSE:
            return f"{head} {label_words} {tail_clause}."
        if verb_label:
            if self.rng.random() < P_CONNECTOR:
                lead = self.rng.choice(VERB_LEADS)
                return f"{head} {lead} {label_words} {tail_clause}."
            copula = self.copula()
            if self.rng.random() < P_BROKEN_JUNCTION:
                article = self.rng.choice(JUNCTION_ARTICLES)
                return f"{head} {copula} {label_words} {article} {tail_clause}."
            return f"{head} {copula} {label_words} {tail_clause}."
        if roll < P_TERSE + P_NOUN_FRAME - P_INVERTED:
            core = f"The {label_words} of {head} {self.copula()}"
            if self.rng.random() < P_CONNECTOR:
                core = f"{core} {self.rng.choice(CONNECTORS)}"
            return f"{core} {tail_clause}."
        if roll < P_TERSE + P_NOUN_FRAME:
            return f"{tail} {self.copula()} the {label_words} of {head}{suffix}."
        return f"{head} {self.rng.choice(PARAPHRASES)} {tail_clause}."

    def noisy_text(self, head: str, label_words: str, tail: str) -> str:
        roll = self.rng.random()
        if roll < 0.4:
            return f"{self.rng.choice(COPULAS[:2])} {label_words} {tail}."
        if roll < 0.7:
            return f"{head.lower()} {label_words} maybe {tail.lower()}"
        return f"{head} {label_words}"

    def extra_text(self, head: str, label_words: str, tail: str) -> str:
        base = f"{head} {self.copula()} {label_words} {tail}"
        clause = self.rng.choice(EXTRA_CLAUSES).format(
            noun=self.rng.choice(NOUN_STEMS), name=self.rng.choice(self.names)
        )
        return f"{base} {clause}."

    def corrupted_text(self) -> str:
        return self.rng.choice(CORRUPTED_TEXTS)


def plan_counts(rng: random.Random, labels: list[tuple[str, bool]]):
    """Distribute triples and records so every exact total is met.

    Short labels soak up more triples, mirroring how generic relations
    dominate a crawled corpus.
    """
    word_counts = [len(split_camel_case(label).split()) for label, _ in labels]
    ok_counts = [1] * CURATED_RELATIONS
    weights = [
        (1.0 / word_counts[i] ** 2) * (1.0 + 3.0 / (1 + (i % 37)))
        for i in range(CURATED_RELATIONS)
    ]
    picks = rng.choices(
        range(CURATED_RELATIONS), weights, k=CURATED_EXAMPLES - CURATED_RELATIONS
    )
    for index in picks:
        ok_counts[index] += 1
    assert sum(ok_counts) == CURATED_EXAMPLES

    # non-OK-only triples: every relation may carry them, non-curated must
    extra_triples = FULL_TRIPLES - CURATED_EXAMPLES
    nonok_counts = [0] * FULL_RELATIONS
    for index in range(CURATED_RELATIONS, FULL_RELATIONS):
        nonok_counts[index] += 1
    remaining = extra_triples - (FULL_RELATIONS - CURATED_RELATIONS)
    for index in rng.choices(range(FULL_RELATIONS), k=remaining):
        nonok_counts[index] += 1
    assert sum(nonok_counts) == extra_triples
    return ok_counts, nonok_counts


def build_corpus(seed: int) -> tuple[list[Example], list[Example]]:
    """Returns (full release rows, curated rows)."""
    gen = Generator(seed)
    rng = gen.rng
    labels = build_labels(rng, FULL_RELATIONS)
    ok_counts, nonok_counts = plan_counts(rng, labels)

    sources = rng.choices(
        [KG.WIKIDATA, KG.DBPEDIA, KG.YAGO], weights=[0.6, 0.3, 0.1], k=FULL_RELATIONS
    )

    relations = []
    for index, (label, verb_initial) in enumerate(labels):
        source = sources[index]
        if source is KG.WIKIDATA:
            rel_id = f"P{1000 + index}"
        elif source is KG.DBPEDIA:
            rel_id = f"dbo:{label}"
        else:
            rel_id = f"yago:{label}"
        relations.append(
            (
                RelationRecord(
                    id=rel_id, label=label, source=source,
                    description=make_description(rng, label),
                ),
                verb_initial,
            )
        )

    # one small tail pool per relation drives local repetition
    tail_pools = []
    for _ in range(FULL_RELATIONS):
        tail_pools.append(
            [gen.sample_entity(TAIL_TOKENS) for _ in range(TAIL_POOL_PER_RELATION)]
        )

    def new_triple(rel_index: int, used: set[tuple[str, str]]) -> TripleRecord:
        relation, _ = relations[rel_index]
        for _ in range(64):
            head = gen.sample_entity(HEAD_TOKENS)
            tail = rng.choice(tail_pools[rel_index])
            if (head, tail) in used:
                continue
            if head in tail or tail in head:
                continue
            if set(head.split()) & set(tail.split()):
                continue
            used.add((head, tail))
            return TripleRecord(
                head=head,
                relation=relation,
                tail=tail,
                head_description=f"a {rng.choice(NOUN_STEMS)} of note",
                tail_description=f"a {rng.choice(NOUN_STEMS)} on record",
            )
        raise RuntimeError("entity collision loop exceeded")

    # lay out OK triples per relation, remember single-response ones for the
    # non-delex rewrite
    ok_rows: list[tuple[int, TripleRecord]] = []  # (relation index, triple)
    nonok_rows: list[tuple[int, TripleRecord]] = []
    for rel_index in range(FULL_RELATIONS):
        used: set[tuple[str, str]] = set()
        n_ok = ok_counts[rel_index] if rel_index < CURATED_RELATIONS else 0
        for _ in range(n_ok):
            ok_rows.append((rel_index, new_triple(rel_index, used)))
        for _ in range(nonok_counts[rel_index]):
            nonok_rows.append((rel_index, new_triple(rel_index, used)))

    # extra OK responses: distinct triples drawn once more
    duplicate_ok = rng.sample(range(len(ok_rows)), QUALITY_COUNTS[Quality.OK] - CURATED_EXAMPLES)
    duplicated = set(duplicate_ok)

    # the 57 non-delex rewrites come from single-response OK triples
    single_response = [i for i in range(len(ok_rows)) if i not in duplicated]
    non_delex_rows = set(rng.sample(single_response, NON_DELEX))

    # non-OK record slots: one per non-OK triple plus extras anywhere
    nonok_records = QUALITY_COUNTS[Quality.NOISY] + QUALITY_COUNTS[Quality.CORRUPTED] \
        + QUALITY_COUNTS[Quality.EXTRA_INFO]
    slots: list[tuple[str, int]] = [("nonok", i) for i in range(len(nonok_rows))]
    extra_slots = nonok_records - len(nonok_rows)
    for _ in range(extra_slots):
        if rng.random() < 0.5:
            slots.append(("ok", rng.randrange(len(ok_rows))))
        else:
            slots.append(("nonok", rng.randrange(len(nonok_rows))))
    quality_deck = (
        [Quality.NOISY] * QUALITY_COUNTS[Quality.NOISY]
        + [Quality.CORRUPTED] * QUALITY_COUNTS[Quality.CORRUPTED]
        + [Quality.EXTRA_INFO] * QUALITY_COUNTS[Quality.EXTRA_INFO]
    )
    rng.shuffle(quality_deck)
    slot_quality: dict[str, dict[int, list[Quality]]] = {}
    for slot, quality in zip(slots, quality_deck):
        slot_quality.setdefault(slot[0], {}).setdefault(slot[1], []).append(quality)

    def record(triple: TripleRecord, text: str, quality: Quality) -> Example:
        return Example(
            triple=triple,
            reference=VerbalizationRecord(
                triple_ref=triple.triple_id,
                text=text,
                quality=quality,
                annotator_id=rng.choice(gen.annotators),
                entity_overrides=None,
            ),
        )

    def non_ok_record(triple: TripleRecord, label_words: str, quality: Quality) -> Example:
        if quality is Quality.NOISY:
            text = gen.noisy_text(triple.head, label_words, triple.tail)
        elif quality is Quality.CORRUPTED:
            text = gen.corrupted_text()
        else:
            text = gen.extra_text(triple.head, label_words, triple.tail)
        return record(triple, text, quality)

    # emit grouped by relation: OK triples first, then non-OK-only triples
    by_relation_ok: dict[int, list[int]] = {}
    for row_index, (rel_index, _) in enumerate(ok_rows):
        by_relation_ok.setdefault(rel_index, []).append(row_index)
    by_relation_nonok: dict[int, list[int]] = {}
    for row_index, (rel_index, _) in enumerate(nonok_rows):
        by_relation_nonok.setdefault(rel_index, []).append(row_index)

    full: list[Example] = []
    for rel_index in range(FULL_RELATIONS):
        relation, verb_initial = relations[rel_index]
        label_words = split_camel_case(relation.label)
        for row_index in by_relation_ok.get(rel_index, []):
            _, triple = ok_rows[row_index]
            text = gen.ok_text(triple.head, label_words, triple.tail, verb_initial)
            if row_index in non_delex_rows:
                # lowercase the head mention so exact-match delex fails
                text = text.replace(triple.head, triple.head.lower(), 1)
            full.append(record(triple, text, Quality.OK))
            if row_index in duplicated:
                text2 = gen.ok_text(triple.head, label_words, triple.tail, verb_initial)
                full.append(record(triple, text2, Quality.OK))
            for quality in slot_quality.get("ok", {}).get(row_index, []):
                full.append(non_ok_record(triple, label_words, quality))
        for row_index in by_relation_nonok.get(rel_index, []):
            _, triple = nonok_rows[row_index]
            for quality in slot_quality.get("nonok", {}).get(row_index, []):
                full.append(non_ok_record(triple, label_words, quality))

    curated = select_one_per_triple(quality_filter(full, {Quality.OK}))
    return full, curated


# ---------------------------------------------------------------------------
# Embeddings and reference lists


def char_ngram_vector(label: str, dim: int = EMBED_DIM) -> list[float]:
    """Hashed character-trigram profile of the split label, L2-normalized."""
    import hashlib

    words = split_camel_case(label)
    text = f"#{words}#"
    buckets = [0.0] * dim
    for i in range(len(text) - 2):
        gram = text[i : i + 3]
        digest = hashlib.md5(gram.encode("utf-8")).digest()
        buckets[int.from_bytes(digest[:4], "big") % dim] += 1.0
    norm = sum(v * v for v in buckets) ** 0.5
    if norm == 0.0:
        buckets[0] = 1.0
        norm = 1.0
    return [round(v / norm, 6) for v in buckets]


def build_reference_lists(rng: random.Random, corpus_labels: list[str]):
    """Two seen-elsewhere relation lists that overlap the corpus."""
    corpus_sample = rng.sample(corpus_labels, 130)
    webnlg = corpus_sample[:45]
    kelm = corpus_sample[45:]
    invented = build_labels(random.Random(rng.randrange(1 << 30)), 1400)
    pool = [label for label, _ in invented if label not in set(corpus_labels)]
    webnlg += pool[: WEBNLG_LIST_SIZE - len(webnlg)]
    kelm += pool[WEBNLG_LIST_SIZE : WEBNLG_LIST_SIZE + KELM_LIST_SIZE - len(kelm)]
    return sorted(set(webnlg)), sorted(set(kelm))


TEMPLATE_SHAPES = [
    "X {words} Y.",
    "The {noun} of X is Y.",
    "X has Y as its {noun}.",
    "Y serves as the {noun} of X.",
    "X and Y share the {noun} link.",
]


def build_templates(rng: random.Random, labels: list[str]) -> dict[str, str]:
    table = {}
    for label in labels:
        words = split_camel_case(label)
        noun = words.split()[-1]
        shape = rng.choice(TEMPLATE_SHAPES)
        table[label] = shape.format(words=words, noun=noun)
    return table


# ---------------------------------------------------------------------------
# Split + measurement


def build_split(curated: list[Example], embeddings, reference_lists, seed: int):
    dataset = Dataset(examples=tuple(curated))
    excluded = splits.exclusion_set(
        dataset.relation_labels(), reference_lists, embeddings
    )
    return splits.build_splits(dataset, excluded, seed=seed), dataset


def measure(curated: list[Example], result, dataset) -> dict:
    by_id = dataset.by_id()
    test = [by_id[example_id] for example_id in result.test.example_ids]
    outputs = [copy_verbalize(example.triple) for example in test]
    references = [example.reference.text for example in test]
    report = metrics.evaluate(outputs, references)
    human = {
        "u1": metrics.unique_ngrams(references, 1),
        "ce2": metrics.bigram_conditional_entropy(references),
        "msttr": metrics.msttr(references),
        "len": metrics.mean_length(references),
    }
    non_delex = sum(1 for example in curated if not is_delexicalizable(example))
    return {
        "test_size": len(test),
        "test_relations": len({e.triple.relation.label for e in test}),
        "copy": {
            "bleu": report.bleu, "meteor": report.meteor, "u1": report.u1,
            "ce2": report.ce2, "msttr": report.msttr, "len": report.mean_len,
        },
        "human": human,
        "counts": {
            "curated": len(curated),
            "curated_relations": len(dataset.relation_labels()),
            "non_delex": non_delex,
        },
    }


TARGETS = [
    ("copy.bleu", 29.04, 1.5),
    ("copy.u1", 1606, 30),
    ("copy.ce2", 1.17, 0.10),
    ("copy.msttr", 0.70, 0.03),
    ("copy.len", 6.72, 0.30),
    ("human.u1", 1785, 30),
    ("human.ce2", 2.13, 0.10),
    ("human.msttr", 0.62, 0.03),
    ("human.len", 9.55, 0.30),
]


def print_calibration(stats: dict) -> None:
    print(f"test size {stats['test_size']}  relations {stats['test_relations']}")
    print(f"counts: {stats['counts']}")
    for key, target, tolerance in TARGETS:
        group, field = key.split(".")
        value = stats[group][field]
        status = "ok " if abs(value - target) <= tolerance else "OFF"
        print(f"  {status} {key:12s} {value:10.4f}  target {target} +/- {tolerance}")
    print(f"  (meteor measured at {stats['copy']['meteor']:.2f})")


# ---------------------------------------------------------------------------
# Entry


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=SEED)
    parser.add_argument("--split-seed", type=int, default=SPLIT_SEED)
    parser.add_argument("--calibrate", action="store_true",
                        help="print statistics without writing files")
    parser.add_argument("--out", default="data")
    args = parser.parse_args()

    full, curated = build_corpus(args.seed)
    assert len(full) == sum(QUALITY_COUNTS.values())
    per_quality = {}
    for row in full:
        per_quality[row.reference.quality] = per_quality.get(row.reference.quality, 0) + 1
    assert per_quality == QUALITY_COUNTS
    assert len(curated) == CURATED_EXAMPLES
    assert len({e.triple.triple_id for e in full}) == FULL_TRIPLES
    assert len({e.triple.relation.label for e in full}) == FULL_RELATIONS

    meta_rng = random.Random(args.seed + 1)
    corpus_labels = sorted({e.triple.relation.label for e in curated})
    assert len(corpus_labels) == CURATED_RELATIONS
    webnlg, kelm = build_reference_lists(meta_rng, corpus_labels)
    all_labels = sorted(set(corpus_labels) | set(webnlg) | set(kelm))
    embeddings = {
        label: np.asarray(char_ngram_vector(label)) for label in all_labels
    }
    reference_lists = {"webnlg": webnlg, "kelm": kelm}

    result, dataset = build_split(curated, embeddings, reference_lists, args.split_seed)
    stats = measure(curated, result, dataset)
    print_calibration(stats)
    non_delex = stats["counts"]["non_delex"]
    assert non_delex == NON_DELEX, f"non-delex {non_delex} != {NON_DELEX}"

    if args.calibrate:
        return 0

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_examples(full, out / "rel2text_full.jsonl")
    save_examples(curated, out / "rel2text_ok.jsonl")

    with (out / "embeddings.jsonl").open("w", encoding="utf-8") as handle:
        for label in all_labels:
            handle.write(json.dumps(
                {"label": label, "vector": char_ngram_vector(label)}) + "\n")

    refs_dir = out / "reference_relations"
    refs_dir.mkdir(exist_ok=True)
    (refs_dir / "webnlg.txt").write_text("\n".join(webnlg) + "\n", encoding="utf-8")
    (refs_dir / "kelm.txt").write_text("\n".join(kelm) + "\n", encoding="utf-8")

    templates_dir = out / "templates"
    templates_dir.mkdir(exist_ok=True)
    table = build_templates(meta_rng, webnlg)
    (templates_dir / "webnlg_templates.json").write_text(
        json.dumps(table, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    splits_dir = out / "splits"
    code = cli.main([
        "split",
        "--data", str(out / "rel2text_ok.jsonl"),
        "--embeddings", str(out / "embeddings.jsonl"),
        "--reference", f"webnlg={refs_dir / 'webnlg.txt'}",
        "--reference", f"kelm={refs_dir / 'kelm.txt'}",
        "--seed", str(args.split_seed),
        "--out-dir", str(splits_dir),
    ])
    if code != 0:
        return code
    code = cli.main([
        "fewshot",
        "--data", str(out / "rel2text_ok.jsonl"),
        "--train", str(splits_dir / "train.jsonl"),
        "--seed", str(args.split_seed),
        "--out-dir", str(splits_dir),
    ])
    if code != 0:
        return code

    written = sorted(str(p.relative_to(out)) for p in out.rglob("*") if p.is_file())
    print("wrote:")
    for name in written:
        print(f"  {name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
