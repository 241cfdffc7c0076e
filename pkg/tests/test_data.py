"""Data model, delexicalization, quality filtering, and JSONL persistence."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rel2text.data import (
    KG,
    Dataset,
    DelexTemplate,
    Example,
    PlaceholderCollision,
    Quality,
    RelationRecord,
    TripleRecord,
    VerbalizationRecord,
    dataset_stats,
    delexicalize,
    effective_head,
    effective_tail,
    example_to_obj,
    is_delexicalizable,
    load_dataset,
    load_examples,
    load_triples,
    quality_filter,
    save_examples,
    save_triples,
    select_one_per_triple,
    with_split_tag,
)
from rel2text.errors import (
    DuplicateTripleId,
    EntityNotFound,
    IOFailure,
    OverlappingEntities,
    SchemaViolation,
)


def make_example(head="Abbey Road", label="musicBy", tail="The Beatles",
                 text=None, quality=Quality.OK, annotator="a1", overrides=None,
                 source=KG.WIKIDATA):
    triple = TripleRecord(
        head=head,
        relation=RelationRecord(id="P86", label=label, source=source,
                                description="who made it"),
        tail=tail,
        head_description="studio album",
        tail_description="rock band",
    )
    reference = VerbalizationRecord(
        triple_ref=triple.triple_id,
        text=text if text is not None else f"{head} was made by {tail}.",
        quality=quality,
        annotator_id=annotator,
        entity_overrides=overrides,
    )
    return Example(triple=triple, reference=reference)


# ---------------------------------------------------------------------------
# Identity and overrides


def test_triple_id_is_surface_tuple():
    example = make_example()
    assert json.loads(example.triple.triple_id) == [
        "Abbey Road", "musicBy", "The Beatles",
    ]
    assert example.example_id == example.triple.triple_id


def test_triple_id_distinguishes_direction():
    forward = make_example(head="A", tail="B")
    backward = make_example(head="B", tail="A")
    assert forward.example_id != backward.example_id


def test_entity_overrides_change_effective_surfaces():
    example = make_example(overrides={"tail": "Beatles"})
    assert effective_head(example) == "Abbey Road"
    assert effective_tail(example) == "Beatles"


# ---------------------------------------------------------------------------
# Delexicalization


def test_delexicalize_basic():
    template = delexicalize("Abbey Road was made by The Beatles.",
                            "Abbey Road", "The Beatles")
    assert template.pattern == "X was made by Y."
    assert template.substitute("Abbey Road", "The Beatles") == (
        "Abbey Road was made by The Beatles."
    )


def test_delexicalize_replaces_leftmost_occurrence_only():
    template = delexicalize("Paris honors Paris through the Paris award.",
                            "Paris award", "Paris")
    # the longer entity wins first: "Paris award" -> X, then the leftmost
    # remaining "Paris" -> Y
    assert template.pattern == "Y honors Paris through the X."


def test_delexicalize_longest_entity_first_on_containment():
    template = delexicalize("New York City is in New York.",
                            "New York City", "New York")
    assert template.pattern == "X is in Y."


def test_delexicalize_head_wins_length_ties():
    template = delexicalize("ab meets cd.", "ab", "cd")
    assert template.pattern == "X meets Y."
    tied = delexicalize("aa and aa.", "aa", "aa")
    # both entities share a surface: head takes the leftmost slot
    assert tied.pattern == "X and Y."


def test_delexicalize_missing_entity():
    with pytest.raises(EntityNotFound) as err:
        delexicalize("The Beatles made something.", "Abbey Road", "The Beatles")
    assert "head" in str(err.value)


def test_delexicalize_entity_only_inside_other():
    # "York" occurs in the text only within "New York City"
    with pytest.raises(OverlappingEntities):
        delexicalize("New York City is big.", "New York City", "York")


def test_delexicalize_rejects_stray_placeholder():
    with pytest.raises(PlaceholderCollision):
        delexicalize("X marks Abbey Road by The Beatles.",
                     "Abbey Road", "The Beatles")


def test_delexicalize_allows_embedded_x_letter():
    # "Xavier" contains X but not as a standalone placeholder
    template = delexicalize("Xavier visited Rome.", "Xavier", "Rome")
    assert template.pattern == "X visited Y."


def test_delexicalize_mid_word_match_fails_round_trip():
    # the only "art" sits inside "Martha": replacing it would yield
    # "M X ha" style garbage that cannot round-trip as standalone X
    with pytest.raises((PlaceholderCollision, OverlappingEntities)):
        delexicalize("Martha paints.", "art", "Martha")


def test_substitute_is_single_pass():
    # a head containing "Y" must not be re-substituted by the tail pass
    template = DelexTemplate("X meets Y.")
    assert template.substitute("Y Company", "Z Inc") == "Y Company meets Z Inc."


def test_is_delexicalizable_uses_overrides():
    example = make_example(
        text="Abbey Road was made by Beatles.",
        overrides={"tail": "Beatles"},
    )
    assert is_delexicalizable(example) is True
    assert is_delexicalizable(make_example(text="Something else entirely.")) is False


@given(st.text(alphabet="abc XY.", max_size=30))
@settings(max_examples=100, deadline=None)
def test_delexicalize_round_trips_or_raises(text):
    head, tail = "abba", "cab"
    try:
        template = delexicalize(text, head, tail)
    except (EntityNotFound, OverlappingEntities):
        return
    assert template.substitute(head, tail) == text


# ---------------------------------------------------------------------------
# Quality filtering


def test_quality_filter_keeps_order_and_subset():
    rows = [
        make_example(head="A", quality=Quality.OK),
        make_example(head="B", quality=Quality.NOISY),
        make_example(head="C", quality=Quality.OK),
        make_example(head="D", quality=Quality.CORRUPTED),
        make_example(head="E", quality=Quality.EXTRA_INFO),
    ]
    kept = quality_filter(rows, {Quality.OK})
    assert [r.triple.head for r in kept] == ["A", "C"]
    both = quality_filter(rows, {Quality.OK, Quality.EXTRA_INFO})
    assert [r.triple.head for r in both] == ["A", "C", "E"]


def test_select_one_per_triple_prefers_annotator_then_order():
    first = make_example(annotator="b")
    second = make_example(annotator="a")
    third = make_example(annotator="a")
    selected = select_one_per_triple([first, second, third])
    assert selected == [second]
    # distinct triples all survive, in input order
    rows = [make_example(head="A"), make_example(head="B"), make_example(head="A")]
    assert [r.triple.head for r in select_one_per_triple(rows)] == ["A", "B"]


# ---------------------------------------------------------------------------
# Persistence


def test_save_load_round_trip(tmp_path):
    examples = [
        make_example(),
        make_example(head="Café Müller", label="choreographer",
                     tail="Pina Bausch", quality=Quality.NOISY,
                     overrides={"head": "Cafe Muller"}),
    ]
    path = tmp_path / "data.jsonl"
    save_examples(examples, path)
    raw = path.read_text(encoding="utf-8")
    assert raw.endswith("\n") and "\r" not in raw
    assert "Café Müller" in raw  # ensure_ascii off
    loaded = load_examples(path)
    assert loaded == examples


def test_serialized_schema_shape():
    obj = example_to_obj(make_example())
    assert set(obj) == {"triple", "reference"}
    assert list(obj["triple"]) == [
        "head", "relation", "tail", "head_description", "tail_description",
    ]
    assert list(obj["triple"]["relation"]) == ["label", "description", "source", "id"]
    assert list(obj["reference"]) == [
        "text", "quality", "annotator_id", "entity_overrides",
    ]


def test_split_tag_round_trip(tmp_path):
    tagged = with_split_tag(make_example(), "test")
    assert example_to_obj(tagged)["split"] == "test"
    path = tmp_path / "tagged.jsonl"
    save_examples([tagged], path)
    assert load_examples(path)[0].split_tag == "test"


def test_load_skips_blank_lines(tmp_path):
    path = tmp_path / "gaps.jsonl"
    line = json.dumps(example_to_obj(make_example()))
    path.write_text(f"\n{line}\n\n{line}\n", encoding="utf-8")
    assert len(load_examples(path)) == 2


@pytest.mark.parametrize(
    "mutate,field",
    [
        (lambda o: o.pop("triple"), "triple"),
        (lambda o: o["triple"].pop("head"), "triple.head"),
        (lambda o: o["triple"].update(head=""), "triple.head"),
        (lambda o: o["triple"]["relation"].pop("label"), "triple.relation.label"),
        (lambda o: o["triple"]["relation"].update(source="Freebase"),
         "triple.relation.source"),
        (lambda o: o.pop("reference"), "reference"),
        (lambda o: o["reference"].update(text=""), "reference.text"),
        (lambda o: o["reference"].update(quality="Great"), "reference.quality"),
        (lambda o: o["reference"].update(entity_overrides={"middle": "x"}),
         "reference.entity_overrides"),
    ],
)
def test_schema_violations(tmp_path, mutate, field):
    obj = example_to_obj(make_example())
    mutate(obj)
    path = tmp_path / "bad.jsonl"
    path.write_text(json.dumps(obj) + "\n", encoding="utf-8")
    with pytest.raises(SchemaViolation) as err:
        load_examples(path)
    assert err.value.field == field
    assert err.value.line == 1


def test_schema_violation_reports_line_number(tmp_path):
    good = json.dumps(example_to_obj(make_example()))
    bad = json.dumps({"triple": {"head": "A"}})
    path = tmp_path / "mixed.jsonl"
    path.write_text(f"{good}\n{bad}\n", encoding="utf-8")
    with pytest.raises(SchemaViolation) as err:
        load_examples(path)
    assert err.value.line == 2


def test_invalid_json_is_schema_violation(tmp_path):
    path = tmp_path / "broken.jsonl"
    path.write_text("{not json}\n", encoding="utf-8")
    with pytest.raises(SchemaViolation):
        load_examples(path)


def test_load_dataset_rejects_duplicate_triples(tmp_path):
    line = json.dumps(example_to_obj(make_example()))
    path = tmp_path / "dup.jsonl"
    path.write_text(f"{line}\n{line}\n", encoding="utf-8")
    with pytest.raises(DuplicateTripleId):
        load_dataset(path)
    # load_examples allows the same file
    assert len(load_examples(path)) == 2


def test_load_dataset_returns_dataset(tmp_path):
    path = tmp_path / "ok.jsonl"
    save_examples([make_example(), make_example(head="Other")], path)
    dataset = load_dataset(path)
    assert len(dataset) == 2
    assert dataset.path == str(path)
    assert set(dataset.by_id()) == {e.example_id for e in dataset.examples}


def test_missing_file_is_io_failure(tmp_path):
    with pytest.raises(IOFailure):
        load_examples(tmp_path / "absent.jsonl")


def test_triples_only_round_trip(tmp_path):
    triples = [make_example().triple, make_example(head="Other").triple]
    path = tmp_path / "triples.jsonl"
    save_triples(triples, path)
    obj = json.loads(path.read_text(encoding="utf-8").splitlines()[0])
    assert set(obj) == {"triple"}
    assert load_triples(path) == triples


# ---------------------------------------------------------------------------
# Stats


def test_dataset_stats_counts():
    examples = (
        make_example(),
        make_example(head="Bad", text="No entities here at all."),
        make_example(head="Rome", label="capitalOf", tail="Italy",
                     text="Rome is the capital of Italy.", source=KG.DBPEDIA),
    )
    stats = dataset_stats(Dataset(examples=examples))
    assert stats["examples"] == 3
    assert stats["relations"] == 2
    assert stats["per_source"] == {"DBPedia": 1, "Wikidata": 2}
    assert stats["per_quality"] == {"OK": 3}
    assert stats["non_delexicalizable"] == 1
    assert stats["delexicalizable_fraction"] == round(2 / 3, 6)


def test_dataset_stats_empty():
    stats = dataset_stats(Dataset(examples=()))
    assert stats["examples"] == 0
    assert stats["delexicalizable_fraction"] == 1.0


def test_relation_labels_first_appearance_order():
    dataset = Dataset(examples=(
        make_example(label="b"),
        make_example(head="2", label="a"),
        make_example(head="3", label="b"),
    ))
    assert dataset.relation_labels() == ["b", "a"]
