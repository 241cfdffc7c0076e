"""Annotation backend: validation, error tallies, session store, HTTP API."""

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from rel2text.data import (
    KG,
    Quality,
    RelationRecord,
    TripleRecord,
    load_examples,
)
from rel2text.errors import (
    OutOfOrder,
    PoolEmpty,
    SessionComplete,
    UnknownRecord,
    UnknownSession,
)
from rel2text.service import (
    AnnotationStore,
    ErrorAnnotation,
    aggregate_errors,
    create_app,
    load_error_annotations,
    load_pool,
    save_pool,
    validate_submission,
)

VECTORS_PATH = Path(__file__).resolve().parent.parent / "shared" / "validation_vectors.json"
VECTORS = json.loads(VECTORS_PATH.read_text(encoding="utf-8"))["vectors"]


def make_pool(n):
    """n distinct triples with easy-to-verbalize surfaces."""
    pool = []
    for i in range(n):
        pool.append(
            TripleRecord(
                head=f"Entity{i}",
                relation=RelationRecord(
                    id=f"P{i}", label="relatedTo", source=KG.WIKIDATA,
                    description="links two things",
                ),
                tail=f"Other{i}",
                head_description=f"thing {i}",
                tail_description=f"other thing {i}",
            )
        )
    return pool


def valid_text(triple):
    return f"{triple.head} is related to {triple.tail}."


# ---------------------------------------------------------------------------
# Submission validation against the shared golden vectors


@pytest.mark.parametrize("vector", VECTORS, ids=[v["name"] for v in VECTORS])
def test_validation_matches_golden_vector(vector):
    verdict = validate_submission(
        text=vector["text"],
        head=vector["head"],
        tail=vector["tail"],
        overrides=vector["overrides"],
    )
    assert verdict.to_obj() == {
        "accepted": vector["accepted"],
        "failures": vector["failures"],
    }


def test_vectors_are_internally_consistent():
    for vector in VECTORS:
        assert vector["accepted"] == (vector["failures"] == [])
        assert vector["failures"] == sorted(vector["failures"])


def test_verdict_failures_sorted_in_wire_form():
    verdict = validate_submission("x", "AAA", "BBB")
    assert verdict.to_obj()["failures"] == ["HeadMissing", "TailMissing", "TooShort"]


# ---------------------------------------------------------------------------
# Error aggregation


ANNOTATIONS = [
    ErrorAnnotation("o1", "mask-all", frozenset({"SEM"})),
    ErrorAnnotation("o2", "mask-all", frozenset({"SEM", "ENT"})),
    ErrorAnnotation("o3", "mask-all", frozenset({"SEM", "LBL"})),
    ErrorAnnotation("o4", "mask-all", frozenset({"SEM", "ENT", "LBL"})),
    ErrorAnnotation("o5", "mask-all", frozenset({"DIR"})),
    ErrorAnnotation("o6", "full", frozenset({"SEM", "LIT", "ENT"})),
    ErrorAnnotation("o7", "full", frozenset({"LEX"})),
    ErrorAnnotation("o8", "full", frozenset({"ENT"})),  # input flag alone: no tally
]


def test_aggregate_errors_hand_counts():
    report = aggregate_errors(ANNOTATIONS)
    assert report["mask-all"]["SEM"] == {
        "total": 4, "ent_only": 1, "lbl_only": 1, "ent_and_lbl": 1,
    }
    assert report["mask-all"]["DIR"] == {
        "total": 1, "ent_only": 0, "lbl_only": 0, "ent_and_lbl": 0,
    }
    # o6 carries two model flags; it lands in both tallies
    assert report["full"]["SEM"]["total"] == 1
    assert report["full"]["SEM"]["ent_only"] == 1
    assert report["full"]["LIT"]["ent_only"] == 1
    assert report["full"]["LEX"]["total"] == 1
    # pure input-flag rows create no model entry
    assert set(report["full"]) == {"SEM", "LIT", "LEX"}


def test_aggregate_errors_matches_naive_recount():
    report = aggregate_errors(ANNOTATIONS)
    for model in {a.model_id for a in ANNOTATIONS}:
        rows = [a for a in ANNOTATIONS if a.model_id == model]
        for flag in ("SEM", "DIR", "LIT", "LEX"):
            flagged = [a for a in rows if flag in a.flags]
            if not flagged:
                assert flag not in report.get(model, {})
                continue
            tally = report[model][flag]
            assert tally["total"] == len(flagged)
            assert tally["ent_only"] == sum(
                1 for a in flagged if "ENT" in a.flags and "LBL" not in a.flags)
            assert tally["lbl_only"] == sum(
                1 for a in flagged if "LBL" in a.flags and "ENT" not in a.flags)
            assert tally["ent_and_lbl"] == sum(
                1 for a in flagged if {"ENT", "LBL"} <= a.flags)


def test_load_error_annotations(tmp_path):
    path = tmp_path / "err.jsonl"
    rows = [
        {"output_id": "o1", "model_id": "m", "flags": ["SEM", "ENT"],
         "annotator_id": "a9"},
        {"output_id": "o2", "model_id": "m", "flags": []},
    ]
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n\n", encoding="utf-8")
    loaded = load_error_annotations(path)
    assert loaded[0] == ErrorAnnotation("o1", "m", frozenset({"SEM", "ENT"}), "a9")
    assert loaded[1].flags == frozenset()
    assert loaded[1].annotator_id == ""


# ---------------------------------------------------------------------------
# Session store


def test_create_session_seeded_is_deterministic():
    a = AnnotationStore(make_pool(30), session_size=5)
    b = AnnotationStore(make_pool(30), session_size=5)
    sa = a.create_session("ann", seed=11)
    sb = b.create_session("ann", seed=11)
    assert sa.assigned == sb.assigned
    assert sa.session_id == "s-11-0" == sb.session_id
    assert len(sa.assigned) == 5
    assert len(set(sa.assigned)) == 5


def test_create_session_default_size_and_unique_ids():
    store = AnnotationStore(make_pool(25))
    s1 = store.create_session("ann")
    s2 = store.create_session("ann")
    assert len(s1.assigned) == 20
    assert s1.session_id != s2.session_id


def test_create_session_pool_too_small():
    store = AnnotationStore(make_pool(3), session_size=5)
    with pytest.raises(PoolEmpty):
        store.create_session("ann")
    store.create_session("ann", n=3)  # explicit smaller n still fits


def test_pool_deduplicates_by_triple_id():
    pool = make_pool(4)
    store = AnnotationStore(pool + pool, session_size=4)
    session = store.create_session("ann", seed=1)
    assert sorted(session.assigned) == sorted(t.triple_id for t in pool)


def test_current_task_shape():
    pool = make_pool(6)
    store = AnnotationStore(pool, session_size=3)
    session = store.create_session("ann", seed=2)
    task = store.current_task(session.session_id)
    assert task["completed"] is False
    triple = store.pool[session.assigned[0]]
    assert task["triple"] == {
        "id": triple.triple_id,
        "head": triple.head,
        "relation_label": "relatedTo",
        "tail": triple.tail,
    }
    assert task["relation_description"] == "links two things"
    assert task["entity_descriptions"] == {
        "head": triple.head_description, "tail": triple.tail_description,
    }
    assert task["progress"] == {"current": 0, "total": 3}


def test_current_task_unknown_session():
    store = AnnotationStore(make_pool(3), session_size=2)
    with pytest.raises(UnknownSession):
        store.current_task("nope")


def test_submit_accept_stores_record():
    store = AnnotationStore(make_pool(5), session_size=2)
    session = store.create_session("ann7", seed=3)
    triple = store.pool[session.assigned[0]]
    verdict, record = store.submit(
        session.session_id, triple.triple_id, valid_text(triple))
    assert verdict.accepted
    assert record.record_id == f"{session.session_id}:0"
    assert record.triple_id == triple.triple_id
    assert record.reference.quality is Quality.UNREVIEWED
    assert record.reference.annotator_id == "ann7"
    assert store.current_task(session.session_id)["progress"]["current"] == 1


def test_submit_rejection_leaves_cursor():
    store = AnnotationStore(make_pool(5), session_size=2)
    session = store.create_session("ann", seed=3)
    triple_id = session.assigned[0]
    verdict, record = store.submit(session.session_id, triple_id, "too terse")
    assert not verdict.accepted
    assert record is None
    task = store.current_task(session.session_id)
    assert task["triple"]["id"] == triple_id
    assert task["progress"]["current"] == 0


def test_submit_wrong_triple_out_of_order():
    store = AnnotationStore(make_pool(5), session_size=3)
    session = store.create_session("ann", seed=4)
    wrong = session.assigned[1]
    with pytest.raises(OutOfOrder):
        store.submit(session.session_id, wrong, valid_text(store.pool[wrong]))


def test_submit_after_completion():
    store = AnnotationStore(make_pool(5), session_size=2)
    session = store.create_session("ann", seed=5)
    for triple_id in session.assigned:
        store.submit(session.session_id, triple_id,
                     valid_text(store.pool[triple_id]))
    task = store.current_task(session.session_id)
    assert task == {"completed": True, "progress": {"current": 2, "total": 2}}
    with pytest.raises(SessionComplete):
        store.submit(session.session_id, session.assigned[0], "x" * 40)


def test_full_session_of_twenty():
    store = AnnotationStore(make_pool(40))
    session = store.create_session("ann", seed=6)
    for i, triple_id in enumerate(session.assigned):
        verdict, record = store.submit(
            session.session_id, triple_id, valid_text(store.pool[triple_id]))
        assert verdict.accepted
        assert record.record_id == f"{session.session_id}:{i}"
    assert store.current_task(session.session_id)["completed"] is True
    assert len(store.records) == 20


def test_report_noisy_advances_and_is_idempotent():
    store = AnnotationStore(make_pool(6), session_size=3)
    session = store.create_session("ann", seed=7)
    first = session.assigned[0]
    assert store.report_noisy(session.session_id, first) is True
    assert store.current_task(session.session_id)["progress"]["current"] == 1
    # re-reporting the same triple later is a no-op, not an error
    assert store.report_noisy(session.session_id, first) is True
    assert store.current_task(session.session_id)["progress"]["current"] == 1


def test_report_noisy_rejects_non_cursor_triple():
    store = AnnotationStore(make_pool(6), session_size=3)
    session = store.create_session("ann", seed=8)
    with pytest.raises(OutOfOrder):
        store.report_noisy(session.session_id, session.assigned[2])


def test_report_noisy_rejects_unassigned_triple():
    pool = make_pool(8)
    store = AnnotationStore(pool, session_size=3)
    session = store.create_session("ann", seed=9)
    outside = next(t.triple_id for t in pool if t.triple_id not in session.assigned)
    with pytest.raises(OutOfOrder):
        store.report_noisy(session.session_id, outside)


def test_report_noisy_after_submission_rejected():
    # a triple already answered (cursor moved past) was never reported, so
    # re-raising it is out of order rather than silently accepted
    store = AnnotationStore(make_pool(6), session_size=3)
    session = store.create_session("ann", seed=10)
    first = session.assigned[0]
    store.submit(session.session_id, first, valid_text(store.pool[first]))
    with pytest.raises(OutOfOrder):
        store.report_noisy(session.session_id, first)


def test_review_updates_quality():
    store = AnnotationStore(make_pool(5), session_size=1)
    session = store.create_session("ann", seed=11)
    triple_id = session.assigned[0]
    _, record = store.submit(session.session_id, triple_id,
                             valid_text(store.pool[triple_id]))
    updated = store.review(record.record_id, Quality.OK)
    assert updated.reference.quality is Quality.OK
    # re-review overwrites
    store.review(record.record_id, Quality.NOISY)
    assert store.records[record.record_id].reference.quality is Quality.NOISY


def test_review_rejects_unreviewed_and_unknown():
    store = AnnotationStore(make_pool(5), session_size=1)
    session = store.create_session("ann", seed=12)
    triple_id = session.assigned[0]
    _, record = store.submit(session.session_id, triple_id,
                             valid_text(store.pool[triple_id]))
    with pytest.raises(ValueError):
        store.review(record.record_id, Quality.UNREVIEWED)
    with pytest.raises(UnknownRecord):
        store.review("ghost:0", Quality.OK)


def test_export_preserves_log_order_and_overrides():
    store = AnnotationStore(make_pool(8), session_size=2)
    s1 = store.create_session("a1", seed=13)
    s2 = store.create_session("a2", seed=14)
    t1 = store.pool[s1.assigned[0]]
    t2 = store.pool[s2.assigned[0]]
    store.submit(s1.session_id, t1.triple_id, valid_text(t1))
    override_text = f"{t2.head.upper()} is related to {t2.tail}."
    store.submit(s2.session_id, t2.triple_id, override_text,
                 overrides={"head": t2.head.upper()})
    t1b = store.pool[s1.assigned[1]]
    store.submit(s1.session_id, t1b.triple_id, valid_text(t1b))

    exported = store.export_examples()
    assert [e.triple.triple_id for e in exported] == [
        t1.triple_id, t2.triple_id, t1b.triple_id]
    assert exported[0].reference.annotator_id == "a1"
    assert exported[1].reference.entity_overrides == {"head": t2.head.upper()}
    assert exported[1].reference.text == override_text
    assert all(e.reference.quality is Quality.UNREVIEWED for e in exported)


def test_log_replay_rebuilds_state(tmp_path):
    log = tmp_path / "events.jsonl"
    pool = make_pool(10)
    store = AnnotationStore(pool, log_path=log, session_size=3)
    session = store.create_session("ann", seed=15)
    first, second, third = session.assigned
    _, record = store.submit(session.session_id, first,
                             valid_text(store.pool[first]))
    store.report_noisy(session.session_id, second)
    store.submit(session.session_id, third, valid_text(store.pool[third]))
    store.review(record.record_id, Quality.EXTRA_INFO)

    rebuilt = AnnotationStore(pool, log_path=log, session_size=3)
    assert rebuilt.sessions.keys() == store.sessions.keys()
    assert rebuilt.sessions[session.session_id].cursor == 3
    assert rebuilt.sessions[session.session_id].completed
    assert rebuilt.noisy == {session.session_id: {second}}
    assert rebuilt.records.keys() == store.records.keys()
    assert rebuilt.records[record.record_id].reference.quality is Quality.EXTRA_INFO
    assert [e.reference.text for e in rebuilt.export_examples()] == [
        e.reference.text for e in store.export_examples()]


def test_log_is_append_only(tmp_path):
    log = tmp_path / "events.jsonl"
    store = AnnotationStore(make_pool(6), log_path=log, session_size=2)

    def lines():
        return log.read_text(encoding="utf-8").splitlines()

    session = store.create_session("ann", seed=16)
    assert len(lines()) == 1
    before = lines()
    triple_id = session.assigned[0]
    store.submit(session.session_id, triple_id,
                 valid_text(store.pool[triple_id]))
    assert len(lines()) == 2
    assert lines()[:1] == before  # earlier lines untouched
    # rejected submissions are not events
    store.submit(session.session_id, session.assigned[1], "nope")
    assert len(lines()) == 2
    store.report_noisy(session.session_id, session.assigned[1])
    assert len(lines()) == 3
    assert json.loads(lines()[-1])["type"] == "noisy_report"


def test_replay_rejects_unknown_event_type(tmp_path):
    log = tmp_path / "events.jsonl"
    log.write_text(json.dumps({"type": "mystery"}) + "\n", encoding="utf-8")
    with pytest.raises(ValueError):
        AnnotationStore(make_pool(3), log_path=log)


# ---------------------------------------------------------------------------
# HTTP API


@pytest.fixture
def client():
    store = AnnotationStore(make_pool(10), session_size=3)
    return TestClient(create_app(store)), store


def test_http_full_session(client):
    api, store = client
    created = api.post("/sessions", json={"annotator_id": "ann", "seed": 21})
    assert created.status_code == 200
    body = created.json()
    assert body["annotator_id"] == "ann"
    assert body["size"] == 3
    sid = body["session_id"]

    for step in range(3):
        task = api.get(f"/sessions/{sid}/next").json()
        assert task["completed"] is False
        assert task["progress"] == {"current": step, "total": 3}
        triple = task["triple"]
        submitted = api.post(
            f"/sessions/{sid}/submit",
            json={"triple_id": triple["id"],
                  "text": f"{triple['head']} is related to {triple['tail']}."},
        )
        assert submitted.status_code == 200
        assert submitted.json()["accepted"] is True
        assert submitted.json()["record_id"] == f"{sid}:{step}"

    assert api.get(f"/sessions/{sid}/next").json()["completed"] is True


def test_http_rejection_reports_failures(client):
    api, _ = client
    sid = api.post("/sessions", json={"annotator_id": "a", "seed": 22}).json()["session_id"]
    triple = api.get(f"/sessions/{sid}/next").json()["triple"]
    response = api.post(f"/sessions/{sid}/submit",
                        json={"triple_id": triple["id"], "text": "nah"})
    assert response.status_code == 200
    body = response.json()
    assert body["accepted"] is False
    assert body["failures"] == ["HeadMissing", "TailMissing", "TooShort"]
    assert "record_id" not in body


def test_http_error_statuses(client):
    api, store = client
    assert api.get("/sessions/ghost/next").status_code == 404
    assert api.post("/sessions/ghost/submit",
                    json={"triple_id": "t", "text": "x"}).status_code == 404
    assert api.post("/sessions/ghost/report",
                    json={"triple_id": "t"}).status_code == 404

    sid = api.post("/sessions", json={"annotator_id": "a", "seed": 23}).json()["session_id"]
    assigned = store.sessions[sid].assigned
    wrong = assigned[1]
    out_of_order = api.post(f"/sessions/{sid}/submit",
                            json={"triple_id": wrong, "text": "x" * 60})
    assert out_of_order.status_code == 409
    assert api.post(f"/sessions/{sid}/report",
                    json={"triple_id": wrong}).status_code == 409


def test_http_pool_empty_conflict():
    store = AnnotationStore(make_pool(2), session_size=5)
    api = TestClient(create_app(store))
    response = api.post("/sessions", json={"annotator_id": "a"})
    assert response.status_code == 409


def test_http_report_noisy(client):
    api, store = client
    sid = api.post("/sessions", json={"annotator_id": "a", "seed": 24}).json()["session_id"]
    triple = api.get(f"/sessions/{sid}/next").json()["triple"]
    response = api.post(f"/sessions/{sid}/report", json={"triple_id": triple["id"]})
    assert response.status_code == 200
    assert response.json() == {"reported": True}
    assert api.get(f"/sessions/{sid}/next").json()["progress"]["current"] == 1


def test_http_review_and_export(client, tmp_path):
    api, store = client
    sid = api.post("/sessions", json={"annotator_id": "a", "seed": 25}).json()["session_id"]
    triple = api.get(f"/sessions/{sid}/next").json()["triple"]
    record_id = api.post(
        f"/sessions/{sid}/submit",
        json={"triple_id": triple["id"],
              "text": f"{triple['head']} is related to {triple['tail']}."},
    ).json()["record_id"]

    assert api.post("/review", json={"record_id": record_id,
                                     "quality": "Bogus"}).status_code == 400
    assert api.post("/review", json={"record_id": record_id,
                                     "quality": "Unreviewed"}).status_code == 400
    assert api.post("/review", json={"record_id": "ghost",
                                     "quality": "OK"}).status_code == 404
    reviewed = api.post("/review", json={"record_id": record_id, "quality": "OK"})
    assert reviewed.status_code == 200
    assert reviewed.json() == {"record_id": record_id, "quality": "OK"}

    exported = api.get("/export")
    assert exported.status_code == 200
    dump = tmp_path / "export.jsonl"
    dump.write_text(exported.text, encoding="utf-8")
    examples = load_examples(dump)
    assert len(examples) == 1
    assert examples[0].reference.quality is Quality.OK
    assert examples[0].triple.triple_id == triple["id"]


def test_http_export_empty(client):
    api, _ = client
    response = api.get("/export")
    assert response.status_code == 200
    assert response.text == ""


# ---------------------------------------------------------------------------
# Pool files


def test_pool_round_trip(tmp_path):
    pool = make_pool(4)
    path = tmp_path / "pool.jsonl"
    save_pool(pool, path)
    loaded = load_pool(path)
    assert loaded == pool


def test_load_pool_accepts_annotated_file(tmp_path):
    from rel2text.data import Example, VerbalizationRecord, save_examples

    pool = make_pool(2)
    examples = [
        Example(
            triple=t,
            reference=VerbalizationRecord(
                triple_ref=t.triple_id, text=valid_text(t),
                quality=Quality.OK, annotator_id="a", entity_overrides=None,
            ),
        )
        for t in pool
    ]
    path = tmp_path / "annotated.jsonl"
    save_examples(examples, path)
    assert load_pool(path) == pool
