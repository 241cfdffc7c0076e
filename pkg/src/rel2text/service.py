"""Annotation-collection backend: sessions, validation, reviews, error tallies.

State lives in an append-only JSONL event log (one JSON object per line,
session_created / submission / noisy_report / review events). The in-memory
view is rebuilt by replaying the log, and /export compacts accepted
submissions with their current quality into the dataset schema. Mutations
are serialized under one lock; reads take consistent snapshots under it.
"""

from __future__ import annotations

import json
import random
import threading
import uuid
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable

from pydantic import BaseModel

from .data import (
    Example,
    Quality,
    TripleRecord,
    VerbalizationRecord,
    example_to_obj,
    parse_triple,
    triple_to_obj,
)
from .errors import (
    OutOfOrder,
    PoolEmpty,
    SessionComplete,
    UnknownRecord,
    UnknownSession,
)

SESSION_SIZE = 20

MODEL_ERROR_FLAGS = ("SEM", "DIR", "LIT", "LEX")
INPUT_ERROR_FLAGS = ("ENT", "LBL")


# ---------------------------------------------------------------------------
# Submission validation (pure; mirrored by the browser client)

@dataclass(frozen=True)
class SubmissionVerdict:
    accepted: bool
    failures: frozenset[str] = frozenset()

    def to_obj(self) -> dict:
        return {"accepted": self.accepted, "failures": sorted(self.failures)}


def validate_submission(
    text: str, head: str, tail: str, overrides: dict[str, str] | None = None
) -> SubmissionVerdict:
    """Check entity presence and the minimum-length rule.

    Both (possibly overridden) entity surfaces must occur in the text as
    case-sensitive substrings, and the text must be at least two characters
    longer than the two surfaces combined.
    """
    overrides = overrides or {}
    head_eff = overrides.get("head", head)
    tail_eff = overrides.get("tail", tail)
    failures = set()
    if head_eff not in text:
        failures.add("HeadMissing")
    if tail_eff not in text:
        failures.add("TailMissing")
    if len(text) < len(head_eff) + len(tail_eff) + 2:
        failures.add("TooShort")
    return SubmissionVerdict(accepted=not failures, failures=frozenset(failures))


# ---------------------------------------------------------------------------
# Error-analysis taxonomy

@dataclass(frozen=True)
class ErrorAnnotation:
    output_id: str
    model_id: str
    flags: frozenset[str]
    annotator_id: str = ""


def load_error_annotations(path: str | Path) -> list[ErrorAnnotation]:
    annotations = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        annotations.append(
            ErrorAnnotation(
                output_id=obj["output_id"],
                model_id=obj["model_id"],
                flags=frozenset(obj["flags"]),
                annotator_id=obj.get("annotator_id", ""),
            )
        )
    return annotations


def aggregate_errors(annotations: Iterable[ErrorAnnotation]) -> dict:
    """Per-model counts of each model-error flag with input-flag breakdowns.

    For every model-error flag the tally records the total count and how many
    of those outputs were also marked ENT only, LBL only, or both.
    """
    report: dict[str, dict[str, dict[str, int]]] = {}
    for annotation in annotations:
        model = report.setdefault(annotation.model_id, {})
        has_ent = "ENT" in annotation.flags
        has_lbl = "LBL" in annotation.flags
        for flag in MODEL_ERROR_FLAGS:
            if flag not in annotation.flags:
                continue
            tally = model.setdefault(
                flag, {"total": 0, "ent_only": 0, "lbl_only": 0, "ent_and_lbl": 0}
            )
            tally["total"] += 1
            if has_ent and not has_lbl:
                tally["ent_only"] += 1
            elif has_lbl and not has_ent:
                tally["lbl_only"] += 1
            elif has_ent and has_lbl:
                tally["ent_and_lbl"] += 1
    return report


# ---------------------------------------------------------------------------
# Session store

@dataclass
class AnnotationSession:
    session_id: str
    annotator_id: str
    assigned: tuple[str, ...]
    cursor: int = 0

    @property
    def completed(self) -> bool:
        return self.cursor >= len(self.assigned)


@dataclass
class StoredRecord:
    record_id: str
    session_id: str
    triple_id: str
    reference: VerbalizationRecord


class AnnotationStore:
    """Event-sourced store over a triple pool.

    `log_path=None` keeps the log in memory only (tests); otherwise every
    event is appended to the JSONL file before the in-memory state changes
    become visible.
    """

    def __init__(
        self,
        pool: Iterable[TripleRecord],
        log_path: str | Path | None = None,
        session_size: int = SESSION_SIZE,
    ) -> None:
        self.pool: dict[str, TripleRecord] = {}
        for triple in pool:
            self.pool.setdefault(triple.triple_id, triple)
        self.session_size = session_size
        self.log_path = Path(log_path) if log_path is not None else None
        self.sessions: dict[str, AnnotationSession] = {}
        self.records: dict[str, StoredRecord] = {}
        self.noisy: dict[str, set[str]] = {}  # session_id -> reported triple ids
        self._lock = threading.RLock()
        self._events: list[dict] = []
        if self.log_path is not None and self.log_path.exists():
            for line in self.log_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._apply(json.loads(line), replaying=True)

    # -- event plumbing

    def _write(self, event: dict) -> None:
        if self.log_path is not None:
            with self.log_path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(event, ensure_ascii=False) + "\n")

    def _apply(self, event: dict, replaying: bool = False) -> None:
        kind = event["type"]
        if kind == "session_created":
            self.sessions[event["session_id"]] = AnnotationSession(
                session_id=event["session_id"],
                annotator_id=event["annotator_id"],
                assigned=tuple(event["assigned"]),
            )
        elif kind == "submission":
            session = self.sessions[event["session_id"]]
            record = StoredRecord(
                record_id=event["record_id"],
                session_id=event["session_id"],
                triple_id=event["triple_id"],
                reference=VerbalizationRecord(
                    triple_ref=event["triple_id"],
                    text=event["text"],
                    quality=Quality.UNREVIEWED,
                    annotator_id=session.annotator_id,
                    entity_overrides=event.get("overrides"),
                ),
            )
            self.records[record.record_id] = record
            session.cursor += 1
        elif kind == "noisy_report":
            session = self.sessions[event["session_id"]]
            self.noisy.setdefault(session.session_id, set()).add(event["triple_id"])
            session.cursor += 1
        elif kind == "review":
            record = self.records[event["record_id"]]
            record.reference = replace(
                record.reference, quality=Quality(event["quality"])
            )
        else:
            raise ValueError(f"unknown event type {kind!r}")
        # replayed events already live in the file; only fresh ones get written
        self._events.append(event)
        if not replaying:
            self._write(event)

    # -- operations

    def create_session(
        self, annotator_id: str, n: int | None = None, seed: int | None = None
    ) -> AnnotationSession:
        """Assign n randomly selected distinct pool triples to a new session.

        Sessions may overlap in assigned triples; multiple responses per
        triple are part of the collection design.
        """
        n = self.session_size if n is None else n
        with self._lock:
            if len(self.pool) < n:
                raise PoolEmpty(f"pool has {len(self.pool)} triples, session needs {n}")
            rng = random.Random(seed) if seed is not None else random.Random()
            assigned = rng.sample(sorted(self.pool), n)
            session_id = uuid.uuid4().hex if seed is None else f"s-{seed}-{len(self.sessions)}"
            self._apply(
                {
                    "type": "session_created",
                    "session_id": session_id,
                    "annotator_id": annotator_id,
                    "assigned": assigned,
                }
            )
            return self.sessions[session_id]

    def _session(self, session_id: str) -> AnnotationSession:
        session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"no session {session_id!r}")
        return session

    def current_task(self, session_id: str) -> dict:
        """The triple at the cursor, with descriptions and progress."""
        with self._lock:
            session = self._session(session_id)
            if session.completed:
                return {
                    "completed": True,
                    "progress": {"current": session.cursor, "total": len(session.assigned)},
                }
            triple = self.pool[session.assigned[session.cursor]]
            return {
                "completed": False,
                "triple": {
                    "id": triple.triple_id,
                    "head": triple.head,
                    "relation_label": triple.relation.label,
                    "tail": triple.tail,
                },
                "relation_description": triple.relation.description,
                "entity_descriptions": {
                    "head": triple.head_description,
                    "tail": triple.tail_description,
                },
                "progress": {"current": session.cursor, "total": len(session.assigned)},
            }

    def submit(
        self,
        session_id: str,
        triple_id: str,
        text: str,
        overrides: dict[str, str] | None = None,
    ) -> tuple[SubmissionVerdict, StoredRecord | None]:
        """Validate and store a verbalization for the triple at the cursor.

        Returns the verdict and, when accepted, the stored record. Rejections
        leave the cursor unchanged so the annotator can retry.
        """
        with self._lock:
            session = self._session(session_id)
            if session.completed:
                raise SessionComplete(f"session {session_id} is complete")
            if triple_id != session.assigned[session.cursor]:
                raise OutOfOrder(
                    f"triple {triple_id!r} is not at the cursor "
                    f"(position {session.cursor})"
                )
            triple = self.pool[triple_id]
            verdict = validate_submission(text, triple.head, triple.tail, overrides)
            if not verdict.accepted:
                return verdict, None
            record_id = f"{session_id}:{session.cursor}"
            self._apply(
                {
                    "type": "submission",
                    "session_id": session_id,
                    "triple_id": triple_id,
                    "record_id": record_id,
                    "text": text,
                    "overrides": overrides,
                }
            )
            return verdict, self.records[record_id]

    def report_noisy(self, session_id: str, triple_id: str) -> bool:
        """Flag the cursor triple as noisy and move on; idempotent per session."""
        with self._lock:
            session = self._session(session_id)
            if triple_id not in session.assigned:
                raise OutOfOrder(f"triple {triple_id!r} not assigned to this session")
            if triple_id in self.noisy.get(session_id, set()):
                return True
            if session.completed or triple_id != session.assigned[session.cursor]:
                raise OutOfOrder(
                    f"triple {triple_id!r} is not at the cursor and was not reported"
                )
            self._apply(
                {"type": "noisy_report", "session_id": session_id, "triple_id": triple_id}
            )
            return True

    def review(self, record_id: str, quality: Quality) -> StoredRecord:
        """Set a record's quality category; re-reviews overwrite, the event
        log keeps the audit trail."""
        if quality is Quality.UNREVIEWED:
            raise ValueError("review must assign a concrete category")
        with self._lock:
            if record_id not in self.records:
                raise UnknownRecord(f"no record {record_id!r}")
            self._apply(
                {"type": "review", "record_id": record_id, "quality": quality.value}
            )
            return self.records[record_id]

    def export_examples(self) -> list[Example]:
        """Compact accepted submissions into dataset rows, log order."""
        with self._lock:
            examples = []
            for event in self._events:
                if event["type"] != "submission":
                    continue
                record = self.records[event["record_id"]]
                examples.append(
                    Example(
                        triple=self.pool[record.triple_id], reference=record.reference
                    )
                )
            return examples


# ---------------------------------------------------------------------------
# HTTP API

# Request models live at module scope: route annotations are resolved against
# module globals, so locals defined inside create_app would not be found.

class SessionRequest(BaseModel):
    annotator_id: str
    n: int | None = None
    seed: int | None = None


class SubmitRequest(BaseModel):
    triple_id: str
    text: str
    overrides: dict[str, str] | None = None


class ReportRequest(BaseModel):
    triple_id: str


class ReviewRequest(BaseModel):
    record_id: str
    quality: str


def create_app(store: AnnotationStore):
    """FastAPI wrapper over an AnnotationStore."""
    from fastapi import FastAPI, HTTPException
    from fastapi.responses import PlainTextResponse

    app = FastAPI(title="annotation-service")

    @app.post("/sessions")
    def create_session(body: SessionRequest):
        try:
            session = store.create_session(body.annotator_id, body.n, body.seed)
        except PoolEmpty as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {
            "session_id": session.session_id,
            "annotator_id": session.annotator_id,
            "size": len(session.assigned),
        }

    @app.get("/sessions/{session_id}/next")
    def next_task(session_id: str):
        try:
            return store.current_task(session_id)
        except UnknownSession as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.post("/sessions/{session_id}/submit")
    def submit(session_id: str, body: SubmitRequest):
        try:
            verdict, record = store.submit(
                session_id, body.triple_id, body.text, body.overrides
            )
        except UnknownSession as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except (OutOfOrder, SessionComplete) as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        response = verdict.to_obj()
        if record is not None:
            response["record_id"] = record.record_id
        return response

    @app.post("/sessions/{session_id}/report")
    def report(session_id: str, body: ReportRequest):
        try:
            store.report_noisy(session_id, body.triple_id)
        except UnknownSession as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except OutOfOrder as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"reported": True}

    @app.post("/review")
    def review(body: ReviewRequest):
        try:
            quality = Quality(body.quality)
        except ValueError:
            raise HTTPException(status_code=400, detail=f"unknown quality {body.quality!r}")
        try:
            record = store.review(body.record_id, quality)
        except UnknownRecord as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"record_id": record.record_id, "quality": record.reference.quality.value}

    @app.get("/export")
    def export():
        lines = [
            json.dumps(example_to_obj(example), ensure_ascii=False)
            for example in store.export_examples()
        ]
        return PlainTextResponse("\n".join(lines) + ("\n" if lines else ""))

    return app


def load_pool(path: str | Path) -> list[TripleRecord]:
    """Load an annotation pool from a triples-only or annotated JSONL file."""
    raw = Path(path).read_text(encoding="utf-8")
    triples = []
    for line_no, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        obj = json.loads(line)
        triples.append(parse_triple(obj.get("triple"), line_no))
    return triples


def save_pool(triples: Iterable[TripleRecord], path: str | Path) -> None:
    lines = [
        json.dumps({"triple": triple_to_obj(triple)}, ensure_ascii=False)
        for triple in triples
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
