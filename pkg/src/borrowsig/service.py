"""Durable collection service for survey judgments and re-annotation tasks.

Persistence is an append-only line-delimited JSON log per response kind,
fsynced before any acknowledgement and replayed on startup. Uniqueness of
(annotator, item) is checked under the same lock that serializes appends,
so concurrent duplicate submissions cannot both land in the log.
"""

import hashlib
import json
import os
import random
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .eval import SURVEY_CHOICES, SurveyTally

KINDS = ("survey", "reannotation")

_JSON_OPTS = {"sort_keys": True, "separators": (",", ":"), "ensure_ascii": True}


class UnknownAnnotator(Exception):
    pass


class UnknownItem(Exception):
    pass


class DuplicateResponse(Exception):
    pass


class ProfileConflict(Exception):
    pass


@dataclass(frozen=True)
class AnnotatorProfile:
    annotator_id: str
    age: int
    education: str | None = None

    def __post_init__(self) -> None:
        if self.age < 0:
            raise ValueError("age must be >= 0")
        if not self.annotator_id:
            raise ValueError("annotator_id must be non-empty")


@dataclass(frozen=True)
class SurveyItem:
    item_id: str
    word: str
    sentence_foreign: str
    sentence_native: str

    def __post_init__(self) -> None:
        if not self.sentence_foreign or not self.sentence_native:
            raise ValueError(f"item {self.item_id!r}: sentences must be non-empty")
        if self.word.lower() not in self.sentence_foreign.lower():
            raise ValueError(
                f"item {self.item_id!r}: word {self.word!r} missing from "
                "the foreign sentence"
            )


@dataclass(frozen=True)
class ReannotationTask:
    task_id: str
    word: str
    stratum: str
    context_mode: str
    tokens: tuple[tuple[str, str], ...]  # (text, tag) pairs
    target_index: int

    def __post_init__(self) -> None:
        if not 0 <= self.target_index < len(self.tokens):
            raise ValueError(f"task {self.task_id!r}: target_index out of range")
        if self.tokens[self.target_index][1] != "L2":
            raise ValueError(f"task {self.task_id!r}: target token must be L2")


def load_survey_items(path: str | Path) -> list[SurveyItem]:
    """TSV word<TAB>sentence_foreign<TAB>sentence_native, ids in file order."""
    items = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields")
            items.append(SurveyItem(f"s{len(items):04d}", parts[0], parts[1], parts[2]))
    return items


def load_reannotation_tasks(path: str | Path) -> list[ReannotationTask]:
    """Line-delimited JSON tasks, as written by the reannotate-prep command."""
    tasks = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            tasks.append(
                ReannotationTask(
                    task_id=obj["task_id"],
                    word=obj["word"],
                    stratum=obj["stratum"],
                    context_mode=obj["context_mode"],
                    tokens=tuple((t["t"], t["g"]) for t in obj["tokens"]),
                    target_index=obj["target_index"],
                )
            )
    return tasks


class AnnotationStore:
    """Replayable annotation state over append-only logs in one directory."""

    def __init__(
        self,
        data_dir: str | Path,
        survey_items: Sequence[SurveyItem] = (),
        reannotation_tasks: Sequence[ReannotationTask] = (),
    ):
        self._dir = Path(data_dir)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._profiles: dict[str, AnnotatorProfile] = {}
        self._items: dict[str, SurveyItem] = {i.item_id: i for i in survey_items}
        self._tasks: dict[str, ReannotationTask] = {
            t.task_id: t for t in reannotation_tasks
        }
        if len(self._items) != len(survey_items):
            raise ValueError("duplicate survey item ids")
        if len(self._tasks) != len(reannotation_tasks):
            raise ValueError("duplicate reannotation task ids")
        self._item_order = [i.item_id for i in survey_items]
        self._task_order = [t.task_id for t in reannotation_tasks]
        self._responses: dict[str, list[dict]] = {k: [] for k in KINDS}
        self._answered: dict[str, set[tuple[str, str]]] = {k: set() for k in KINDS}
        self._replay()

    # -- persistence ------------------------------------------------------

    def _log_path(self, name: str) -> Path:
        return self._dir / f"{name}.jsonl"

    def _replay(self) -> None:
        path = self._log_path("annotators")
        if path.exists():
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        obj = json.loads(line)
                        self._profiles[obj["annotator_id"]] = AnnotatorProfile(
                            obj["annotator_id"], obj["age"], obj.get("education")
                        )
        for kind in KINDS:
            path = self._log_path(f"responses_{kind}")
            if not path.exists():
                continue
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    record = json.loads(line)
                    self._responses[kind].append(record)
                    self._answered[kind].add(
                        (record["annotator_id"], record[_REF_FIELD[kind]])
                    )

    def _append(self, name: str, record: dict) -> None:
        with open(self._log_path(name), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, **_JSON_OPTS) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    # -- registration ------------------------------------------------------

    def register(
        self,
        age: int,
        education: str | None = None,
        annotator_id: str | None = None,
    ) -> str:
        """Persist a profile; identical resubmission is a no-op, a differing
        profile for an existing id is a conflict."""
        with self._lock:
            if annotator_id is None:
                annotator_id = f"a{len(self._profiles):05d}"
                while annotator_id in self._profiles:
                    annotator_id = f"a{int(annotator_id[1:]) + 1:05d}"
            profile = AnnotatorProfile(annotator_id, age, education)
            existing = self._profiles.get(annotator_id)
            if existing is not None:
                if existing != profile:
                    raise ProfileConflict(
                        f"annotator {annotator_id!r} already registered "
                        "with a different profile"
                    )
                return annotator_id
            self._profiles[annotator_id] = profile
            self._append(
                "annotators",
                {
                    "annotator_id": profile.annotator_id,
                    "age": profile.age,
                    "education": profile.education,
                },
            )
            return annotator_id

    def profile(self, annotator_id: str) -> AnnotatorProfile:
        try:
            return self._profiles[annotator_id]
        except KeyError:
            raise UnknownAnnotator(annotator_id) from None

    # -- task hand-out ------------------------------------------------------

    def _order_for(self, annotator_id: str, kind: str) -> list[str]:
        # per-annotator deterministic shuffle, stable across restarts
        digest = hashlib.sha256(f"{kind}:{annotator_id}".encode()).digest()
        rng = random.Random(int.from_bytes(digest[:8], "big"))
        order = list(self._item_order if kind == "survey" else self._task_order)
        rng.shuffle(order)
        return order

    def next_task(self, annotator_id: str, kind: str) -> tuple[object | None, dict]:
        """The annotator's next unanswered item, or None when exhausted.

        Stable cursor: calling again without submitting returns the same
        item. Also returns {"answered", "total"} progress counts.
        """
        _check_kind(kind)
        self.profile(annotator_id)
        pool = self._items if kind == "survey" else self._tasks
        answered = self._answered[kind]
        done = sum(1 for ref in pool if (annotator_id, ref) in answered)
        progress = {"answered": done, "total": len(pool)}
        for ref in self._order_for(annotator_id, kind):
            if (annotator_id, ref) not in answered:
                return pool[ref], progress
        return None, progress

    # -- submission ---------------------------------------------------------

    def submit_survey(
        self,
        annotator_id: str,
        item_id: str,
        choice: str,
        received_at: float | None = None,
    ) -> dict:
        if choice not in SURVEY_CHOICES:
            raise ValueError(f"choice must be one of {SURVEY_CHOICES}")
        self.profile(annotator_id)
        item = self._items.get(item_id)
        if item is None:
            raise UnknownItem(item_id)
        record = {
            "annotator_id": annotator_id,
            "item_id": item_id,
            "word": item.word,
            "choice": choice,
            "age": self._profiles[annotator_id].age,
            "received_at": received_at if received_at is not None else time.time(),
        }
        self._commit("survey", record, (annotator_id, item_id))
        return record

    def submit_reannotation(
        self,
        annotator_id: str,
        task_id: str,
        final_tag: str,
        received_at: float | None = None,
    ) -> dict:
        if final_tag not in ("L1", "L2"):
            raise ValueError("final_tag must be 'L1' or 'L2'")
        self.profile(annotator_id)
        task = self._tasks.get(task_id)
        if task is None:
            raise UnknownItem(task_id)
        record = {
            "annotator_id": annotator_id,
            "task_id": task_id,
            "word": task.word,
            "stratum": task.stratum,
            "context_mode": task.context_mode,
            "final_tag": final_tag,
            "flipped": final_tag == "L1",
            "received_at": received_at if received_at is not None else time.time(),
        }
        self._commit("reannotation", record, (annotator_id, task_id))
        return record

    def _commit(self, kind: str, record: dict, key: tuple[str, str]) -> None:
        # uniqueness check and append are atomic together
        with self._lock:
            if key in self._answered[kind]:
                raise DuplicateResponse(f"{key[0]} already answered {key[1]}")
            self._append(f"responses_{kind}", record)
            self._responses[kind].append(record)
            self._answered[kind].add(key)

    # -- export -------------------------------------------------------------

    def export_lines(self, kind: str) -> Iterator[str]:
        """Response records in log order followed by aggregate records.

        Byte-stable for a frozen log, across restarts included.
        """
        _check_kind(kind)
        with self._lock:
            records = list(self._responses[kind])
        for record in records:
            yield json.dumps({"kind": "response", **record}, **_JSON_OPTS) + "\n"
        if kind == "survey":
            for tally in survey_tallies(records):
                yield json.dumps(
                    {
                        "kind": "tally",
                        "word": tally.word,
                        "count_en": tally.count_en,
                        "count_hi": tally.count_hi,
                        "count_none": tally.count_none,
                        "lpf": tally.lpf,
                    },
                    **_JSON_OPTS,
                ) + "\n"
        else:
            for row in flip_fractions(records):
                yield json.dumps({"kind": "flip", **row}, **_JSON_OPTS) + "\n"

    def stats(self) -> dict:
        with self._lock:
            return {
                "annotators": len(self._profiles),
                "survey": {
                    "items": len(self._items),
                    "responses": len(self._responses["survey"]),
                },
                "reannotation": {
                    "tasks": len(self._tasks),
                    "responses": len(self._responses["reannotation"]),
                },
            }


_REF_FIELD = {"survey": "item_id", "reannotation": "task_id"}


def _check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")


def survey_tallies(records: Iterable[dict]) -> list[SurveyTally]:
    counts: dict[str, dict[str, int]] = {}
    for record in records:
        row = counts.setdefault(record["word"], {c: 0 for c in SURVEY_CHOICES})
        row[record["choice"]] += 1
    return [
        SurveyTally(word, row["FOREIGN"], row["NATIVE"], row["NEITHER"])
        for word, row in sorted(counts.items())
    ]


def flip_fractions(records: Iterable[dict]) -> list[dict]:
    grouped: dict[tuple[str, str, str], list[bool]] = {}
    for record in records:
        key = (record["word"], record["stratum"], record["context_mode"])
        grouped.setdefault(key, []).append(bool(record["flipped"]))
    rows = []
    for (word, stratum, context_mode), flips in sorted(grouped.items()):
        rows.append(
            {
                "word": word,
                "stratum": stratum,
                "context_mode": context_mode,
                "flips": sum(flips),
                "total": len(flips),
                "fraction": sum(flips) / len(flips),
            }
        )
    return rows


def create_app(store: AnnotationStore):
    """FastAPI wiring over the store; endpoints mirror the store methods."""
    from fastapi import FastAPI, HTTPException, Query
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import PlainTextResponse
    from pydantic import BaseModel

    class RegisterPayload(BaseModel):
        age: int
        education: str | None = None
        annotator_id: str | None = None

    class SurveyPayload(BaseModel):
        annotator_id: str
        item_id: str
        choice: str

    class ReannotationPayload(BaseModel):
        annotator_id: str
        task_id: str
        final_tag: str

    app = FastAPI(title="borrowsig annotator service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.post("/annotators")
    def register(payload: RegisterPayload):
        try:
            annotator_id = store.register(
                payload.age, payload.education, payload.annotator_id
            )
        except ProfileConflict as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"annotator_id": annotator_id}

    @app.get("/tasks/{kind}/next")
    def next_task(kind: str, annotator: str = Query(...)):
        try:
            task, progress = store.next_task(annotator, kind)
        except UnknownAnnotator:
            raise HTTPException(status_code=404, detail="unknown annotator")
        except ValueError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        if task is None:
            return {"done": True, "task": None, "progress": progress}
        if isinstance(task, SurveyItem):
            body = {
                "item_id": task.item_id,
                "word": task.word,
                "sentence_foreign": task.sentence_foreign,
                "sentence_native": task.sentence_native,
            }
        else:
            body = {
                "task_id": task.task_id,
                "word": task.word,
                "stratum": task.stratum,
                "context_mode": task.context_mode,
                "tokens": [{"t": t, "g": g} for t, g in task.tokens],
                "target_index": task.target_index,
            }
        return {"done": False, "task": body, "progress": progress}

    def _submit(fn):
        try:
            return {"status": "ok", "received_at": fn()["received_at"]}
        except DuplicateResponse as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (UnknownAnnotator, UnknownItem) as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/responses/survey")
    def submit_survey(payload: SurveyPayload):
        return _submit(
            lambda: store.submit_survey(
                payload.annotator_id, payload.item_id, payload.choice
            )
        )

    @app.post("/responses/reannotation")
    def submit_reannotation(payload: ReannotationPayload):
        return _submit(
            lambda: store.submit_reannotation(
                payload.annotator_id, payload.task_id, payload.final_tag
            )
        )

    @app.get("/export/{kind}")
    def export(kind: str):
        try:
            body = "".join(store.export_lines(kind))
        except ValueError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return PlainTextResponse(body, media_type="application/x-ndjson")

    @app.get("/stats")
    def stats():
        return store.stats()

    return app
