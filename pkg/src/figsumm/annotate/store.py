"""Durable annotation storage.

The store is append-only: two JSONL files (sessions and events) that are
only ever appended to, never rewritten.  Every event carries a sequence
number assigned under a single writer lock; there are no wall-clock
values anywhere.  A resubmission for the same (session, task) appends a
new event, and export resolves the latest event per key, so earlier
submissions remain as an audit trail.

Annotators never see model identities: tasks present candidates under
opaque ids in an order shuffled per figure at build time, and the
candidate-to-system mapping only resurfaces at export.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ..analysis import RankingRecord, RatingRecord, VoteRecord, write_rankings, write_ratings, write_votes
from ..baselines import PredictionRecord
from ..corpus import Corpus
from ..jsonio import dumps_canonical, iter_jsonl
from ..rnd import derive_rng

__all__ = [
    "ASPECTS",
    "TASK_MODES",
    "StoreError",
    "Candidate",
    "Task",
    "Session",
    "AnnotationStore",
    "build_tasks",
    "write_tasks",
    "load_tasks",
]

#: Rated statements, identified by stable ids; display wording lives in
#: the annotation frontend.
ASPECTS = ("helpfulness", "image_text", "visual_desc", "takeaway")

TASK_MODES = ("rate", "rank", "vote")


class StoreError(ValueError):
    """Raised on invalid tasks, sessions, or submissions."""


@dataclass(frozen=True)
class Candidate:
    """One caption shown to annotators under an opaque id."""

    candidate_id: str
    system_id: str
    text: str


@dataclass(frozen=True)
class Task:
    task_id: str
    figure_id: str
    mode: str
    title: str = ""
    abstract: str = ""
    image_path: str | None = None
    candidates: tuple[Candidate, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if self.mode not in TASK_MODES:
            raise StoreError(f"task {self.task_id!r}: unknown mode {self.mode!r}")
        if not self.candidates:
            raise StoreError(f"task {self.task_id!r}: no candidates")
        ids = [c.candidate_id for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise StoreError(f"task {self.task_id!r}: duplicate candidate ids")
        if self.mode == "rate" and len(self.candidates) != 1:
            raise StoreError(
                f"task {self.task_id!r}: rate tasks show exactly one candidate,"
                f" got {len(self.candidates)}"
            )
        if self.mode in ("rank", "vote") and len(self.candidates) < 2:
            raise StoreError(
                f"task {self.task_id!r}: {self.mode} tasks need at least two candidates"
            )

    def candidate(self, candidate_id: str) -> Candidate:
        for c in self.candidates:
            if c.candidate_id == candidate_id:
                return c
        raise StoreError(f"task {self.task_id!r}: unknown candidate {candidate_id!r}")


@dataclass(frozen=True)
class Session:
    session_id: str
    annotator_id: str
    task_ids: tuple[str, ...]


class AnnotationStore:
    """Append-only store binding sessions, tasks, and submissions."""

    def __init__(self, store_dir: str | Path, tasks: Sequence[Task], seed: int = 0) -> None:
        self._dir = Path(store_dir)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._sessions_path = self._dir / "sessions.jsonl"
        self._events_path = self._dir / "events.jsonl"
        self._lock = threading.Lock()
        self._seed = seed
        self._tasks: dict[str, Task] = {}
        for task in tasks:
            if task.task_id in self._tasks:
                raise StoreError(f"duplicate task id {task.task_id!r}")
            self._tasks[task.task_id] = task
        self._sessions: dict[str, Session] = {}
        self._events: list[dict] = []
        self._replay()

    # -- persistence ------------------------------------------------------

    def _replay(self) -> None:
        if self._sessions_path.exists():
            for lineno, record in iter_jsonl(self._sessions_path):
                session = Session(
                    session_id=str(record["session_id"]),
                    annotator_id=str(record["annotator_id"]),
                    task_ids=tuple(str(t) for t in record["task_ids"]),
                )
                for task_id in session.task_ids:
                    if task_id not in self._tasks:
                        raise StoreError(
                            f"{self._sessions_path}:{lineno}: session {session.session_id!r}"
                            f" references unknown task {task_id!r}"
                        )
                self._sessions[session.session_id] = session
        if self._events_path.exists():
            for _, record in iter_jsonl(self._events_path):
                self._events.append(record)

    def _append(self, path: Path, record: dict) -> None:
        with path.open("a", encoding="utf-8") as handle:
            handle.write(dumps_canonical(record) + "\n")
            handle.flush()

    # -- sessions ---------------------------------------------------------

    @property
    def tasks(self) -> dict[str, Task]:
        return dict(self._tasks)

    def create_session(self, annotator_id: str) -> Session:
        """Open a session covering every task, in a per-session order."""
        if not annotator_id.strip():
            raise StoreError("annotator_id must be non-empty")
        with self._lock:
            session_id = f"s{len(self._sessions) + 1:04d}"
            rng = derive_rng(self._seed, "session-order", session_id)
            task_ids = sorted(self._tasks)
            rng.shuffle(task_ids)
            session = Session(
                session_id=session_id,
                annotator_id=annotator_id,
                task_ids=tuple(task_ids),
            )
            self._sessions[session_id] = session
            self._append(
                self._sessions_path,
                {
                    "session_id": session.session_id,
                    "annotator_id": session.annotator_id,
                    "task_ids": list(session.task_ids),
                },
            )
            return session

    def get_session(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise KeyError(f"unknown session {session_id!r}")
        return session

    def submitted_task_ids(self, session_id: str) -> set[str]:
        session = self.get_session(session_id)
        return {
            event["task_id"]
            for event in self._events
            if event["session_id"] == session.session_id
        }

    def next_task(self, session_id: str) -> Task | None:
        """First task in session order without a submission, if any."""
        session = self.get_session(session_id)
        done = self.submitted_task_ids(session_id)
        for task_id in session.task_ids:
            if task_id not in done:
                return self._tasks[task_id]
        return None

    # -- submissions ------------------------------------------------------

    def submit(self, session_id: str, task_id: str, kind: str, payload: dict) -> int:
        """Validate and append one submission; returns its sequence number."""
        session = self.get_session(session_id)
        task = self._tasks.get(task_id)
        if task is None or task_id not in session.task_ids:
            raise KeyError(f"session {session_id!r} has no task {task_id!r}")
        expected_kind = {"rate": "rating", "rank": "ranking", "vote": "vote"}[task.mode]
        if kind != expected_kind:
            raise StoreError(
                f"task {task_id!r} is a {task.mode} task; it takes {expected_kind}s, not {kind}s"
            )
        candidate_ids = {c.candidate_id for c in task.candidates}
        if kind == "rating":
            values = payload.get("values")
            if not isinstance(values, dict) or set(values) != set(ASPECTS):
                raise StoreError(
                    f"a rating must cover exactly these aspects: {', '.join(ASPECTS)}"
                )
            for aspect, value in values.items():
                if not isinstance(value, int) or not (1 <= value <= 5):
                    raise StoreError(f"aspect {aspect!r}: value must be an integer in [1, 5]")
            valid = payload.get("valid", True)
            if not isinstance(valid, bool):
                raise StoreError("rating 'valid' must be a boolean")
            reason = payload.get("exclusion_reason")
            if valid and reason is not None:
                raise StoreError("exclusion_reason requires valid=false")
            if not valid and (not isinstance(reason, str) or not reason.strip()):
                raise StoreError("a rating with valid=false needs an exclusion_reason")
        elif kind == "ranking":
            order = payload.get("order")
            if not isinstance(order, list) or set(order) != candidate_ids or len(order) != len(
                candidate_ids
            ):
                raise StoreError(
                    f"a ranking must order each of the task's candidates exactly once"
                )
        else:
            worst = payload.get("worst")
            if worst not in candidate_ids:
                raise StoreError(f"vote names unknown candidate {worst!r}")
        with self._lock:
            seq = len(self._events) + 1
            event = {
                "seq": seq,
                "kind": kind,
                "session_id": session.session_id,
                "task_id": task_id,
                "payload": payload,
            }
            self._events.append(event)
            self._append(self._events_path, event)
            return seq

    # -- export -----------------------------------------------------------

    def _latest_events(self) -> list[dict]:
        latest: dict[tuple[str, str], dict] = {}
        for event in self._events:
            latest[(event["session_id"], event["task_id"])] = event
        return [latest[key] for key in sorted(latest)]

    def export(self) -> dict[str, list[dict]]:
        """Resolve submissions to analysis records, unblinding systems.

        Only the latest event per (session, task) is exported; earlier
        events stay in the log as the audit trail.
        """
        ratings: list[RatingRecord] = []
        rankings: list[RankingRecord] = []
        votes: list[VoteRecord] = []
        for event in self._latest_events():
            session = self._sessions[event["session_id"]]
            task = self._tasks[event["task_id"]]
            payload = event["payload"]
            if event["kind"] == "rating":
                candidate = task.candidates[0]
                for aspect in ASPECTS:
                    ratings.append(
                        RatingRecord(
                            annotator_id=session.annotator_id,
                            figure_id=task.figure_id,
                            item_id=candidate.system_id,
                            aspect=aspect,
                            value=int(payload["values"][aspect]),
                            valid=bool(payload.get("valid", True)),
                            exclusion_reason=payload.get("exclusion_reason"),
                        )
                    )
            elif event["kind"] == "ranking":
                rankings.append(
                    RankingRecord(
                        annotator_id=session.annotator_id,
                        figure_id=task.figure_id,
                        ranking=tuple(
                            task.candidate(cid).system_id for cid in payload["order"]
                        ),
                    )
                )
            else:
                votes.append(
                    VoteRecord(
                        annotator_id=session.annotator_id,
                        figure_id=task.figure_id,
                        item_id=task.candidate(payload["worst"]).system_id,
                    )
                )
        def rating_row(r: RatingRecord) -> dict:
            row = {
                "annotator_id": r.annotator_id,
                "figure_id": r.figure_id,
                "item_id": r.item_id,
                "aspect": r.aspect,
                "value": r.value,
                "valid": r.valid,
            }
            if r.exclusion_reason is not None:
                row["exclusion_reason"] = r.exclusion_reason
            return row

        return {
            "ratings": [rating_row(r) for r in ratings],
            "rankings": [
                {
                    "annotator_id": r.annotator_id,
                    "figure_id": r.figure_id,
                    "ranking": list(r.ranking),
                }
                for r in rankings
            ],
            "votes": [
                {"annotator_id": v.annotator_id, "figure_id": v.figure_id, "item_id": v.item_id}
                for v in votes
            ],
        }

    def export_files(self, out_dir: str | Path) -> None:
        """Write the export bundle as the three analysis JSONL files."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        bundle = self.export()
        write_ratings(
            (RatingRecord(**row) for row in bundle["ratings"]), out_dir / "ratings.jsonl"
        )
        write_rankings(
            (
                RankingRecord(
                    annotator_id=row["annotator_id"],
                    figure_id=row["figure_id"],
                    ranking=tuple(row["ranking"]),
                )
                for row in bundle["rankings"]
            ),
            out_dir / "rankings.jsonl",
        )
        write_votes(
            (VoteRecord(**row) for row in bundle["votes"]), out_dir / "votes.jsonl"
        )


# ---------------------------------------------------------------------------
# Task construction and files
# ---------------------------------------------------------------------------


def build_tasks(
    corpus: Corpus,
    predictions: Iterable[PredictionRecord],
    mode: str,
    seed: int = 0,
) -> list[Task]:
    """Build blinded tasks from predictions.

    Rate mode creates one task per (figure, prediction); rank and vote
    modes create one task per figure with at least two candidate systems.
    Candidates get opaque ids in a per-figure shuffled order, so neither
    the id nor the position reveals the producing system.  To include the
    true caption as a candidate, pass it as a prediction row (for example
    with system id "original").
    """
    if mode not in TASK_MODES:
        raise StoreError(f"unknown task mode {mode!r}; expected one of {TASK_MODES}")
    by_figure: dict[str, list[PredictionRecord]] = {}
    for record in predictions:
        figure = corpus.figures.get(record.figure_id)
        if figure is None:
            raise StoreError(f"prediction for unknown figure {record.figure_id!r}")
        by_figure.setdefault(record.figure_id, []).append(record)

    tasks: list[Task] = []
    for figure_id in sorted(by_figure):
        figure = corpus.figures[figure_id]
        document = corpus.documents[figure.paper_id]
        records = sorted(by_figure[figure_id], key=lambda r: r.system_id)
        rng = derive_rng(seed, figure_id, f"task-order:{mode}")
        rng.shuffle(records)
        if mode == "rate":
            for i, record in enumerate(records, start=1):
                tasks.append(
                    Task(
                        task_id=f"rate-{figure_id}-{i}",
                        figure_id=figure_id,
                        mode="rate",
                        title=document.title,
                        abstract=document.abstract,
                        image_path=figure.image_path,
                        candidates=(
                            Candidate(candidate_id="c1", system_id=record.system_id, text=record.text),
                        ),
                    )
                )
        else:
            if len(records) < 2:
                continue
            tasks.append(
                Task(
                    task_id=f"{mode}-{figure_id}",
                    figure_id=figure_id,
                    mode=mode,
                    title=document.title,
                    abstract=document.abstract,
                    image_path=figure.image_path,
                    candidates=tuple(
                        Candidate(candidate_id=f"c{i}", system_id=r.system_id, text=r.text)
                        for i, r in enumerate(records, start=1)
                    ),
                )
            )
    return tasks


def write_tasks(tasks: Sequence[Task], path: str | Path) -> None:
    payload = [
        {
            "task_id": t.task_id,
            "figure_id": t.figure_id,
            "mode": t.mode,
            "title": t.title,
            "abstract": t.abstract,
            "image_path": t.image_path,
            "candidates": [
                {"candidate_id": c.candidate_id, "system_id": c.system_id, "text": c.text}
                for c in t.candidates
            ],
        }
        for t in tasks
    ]
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def load_tasks(path: str | Path) -> list[Task]:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise StoreError(f"{path}: malformed JSON ({exc.msg})") from None
    if not isinstance(payload, list):
        raise StoreError(f"{path}: expected a JSON list of tasks")
    tasks = []
    for i, record in enumerate(payload):
        try:
            tasks.append(
                Task(
                    task_id=str(record["task_id"]),
                    figure_id=str(record["figure_id"]),
                    mode=str(record["mode"]),
                    title=str(record.get("title", "")),
                    abstract=str(record.get("abstract", "")),
                    image_path=record.get("image_path"),
                    candidates=tuple(
                        Candidate(
                            candidate_id=str(c["candidate_id"]),
                            system_id=str(c["system_id"]),
                            text=str(c["text"]),
                        )
                        for c in record["candidates"]
                    ),
                )
            )
        except (KeyError, TypeError) as exc:
            raise StoreError(f"{path}: task {i}: missing or bad field ({exc})") from None
    return tasks
