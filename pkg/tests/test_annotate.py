"""Annotation tasks, the append-only store, and the HTTP service."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from figsumm.analysis import load_rankings, load_ratings, load_votes
from figsumm.annotate import (
    ASPECTS,
    AnnotationStore,
    Candidate,
    StoreError,
    Task,
    build_tasks,
    create_app,
    load_tasks,
    write_tasks,
)
from figsumm.baselines import PredictionRecord
from figsumm.jsonio import iter_jsonl

SYSTEMS = ("sys-alpha", "sys-beta", "sys-gamma")


def _figure_ids(corpus, n: int) -> list[str]:
    return sorted(corpus.figures)[:n]


def _predictions(corpus, n_figures: int = 4) -> list[PredictionRecord]:
    records = []
    for figure_id in _figure_ids(corpus, n_figures):
        for system in SYSTEMS:
            records.append(
                PredictionRecord(
                    figure_id=figure_id,
                    system_id=system,
                    text=f"{system} caption for {figure_id}",
                )
            )
    return records


GOOD_VALUES = {aspect: 4 for aspect in ASPECTS}


# ---------------------------------------------------------------------------
# Task construction
# ---------------------------------------------------------------------------


def test_rate_tasks_one_per_prediction(corpus) -> None:
    predictions = _predictions(corpus)
    tasks = build_tasks(corpus, predictions, mode="rate")
    assert len(tasks) == len(predictions)
    for task in tasks:
        assert task.mode == "rate"
        assert len(task.candidates) == 1
        assert task.candidates[0].candidate_id == "c1"
        document = corpus.documents[corpus.figures[task.figure_id].paper_id]
        assert task.title == document.title
        assert task.abstract == document.abstract


def test_rate_tasks_accept_original_caption(corpus) -> None:
    figure_id = _figure_ids(corpus, 1)[0]
    figure = corpus.figures[figure_id]
    predictions = [
        PredictionRecord(figure_id=figure_id, system_id="original", text=figure.caption_text)
    ]
    tasks = build_tasks(corpus, predictions, mode="rate")
    assert len(tasks) == 1
    assert tasks[0].candidates[0].system_id == "original"
    assert tasks[0].candidates[0].text == figure.caption_text


def test_rank_tasks_one_per_figure(corpus) -> None:
    tasks = build_tasks(corpus, _predictions(corpus), mode="rank")
    assert len(tasks) == 4
    for task in tasks:
        assert [c.candidate_id for c in task.candidates] == ["c1", "c2", "c3"]
        assert sorted(c.system_id for c in task.candidates) == sorted(SYSTEMS)


def test_single_candidate_figures_skipped_for_rank(corpus) -> None:
    figure_ids = _figure_ids(corpus, 2)
    predictions = [
        PredictionRecord(figure_ids[0], "sys-alpha", "a"),
        PredictionRecord(figure_ids[0], "sys-beta", "b"),
        PredictionRecord(figure_ids[1], "sys-alpha", "only one"),
    ]
    tasks = build_tasks(corpus, predictions, mode="rank")
    assert [t.figure_id for t in tasks] == [figure_ids[0]]


def test_candidate_order_shuffled_per_figure(corpus) -> None:
    predictions = _predictions(corpus, n_figures=8)
    tasks = build_tasks(corpus, predictions, mode="vote", seed=0)
    orders = {t.figure_id: tuple(c.system_id for c in t.candidates) for t in tasks}
    assert len(set(orders.values())) > 1  # not the same order on every figure
    again = build_tasks(corpus, predictions, mode="vote", seed=0)
    assert {t.figure_id: tuple(c.system_id for c in t.candidates) for t in again} == orders
    reseeded = build_tasks(corpus, predictions, mode="vote", seed=99)
    assert {t.figure_id: tuple(c.system_id for c in t.candidates) for t in reseeded} != orders


def test_build_tasks_rejects_bad_input(corpus) -> None:
    with pytest.raises(StoreError):
        build_tasks(corpus, [], mode="grade")
    with pytest.raises(StoreError):
        build_tasks(corpus, [PredictionRecord("missing-fig", "sys-alpha", "x")], mode="rate")


def test_task_validation() -> None:
    c1 = Candidate("c1", "sys-alpha", "a")
    c2 = Candidate("c2", "sys-beta", "b")
    with pytest.raises(StoreError):
        Task("t", "f", "grade", candidates=(c1,))
    with pytest.raises(StoreError):
        Task("t", "f", "rate", candidates=(c1, c2))
    with pytest.raises(StoreError):
        Task("t", "f", "rank", candidates=(c1,))
    with pytest.raises(StoreError):
        Task("t", "f", "vote", candidates=())
    with pytest.raises(StoreError):
        Task("t", "f", "rank", candidates=(c1, Candidate("c1", "sys-beta", "b")))


def test_task_files_round_trip(corpus, tmp_path) -> None:
    tasks = build_tasks(corpus, _predictions(corpus), mode="rank")
    path = tmp_path / "tasks.json"
    write_tasks(tasks, path)
    assert load_tasks(path) == tasks
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(StoreError):
        load_tasks(path)


# ---------------------------------------------------------------------------
# Store
# ---------------------------------------------------------------------------


@pytest.fixture()
def rate_store(corpus, tmp_path) -> AnnotationStore:
    tasks = build_tasks(corpus, _predictions(corpus, n_figures=2), mode="rate")
    return AnnotationStore(tmp_path / "store", tasks)


@pytest.fixture()
def rank_store(corpus, tmp_path) -> AnnotationStore:
    tasks = build_tasks(corpus, _predictions(corpus, n_figures=6), mode="rank")
    return AnnotationStore(tmp_path / "store", tasks)


def test_sessions_cover_all_tasks_in_shuffled_order(rank_store) -> None:
    first = rank_store.create_session("ann-1")
    second = rank_store.create_session("ann-2")
    assert first.session_id != second.session_id
    assert sorted(first.task_ids) == sorted(rank_store.tasks)
    assert sorted(second.task_ids) == sorted(rank_store.tasks)
    assert first.task_ids != second.task_ids  # 6 tasks: same order is (1/720)²·collisions


def test_next_task_walks_session_order(rank_store) -> None:
    session = rank_store.create_session("ann-1")
    seen = []
    while True:
        task = rank_store.next_task(session.session_id)
        if task is None:
            break
        seen.append(task.task_id)
        order = [c.candidate_id for c in task.candidates]
        rank_store.submit(session.session_id, task.task_id, "ranking", {"order": order})
    assert tuple(seen) == session.task_ids


def test_submit_rejects_wrong_kind(rank_store) -> None:
    session = rank_store.create_session("ann-1")
    task_id = session.task_ids[0]
    with pytest.raises(StoreError) as err:
        rank_store.submit(session.session_id, task_id, "rating", {"values": GOOD_VALUES})
    assert "rank" in str(err.value)


def test_submit_validates_ratings(rate_store) -> None:
    session = rate_store.create_session("ann-1")
    task_id = session.task_ids[0]

    def attempt(payload: dict) -> None:
        with pytest.raises(StoreError):
            rate_store.submit(session.session_id, task_id, "rating", payload)

    attempt({"values": {k: 4 for k in list(ASPECTS)[:-1]}})  # missing aspect
    attempt({"values": {**GOOD_VALUES, "extra": 3}})  # unknown aspect
    attempt({"values": {**GOOD_VALUES, "helpfulness": 6}})  # out of range
    attempt({"values": {**GOOD_VALUES, "helpfulness": 0}})
    attempt({"values": {**GOOD_VALUES, "helpfulness": "4"}})  # non-integer
    attempt({"values": GOOD_VALUES, "valid": "yes"})  # non-boolean flag
    attempt({"values": GOOD_VALUES, "valid": False})  # no reason
    attempt({"values": GOOD_VALUES, "valid": False, "exclusion_reason": "  "})
    attempt({"values": GOOD_VALUES, "valid": True, "exclusion_reason": "broken image"})
    # The screened-out form is accepted.
    seq = rate_store.submit(
        session.session_id,
        task_id,
        "rating",
        {"values": GOOD_VALUES, "valid": False, "exclusion_reason": "not a figure"},
    )
    assert seq == 1


def test_submit_validates_rankings_and_votes(rank_store) -> None:
    session = rank_store.create_session("ann-1")
    task_id = session.task_ids[0]
    for bad_order in (["c1", "c2"], ["c1", "c2", "c2"], ["c1", "c2", "c9"], "c1c2c3"):
        with pytest.raises(StoreError):
            rank_store.submit(session.session_id, task_id, "ranking", {"order": bad_order})
    with pytest.raises(StoreError):
        rank_store.submit(session.session_id, task_id, "vote", {"worst": "c1"})


def test_submit_unknown_session_or_task(rate_store) -> None:
    session = rate_store.create_session("ann-1")
    with pytest.raises(KeyError):
        rate_store.submit("s9999", session.task_ids[0], "rating", {"values": GOOD_VALUES})
    with pytest.raises(KeyError):
        rate_store.submit(session.session_id, "no-such-task", "rating", {"values": GOOD_VALUES})


def test_resubmission_appends_latest_wins(rate_store, tmp_path) -> None:
    session = rate_store.create_session("ann-1")
    task_id = session.task_ids[0]
    first = {"values": {k: 2 for k in ASPECTS}, "valid": True}
    second = {"values": {k: 5 for k in ASPECTS}, "valid": True}
    seq1 = rate_store.submit(session.session_id, task_id, "rating", first)
    seq2 = rate_store.submit(session.session_id, task_id, "rating", second)
    assert seq2 == seq1 + 1
    # The audit trail keeps both events on disk...
    events = [record for _, record in iter_jsonl(tmp_path / "store" / "events.jsonl")]
    assert [e["seq"] for e in events] == [seq1, seq2]
    # ...but export resolves to the latest one.
    rows = [r for r in rate_store.export()["ratings"]]
    assert len(rows) == len(ASPECTS)
    assert all(row["value"] == 5 for row in rows)


def test_store_survives_restart(corpus, tmp_path) -> None:
    tasks = build_tasks(corpus, _predictions(corpus, n_figures=2), mode="rate")
    store = AnnotationStore(tmp_path / "store", tasks)
    session = store.create_session("ann-1")
    task_id = session.task_ids[0]
    store.submit(session.session_id, task_id, "rating", {"values": GOOD_VALUES})
    before = store.export()

    reopened = AnnotationStore(tmp_path / "store", tasks)
    assert reopened.get_session(session.session_id).task_ids == session.task_ids
    assert reopened.submitted_task_ids(session.session_id) == {task_id}
    next_task = reopened.next_task(session.session_id)
    assert next_task is not None and next_task.task_id == session.task_ids[1]
    assert reopened.export() == before


def test_restart_rejects_session_for_unknown_task(corpus, tmp_path) -> None:
    tasks = build_tasks(corpus, _predictions(corpus, n_figures=2), mode="rate")
    store = AnnotationStore(tmp_path / "store", tasks)
    store.create_session("ann-1")
    with pytest.raises(StoreError):
        AnnotationStore(tmp_path / "store", tasks[:1])


def test_export_unblinds_all_kinds(corpus, tmp_path) -> None:
    figure_ids = _figure_ids(corpus, 2)
    predictions = _predictions(corpus, n_figures=2)
    rate_tasks = build_tasks(corpus, predictions, mode="rate")
    rank_tasks = build_tasks(corpus, predictions, mode="rank")
    vote_tasks = build_tasks(corpus, predictions, mode="vote")
    # task ids are disjoint across modes, so one store can hold all three.
    store = AnnotationStore(tmp_path / "store", rate_tasks + rank_tasks + vote_tasks)
    session = store.create_session("ann-1")

    one_rate = rate_tasks[0]
    store.submit(session.session_id, one_rate.task_id, "rating", {"values": GOOD_VALUES})
    one_rank = rank_tasks[0]
    reversed_order = [c.candidate_id for c in reversed(one_rank.candidates)]
    store.submit(session.session_id, one_rank.task_id, "ranking", {"order": reversed_order})
    one_vote = vote_tasks[0]
    worst = one_vote.candidates[1]
    store.submit(session.session_id, one_vote.task_id, "vote", {"worst": worst.candidate_id})

    bundle = store.export()
    assert len(bundle["ratings"]) == len(ASPECTS)
    assert {row["aspect"] for row in bundle["ratings"]} == set(ASPECTS)
    for row in bundle["ratings"]:
        assert row["item_id"] == one_rate.candidates[0].system_id
        assert row["figure_id"] in figure_ids
        assert row["valid"] is True
    assert bundle["rankings"][0]["ranking"] == [
        c.system_id for c in reversed(one_rank.candidates)
    ]
    assert bundle["votes"][0]["item_id"] == worst.system_id

    out = tmp_path / "export"
    store.export_files(out)
    assert len(load_ratings(out / "ratings.jsonl")) == len(ASPECTS)
    assert load_rankings(out / "rankings.jsonl")[0].ranking == tuple(
        c.system_id for c in reversed(one_rank.candidates)
    )
    assert load_votes(out / "votes.jsonl")[0].item_id == worst.system_id


# ---------------------------------------------------------------------------
# HTTP service
# ---------------------------------------------------------------------------


def _scan_for_leaks(payload: object) -> None:
    """Recursively assert a served payload names no producing system."""
    if isinstance(payload, dict):
        for key, value in payload.items():
            assert "system" not in key.lower()
            _scan_for_leaks(value)
    elif isinstance(payload, list):
        for item in payload:
            _scan_for_leaks(item)
    elif isinstance(payload, str):
        for system in SYSTEMS:
            assert system not in payload


@pytest.fixture()
def client(corpus, tmp_path) -> TestClient:
    predictions = []
    for figure_id in _figure_ids(corpus, 3):
        for system in SYSTEMS:
            predictions.append(
                PredictionRecord(figure_id, system, f"text by {figure_id}/{system[4:]}")
            )
    tasks = build_tasks(corpus, predictions, mode="rate") + build_tasks(
        corpus, predictions, mode="rank"
    )
    store = AnnotationStore(tmp_path / "store", tasks)
    return TestClient(create_app(store))


def test_health(client) -> None:
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["ok"] is True


def test_full_session_over_http(client) -> None:
    created = client.post("/sessions", json={"annotator_id": "ann-1"})
    assert created.status_code == 200
    session_id = created.json()["session_id"]
    n_tasks = created.json()["n_tasks"]

    completed = 0
    while True:
        view = client.get(f"/sessions/{session_id}/next").json()
        if view.get("done"):
            break
        _scan_for_leaks(view)
        if view["mode"] == "rate":
            assert view["aspects"] == list(ASPECTS)
            assert len(view["candidates"]) == 1
            body = {"task_id": view["task_id"], "values": GOOD_VALUES}
            response = client.post(f"/sessions/{session_id}/ratings", json=body)
        else:
            order = [c["candidate_id"] for c in view["candidates"]]
            body = {"task_id": view["task_id"], "order": order}
            response = client.post(f"/sessions/{session_id}/rankings", json=body)
        assert response.status_code == 200
        assert response.json()["ok"] is True
        completed += 1
    assert completed == n_tasks

    bundle = client.get("/export").json()
    exported_systems = {row["item_id"] for row in bundle["ratings"]}
    assert exported_systems == set(SYSTEMS)
    assert len(bundle["rankings"]) == 3


def test_served_candidate_order_is_per_session(client) -> None:
    ids = [
        client.post("/sessions", json={"annotator_id": f"ann-{i}"}).json()["session_id"]
        for i in range(4)
    ]
    # Stable within a session: asking again without submitting re-serves
    # the same task in the same candidate order.
    first = client.get(f"/sessions/{ids[0]}/next").json()
    again = client.get(f"/sessions/{ids[0]}/next").json()
    assert first == again
    # Across sessions the same task comes back with its candidates
    # re-shuffled (some pair of 4 sessions must differ on a 3-candidate
    # rank task unless serving leaked a global order).
    orders: dict[str, list[tuple[str, ...]]] = {}
    for session_id in ids:
        while True:
            view = client.get(f"/sessions/{session_id}/next").json()
            if view.get("done"):
                break
            if view["mode"] == "rank":
                orders.setdefault(view["task_id"], []).append(
                    tuple(c["candidate_id"] for c in view["candidates"])
                )
                body = {
                    "task_id": view["task_id"],
                    "order": [c["candidate_id"] for c in view["candidates"]],
                }
                client.post(f"/sessions/{session_id}/rankings", json=body)
            else:
                body = {"task_id": view["task_id"], "values": GOOD_VALUES}
                client.post(f"/sessions/{session_id}/ratings", json=body)
    assert any(len(set(seen)) > 1 for seen in orders.values())


def test_http_error_codes(client) -> None:
    assert client.get("/sessions/s9999/next").status_code == 404
    session_id = client.post("/sessions", json={"annotator_id": "ann-1"}).json()["session_id"]
    view = client.get(f"/sessions/{session_id}/next").json()

    bad_rating = {"task_id": view["task_id"], "values": {**GOOD_VALUES, "helpfulness": 6}}
    assert client.post(f"/sessions/{session_id}/ratings", json=bad_rating).status_code == 422

    assert client.post("/sessions", json={"annotator_id": ""}).status_code == 422

    missing_task = {"task_id": "no-such-task", "values": GOOD_VALUES}
    assert client.post(f"/sessions/{session_id}/ratings", json=missing_task).status_code == 404

    if view["mode"] == "rate":
        wrong_kind = {"task_id": view["task_id"], "order": ["c1"]}
        assert (
            client.post(f"/sessions/{session_id}/rankings", json=wrong_kind).status_code == 400
        )
    else:
        wrong_kind = {"task_id": view["task_id"], "values": GOOD_VALUES}
        assert (
            client.post(f"/sessions/{session_id}/ratings", json=wrong_kind).status_code == 400
        )

    flagged = {
        "task_id": view["task_id"],
        "values": GOOD_VALUES,
        "valid": True,
        "exclusion_reason": "should not be here",
    }
    target = "ratings" if view["mode"] == "rate" else "rankings"
    if view["mode"] == "rate":
        assert client.post(f"/sessions/{session_id}/{target}", json=flagged).status_code == 400


def test_next_task_payload_omits_nulls(client) -> None:
    session_id = client.post("/sessions", json={"annotator_id": "ann-1"}).json()["session_id"]
    view = client.get(f"/sessions/{session_id}/next").json()
    assert "image_url" not in view  # no figures directory mounted
    if view["mode"] != "rate":
        assert "aspects" not in view
