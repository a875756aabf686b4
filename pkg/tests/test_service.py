"""HTTP service: extraction, review queue, corrections, export, replay."""

import json

import pytest
from fastapi.testclient import TestClient

from trialtables.corpus.annofile import read_annotations
from trialtables.features import HashedBackend
from trialtables.ner.model import NerModel
from trialtables.relex import RelexModel
from trialtables.service import create_app

SENTENCE = "IOP fell by 31% with latanoprost"

GOOD_CORRECTION = {
    "verdict": "accept",
    "spans": [
        {"label": "OC", "token_start": 0, "token_end": 0},
        {"label": "MEAS", "token_start": 3, "token_end": 3},
        {"label": "INTV", "token_start": 5, "token_end": 5},
    ],
    "relations": [
        {"label": "OC_RES", "head": 0, "child": 3},
        {"label": "A1_RES", "head": 5, "child": 3},
    ],
}


@pytest.fixture
def client(tmp_path):
    backend = HashedBackend()
    app = create_app(
        ner_model=NerModel.zero(backend),
        re_model=RelexModel.zero(backend),
        data_dir=tmp_path,
        batch_cap=5,
        page_size=2,
    )
    return TestClient(app)


@pytest.fixture
def bare_client(tmp_path):
    return TestClient(create_app(data_dir=tmp_path))


def test_healthz(client, bare_client):
    assert client.get("/healthz").json() == {"status": "ok", "models_loaded": True}
    assert bare_client.get("/healthz").json() == {"status": "ok", "models_loaded": False}


def test_extract_without_models_is_503(bare_client):
    resp = bare_client.post("/extract", json={"sentences": [SENTENCE]})
    assert resp.status_code == 503
    body = resp.json()
    assert body["code"] == "model_not_loaded"
    assert body["violations"] == []


def test_extract_returns_records_with_tables(client):
    resp = client.post("/extract", json={"sentences": [SENTENCE, "Nothing here."]})
    assert resp.status_code == 200
    results = resp.json()["results"]
    assert len(results) == 2
    first = results[0]
    assert first["text"] == SENTENCE
    assert first["spans"] == []  # untrained weights tag nothing
    assert first["table"]["header"] == ["outcome", "", ""]
    assert first["table"]["rows"] == []


def test_extract_cap_is_413(client):
    resp = client.post("/extract", json={"sentences": ["x"] * 6})
    assert resp.status_code == 413
    assert resp.json()["code"] == "oversize"


def test_extract_malformed_body_is_422(client):
    resp = client.post("/extract", json={"sentences": "not a list"})
    assert resp.status_code == 422
    assert resp.json()["code"] == "validation"
    resp = client.post("/extract", json={"sentences": [1, 2]})
    assert resp.status_code == 422


def enqueue(client, sentences):
    resp = client.post("/queue", json={"sentences": sentences})
    assert resp.status_code == 200
    return resp.json()["items"]


def test_enqueue_creates_pending_items(client):
    items = enqueue(client, [SENTENCE, "Second sentence."])
    assert [it["item_id"] for it in items] == [1, 2]
    assert all(it["status"] == "pending" for it in items)
    assert all(it["revision"] == 1 for it in items)
    assert items[0]["record"]["answer"] == "accept"
    assert "table" in items[0]


def test_queue_listing_paginates(client):
    enqueue(client, [f"Sentence number {i}." for i in range(5)])
    page1 = client.get("/queue").json()
    assert page1["page"] == 1
    assert page1["pages"] == 3
    assert page1["total"] == 5
    assert [it["item_id"] for it in page1["items"]] == [1, 2]
    page3 = client.get("/queue", params={"page": 3}).json()
    assert [it["item_id"] for it in page3["items"]] == [5]
    empty = client.get("/queue", params={"page": 9}).json()
    assert empty["items"] == []


def test_queue_listing_filters_status(client):
    enqueue(client, [SENTENCE])
    accepted = client.get("/queue", params={"status": "accepted"}).json()
    assert accepted["total"] == 0
    assert accepted["pages"] == 1
    resp = client.get("/queue", params={"status": "bogus"})
    assert resp.status_code == 422


def test_get_item_and_missing_item(client):
    (item,) = enqueue(client, [SENTENCE])
    got = client.get(f"/items/{item['item_id']}").json()
    assert got["doc_id"] == item["doc_id"]
    missing = client.get("/items/99")
    assert missing.status_code == 404
    assert missing.json()["code"] == "not_found"


def test_correction_accept_flow(client):
    (item,) = enqueue(client, [SENTENCE])
    resp = client.post(f"/items/{item['item_id']}/correction", json=GOOD_CORRECTION)
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "accepted"
    assert body["revision"] == 2
    assert body["record"]["answer"] == "accept"
    assert len(body["record"]["spans"]) == 3
    assert body["table"]["rows"] == [["IOP", "31%", ""]]
    assert body["table"]["header"] == ["outcome", "latanoprost", ""]


def test_correction_reject_keeps_doc(client):
    (item,) = enqueue(client, [SENTENCE])
    payload = dict(GOOD_CORRECTION, verdict="reject")
    body = client.post(f"/items/{item['item_id']}/correction", json=payload).json()
    assert body["status"] == "rejected"
    assert body["record"]["answer"] == "reject"


def test_correction_on_settled_item_conflicts(client):
    (item,) = enqueue(client, [SENTENCE])
    url = f"/items/{item['item_id']}/correction"
    assert client.post(url, json=GOOD_CORRECTION).status_code == 200
    again = client.post(url, json=GOOD_CORRECTION)
    assert again.status_code == 409
    assert again.json()["code"] == "conflict"


def test_correction_schema_violations_listed(client):
    (item,) = enqueue(client, [SENTENCE])
    bad = {
        "verdict": "accept",
        "spans": [
            {"label": "MEAS", "token_start": 0, "token_end": 0},
            {"label": "OC", "token_start": 3, "token_end": 3},
        ],
        "relations": [{"label": "OC_RES", "head": 0, "child": 3}],
    }
    resp = client.post(f"/items/{item['item_id']}/correction", json=bad)
    assert resp.status_code == 422
    body = resp.json()
    assert body["code"] == "validation"
    assert body["violations"]  # names at least the child-label problem
    # item untouched by the failed attempt
    assert client.get(f"/items/{item['item_id']}").json()["status"] == "pending"


def test_correction_malformed_payload(client):
    (item,) = enqueue(client, [SENTENCE])
    url = f"/items/{item['item_id']}/correction"
    resp = client.post(url, json={"verdict": "accept", "spans": [{"label": "OC"}]})
    assert resp.status_code == 422
    resp = client.post(url, json={"verdict": "maybe", "spans": [], "relations": []})
    assert resp.status_code == 422
    resp = client.post("/items/99/correction", json=GOOD_CORRECTION)
    assert resp.status_code == 404


def test_export_accepted_only_by_default(client, tmp_path):
    items = enqueue(client, [SENTENCE, SENTENCE, SENTENCE])
    client.post(f"/items/{items[0]['item_id']}/correction", json=GOOD_CORRECTION)
    client.post(
        f"/items/{items[1]['item_id']}/correction",
        json=dict(GOOD_CORRECTION, verdict="reject"),
    )
    resp = client.get("/export/train")
    assert resp.headers["x-export-count"] == "1"
    assert resp.headers["content-type"].startswith("application/x-ndjson")
    lines = [l for l in resp.text.splitlines() if l]
    assert len(lines) == 1
    assert json.loads(lines[0])["answer"] == "accept"

    both = client.get("/export/train", params={"include_rejected": "true"})
    assert both.headers["x-export-count"] == "2"

    # exported lines load back as corpus annotation records
    path = tmp_path / "export.jsonl"
    path.write_text(both.text, encoding="utf-8")
    docs = read_annotations(path)
    assert [d.answer for d in docs] == ["accept", "reject"]
    assert len(docs[0].entities) == 3


def test_log_replay_restores_queue(client, tmp_path):
    items = enqueue(client, [SENTENCE, "Another sentence."])
    client.post(f"/items/{items[0]['item_id']}/correction", json=GOOD_CORRECTION)

    lines = (tmp_path / "queue.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 3  # two enqueues plus one correction, append-only

    reopened = TestClient(create_app(data_dir=tmp_path))
    listing = reopened.get("/queue", params={"status": "accepted"}).json()
    assert listing["total"] == 1
    assert listing["items"][0]["item_id"] == items[0]["item_id"]
    assert listing["items"][0]["revision"] == 2
    pending = reopened.get("/queue").json()
    assert pending["total"] == 1
    # new ids continue after the replayed ones even without models
    assert reopened.get("/items/2").json()["status"] == "pending"
