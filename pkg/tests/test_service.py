import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from adauthor.config import PathsConfig, PipelineConfig
from adauthor.drafts import DraftStore
from adauthor.providers import MockTts, ProviderConfig, ScriptedVlm
from adauthor.queries import AdaptContext, FrameStamp
from adauthor.segmentation import Scene, SceneList
from adauthor.service import create_app
from adauthor.transcripts import MergedTranscript, TranscriptWord

from conftest import make_event, make_track

FIXTURE = Path(__file__).parent / "fixtures" / "e2e"


@pytest.fixture
def client(tmp_path, asset):
    config = PipelineConfig(base_dir=str(tmp_path), output_dir="out",
                            storage_dir="store")
    store = DraftStore()
    app = create_app(config, store=store,
                     vlm=ScriptedVlm(default="[]"), tts=MockTts())
    client = TestClient(app)
    client.app_state = app.state
    store.register_asset(asset)
    draft = store.create_draft(asset, make_track([
        make_event("e1", 12.0, text="Olaf waves at the camera", duration=2.0),
        make_event("e2", 30.0, text="Sven hops beside him", duration=2.0,
                   delivery="extended"),
    ]))
    client.draft_id = draft.draft_id
    return client


def test_healthz(client):
    response = client.get("/healthz")
    assert response.status_code == 200
    assert response.text == "ok"


def test_unknown_draft_404(client):
    assert client.get("/drafts/nope").status_code == 404


def test_get_draft_shape(client):
    body = client.get(f"/drafts/{client.draft_id}").json()
    assert body["version"] == 1
    assert body["collab_enabled"] is True
    assert body["published"] is False
    assert [e["event_id"] for e in body["track"]["events"]] == ["e1", "e2"]


def test_revision_and_conflict(client):
    ops = [{"event_id": "e1", "kind": "edit_text",
            "before": "Olaf waves at the camera", "after": "Olaf waves"}]
    first = client.post(f"/drafts/{client.draft_id}/revisions",
                        json={"expected_version": 1, "ops": ops},
                        headers={"X-Author-Id": "alice"})
    assert first.status_code == 200
    assert first.json()["version"] == 2

    stale = client.post(f"/drafts/{client.draft_id}/revisions",
                        json={"expected_version": 1, "ops": ops},
                        headers={"X-Author-Id": "alice"})
    assert stale.status_code == 409


def test_forbidden_second_editor(client):
    ops = [{"event_id": "e1", "kind": "edit_text",
            "before": "Olaf waves at the camera", "after": "Olaf waves"}]
    client.post(f"/drafts/{client.draft_id}/revisions",
                json={"expected_version": 1, "ops": ops},
                headers={"X-Author-Id": "alice"})
    client.post(f"/drafts/{client.draft_id}/collab",
                json={"enabled": False}, headers={"X-Author-Id": "alice"})
    blocked = client.post(
        f"/drafts/{client.draft_id}/revisions",
        json={"expected_version": 2,
              "ops": [{"event_id": "e1", "kind": "edit_text",
                       "before": "Olaf waves", "after": "Olaf grins"}]},
        headers={"X-Author-Id": "bob"})
    assert blocked.status_code == 403


def test_invalid_revision_422(client):
    ops = [{"event_id": "e1", "kind": "edit_text",
            "before": "Olaf waves at the camera", "after": "   "}]
    response = client.post(f"/drafts/{client.draft_id}/revisions",
                           json={"expected_version": 1, "ops": ops},
                           headers={"X-Author-Id": "alice"})
    assert response.status_code == 422
    assert response.json()["violations"][0]["rule"] == "empty-text"


def test_nudge_endpoint(client):
    response = client.post(
        f"/drafts/{client.draft_id}/events/e1/nudge",
        json={"expected_version": 1, "frames": 1},
        headers={"X-Author-Id": "alice"})
    assert response.status_code == 200
    body = response.json()
    assert body["start_time"] == pytest.approx(12.04)
    assert body["version"] == 2


def test_publish_cycle_and_attribution(client):
    publish = client.post(f"/drafts/{client.draft_id}/publish",
                          headers={"X-Author-Id": "alice"})
    assert publish.status_code == 200
    assert publish.json()["published"] is True

    shares = client.get(f"/drafts/{client.draft_id}/attribution").json()["shares"]
    assert shares == {"AI": 1.0}

    locked = client.post(
        f"/drafts/{client.draft_id}/revisions",
        json={"expected_version": 1,
              "ops": [{"event_id": "e1", "kind": "edit_text",
                       "before": "Olaf waves at the camera", "after": "x"}]},
        headers={"X-Author-Id": "alice"})
    assert locked.status_code == 409

    assert client.delete(f"/drafts/{client.draft_id}/publish",
                         headers={"X-Author-Id": "alice"}
                         ).json()["published"] is False


def test_attribution_hidden_for_strangers_until_published(client):
    ops = [{"event_id": "e1", "kind": "edit_text",
            "before": "Olaf waves at the camera", "after": "Olaf waves"}]
    client.post(f"/drafts/{client.draft_id}/revisions",
                json={"expected_version": 1, "ops": ops},
                headers={"X-Author-Id": "alice"})
    hidden = client.get(f"/drafts/{client.draft_id}/attribution",
                        headers={"X-Author-Id": "stranger"})
    assert hidden.status_code == 403
    visible = client.get(f"/drafts/{client.draft_id}/attribution",
                         headers={"X-Author-Id": "alice"})
    assert visible.status_code == 200


def test_export_endpoint(client):
    vtt = client.get(f"/drafts/{client.draft_id}/export", params={"format": "vtt"})
    assert vtt.status_code == 200
    assert vtt.text.startswith("WEBVTT")
    track = client.get(f"/drafts/{client.draft_id}/export",
                       params={"format": "track"})
    assert json.loads(track.text)["schema_version"] == 1
    assert client.get(f"/drafts/{client.draft_id}/export",
                      params={"format": "srt"}).status_code == 400


def test_feedback_endpoint(client):
    ok = client.post(f"/drafts/{client.draft_id}/feedback",
                     json={"rating": 4, "comment": "solid"})
    assert ok.status_code == 200
    bad = client.post(f"/drafts/{client.draft_id}/feedback", json={"rating": 9})
    assert bad.status_code == 422


def test_ratings_endpoint(client):
    scores = {dim: 4 for dim in (
        "Accurate", "Prioritized", "Appropriate", "Consistent", "Equal",
        "Strategic Use of Delivery Method", "Timing & Placement")}
    ok = client.post("/ratings", json={
        "rater_id": "r1", "video_id": "v1", "label": "A", "scores": scores})
    assert ok.status_code == 200
    scores["Accurate"] = 6
    bad = client.post("/ratings", json={
        "rater_id": "r1", "video_id": "v1", "label": "A", "scores": scores})
    assert bad.status_code == 422


def adapt_client(asset, reply):
    scenes = SceneList((Scene(0, 0.0, 60.0, keyframe_index=30),))
    ctx = AdaptContext(
        asset=asset, scenes=scenes,
        frames=tuple(FrameStamp(i, float(i)) for i in range(61)),
        words=MergedTranscript((TranscriptWord("hello", 1.0, 1.4),)),
        track=make_track([make_event("e1", 5.0, text="An empty studio")]))
    app = create_app(PipelineConfig(), store=DraftStore(),
                     vlm=ScriptedVlm(default=reply), tts=MockTts())
    app.state.adapt_contexts[asset.asset_id] = ctx
    return TestClient(app)


def test_adapt_describe_endpoint(asset):
    client = adapt_client(asset, "A butterfly flutters across the frame. Extra.")
    response = client.post("/adapt/describe",
                           json={"asset_id": asset.asset_id, "time": 10.0})
    assert response.status_code == 200
    body = response.json()
    assert body["text"] == "A butterfly flutters across the frame."
    assert body["audio_uri"].startswith("mock://tts/")


def test_adapt_question_endpoint(asset):
    client = adapt_client(asset, "Gombe National Park, Tanzania.")
    response = client.post("/adapt/question",
                           json={"asset_id": asset.asset_id, "time": 10.0,
                                 "question": "Where are the chimpanzees?"})
    assert response.status_code == 200
    assert response.json()["text"] == "Gombe National Park, Tanzania."
    empty = client.post("/adapt/question",
                        json={"asset_id": asset.asset_id, "time": 10.0,
                              "question": "  "})
    assert empty.status_code == 400


def test_adapt_unknown_asset_404(asset):
    client = adapt_client(asset, "unused")
    missing = client.post("/adapt/describe",
                          json={"asset_id": "ghost", "time": 1.0})
    assert missing.status_code == 404


def test_full_genad_over_http(tmp_path):
    replies = json.loads((FIXTURE / "vlm_replies.json").read_text())["replies"]
    config = PipelineConfig(base_dir=str(tmp_path), output_dir="out",
                            storage_dir="store")
    app = create_app(config, store=DraftStore(),
                     vlm=ScriptedVlm(replies=replies, default="[]"),
                     tts=MockTts())
    client = TestClient(app)

    register = client.post("/assets", json={
        "asset": json.loads((FIXTURE / "asset.json").read_text()),
        "paths": {
            "embeddings": str(FIXTURE / "embeddings.jsonl"),
            "transcript_primary": str(FIXTURE / "primary.jsonl"),
            "transcript_secondary": str(FIXTURE / "secondary.jsonl"),
        },
    })
    assert register.status_code == 200

    generated = client.post("/assets/gombe-doc/genad")
    assert generated.status_code == 200
    draft_id = generated.json()["draft_id"]

    draft = client.get(f"/drafts/{draft_id}").json()
    assert len(draft["track"]["events"]) == 4
    assert draft["collab_enabled"] is True

    describe = client.post("/adapt/describe",
                           json={"asset_id": "gombe-doc", "time": 33.0})
    assert describe.status_code == 200
