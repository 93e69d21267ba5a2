import json
import os

import pytest
from fastapi.testclient import TestClient

from kgrec.kg import KnowledgeGraph, replay_feedback_log
from kgrec.recommend import SolverParams, explain, recommend, to_api
from kgrec.service import create_app

from conftest import make_movie_kg


@pytest.fixture
def app_env(tmp_path):
    kg = make_movie_kg(with_feedback=False)
    log = tmp_path / "feedback.jsonl"
    app = create_app(kg, feedback_log=str(log))
    return TestClient(app), kg, str(log)


def _post_alice_feedback(client):
    for predicate, target in (
        ("likesEntity", "tom_hanks"),
        ("likesMovie", "da_vinci_code"),
        ("dislikesEntity", "crime"),
    ):
        response = client.post(
            "/v1/users/alice/feedback", json={"predicate": predicate, "target": target}
        )
        assert response.status_code == 204


def test_health_counts(app_env):
    client, kg, _ = app_env
    body = client.get("/v1/health").json()
    assert body == {"entities": 8, "edges": 7, "users": 1}


def test_feedback_roundtrip(app_env):
    client, kg, _ = app_env
    response = client.post(
        "/v1/users/alice/feedback",
        json={"predicate": "likesEntity", "target": "tom_hanks"},
    )
    assert response.status_code == 204
    assert kg.feedback_targets("alice", "likesEntity") == {"tom_hanks"}
    recs = client.get("/v1/users/alice/recommendations").json()
    assert {r["movie"] for r in recs} >= {"bridge_of_spies", "inferno"}


def test_feedback_kind_mismatch_422(app_env):
    client, _, _ = app_env
    response = client.post(
        "/v1/users/alice/feedback", json={"predicate": "likesMovie", "target": "crime"}
    )
    assert response.status_code == 422


def test_feedback_unknown_target_404(app_env):
    client, _, _ = app_env
    response = client.post(
        "/v1/users/alice/feedback", json={"predicate": "likesEntity", "target": "ghost"}
    )
    assert response.status_code == 404


def test_feedback_malformed_400(app_env):
    client, _, _ = app_env
    assert client.post("/v1/users/alice/feedback", json={"predicate": "likesEntity"}).status_code == 400
    assert client.post("/v1/users/alice/feedback", json=[1, 2]).status_code == 400
    assert client.post(
        "/v1/users/alice/feedback",
        content=b"not json",
        headers={"Content-Type": "application/json"},
    ).status_code == 400
    assert client.post(
        "/v1/users/alice/feedback", json={"predicate": "adores", "target": "tom_hanks"}
    ).status_code == 400


def test_opposite_polarity_keeps_second(app_env):
    client, kg, log = app_env
    client.post("/v1/users/alice/feedback",
                json={"predicate": "likesEntity", "target": "tom_hanks"})
    client.post("/v1/users/alice/feedback",
                json={"predicate": "dislikesEntity", "target": "tom_hanks"})
    assert kg.feedback_targets("alice", "likesEntity") == frozenset()
    assert kg.feedback_targets("alice", "dislikesEntity") == {"tom_hanks"}
    # replaying the append-only log reproduces the same single active fact
    fresh = make_movie_kg(with_feedback=False)
    replay_feedback_log(fresh, log)
    assert fresh.feedback_targets("alice", "likesEntity") == frozenset()
    assert fresh.feedback_targets("alice", "dislikesEntity") == {"tom_hanks"}


def test_recommendations_match_library(app_env):
    client, kg, _ = app_env
    _post_alice_feedback(client)
    got = client.get("/v1/users/alice/recommendations", params={"k": 5}).json()
    expected = to_api(kg, recommend("alice", 5, kg, params=SolverParams()))
    assert got == json.loads(json.dumps(expected))
    names = [r["movie"] for r in got]
    assert names.index("bridge_of_spies") < names.index("snowden")
    assert "da_vinci_code" not in names


def test_recommendations_new_user_empty(app_env):
    client, _, _ = app_env
    response = client.get("/v1/users/nobody/recommendations")
    assert response.status_code == 200
    assert response.json() == []


def test_recommendations_invalid_k(app_env):
    client, _, _ = app_env
    assert client.get("/v1/users/alice/recommendations", params={"k": 0}).status_code == 400
    assert client.get("/v1/users/alice/recommendations", params={"k": "ten"}).status_code == 400


def test_recommendation_schema_roundtrip(app_env):
    client, _, _ = app_env
    _post_alice_feedback(client)
    response = client.get("/v1/users/alice/recommendations")
    assert response.headers["content-type"].startswith("application/json")
    body = response.json()
    for rec in body:
        assert set(rec) == {"movie", "name", "net_score", "reasons"}
        assert isinstance(rec["net_score"], float)
        for reason in rec["reasons"]:
            assert set(reason) == {"entity", "name", "contribution", "polarity"}
            assert reason["polarity"] in ("like", "dislike")
    assert json.loads(json.dumps(body)) == body


def test_explanations_parity(app_env):
    client, kg, _ = app_env
    _post_alice_feedback(client)
    for movie in kg.movies():
        got = client.get(f"/v1/users/alice/explanations/{movie}").json()
        reasons = explain("alice", movie, kg, params=SolverParams())
        expected = [
            {
                "entity": r.entity,
                "name": kg.entity(r.entity).name,
                "contribution": r.contribution,
                "polarity": r.polarity,
            }
            for r in reasons
        ]
        assert json.dumps(got, sort_keys=True) == json.dumps(
            json.loads(json.dumps(expected)), sort_keys=True
        )


def test_explanations_errors(app_env):
    client, _, _ = app_env
    assert client.get("/v1/users/alice/explanations/ghost").status_code == 404
    assert client.get("/v1/users/alice/explanations/crime").status_code == 422
    assert client.get("/v1/users/nobody/explanations/inferno").json() == []


def test_entity_search(app_env):
    client, _, _ = app_env
    hits = client.get("/v1/entities", params={"q": "tom"}).json()
    assert {h["id"] for h in hits} == {"tom_hanks"}
    assert client.get("/v1/entities", params={"q": "zzz-no-match"}).json() == []
    assert client.get("/v1/entities").status_code == 400
    assert client.get("/v1/entities", params={"q": ""}).status_code == 400


def test_entity_search_matches_scan(app_env):
    client, kg, _ = app_env
    for q in ("t", "the", "B", "dra", "x"):
        got = client.get("/v1/entities", params={"q": q}).json()
        expected = sorted(
            (
                {"id": e.id, "name": e.name, "kind": e.kind}
                for e in kg.entities.values()
                if e.name.lower().startswith(q.lower())
            ),
            key=lambda item: (item["name"], item["id"]),
        )[:20]
        assert got == expected


def test_entity_search_kind_filter(app_env):
    client, _, _ = app_env
    hits = client.get("/v1/entities", params={"q": "c", "kind": "genre"}).json()
    assert {h["id"] for h in hits} == {"crime"}


def test_crash_recovery_reproduces_responses(app_env, tmp_path):
    client, _, log = app_env
    _post_alice_feedback(client)
    client.post("/v1/users/bob/feedback",
                json={"predicate": "likesEntity", "target": "snowden"})
    snapshot = {
        uid: client.get(f"/v1/users/{uid}/recommendations").json()
        for uid in ("alice", "bob")
    }
    # restart: fresh graph, replay the same log
    kg2 = make_movie_kg(with_feedback=False)
    replay_feedback_log(kg2, log)
    client2 = TestClient(create_app(kg2, feedback_log=str(tmp_path / "new.jsonl")))
    for uid, expected in snapshot.items():
        assert client2.get(f"/v1/users/{uid}/recommendations").json() == expected


def test_static_ui_mount(tmp_path):
    ui = tmp_path / "ui"
    ui.mkdir()
    (ui / "index.html").write_text("<html><body><div id=\"app\"></div></body></html>")
    client = TestClient(create_app(make_movie_kg(), static_dir=str(ui)))
    page = client.get("/")
    assert page.status_code == 200
    assert 'id="app"' in page.text
    # API routes keep precedence over the static mount
    assert client.get("/v1/health").status_code == 200


def test_mutations_logged_before_ack_and_reads_do_not_mutate(app_env):
    client, _, log = app_env
    client.post("/v1/users/alice/feedback",
                json={"predicate": "likesEntity", "target": "tom_hanks"})
    size_after_write = os.path.getsize(log)
    assert size_after_write > 0
    lines = open(log).read().splitlines()
    assert json.loads(lines[-1])["target"] == "tom_hanks"
    client.get("/v1/users/alice/recommendations")
    client.get("/v1/users/alice/explanations/inferno")
    client.get("/v1/entities", params={"q": "tom"})
    client.get("/v1/health")
    assert os.path.getsize(log) == size_after_write
