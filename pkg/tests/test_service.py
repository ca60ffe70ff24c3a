import concurrent.futures
import csv
import time

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from ieltsprep.cli import main as cli_main
from ieltsprep.corpus import save_dataset
from ieltsprep.service import ServiceConfig, create_app

ESSAY = (
    "Many people believe that education is the key to a better life. "
    "Governments should spend more money on public schools so that every "
    "child has a fair chance. However, others argue that families carry the "
    "main responsibility for learning.\n\n"
    "Schools teach discipline and basic knowledge to children every day. "
    "Furthermore, teachers play an important role in the lives of young "
    "people. He go to school because the law requires it, yet motivation "
    "matters far more than obligation.\n\n"
    "In conclusion, a balance between public investment and family support "
    "gives students the best chance to succeed in the modern economy."
)


@pytest.fixture()
def client(tmp_path):
    app = create_app(ServiceConfig(store_path=str(tmp_path / "svc.db")))
    with TestClient(app) as c:
        yield c


@pytest.fixture(scope="module")
def model_path(tmp_path_factory, trained_model):
    path = tmp_path_factory.mktemp("model") / "model.pt"
    trained_model.save(path)
    return str(path)


def onboard(client, section="full"):
    sid = client.post("/sessions", json={}).json()["id"]
    for message in ["hi", "Ada", "29", "yes", section]:
        response = client.post(f"/sessions/{sid}/dialogue", json={"message": message})
        assert response.status_code == 200
    return sid


class TestSessions:
    def test_create_initializes_attempts(self, client):
        response = client.post("/sessions", json={"name": "Ada", "age": 29})
        assert response.status_code == 201
        body = response.json()
        assert body["attempts_remaining"] == 3
        assert body["candidate_name"] == "Ada"

    def test_invalid_age_rejected(self, client):
        response = client.post("/sessions", json={"age": 200})
        assert response.status_code == 400
        assert response.json() == {
            "code": "invalid_age",
            "message": "age must be an integer in [5, 120]",
        }

    def test_unknown_session_not_found(self, client):
        response = client.get("/sessions/nope")
        assert response.status_code == 404
        assert response.json()["code"] == "not_found"

    def test_dialogue_fills_session_fields(self, client):
        sid = onboard(client, "body")
        session = client.get(f"/sessions/{sid}").json()
        assert session["candidate_name"] == "Ada"
        assert session["candidate_age"] == 29
        assert session["selected_section"] == "body"
        assert session["dialogue_state"] == "WRITING"

    def test_dialogue_transcript_survives_restart(self, tmp_path):
        db = str(tmp_path / "svc.db")
        with TestClient(create_app(ServiceConfig(store_path=db))) as c1:
            sid = c1.post("/sessions", json={}).json()["id"]
            c1.post(f"/sessions/{sid}/dialogue", json={"message": "hi"})
            c1.post(f"/sessions/{sid}/dialogue", json={"message": "Ada"})
        with TestClient(create_app(ServiceConfig(store_path=db))) as c2:
            reply = c2.post(f"/sessions/{sid}/dialogue", json={"message": "31"}).json()
            assert reply["state"] == "OFFER_EXERCISE"
            assert reply["slots"]["candidate_name"] == "Ada"


class TestTasks:
    def test_full_task_requires_250_words(self, client):
        body = client.get("/tasks/full").json()
        assert body["required_word_count"] == 250
        assert body["instructions"]
        assert body["reference_image"]

    @pytest.mark.parametrize("section,target", [
        ("introduction", 50), ("body", 150), ("conclusion", 50),
    ])
    def test_section_word_targets(self, client, section, target):
        assert client.get(f"/tasks/{section}").json()["required_word_count"] == target

    def test_unknown_task(self, client):
        assert client.get("/tasks/preface").status_code == 404


class TestSubmissions:
    def test_response_carries_scores_and_feedback(self, client):
        sid = onboard(client)
        response = client.post(f"/sessions/{sid}/submissions", json={"text": ESSAY})
        assert response.status_code == 201
        body = response.json()
        assert body["attempt_index"] == 1
        assert body["attempts_remaining"] == 2
        assert 1.0 <= body["band"] <= 9.0
        assert body["percentage"] == round(body["band"] / 9.0 * 100.0, 1)
        assert {"ta", "cc", "lr", "gra"} <= set(body["rubric"])
        items = body["feedback"]["items"]
        assert sorted(i["criterion"] for i in items) == ["CC", "GRA", "LR", "TA"]
        assert any(i["polarity"] == "weakness" for i in items)

    def test_three_attempts_then_limit(self, client):
        sid = onboard(client)
        for attempt in (1, 2, 3):
            body = client.post(f"/sessions/{sid}/submissions", json={"text": ESSAY}).json()
            assert body["attempt_index"] == attempt
            assert body["final"] == (attempt == 3)
        response = client.post(f"/sessions/{sid}/submissions", json={"text": ESSAY})
        assert response.status_code == 409
        assert response.json()["code"] == "attempt_limit"
        assert "attempt limit reached" in response.json()["message"]

    def test_empty_text_rejected_without_consuming_attempt(self, client):
        sid = onboard(client)
        assert client.post(f"/sessions/{sid}/submissions", json={"text": "  "}).status_code == 400
        assert client.get(f"/sessions/{sid}").json()["attempts_remaining"] == 3

    def test_oversized_text_rejected(self, client):
        sid = onboard(client)
        text = "word " * 10_001
        response = client.post(f"/sessions/{sid}/submissions", json={"text": text})
        assert response.status_code == 400
        assert response.json()["code"] == "text_too_long"

    def test_race_on_last_attempt_single_winner(self, client):
        sid = onboard(client)
        for _ in range(2):
            client.post(f"/sessions/{sid}/submissions", json={"text": ESSAY})

        def submit():
            return client.post(f"/sessions/{sid}/submissions", json={"text": ESSAY})

        with concurrent.futures.ThreadPoolExecutor(max_workers=2) as pool:
            results = [f.result() for f in [pool.submit(submit), pool.submit(submit)]]
        codes = sorted(r.status_code for r in results)
        assert codes == [201, 409]
        assert client.get(f"/sessions/{sid}").json()["attempts_remaining"] == 0

    def test_latency_under_two_seconds(self, client):
        sid = onboard(client)
        durations = []
        for _ in range(3):
            start = time.perf_counter()
            response = client.post(f"/sessions/{sid}/submissions", json={"text": ESSAY})
            durations.append(time.perf_counter() - start)
            assert response.status_code == 201
        assert max(durations) <= 2.0


class TestProgress:
    def test_empty_then_ordered_deltas(self, client):
        sid = onboard(client)
        assert client.get(f"/sessions/{sid}/progress").json()["submissions"] == []
        client.post(f"/sessions/{sid}/submissions", json={"text": ESSAY})
        improved = ESSAY.replace("He go to school", "He goes to school")
        client.post(f"/sessions/{sid}/submissions", json={"text": improved})
        rows = client.get(f"/sessions/{sid}/progress").json()["submissions"]
        assert [r["attempt_index"] for r in rows] == [1, 2]
        assert rows[0]["delta"] is None
        assert rows[1]["delta"] is not None

    def test_progress_survives_restart(self, tmp_path):
        db = str(tmp_path / "svc.db")
        with TestClient(create_app(ServiceConfig(store_path=db))) as c1:
            sid = onboard(c1)
            c1.post(f"/sessions/{sid}/submissions", json={"text": ESSAY})
            before = c1.get(f"/sessions/{sid}/progress").json()
        with TestClient(create_app(ServiceConfig(store_path=db))) as c2:
            assert c2.get(f"/sessions/{sid}/progress").json() == before


class TestPipelineIdentity:
    def test_submission_score_matches_offline_cli(self, tmp_path, model_path, heldout_essays):
        app = create_app(ServiceConfig(
            model_path=model_path, store_path=str(tmp_path / "svc.db"),
        ))
        essays = heldout_essays[:3]
        with TestClient(app) as client:
            service_raws = []
            for essay in essays:
                sid = onboard(client)
                body = client.post(
                    f"/sessions/{sid}/submissions", json={"text": essay.body}
                ).json()
                service_raws.append((body["neural_raw"], body["band"]))

        in_csv, out_csv = tmp_path / "in.csv", tmp_path / "out.csv"
        save_dataset(list(essays), in_csv)
        result = CliRunner().invoke(cli_main, [
            "score", "--model", model_path, "--in", str(in_csv), "--out", str(out_csv),
        ])
        assert result.exit_code == 0, result.output
        with open(out_csv, newline="") as fh:
            rows = list(csv.DictReader(fh))
        for (service_raw, service_band), row in zip(service_raws, rows):
            assert float(row["raw_score"]) == service_raw
            assert float(row["band"]) == service_band
