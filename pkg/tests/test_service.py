import json
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from svgreuse.corpus import standard_corpus
from svgreuse.errors import CsvParseError, MappingError, RaggedRows
from svgreuse.ir import ColumnKind
from svgreuse.service.app import create_app
from svgreuse.service.config import ServiceConfig
from svgreuse.service.csvdata import apply_mapping, ingest_csv
from svgreuse.svg.model import serialize

TRANSCRIPT = Path(__file__).resolve().parent.parent / "fixtures" / "transcripts" / "bars4.jsonl"


# -- CSV ingestion -----------------------------------------------------------


def test_csv_header_and_kinds():
    data = ingest_csv(b"name,score\nalice,1.5\nbob,2\n")
    assert data.columns == [("name", ColumnKind.STRING), ("score", ColumnKind.NUMBER)]
    assert data.rows == [("alice", 1.5), ("bob", 2.0)]


def test_csv_mixed_column_is_string():
    data = ingest_csv(b"v\n1\nx\n")
    assert data.columns == [("v", ColumnKind.STRING)]
    assert data.rows == [("1",), ("x",)]


def test_csv_empty_cell_in_number_column_rejected():
    with pytest.raises(CsvParseError):
        ingest_csv(b"k,v\na,1\nb,\n")


def test_csv_ragged_rows_rejected_with_row_number():
    with pytest.raises(RaggedRows) as err:
        ingest_csv(b"a,b\n1,2\n3\n")
    assert "2" in str(err.value)


def test_csv_without_rows_rejected():
    with pytest.raises(CsvParseError):
        ingest_csv(b"")


def test_apply_mapping_renames_columns():
    data = ingest_csv(b"quarter,revenue\nQ1,10\n")
    out = apply_mapping(
        data,
        {"quarter": "category", "revenue": "value"},
        [("category", ColumnKind.STRING), ("value", ColumnKind.NUMBER)],
    )
    assert out.columns == [("category", ColumnKind.STRING), ("value", ColumnKind.NUMBER)]
    assert out.rows == [("Q1", 10.0)]


def test_apply_mapping_must_cover_schema():
    data = ingest_csv(b"quarter,revenue\nQ1,10\n")
    with pytest.raises(MappingError):
        apply_mapping(data, {"quarter": "category"},
                      [("category", ColumnKind.STRING), ("value", ColumnKind.NUMBER)])


def test_apply_mapping_checks_kinds():
    data = ingest_csv(b"quarter,revenue\nQ1,10\n")
    with pytest.raises(MappingError):
        apply_mapping(
            data,
            {"quarter": "value", "revenue": "category"},
            [("category", ColumnKind.STRING), ("value", ColumnKind.NUMBER)],
        )


# -- service endpoints -------------------------------------------------------


@pytest.fixture()
def client(tmp_path):
    config = ServiceConfig(
        session_dir=str(tmp_path / "sessions"),
        lmm_mode="replay",
        lmm_transcript=str(TRANSCRIPT),
    )
    return TestClient(create_app(config))


def _wait_idle(client, sid, timeout=10.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        status = client.get(f"/sessions/{sid}/status").json()
        if status["job"] == "idle":
            return status
        time.sleep(0.01)
    raise AssertionError("decompose job never finished")


def _decomposed_session(client, mode="heuristic"):
    chart = standard_corpus()[0]
    sid = client.post("/sessions").json()["id"]
    assert client.post(
        f"/sessions/{sid}/reference",
        content=serialize(chart.document).encode(),
    ).status_code == 200
    assert client.post(f"/sessions/{sid}/decompose", json={"mode": mode}).status_code == 200
    status = _wait_idle(client, sid)
    assert status == {"state": "decomposed", "job": "idle", "error": ""}
    return sid


def test_full_lifecycle_states(client):
    sid = _decomposed_session(client)
    payload = client.get(f"/sessions/{sid}/template").json()
    assert {"source", "params", "widgets"} <= set(payload)
    assert client.get(f"/sessions/{sid}/status").json()["state"] == "templated"
    render = client.post(f"/sessions/{sid}/render", json={})
    assert render.status_code == 200
    assert render.text.startswith("<svg")


def test_unknown_session_is_404(client):
    assert client.get("/sessions/nope/status").status_code == 404


def test_upload_reference_reports_prompt_view_stats(client):
    chart = standard_corpus()[0]
    sid = client.post("/sessions").json()["id"]
    out = client.post(
        f"/sessions/{sid}/reference", content=serialize(chart.document).encode()
    ).json()
    assert out["element_count"] > 0
    assert out["bytes_after"] <= out["bytes_before"]
    assert out["thumbnail"] is False


def test_out_of_order_calls_get_409_without_mutation(client):
    chart = standard_corpus()[0]
    sid = client.post("/sessions").json()["id"]

    def snapshot():
        return client.get(f"/sessions/{sid}/status").json()

    # decompose before any reference
    before = snapshot()
    assert client.post(f"/sessions/{sid}/decompose", json={}).status_code == 409
    assert snapshot() == before

    # render / chat / checkpoint / mapping before templated
    client.post(f"/sessions/{sid}/reference",
                content=serialize(chart.document).encode())
    before = snapshot()
    for call in (
        lambda: client.post(f"/sessions/{sid}/render", json={}),
        lambda: client.post(f"/sessions/{sid}/chat", json={"message": "x"}),
        lambda: client.post(f"/sessions/{sid}/checkpoints"),
        lambda: client.post(f"/sessions/{sid}/mapping", json={"mapping": {}}),
        lambda: client.post(f"/sessions/{sid}/data", content=b"a\n1\n"),
        lambda: client.get(f"/sessions/{sid}/export"),
    ):
        response = call()
        assert response.status_code == 409, response.text
        assert snapshot() == before

    # a second reference upload after decompose is rejected too
    sid2 = _decomposed_session(client)
    assert client.post(
        f"/sessions/{sid2}/reference", content=b"<svg/>"
    ).status_code == 409


def test_render_accepts_param_overrides(client):
    sid = _decomposed_session(client)
    client.get(f"/sessions/{sid}/template")
    base = client.post(f"/sessions/{sid}/render", json={}).text
    thin = client.post(
        f"/sessions/{sid}/render", json={"params": {"chart_height": 110.0}}
    ).text
    assert thin != base
    # overrides persist for later renders
    again = client.post(f"/sessions/{sid}/render", json={}).text
    assert again == thin


def test_data_upload_and_mapping_rerenders(client):
    sid = _decomposed_session(client)
    client.get(f"/sessions/{sid}/template")
    base = client.post(f"/sessions/{sid}/render", json={}).text
    out = client.post(
        f"/sessions/{sid}/data", content=b"quarter,revenue\nQ1,5\nQ2,45\n"
    ).json()
    assert out == {"columns": [["quarter", "String"], ["revenue", "Number"]],
                   "row_count": 2}
    assert client.post(
        f"/sessions/{sid}/mapping",
        json={"mapping": {"quarter": "category", "revenue": "value"}},
    ).json() == {"ok": True}
    remapped = client.post(f"/sessions/{sid}/render", json={}).text
    assert remapped != base
    assert remapped.count("<rect") < base.count("<rect")


def test_bad_mapping_is_400(client):
    sid = _decomposed_session(client)
    client.get(f"/sessions/{sid}/template")
    client.post(f"/sessions/{sid}/data", content=b"quarter,revenue\nQ1,5\n")
    response = client.post(
        f"/sessions/{sid}/mapping", json={"mapping": {"quarter": "category"}}
    )
    assert response.status_code == 400
    assert response.json()["error"] == "MappingError"


def test_chat_turn_creates_checkpoint_and_widget(client):
    sid = _decomposed_session(client)
    client.get(f"/sessions/{sid}/template")
    out = client.post(
        f"/sessions/{sid}/chat", json={"message": "Make the bars thinner."}
    ).json()
    assert out["new_params"] == ["bar_width"]
    assert out["diff"] == {"nodes_changed": 1, "params_added": 1}
    assert out["new_widgets"][0]["widget"] == "Slider"
    assert out["checkpoint_id"] == 1
    cps = client.get(f"/sessions/{sid}/checkpoints").json()["checkpoints"]
    assert [c["id"] for c in cps] == [1]
    assert client.get(f"/sessions/{sid}/status").json()["state"] == "refined"


def test_checkpoint_restore_round_trip(client):
    sid = _decomposed_session(client)
    client.get(f"/sessions/{sid}/template")
    cp = client.post(f"/sessions/{sid}/checkpoints").json()["id"]
    base = client.post(f"/sessions/{sid}/render", json={}).text
    client.post(f"/sessions/{sid}/render", json={"params": {"chart_height": 80.0}})
    assert client.post(
        f"/sessions/{sid}/restore", json={"checkpoint_id": cp}
    ).json() == {"ok": True}
    assert client.post(f"/sessions/{sid}/render", json={}).text == base


def test_restore_unknown_checkpoint_is_404(client):
    sid = _decomposed_session(client)
    client.get(f"/sessions/{sid}/template")
    assert client.post(
        f"/sessions/{sid}/restore", json={"checkpoint_id": 99}
    ).status_code == 404


def test_checkpoint_ids_are_monotonic(client):
    sid = _decomposed_session(client)
    client.get(f"/sessions/{sid}/template")
    ids = [client.post(f"/sessions/{sid}/checkpoints").json()["id"] for _ in range(3)]
    assert ids == [1, 2, 3]


def test_bookmark_persists(client):
    sid = _decomposed_session(client)
    client.get(f"/sessions/{sid}/template")
    cp = client.post(f"/sessions/{sid}/checkpoints").json()["id"]
    client.post(f"/sessions/{sid}/checkpoints/{cp}/bookmark", json={})
    (entry,) = client.get(f"/sessions/{sid}/checkpoints").json()["checkpoints"]
    assert entry["bookmarked"] is True


def test_export_bundle(client):
    sid = _decomposed_session(client)
    client.get(f"/sessions/{sid}/template")
    bundle = client.get(f"/sessions/{sid}/export").json()
    assert set(bundle) == {
        "reference", "markup", "ir", "template", "data", "params", "render",
    }
    assert bundle["render"].startswith("<svg")
    assert "dw:group" in bundle["markup"]


def test_ir_endpoint_serves_canonical_json(client):
    sid = _decomposed_session(client)
    obj = json.loads(client.get(f"/sessions/{sid}/ir").text)
    assert "globals" in obj and "marks" in obj


def test_sessions_survive_service_restart(tmp_path):
    config = ServiceConfig(
        session_dir=str(tmp_path / "sessions"),
        lmm_mode="replay",
        lmm_transcript=str(TRANSCRIPT),
    )
    first = TestClient(create_app(config))
    sid = _decomposed_session(first)
    first.get(f"/sessions/{sid}/template")
    cp = first.post(f"/sessions/{sid}/checkpoints").json()["id"]
    base = first.post(f"/sessions/{sid}/render", json={}).text

    second = TestClient(create_app(config))  # fresh process state, same disk
    assert second.get(f"/sessions/{sid}/status").json()["state"] == "templated"
    assert second.post(f"/sessions/{sid}/render", json={}).text == base
    second.post(f"/sessions/{sid}/restore", json={"checkpoint_id": cp})
    assert second.post(f"/sessions/{sid}/render", json={}).text == base


def test_decompose_replay_without_transcript_is_rejected(tmp_path):
    config = ServiceConfig(session_dir=str(tmp_path / "s"))
    client = TestClient(create_app(config))
    chart = standard_corpus()[0]
    sid = client.post("/sessions").json()["id"]
    client.post(f"/sessions/{sid}/reference",
                content=serialize(chart.document).encode())
    response = client.post(f"/sessions/{sid}/decompose", json={"mode": "replay"})
    assert response.status_code == 400


def test_replay_decompose_matches_heuristic(client):
    sid_h = _decomposed_session(client, mode="heuristic")
    sid_r = _decomposed_session(client, mode="replay")
    assert (
        client.get(f"/sessions/{sid_h}/ir").text
        == client.get(f"/sessions/{sid_r}/ir").text
    )
