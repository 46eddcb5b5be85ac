import json

import pytest

from svgreuse.errors import ReplayMiss
from svgreuse.lmm import LmmAdapter, Mode, ModelRequest, Transcript


def req(user="hello", system="sys", images=()):
    return ModelRequest(system=system, user=user, images=list(images))


def test_digest_is_stable():
    assert req().digest() == req().digest()
    assert len(req().digest()) == 64


def test_digest_sensitive_to_every_part():
    base = req().digest()
    assert req(user="other").digest() != base
    assert req(system="other").digest() != base
    assert req(images=[b"\x89PNG"]).digest() != base


def test_digest_hashes_image_content_not_identity():
    assert req(images=[b"abc"]).digest() == req(images=[bytes(b"abc")]).digest()


def test_transcript_round_trip(tmp_path):
    path = tmp_path / "t.jsonl"
    t = Transcript(path)
    t.put("d1", "resp one\nwith newline")
    t.put("d2", "unicode ✓")
    reloaded = Transcript(path)
    assert reloaded.get("d1") == "resp one\nwith newline"
    assert reloaded.get("d2") == "unicode ✓"
    assert reloaded.get("missing") is None


def test_transcript_lines_are_base64_json(tmp_path):
    path = tmp_path / "t.jsonl"
    Transcript(path).put("d1", "x")
    obj = json.loads(path.read_text().splitlines()[0])
    assert set(obj) == {"digest", "response"}


def test_record_then_replay_round_trip(tmp_path):
    path = tmp_path / "t.jsonl"
    recorder = LmmAdapter(
        Mode.RECORD, Transcript(path), provider=lambda r: f"echo:{r.user}"
    )
    assert recorder.complete(req("a")) == "echo:a"
    assert recorder.complete(req("b")) == "echo:b"

    def explode(request):
        raise AssertionError("replay must not call the provider")

    replayer = LmmAdapter(Mode.REPLAY, Transcript(path), provider=explode)
    assert replayer.complete(req("a")) == "echo:a"
    assert replayer.complete(req("b")) == "echo:b"


def test_replay_miss_raises():
    adapter = LmmAdapter(Mode.REPLAY, Transcript("/nonexistent/transcript.jsonl"))
    with pytest.raises(ReplayMiss):
        adapter.complete(req("never recorded"))


def test_record_mode_requires_transcript():
    with pytest.raises(ValueError):
        LmmAdapter(Mode.RECORD)
    with pytest.raises(ValueError):
        LmmAdapter(Mode.REPLAY)


def test_live_mode_uses_injected_provider():
    adapter = LmmAdapter(Mode.LIVE, provider=lambda r: "live!")
    assert adapter.complete(req()) == "live!"


def test_from_env(monkeypatch, tmp_path):
    monkeypatch.setenv("LMM_MODE", "record")
    monkeypatch.setenv("LMM_MODEL", "test-model")
    adapter = LmmAdapter.from_env(Transcript(tmp_path / "t.jsonl"))
    assert adapter.mode is Mode.RECORD
    assert adapter.model == "test-model"
