"""Multimodal model adapter with record/replay transcripts.

Every request is digested (sha256 over a canonical JSON rendering, with
images content-hashed) so a recorded transcript can be replayed
hermetically: in replay mode no network code runs at all.
"""

from __future__ import annotations

import base64
import enum
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ProviderError, ReplayMiss

ENV_BASE_URL = "LMM_BASE_URL"
ENV_API_KEY = "LMM_API_KEY"
ENV_MODE = "LMM_MODE"
ENV_MODEL = "LMM_MODEL"

DEFAULT_MODEL = "gpt-4o"


class Mode(enum.Enum):
    RECORD = "record"
    REPLAY = "replay"
    LIVE = "live"


@dataclass
class ModelRequest:
    system: str
    user: str
    images: list[bytes] = field(default_factory=list)  # PNG payloads

    def digest(self) -> str:
        canonical = json.dumps(
            {
                "system": self.system,
                "user": self.user,
                "images": [hashlib.sha256(i).hexdigest() for i in self.images],
            },
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class Transcript:
    """Append-only digest -> response store, one JSON object per line."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.entries: dict[str, str] = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                obj = json.loads(line)
                self.entries[obj["digest"]] = base64.b64decode(obj["response"]).decode(
                    "utf-8"
                )

    def get(self, digest: str) -> str | None:
        return self.entries.get(digest)

    def put(self, digest: str, response: str):
        self.entries[digest] = response
        record = {
            "digest": digest,
            "response": base64.b64encode(response.encode("utf-8")).decode("ascii"),
        }
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


class LmmAdapter:
    """Dispatches requests per mode.

    ``provider`` is an injectable callable ``(ModelRequest) -> str`` used
    instead of HTTP when present (scripted providers, tests).
    """

    def __init__(self, mode: Mode = Mode.REPLAY, transcript: Transcript | None = None,
                 provider=None, base_url: str | None = None,
                 api_key: str | None = None, model: str = DEFAULT_MODEL):
        if mode in (Mode.RECORD, Mode.REPLAY) and transcript is None:
            raise ValueError(f"{mode.value} mode needs a transcript")
        self.mode = mode
        self.transcript = transcript
        self.provider = provider
        self.base_url = base_url
        self.api_key = api_key
        self.model = model

    @classmethod
    def from_env(cls, transcript: Transcript | None = None,
                 provider=None) -> "LmmAdapter":
        mode = Mode(os.environ.get(ENV_MODE, Mode.REPLAY.value))
        return cls(
            mode=mode,
            transcript=transcript,
            provider=provider,
            base_url=os.environ.get(ENV_BASE_URL),
            api_key=os.environ.get(ENV_API_KEY),
            model=os.environ.get(ENV_MODEL, DEFAULT_MODEL),
        )

    def complete(self, request: ModelRequest) -> str:
        digest = request.digest()
        if self.mode is Mode.REPLAY:
            response = self.transcript.get(digest)
            if response is None:
                raise ReplayMiss(digest)
            return response
        response = self._call(request)
        if self.mode is Mode.RECORD:
            self.transcript.put(digest, response)
        return response

    def _call(self, request: ModelRequest) -> str:
        if self.provider is not None:
            return self.provider(request)
        return self._call_http(request)

    def _call_http(self, request: ModelRequest) -> str:
        import httpx  # imported lazily: replay mode must not touch network code

        if not self.base_url:
            raise ProviderError("no provider endpoint configured", status=0)
        content: list[dict] = [{"type": "text", "text": request.user}]
        for png in request.images:
            encoded = base64.b64encode(png).decode("ascii")
            content.append(
                {
                    "type": "image_url",
                    "image_url": {"url": f"data:image/png;base64,{encoded}"},
                }
            )
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": content},
            ],
        }
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        url = self.base_url.rstrip("/") + "/chat/completions"
        try:
            resp = httpx.post(url, json=payload, headers=headers, timeout=120.0)
        except httpx.HTTPError as exc:
            raise ProviderError(str(exc), status=0) from exc
        if resp.status_code // 100 != 2:
            raise ProviderError(
                f"provider returned {resp.status_code}",
                status=resp.status_code,
                body=resp.text[:2000],
            )
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise ProviderError(f"malformed provider response: {exc}",
                                status=resp.status_code) from exc
