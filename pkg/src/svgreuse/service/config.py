"""Service configuration loaded from a JSON file."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..lmm import LmmAdapter, Mode, Transcript


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8077
    session_dir: str = "sessions"
    fidelity_tolerance: float = 0.005
    renderer_command: str | None = None
    lmm_mode: str = "replay"
    lmm_transcript: str | None = None
    lmm_base_url: str | None = None
    lmm_api_key: str | None = None
    lmm_model: str = "gpt-4o"

    @classmethod
    def load(cls, path: str | Path) -> "ServiceConfig":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        cfg = cls()
        listen = obj.get("listen", {})
        cfg.host = listen.get("host", cfg.host)
        cfg.port = int(listen.get("port", cfg.port))
        cfg.session_dir = obj.get("session_dir", cfg.session_dir)
        cfg.fidelity_tolerance = float(
            obj.get("fidelity_tolerance", cfg.fidelity_tolerance)
        )
        cfg.renderer_command = obj.get("renderer", {}).get("command")
        lmm = obj.get("lmm", {})
        cfg.lmm_mode = lmm.get("mode", cfg.lmm_mode)
        cfg.lmm_transcript = lmm.get("transcript")
        cfg.lmm_base_url = lmm.get("base_url")
        cfg.lmm_api_key = lmm.get("api_key")
        cfg.lmm_model = lmm.get("model", cfg.lmm_model)
        return cfg

    def make_adapter(self, provider=None) -> LmmAdapter | None:
        mode = Mode(self.lmm_mode)
        transcript = Transcript(self.lmm_transcript) if self.lmm_transcript else None
        if mode in (Mode.RECORD, Mode.REPLAY) and transcript is None:
            return None
        return LmmAdapter(
            mode=mode,
            transcript=transcript,
            provider=provider,
            base_url=self.lmm_base_url,
            api_key=self.lmm_api_key,
            model=self.lmm_model,
        )
