"""HTTP API over the session store."""

from __future__ import annotations

import threading

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from ..errors import (
    InvalidStateTransition,
    ProviderError,
    SvgReuseError,
    UnknownCheckpoint,
)
from ..ir import serialize_ir
from ..preprocess import build_prompt_view
from ..svg.model import parse, serialize
from ..template import print_program
from .config import ServiceConfig
from .csvdata import ingest_csv
from .sessions import CREATED, DECOMPOSING, Session, SessionStore, _dataset_json


def create_app(config: ServiceConfig, provider=None) -> FastAPI:
    app = FastAPI(title="svgreuse", docs_url=None, redoc_url=None)
    store = SessionStore(config.session_dir)
    adapter = config.make_adapter(provider)
    app.state.store = store
    app.state.config = config
    app.state.adapter = adapter
    jobs: dict[str, threading.Thread] = {}

    @app.exception_handler(SvgReuseError)
    def _error(_request: Request, exc: SvgReuseError):
        if isinstance(exc, InvalidStateTransition):
            status = 409
        elif isinstance(exc, UnknownCheckpoint):
            status = 404
        elif isinstance(exc, ProviderError):
            status = 502
        else:
            status = 400
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    def _session(sid: str) -> Session:
        session = store.get(sid)
        if session is None:
            raise UnknownSession(sid)
        return session

    class UnknownSession(SvgReuseError):
        def __init__(self, sid):
            super().__init__(f"no session {sid!r}")

    @app.exception_handler(UnknownSession)
    def _unknown_session(_request: Request, exc: UnknownSession):
        return JSONResponse(status_code=404,
                            content={"error": "UnknownSession", "detail": str(exc)})

    @app.post("/sessions")
    def create_session():
        return {"id": store.create().id}

    @app.post("/sessions/{sid}/reference")
    async def upload_reference(sid: str, request: Request):
        session = _session(sid)
        with session.lock:
            session.require_state(CREATED)
            body = await request.body()
            from ..svg.model import ensure_ids

            session.reference = ensure_ids(parse(body))
            session.save()
            view = build_prompt_view(session.reference,
                                     renderer_command=config.renderer_command)
            return {
                "element_count": view.stats.element_count,
                "bytes_before": view.stats.bytes_before,
                "bytes_after": view.stats.bytes_after,
                "thumbnail": view.thumbnail is not None,
            }

    @app.post("/sessions/{sid}/decompose")
    def decompose(sid: str, body: dict):
        session = _session(sid)
        mode = body.get("mode", "heuristic")
        if mode not in ("lmm", "heuristic", "replay"):
            raise SvgReuseError(f"unknown decompose mode {mode!r}")
        if mode in ("lmm", "replay") and adapter is None:
            raise SvgReuseError("no model adapter configured for this mode")
        with session.lock:
            session.require_state(CREATED)
            if session.reference is None:
                raise InvalidStateTransition("decompose needs an uploaded reference")
            session.state = DECOMPOSING
        thread = threading.Thread(
            target=session.run_decompose, args=(mode, adapter), daemon=True
        )
        jobs[sid] = thread
        with session.lock:
            session.decompose_mode = mode
        thread.start()
        return {"job": "started"}

    @app.get("/sessions/{sid}/status")
    def status(sid: str):
        session = _session(sid)
        thread = jobs.get(sid)
        running = thread is not None and thread.is_alive()
        return {
            "state": session.state,
            "job": "running" if running else "idle",
            "error": session.error,
        }

    @app.get("/sessions/{sid}/template")
    def template(sid: str):
        session = _session(sid)
        with session.lock:
            session.ensure_template(session.decompose_mode, adapter)
            return session.template_payload()

    @app.get("/sessions/{sid}/ir")
    def intermediate(sid: str):
        session = _session(sid)
        if session.ir is None:
            raise InvalidStateTransition("no decomposition yet")
        return Response(serialize_ir(session.ir), media_type="application/json")

    @app.post("/sessions/{sid}/data")
    async def upload_data(sid: str, request: Request):
        session = _session(sid)
        with session.lock:
            if session.state in (CREATED, DECOMPOSING):
                raise InvalidStateTransition("upload data after decomposition")
            body = await request.body()
            session.user_dataset = ingest_csv(body)
            session.mapping = {}
            session.save()
            return {
                "columns": [[n, k.value] for n, k in session.user_dataset.columns],
                "row_count": len(session.user_dataset.rows),
            }

    @app.post("/sessions/{sid}/mapping")
    def set_mapping(sid: str, body: dict):
        session = _session(sid)
        with session.lock:
            session.require_state("templated", "refined")
            if session.user_dataset is None:
                raise SvgReuseError("no uploaded dataset to map")
            from .csvdata import apply_mapping

            mapping = {str(k): str(v) for k, v in body.get("mapping", {}).items()}
            apply_mapping(session.user_dataset, mapping,
                          session.program.required_schema)  # raises MappingError
            session.mapping = mapping
            session.save()
            return {"ok": True}

    @app.post("/sessions/{sid}/render")
    def render(sid: str, body: dict):
        session = _session(sid)
        with session.lock:
            svg = session.render(body.get("params") or {})
        return Response(svg, media_type="image/svg+xml")

    @app.post("/sessions/{sid}/chat")
    def chat(sid: str, body: dict):
        session = _session(sid)
        if adapter is None:
            raise SvgReuseError("no model adapter configured")
        with session.lock:
            result = session.chat(str(body.get("message", "")), adapter)
            svg = session.render()
            from .sessions import _widget_dict

            return {
                "reply": result.reply_text,
                "template": session.template_payload(),
                "new_params": [p.name for p in result.new_params],
                "new_widgets": [_widget_dict(w) for w in result.new_widgets],
                "diff": {
                    "nodes_changed": result.diff.nodes_changed,
                    "params_added": result.diff.params_added,
                },
                "render": svg,
                "checkpoint_id": session.checkpoints[-1].id,
            }

    @app.get("/sessions/{sid}/checkpoints")
    def list_checkpoints(sid: str):
        session = _session(sid)
        return {
            "checkpoints": [
                {"id": c.id, "timestamp": c.timestamp, "bookmarked": c.bookmarked}
                for c in session.checkpoints
            ]
        }

    @app.post("/sessions/{sid}/checkpoints")
    def make_checkpoint(sid: str):
        session = _session(sid)
        with session.lock:
            cp = session.checkpoint()
        return {"id": cp.id}

    @app.post("/sessions/{sid}/checkpoints/{cid}/bookmark")
    def bookmark(sid: str, cid: int, body: dict | None = None):
        session = _session(sid)
        with session.lock:
            session.bookmark(cid, bool((body or {}).get("flag", True)))
        return {"ok": True}

    @app.post("/sessions/{sid}/restore")
    def restore(sid: str, body: dict):
        session = _session(sid)
        with session.lock:
            session.restore(int(body["checkpoint_id"]))
        return {"ok": True}

    @app.get("/sessions/{sid}/export")
    def export(sid: str):
        session = _session(sid)
        session.require_state("templated", "refined")
        return {
            "reference": serialize(session.reference),
            "markup": serialize(session.marked),
            "ir": serialize_ir(session.ir),
            "template": print_program(session.program),
            "data": _dataset_json(session.effective_dataset()),
            "params": session.params,
            "render": session.render(),
        }

    return app
