"""Session lifecycle, persistence, and checkpointing.

Each session lives in its own directory of canonical artifact files
(reference.svg, marked.dwsvg, ir.json, template.dwt, dataset.json) plus
a manifest, so a restarted service reloads every session byte-exactly.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ..chain import decompose_document, synthesize_with_adapter
from ..errors import (
    InvalidStateTransition,
    SvgReuseError,
    UnknownCheckpoint,
)
from ..ir import (
    ColumnKind,
    Dataset,
    IntermediateRepresentation,
    parse_ir,
    serialize_ir,
)
from ..lmm import LmmAdapter
from ..refine import ChatTurn, RefinementResult, materialize_widgets, refine
from ..svg.model import SvgDocument, parse, serialize
from ..template import TemplateProgram, evaluate, parse_program, print_program
from ..template.synthesize import synthesize_heuristic
from .csvdata import apply_mapping

# State machine: created -> decomposing -> decomposed -> templated -> refined*
CREATED = "created"
DECOMPOSING = "decomposing"
DECOMPOSED = "decomposed"
TEMPLATED = "templated"
REFINED = "refined"

_RENDERABLE = (TEMPLATED, REFINED)


def _digest(text: str) -> str:
    import hashlib

    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class Checkpoint:
    id: int
    timestamp: float
    bookmarked: bool = False
    markup_digest: str = ""


@dataclass
class Session:
    id: str
    dir: Path
    state: str = CREATED
    error: str = ""
    reference: SvgDocument | None = None
    marked: SvgDocument | None = None
    ir: IntermediateRepresentation | None = None
    program: TemplateProgram | None = None
    params: dict = field(default_factory=dict)
    dataset: Dataset | None = None  # recovered from the reference
    user_dataset: Dataset | None = None  # uploaded CSV
    mapping: dict = field(default_factory=dict)
    decompose_mode: str = "heuristic"
    history: list[ChatTurn] = field(default_factory=list)
    checkpoints: list[Checkpoint] = field(default_factory=list)
    next_checkpoint_id: int = 1
    lock: threading.RLock = field(default_factory=threading.RLock, repr=False)

    # -- state helpers ----------------------------------------------------

    def require_state(self, *allowed: str):
        if self.state not in allowed:
            raise InvalidStateTransition(
                f"operation requires state in {sorted(allowed)}, session is {self.state!r}"
            )

    # -- persistence ------------------------------------------------------

    def save(self):
        self.dir.mkdir(parents=True, exist_ok=True)
        if self.reference is not None:
            (self.dir / "reference.svg").write_text(
                serialize(self.reference), encoding="utf-8"
            )
        if self.marked is not None:
            (self.dir / "marked.dwsvg").write_text(
                serialize(self.marked), encoding="utf-8"
            )
        if self.ir is not None:
            (self.dir / "ir.json").write_text(serialize_ir(self.ir), encoding="utf-8")
        if self.program is not None:
            (self.dir / "template.dwt").write_text(
                print_program(self.program), encoding="utf-8"
            )
        if self.dataset is not None:
            (self.dir / "dataset.json").write_text(
                _dataset_json(self.dataset), encoding="utf-8"
            )
        if self.user_dataset is not None:
            (self.dir / "user_dataset.json").write_text(
                _dataset_json(self.user_dataset), encoding="utf-8"
            )
        manifest = {
            "state": self.state if self.state != DECOMPOSING else CREATED,
            "error": self.error,
            "params": self.params,
            "mapping": self.mapping,
            "decompose_mode": self.decompose_mode,
            "history": [{"speaker": t.speaker, "content": t.content} for t in self.history],
            "next_checkpoint_id": self.next_checkpoint_id,
            "checkpoints": [
                {
                    "id": c.id,
                    "timestamp": c.timestamp,
                    "bookmarked": c.bookmarked,
                    "markup_digest": c.markup_digest,
                }
                for c in self.checkpoints
            ],
        }
        (self.dir / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, sid: str, directory: Path) -> "Session":
        session = cls(sid, directory)
        manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
        session.state = manifest["state"]
        session.error = manifest.get("error", "")
        session.params = manifest.get("params", {})
        session.mapping = manifest.get("mapping", {})
        session.decompose_mode = manifest.get("decompose_mode", "heuristic")
        session.history = [
            ChatTurn(t["speaker"], t["content"]) for t in manifest.get("history", [])
        ]
        session.next_checkpoint_id = manifest.get("next_checkpoint_id", 1)
        session.checkpoints = [
            Checkpoint(c["id"], c["timestamp"], c.get("bookmarked", False),
                       c.get("markup_digest", ""))
            for c in manifest.get("checkpoints", [])
        ]
        for name, attr in (
            ("reference.svg", "reference"),
            ("marked.dwsvg", "marked"),
        ):
            path = directory / name
            if path.exists():
                setattr(session, attr, parse(path.read_bytes()))
        if (directory / "ir.json").exists():
            session.ir = parse_ir((directory / "ir.json").read_text(encoding="utf-8"))
        if (directory / "template.dwt").exists():
            session.program = parse_program(
                (directory / "template.dwt").read_text(encoding="utf-8")
            )
        if (directory / "dataset.json").exists():
            session.dataset = _dataset_from_json(
                (directory / "dataset.json").read_text(encoding="utf-8")
            )
        if (directory / "user_dataset.json").exists():
            session.user_dataset = _dataset_from_json(
                (directory / "user_dataset.json").read_text(encoding="utf-8")
            )
        return session

    # -- pipeline ---------------------------------------------------------

    def run_decompose(self, mode: str, adapter: LmmAdapter | None):
        """The decomposition job body (runs on a worker thread)."""
        try:
            result = decompose_document(
                self.reference, adapter if mode in ("lmm", "replay") else None
            )
            with self.lock:
                self.marked = result.marked
                self.dataset = result.dataset
                self.ir = result.ir
                self.state = DECOMPOSED
                self.error = ""
                self.save()
        except SvgReuseError as exc:
            with self.lock:
                self.state = CREATED
                self.error = str(exc)
                self.save()

    def ensure_template(self, mode: str, adapter: LmmAdapter | None) -> TemplateProgram:
        if self.program is not None:
            return self.program
        self.require_state(DECOMPOSED)
        if mode in ("lmm", "replay") and adapter is not None:
            self.program = synthesize_with_adapter(self.marked, self.ir,
                                                   self.dataset, adapter)
        else:
            self.program = synthesize_heuristic(self.marked, self.ir)
        self.params = dict(self.program.default_params())
        self.state = TEMPLATED
        self.save()
        return self.program

    def effective_dataset(self) -> Dataset:
        if self.user_dataset is not None and self.mapping:
            return apply_mapping(self.user_dataset, self.mapping,
                                 self.program.required_schema)
        return self.dataset

    def render(self, params: dict | None = None) -> str:
        self.require_state(*_RENDERABLE)
        if params:
            merged = dict(self.params)
            merged.update(params)
            self.params = merged
            self.save()
        out = evaluate(self.program, self.marked, self.effective_dataset(), self.params)
        return serialize(out)

    def chat(self, message: str, adapter: LmmAdapter) -> RefinementResult:
        self.require_state(*_RENDERABLE)
        result = refine(
            self.program,
            message,
            adapter,
            marked=self.marked,
            schema=self.effective_dataset().columns,
            history=self.history,
        )
        old_defaults = self.program.default_params()
        self.program = result.program_after
        new_params = {}
        for name, default in self.program.default_params().items():
            if name in self.params and old_defaults.get(name) == default:
                new_params[name] = self.params[name]  # user-set value survives
            else:
                new_params[name] = default  # new param or deliberately changed default
        self.params = new_params
        self.history.append(ChatTurn("user", message))
        self.history.append(ChatTurn("assistant", result.reply_text))
        self.state = REFINED
        self.checkpoint()  # checkpoints are created after every chat turn
        return result

    # -- checkpoints ------------------------------------------------------

    def checkpoint(self) -> Checkpoint:
        self.require_state(*_RENDERABLE)
        cp = Checkpoint(
            id=self.next_checkpoint_id,
            timestamp=time.time(),
            markup_digest=_digest(serialize(self.marked)),
        )
        self.next_checkpoint_id += 1
        cp_dir = self.dir / "checkpoints" / str(cp.id)
        cp_dir.mkdir(parents=True, exist_ok=True)
        (cp_dir / "template.dwt").write_text(print_program(self.program),
                                             encoding="utf-8")
        (cp_dir / "params.json").write_text(
            json.dumps(self.params, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        (cp_dir / "dataset.json").write_text(_dataset_json(self.effective_dataset()),
                                             encoding="utf-8")
        (cp_dir / "mapping.json").write_text(
            json.dumps(self.mapping, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        self.checkpoints.append(cp)
        self.save()
        return cp

    def find_checkpoint(self, checkpoint_id: int) -> Checkpoint:
        for c in self.checkpoints:
            if c.id == checkpoint_id:
                return c
        raise UnknownCheckpoint(f"no checkpoint {checkpoint_id} in session {self.id}")

    def restore(self, checkpoint_id: int):
        self.require_state(*_RENDERABLE)
        self.find_checkpoint(checkpoint_id)
        cp_dir = self.dir / "checkpoints" / str(checkpoint_id)
        self.program = parse_program(
            (cp_dir / "template.dwt").read_text(encoding="utf-8")
        )
        self.params = json.loads((cp_dir / "params.json").read_text(encoding="utf-8"))
        snapshot = _dataset_from_json(
            (cp_dir / "dataset.json").read_text(encoding="utf-8")
        )
        # The snapshot stores the effective (post-mapping) dataset.
        self.user_dataset = None
        self.mapping = {}
        self.dataset = snapshot
        self.save()

    def bookmark(self, checkpoint_id: int, flag: bool = True):
        self.find_checkpoint(checkpoint_id).bookmarked = flag
        self.save()

    # -- payload helpers --------------------------------------------------

    def template_payload(self) -> dict:
        widgets = materialize_widgets(self.program)
        return {
            "source": print_program(self.program),
            "params": self.params,
            "widgets": [_widget_dict(w) for w in widgets],
        }


def _widget_dict(w) -> dict:
    return {
        "param_name": w.param_name,
        "widget": w.widget,
        "title": w.title,
        "default": w.default,
        "min": w.minimum,
        "max": w.maximum,
        "step": w.step,
        "options": w.options,
    }


def _dataset_json(dataset: Dataset) -> str:
    return json.dumps(
        {
            "columns": [[n, k.value] for n, k in dataset.columns],
            "rows": [list(r) for r in dataset.rows],
        },
        indent=2,
        sort_keys=True,
    ) + "\n"


def _dataset_from_json(text: str) -> Dataset:
    obj = json.loads(text)
    return Dataset(
        [(n, ColumnKind(k)) for n, k in obj["columns"]],
        [tuple(r) for r in obj["rows"]],
    )


class SessionStore:
    """All sessions under one root directory, reloaded lazily on start."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, Session] = {}
        self.lock = threading.Lock()

    def create(self) -> Session:
        sid = uuid.uuid4().hex[:12]
        session = Session(sid, self.root / sid)
        session.save()
        with self.lock:
            self.sessions[sid] = session
        return session

    def get(self, sid: str) -> Session | None:
        with self.lock:
            if sid in self.sessions:
                return self.sessions[sid]
        directory = self.root / sid
        if (directory / "manifest.json").exists():
            session = Session.load(sid, directory)
            with self.lock:
                self.sessions[sid] = session
            return session
        return None
