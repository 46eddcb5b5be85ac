"""Regenerate the frozen model transcripts in fixtures/transcripts/.

A scripted provider computes correct chain/synthesis/refinement replies
from the deterministic pipeline, and the requests are recorded through
the real service so replayed test runs hit identical digests.

Run from the repository root:  python3 tools/make_fixtures.py
"""

from __future__ import annotations

import json
import shutil
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from svgreuse.chain import enrichment_from_ir
from svgreuse.corpus import standard_corpus
from svgreuse.decompose import heuristic_decompose
from svgreuse.ir import serialize_ir
from svgreuse.lmm import ModelRequest
from svgreuse.service.app import create_app
from svgreuse.service.config import ServiceConfig
from svgreuse.svg.markers import group_member_ids, iter_groups, strip_markers
from svgreuse.svg.model import parse, serialize
from svgreuse.template.ast import Emit, ForEach, ParameterSpec, ParamKind, Slot, param
from svgreuse.template.parser import parse_program, print_program
from svgreuse.template.synthesize import synthesize_heuristic

ROOT = Path(__file__).resolve().parent.parent
TRANSCRIPT = ROOT / "fixtures" / "transcripts" / "bars4.jsonl"

CHAT_TURNS = [
    "Make the bars thinner.",
    "Let me pick the bar color.",
    "What does this chart show?",
    "Round the bar corners.",
    "Paint the bars orange.",
]


def _svg_block(text: str) -> str:
    """First ```svg fenced block in a prompt."""
    marker = "```svg\n"
    start = text.index(marker) + len(marker)
    return text[start : text.index("```", start)]


def _json_reply(obj) -> str:
    return "```json\n" + json.dumps(obj, indent=2, sort_keys=True) + "\n```"


class ScriptedProvider:
    """Answers chain prompts by running the deterministic pipeline."""

    def __init__(self):
        self.dataset = None

    def __call__(self, request: ModelRequest) -> str:
        task = request.user.split("\n", 1)[0].removeprefix("TASK: ").strip()
        handler = {
            "layer-roles": self._layer_roles,
            "enrich": self._enrich,
            "intermediate-representation": self._ir,
            "synthesize-template": self._synthesize,
            "refine-template": self._refine,
        }[task]
        return handler(request.user)

    def _layer_roles(self, text: str):
        doc = parse(_svg_block(text))
        marked, dataset, _ = heuristic_decompose(doc)
        self.dataset = dataset
        groups = []
        for g in iter_groups(marked):
            groups.append(
                {
                    "role": g.get("role"),
                    "label": g.get("desc", ""),
                    "member_ids": group_member_ids(g),
                    "kind": g.get("kind"),
                    "slot": g.get("slot"),
                }
            )
        return _json_reply(
            {
                "groups": groups,
                "dataset": {
                    "columns": [[n, k.value] for n, k in dataset.columns],
                    "rows": [list(r) for r in dataset.rows],
                },
            }
        )

    def _redecompose(self, text: str):
        marked = parse(_svg_block(text))
        return heuristic_decompose(strip_markers(marked))

    def _enrich(self, text: str):
        _, _, ir = self._redecompose(text)
        return _json_reply(enrichment_from_ir(ir))

    def _ir(self, text: str):
        marked, _, ir = self._redecompose(text)
        return "```json\n" + serialize_ir(ir) + "```"

    def _synthesize(self, text: str):
        marked, _, ir = self._redecompose(text)
        program = synthesize_heuristic(marked, ir)
        return "```\n" + print_program(program) + "```"

    # -- refinement rules -------------------------------------------------

    def _refine(self, text: str):
        marker = "Current template:\n\n```\n"
        start = text.index(marker) + len(marker)
        source = text[start : text.index("```", start)]
        request = text.rsplit("Request: ", 1)[1].strip()
        program = parse_program(source)
        if "thinner" in request:
            return self._lift_bar_width(program, factor=0.6)
        if "pick the bar color" in request:
            return self._lift_fill(program)
        if "what does" in request.lower():
            return (
                "It shows one numeric value per category as vertical bars; "
                "bar heights encode the value column."
            )
        if "round the bar corners" in request.lower():
            return self._add_corner_radius(program)
        if "orange" in request:
            return self._set_color_default(program, "#f28e2b")
        raise ValueError(f"no scripted rule for request {request!r}")

    def _find_rect(self, program) -> Emit:
        def walk(directives):
            for d in directives:
                if isinstance(d, Emit) and d.tag == "rect":
                    return d
                if isinstance(d, (Slot, ForEach)):
                    found = walk(d.body)
                    if found is not None:
                        return found
            return None

        emit = walk(program.directives)
        if emit is None:
            raise ValueError("no rect emit in program")
        return emit

    def _bandwidth(self, program) -> float:
        defaults = program.default_params()
        scale = program.scale_map()["x"]
        n = len({row[0] for row in self.dataset.rows})
        step = defaults["chart_width"] / n
        return step * (1 - scale.band_padding)

    def _reply(self, note: str, program) -> str:
        return note + "\n\n```\n" + print_program(program) + "```"

    def _lift_bar_width(self, program, factor: float) -> str:
        width = self._bandwidth(program) * factor
        program.params.append(ParameterSpec("bar_width", ParamKind.NUMBER, width))
        emit = self._find_rect(program)
        emit.bindings = [
            (name, param("bar_width") if name == "width" else expr)
            for name, expr in emit.bindings
        ]
        return self._reply(
            "Bar width is now the bar_width parameter, defaulting thinner.", program
        )

    def _lift_fill(self, program) -> str:
        emit = self._find_rect(program)
        current = dict(emit.bindings)["fill"].args[0]
        program.params.append(ParameterSpec("bar_color", ParamKind.COLOR, current))
        emit.bindings = [
            (name, param("bar_color") if name == "fill" else expr)
            for name, expr in emit.bindings
        ]
        return self._reply("Bar fill is now the bar_color parameter.", program)

    def _add_corner_radius(self, program) -> str:
        program.params.append(ParameterSpec("corner_radius", ParamKind.NUMBER, 4.0))
        emit = self._find_rect(program)
        emit.bindings.append(("rx", param("corner_radius")))
        return self._reply("Corners are rounded via the corner_radius parameter.",
                           program)

    def _set_color_default(self, program, color: str) -> str:
        for p in program.params:
            if p.name == "bar_color":
                p.default = color
                break
        else:
            raise ValueError("no bar_color parameter to update")
        return self._reply("Default bar color changed.", program)


def main():
    TRANSCRIPT.parent.mkdir(parents=True, exist_ok=True)
    if TRANSCRIPT.exists():
        TRANSCRIPT.unlink()
    chart = standard_corpus()[0]  # four-bar chart
    workdir = Path(tempfile.mkdtemp(prefix="fixtures-"))
    config = ServiceConfig(
        session_dir=str(workdir / "sessions"),
        lmm_mode="record",
        lmm_transcript=str(TRANSCRIPT),
    )
    app = create_app(config, provider=ScriptedProvider())
    client = TestClient(app)

    sid = client.post("/sessions").json()["id"]
    r = client.post(f"/sessions/{sid}/reference",
                    content=serialize(chart.document).encode("utf-8"))
    r.raise_for_status()
    r = client.post(f"/sessions/{sid}/decompose", json={"mode": "lmm"})
    r.raise_for_status()
    for _ in range(200):
        status = client.get(f"/sessions/{sid}/status").json()
        if status["job"] == "idle":
            break
    if status["state"] != "decomposed":
        raise SystemExit(f"decompose failed: {status}")
    client.get(f"/sessions/{sid}/template").raise_for_status()
    for message in CHAT_TURNS:
        r = client.post(f"/sessions/{sid}/chat", json={"message": message})
        r.raise_for_status()
        print(f"turn ok: {message!r} -> {r.json()['diff']}")
    shutil.rmtree(workdir)
    print(f"wrote {TRANSCRIPT} ({len(TRANSCRIPT.read_text().splitlines())} entries)")


if __name__ == "__main__":
    sys.exit(main())
