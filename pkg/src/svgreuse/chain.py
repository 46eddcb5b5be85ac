"""Three-step model chain turning a chart into markup, data, and IR.

Each step validates the model's reply and retries once with the
validation issues appended before failing. With no adapter, the
deterministic decomposer handles the recognized prototypes directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .decompose import heuristic_decompose, validate_markup
from .errors import ChainStepFailed
from .ir import (
    AxisOrientation,
    AxisSpec,
    ColumnKind,
    Coordinate,
    Dataset,
    IntermediateRepresentation,
    MarkSpec,
    MarkType,
    Prototype,
    parse_ir,
    serialize_ir,
    validate_ir,
)
from .layers import LayerRole
from .lmm import LmmAdapter, ModelRequest
from .preprocess import build_prompt_view
from .svg.markers import GroupMarker, insert_markers
from .svg.model import SvgDocument, serialize

SYSTEM_PROMPT = (
    "You reverse-engineer SVG data visualizations. Follow the task "
    "instructions exactly and reply in the requested format."
)


def load_prompt(name: str) -> str:
    return (resources.files("svgreuse.prompts") / f"{name}.txt").read_text(
        encoding="utf-8"
    )


def extract_json(reply: str) -> dict:
    """Parse the first fenced JSON block (or the whole reply)."""
    text = reply
    if "```" in reply:
        block = reply.split("```")[1]
        if block.startswith("json"):
            block = block[4:]
        text = block
    return json.loads(text)


@dataclass
class DecomposeResult:
    marked: SvgDocument
    dataset: Dataset
    ir: IntermediateRepresentation


def decompose_document(doc: SvgDocument, adapter: LmmAdapter | None = None,
                       renderer_command: str | None = None) -> DecomposeResult:
    """Full decomposition: model chain when an adapter is given, else the
    deterministic fallback."""
    if adapter is None:
        marked, dataset, ir = heuristic_decompose(doc)
        return DecomposeResult(marked, dataset, ir)
    return run_chain(doc, adapter, renderer_command)


def run_chain(doc: SvgDocument, adapter: LmmAdapter,
              renderer_command: str | None = None) -> DecomposeResult:
    view = build_prompt_view(doc, renderer_command=renderer_command)
    images = [view.thumbnail] if view.thumbnail else []
    simplified_svg = serialize(view.simplified)

    marked, dataset = step1_roles_and_data(doc, simplified_svg, images, adapter)
    enrichment = step2_enrich(marked, dataset, images, adapter)
    ir = step3_generate_ir(marked, dataset, enrichment, adapter)
    return DecomposeResult(marked, dataset, ir)


def _ask(adapter: LmmAdapter, prompt: str, body: str, images) -> str:
    return adapter.complete(
        ModelRequest(system=SYSTEM_PROMPT, user=prompt + "\n\n" + body, images=images)
    )


def step1_roles_and_data(doc: SvgDocument, simplified_svg: str, images,
                         adapter: LmmAdapter) -> tuple[SvgDocument, Dataset]:
    prompt = load_prompt("step1_roles")
    body = f"The chart:\n\n```svg\n{simplified_svg}```"
    last_error = ""
    for attempt in range(2):
        try:
            reply = extract_json(_ask(adapter, prompt, body, images))
            groups = [
                GroupMarker(
                    role=LayerRole.from_string(g["role"]),
                    label=g.get("label", ""),
                    member_ids=[int(i) for i in g["member_ids"]],
                    kind=g.get("kind"),
                    slot=g.get("slot"),
                )
                for g in reply["groups"]
            ]
            dataset = _parse_dataset(reply["dataset"])
            marked = insert_markers(doc, groups)
        except Exception as exc:
            last_error = str(exc)
            body += f"\n\nYour previous reply was rejected: {last_error}"
            continue
        report = validate_markup(marked, doc)
        if report.ok:
            return marked, dataset
        last_error = str(report)
        body += f"\n\nYour previous reply had validation issues: {last_error}"
    raise ChainStepFailed("layer-roles", 2, last_error)


def step2_enrich(marked: SvgDocument, dataset: Dataset, images,
                 adapter: LmmAdapter) -> dict:
    prompt = load_prompt("step2_enrich")
    body = (
        f"The marked-up chart:\n\n```svg\n{serialize(marked)}```\n\n"
        f"The recovered data table:\n\n```json\n{_dataset_json(dataset)}\n```"
    )
    last_error = ""
    for attempt in range(2):
        try:
            reply = extract_json(_ask(adapter, prompt, body, images))
            _check_enrichment(reply)
            return reply
        except Exception as exc:
            last_error = str(exc)
            body += f"\n\nYour previous reply was rejected: {last_error}"
    raise ChainStepFailed("enrich", 2, last_error)


def step3_generate_ir(marked: SvgDocument, dataset: Dataset, enrichment: dict,
                      adapter: LmmAdapter) -> IntermediateRepresentation:
    prompt = load_prompt("step3_ir")
    body = (
        f"The marked-up chart:\n\n```svg\n{serialize(marked)}```\n\n"
        f"The recovered data table:\n\n```json\n{_dataset_json(dataset)}\n```\n\n"
        f"The enrichment analysis:\n\n```json\n{json.dumps(enrichment, sort_keys=True)}\n```"
    )
    last_error = ""
    for attempt in range(2):
        try:
            reply = _ask(adapter, prompt, body, [])
            text = reply
            if "```" in reply:
                block = reply.split("```")[1]
                if block.startswith("json"):
                    block = block[4:]
                text = block
            ir = parse_ir(text)
        except Exception as exc:
            last_error = str(exc)
            body += f"\n\nYour previous reply was rejected: {last_error}"
            continue
        report = validate_ir(ir, marked)
        if report.ok:
            return ir
        last_error = str(report)
        body += f"\n\nYour previous reply had validation issues: {last_error}"
    raise ChainStepFailed("generate-ir", 2, last_error)


def synthesize_with_adapter(marked: SvgDocument, ir: IntermediateRepresentation,
                            dataset: Dataset, adapter: LmmAdapter):
    """Model-backed template synthesis over the standard prompt."""
    from .template.synthesize import synthesize_template

    prompt = (
        load_prompt("synthesize")
        + f"\n\nThe marked-up chart:\n\n```svg\n{serialize(marked)}```\n\n"
        + f"The intermediate representation:\n\n```json\n{serialize_ir(ir)}```\n\n"
        + f"The data table:\n\n```json\n{_dataset_json(dataset)}\n```"
    )

    def complete(request_text: str) -> str:
        return adapter.complete(ModelRequest(system=SYSTEM_PROMPT, user=request_text))

    return synthesize_template(marked, ir, complete=complete, prompt=prompt)


def _parse_dataset(obj: dict) -> Dataset:
    columns = [(str(n), ColumnKind(k)) for n, k in obj["columns"]]
    rows = [tuple(r) for r in obj["rows"]]
    dataset = Dataset(columns, rows)
    dataset.check()
    return dataset


def _dataset_json(dataset: Dataset) -> str:
    return json.dumps(
        {
            "columns": [[n, k.value] for n, k in dataset.columns],
            "rows": [list(r) for r in dataset.rows],
        },
        sort_keys=True,
    )


def _check_enrichment(reply: dict):
    Coordinate(reply["coordinate"])
    Prototype(reply["prototype"])
    ox, oy = reply["origin"]
    float(ox), float(oy)
    for m in reply.get("marks", []):
        MarkType(m["mark_type"])
    for a in reply.get("axes", []):
        AxisOrientation(a["orientation"])


def enrichment_from_ir(ir: IntermediateRepresentation) -> dict:
    """Project an IR down to the step-2 reply shape (scripted providers)."""
    return {
        "coordinate": ir.globals.coordinate.value,
        "origin": list(ir.globals.origin),
        "prototype": ir.globals.prototype.value,
        "marks": [
            {
                "mark_type": m.mark_type.value,
                "encoded_attributes": [list(e) for e in m.encoded_attributes],
                "fixed_attributes": dict(sorted(m.fixed_attributes.items())),
                "member_ids": list(m.member_ids),
            }
            for m in ir.marks
        ],
        "axes": [
            {
                "orientation": a.orientation.value,
                "gridline_ids": list(a.gridline_ids),
                "label_ids": list(a.label_ids),
                "scale_id": a.scale_id,
            }
            for a in ir.axes
        ],
    }
