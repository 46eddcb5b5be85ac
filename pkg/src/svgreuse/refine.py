"""Chat-driven template refinement.

Each turn asks the model for the smallest edit satisfying the request,
validates every candidate program it returns, and keeps the candidate
with the lowest structural change score. Parameters map one-to-one onto
control widgets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .chain import load_prompt
from .errors import RefinementRejected
from .ir import ColumnKind, ValidationReport
from .lmm import LmmAdapter, ModelRequest
from .svg.model import SvgDocument
from .template import (
    ParamKind,
    ProgramDiff,
    TemplateProgram,
    make_diff,
    parse_program,
    print_program,
    validate_program,
)

SYSTEM_PROMPT = (
    "You maintain chart template programs. Apply the smallest edit that "
    "satisfies each request."
)

HISTORY_WINDOW = 6  # most recent turns included in the prompt

_WIDGET_BY_KIND = {
    ParamKind.NUMBER: "Slider",
    ParamKind.COLOR: "ColorPicker",
    ParamKind.TEXT: "TextInput",
    ParamKind.CHOICE: "Select",
}


@dataclass
class ChatTurn:
    speaker: str  # "user" | "assistant"
    content: str


@dataclass
class WidgetSpec:
    param_name: str
    widget: str  # Slider | ColorPicker | TextInput | Select
    title: str
    default: object
    minimum: float | None = None
    maximum: float | None = None
    step: float | None = None
    options: list[str] | None = None


@dataclass
class RefinementResult:
    reply_text: str
    program_after: TemplateProgram
    new_params: list = field(default_factory=list)
    new_widgets: list[WidgetSpec] = field(default_factory=list)
    diff: ProgramDiff | None = None


def materialize_widgets(program: TemplateProgram) -> list[WidgetSpec]:
    """One widget per parameter; kind fixes the widget type.

    Number parameters without a declared range get one spanning a factor
    of four around the default, stepped in hundredths of the span.
    """
    widgets = []
    for p in program.params:
        title = p.name.replace("_", " ")
        widget = WidgetSpec(p.name, _WIDGET_BY_KIND[p.kind], title, p.default)
        if p.kind is ParamKind.NUMBER:
            if p.range is not None:
                widget.minimum, widget.maximum, widget.step = p.range
            else:
                lo, hi = sorted((p.default / 4, p.default * 4))
                if lo == hi:  # default of zero
                    lo, hi = p.default - 1.0, p.default + 1.0
                widget.minimum, widget.maximum = lo, hi
                widget.step = (hi - lo) / 100
        elif p.kind is ParamKind.CHOICE:
            widget.options = list(p.options or [])
        widgets.append(widget)
    return widgets


def _code_blocks(reply: str) -> list[str]:
    if "```" not in reply:
        return []
    parts = reply.split("```")
    blocks = []
    for i in range(1, len(parts), 2):
        block = parts[i]
        if "\n" in block:
            first, rest = block.split("\n", 1)
            if first.strip() and " " not in first.strip():
                block = rest
        if block.strip():
            blocks.append(block.strip() + "\n")
    return blocks


def _prose(reply: str) -> str:
    if "```" not in reply:
        return reply.strip()
    return reply.split("```")[0].strip()


def _build_prompt(program: TemplateProgram, request: str,
                  history: list[ChatTurn] | None) -> str:
    parts = [load_prompt("refine")]
    if history:
        lines = [f"{t.speaker}: {t.content}" for t in history[-HISTORY_WINDOW:]]
        parts.append("Conversation so far:\n" + "\n".join(lines))
    parts.append("Current template:\n\n```\n" + print_program(program) + "```")
    parts.append("Request: " + request)
    return "\n\n".join(parts)


def refine(program: TemplateProgram, request: str, adapter: LmmAdapter,
           marked: SvgDocument | None = None,
           schema: list[tuple[str, ColumnKind]] | None = None,
           history: list[ChatTurn] | None = None) -> RefinementResult:
    """One refinement turn. Raises RefinementRejected when no candidate
    program validates after one retry."""
    prompt = _build_prompt(program, request, history)
    last_report = ValidationReport()
    for attempt in range(2):
        reply = adapter.complete(ModelRequest(system=SYSTEM_PROMPT, user=prompt))
        blocks = _code_blocks(reply)
        if not blocks:
            # A prose answer: the request needed no program change.
            return RefinementResult(
                reply_text=_prose(reply),
                program_after=program,
                diff=ProgramDiff(after_source=print_program(program)),
            )
        candidates = []
        last_report = ValidationReport()
        for block in blocks:
            try:
                candidate = parse_program(block)
            except Exception as exc:
                last_report.add("parse-error", str(exc))
                continue
            report = validate_program(candidate, marked, schema=schema)
            if not report.ok:
                last_report.issues.extend(report.issues)
                continue
            candidates.append(candidate)
        if candidates:
            ranked = sorted(
                (make_diff(program, c) for c in candidates),
                key=lambda d: (d.nodes_changed, d.params_added),
            )
            best = ranked[0]
            after = best.apply(program)
            before_names = {p.name for p in program.params}
            new_params = [p for p in after.params if p.name not in before_names]
            new_names = {p.name for p in new_params}
            new_widgets = [
                w for w in materialize_widgets(after) if w.param_name in new_names
            ]
            return RefinementResult(
                reply_text=_prose(reply),
                program_after=after,
                new_params=new_params,
                new_widgets=new_widgets,
                diff=best,
            )
        prompt += f"\n\nYour previous reply was rejected: {last_report}"
    raise RefinementRejected(last_report)
