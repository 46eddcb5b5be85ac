"""Static validation of template programs against a marked-up reference."""

from __future__ import annotations

from ..ir import ColumnKind, ValidationReport
from ..svg.markers import GROUP_TAG, is_marker, slot_names
from ..svg.model import SvgDocument
from .ast import (
    Clone,
    Emit,
    Expr,
    FIXED_PARAMS,
    FieldDomain,
    ForEach,
    ParamKind,
    PathTemplate,
    ScaleKind,
    SetAttr,
    Slot,
    TemplateProgram,
    subexprs,
    walk_exprs,
)

# Attribute families for light type checking.
_COLOR_ATTRS = {"fill", "stroke", "color", "stop-color"}
_NUMERIC_ATTRS = {
    "x", "y", "width", "height", "r", "rx", "ry", "cx", "cy",
    "x1", "y1", "x2", "y2", "opacity", "fill-opacity", "stroke-width",
}

NUMBER, STRING, COLOR, BOOL, ANY = "number", "string", "color", "bool", "any"


def validate_program(program: TemplateProgram, marked: SvgDocument | None = None,
                     schema: list[tuple[str, ColumnKind]] | None = None) -> ValidationReport:
    report = ValidationReport()
    params = program.param_map()
    scales = program.scale_map()
    schema = schema if schema is not None else program.required_schema
    columns = {name: kind for name, kind in schema}

    for name in FIXED_PARAMS:
        if name not in params:
            report.add("missing-fixed-param", f"fixed parameter {name!r} is not declared")

    # Every field-driven scale needs an axis-field parameter naming its column.
    field_params = {
        str(p.default)
        for p in program.params
        if p.kind is ParamKind.TEXT and p.name.endswith("_field")
    }
    for s in program.scales:
        if isinstance(s.domain, FieldDomain):
            if s.domain.column not in columns:
                report.add("unknown-column", f"scale {s.id} uses unknown column {s.domain.column!r}")
            if s.domain.column not in field_params:
                report.add(
                    "missing-axis-field-param",
                    f"no *_field parameter declares column {s.domain.column!r} (scale {s.id})",
                )

    for s in program.scales:
        if s.kind is ScaleKind.LINEAR and isinstance(s.domain, list):
            if len(s.domain) != 2:
                report.add("bad-scale", f"scale {s.id}: linear domain needs two entries")
            else:
                lo, hi = s.domain
                if lo.op == "lit" and hi.op == "lit" and not lo.args[0] < hi.args[0]:
                    report.add("bad-scale", f"scale {s.id}: linear domain min must be < max")
        if isinstance(s.domain, list) and s.kind is not ScaleKind.LINEAR and not s.domain:
            report.add("bad-scale", f"scale {s.id}: empty domain")

    for e in walk_exprs(program):
        for sub in subexprs(e):
            if sub.op == "param" and sub.args[0] not in params:
                report.add("unknown-identifier", f"unresolved parameter {sub.args[0]!r}")
            elif sub.op == "field" and sub.args[0] not in columns:
                report.add("unknown-identifier", f"unresolved column {sub.args[0]!r}")
            elif sub.op in ("scale", "band-width") and sub.args[0] not in scales:
                report.add("unknown-identifier", f"unresolved scale {sub.args[0]!r}")
            elif sub.op in ("sum", "cumsum") and sub.args[0] not in columns:
                report.add("unknown-identifier", f"unresolved column {sub.args[0]!r}")

    if marked is not None:
        _check_targets(program.directives, marked, report)
    _check_types(program, columns, report)
    return report


def _check_targets(directives, marked: SvgDocument, report: ValidationReport):
    known_slots = set(slot_names(marked))
    doc_ids = set(marked.element_ids())
    marker_ids = _data_driven_ids(marked)
    for d in _flatten(directives):
        if isinstance(d, Slot) and d.name not in known_slots:
            report.add("slot-mismatch", f"no slot named {d.name!r} in the markup")
        elif isinstance(d, SetAttr) and d.element_id not in doc_ids:
            report.add("unknown-id", f"set targets missing id {d.element_id}")
        elif isinstance(d, Clone):
            if d.element_id not in doc_ids:
                report.add("unknown-id", f"clone targets missing id {d.element_id}")
            elif d.element_id not in marker_ids:
                report.add(
                    "clone-outside-marker",
                    f"clone target {d.element_id} is not inside a data-driven marker",
                )


def _data_driven_ids(marked: SvgDocument) -> set[int]:
    ids: set[int] = set()
    for node in marked.iter_elements():
        if node.tag == GROUP_TAG and node.get("role") == "data-driven":
            for inner in node.iter_elements():
                if inner.element_id is not None and not is_marker(inner):
                    ids.add(inner.element_id)
    return ids


def _flatten(directives):
    for d in directives:
        yield d
        if isinstance(d, (Slot, ForEach)):
            yield from _flatten(d.body)


def _check_types(program: TemplateProgram, columns, report: ValidationReport):
    params = program.param_map()
    scales = program.scale_map()

    def expr_type(e: Expr) -> str:
        op = e.op
        if op == "lit":
            v = e.args[0]
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                return NUMBER
            if isinstance(v, str) and v.startswith("#"):
                return COLOR
            return STRING
        if op == "param":
            spec = params.get(e.args[0])
            if spec is None:
                return ANY
            return {
                ParamKind.NUMBER: NUMBER,
                ParamKind.COLOR: COLOR,
                ParamKind.TEXT: STRING,
                ParamKind.CHOICE: STRING,
            }[spec.kind]
        if op == "field":
            kind = columns.get(e.args[0])
            if kind is None:
                return ANY
            return NUMBER if kind is ColumnKind.NUMBER else STRING
        if op == "scale":
            spec = scales.get(e.args[0])
            if spec is None:
                return ANY
            return COLOR if spec.kind is ScaleKind.ORDINAL_COLOR else NUMBER
        if op in ("band-width", "+", "-", "*", "/", "neg", "cos", "sin", "pi",
                  "index", "count", "sum", "cumsum", "min", "max"):
            return NUMBER
        if op in ("concat", "rows"):
            return STRING
        if op in ("=", "!=", "<", ">", "<=", ">="):
            return BOOL
        if op == "if":
            t1, t2 = expr_type(e.args[1]), expr_type(e.args[2])
            return t1 if t1 == t2 else ANY
        if op in ("first", "last"):
            return expr_type(e.args[0])
        return ANY

    def check_binding(attr: str, e: Expr, where: str):
        t = expr_type(e)
        if attr in _COLOR_ATTRS and t == NUMBER:
            report.add("type-error", f"{where}: {attr!r} bound to a numeric expression")
        if attr in _NUMERIC_ATTRS and t == COLOR:
            report.add("type-error", f"{where}: {attr!r} bound to a color expression")

    def walk(directives, where):
        for d in directives:
            if isinstance(d, (Emit, Clone, PathTemplate)):
                tag = getattr(d, "tag", d.__class__.__name__.lower())
                for attr, e in d.bindings:
                    check_binding(attr, e, f"{where}{tag}")
            elif isinstance(d, SetAttr):
                check_binding(d.name, d.expr, f"{where}set {d.element_id} ")
            elif isinstance(d, (Slot, ForEach)):
                walk(d.body, where)

    walk(program.directives, "")
