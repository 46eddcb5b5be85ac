"""Template synthesis from a marked-up document plus its IR.

The deterministic path re-derives scale geometry from the reference
(tick labels and mark positions) and emits a program whose defaults
reproduce the reference chart; every scale endpoint is expressed through
the fixed layout parameters so the output stays live under edits.
"""

from __future__ import annotations

import math

from ..errors import SynthesisFailed
from ..ir import (
    ColumnKind,
    Dataset,
    IntermediateRepresentation,
    MarkType,
    Prototype,
)
from ..svg.markers import is_marker
from ..svg.model import SvgDocument, SvgNode
from ..svg.path import parse_path
from .ast import (
    Emit,
    Expr,
    FieldDomain,
    ForEach,
    ParameterSpec,
    ParamKind,
    PathTemplate,
    ScaleDef,
    ScaleKind,
    Slot,
    TemplateProgram,
    lit,
    op,
    param,
    scale_apply,
)
from .parser import parse_program, print_program
from .validate import validate_program

MARKS_SLOT = "marks"


def _field(col: str) -> Expr:
    return Expr("field", (col,))


def _texts(marked: SvgDocument) -> list[SvgNode]:
    return [n for n in marked.iter_elements() if n.tag == "text" and not is_marker(n)]


def _numeric(node: SvgNode) -> float | None:
    if node.text is None:
        return None
    try:
        return float(node.text.strip())
    except ValueError:
        return None


def _attr(node: SvgNode, name: str, default=0.0) -> float:
    v = node.get(name)
    try:
        return float(v)
    except (TypeError, ValueError):
        return default


def _fit_axis(pairs: list[tuple[float, float]]):
    """(value, pixel) pairs -> (value at max tick, pixel at 0, pixel at max)."""
    if len(pairs) < 2:
        raise SynthesisFailed("axis needs at least two numeric tick labels")
    pairs = sorted(pairs)
    (v0, p0), (v1, p1) = pairs[0], pairs[-1]
    if v0 == v1:
        raise SynthesisFailed("axis tick labels are all equal")
    slope = (p1 - p0) / (v1 - v0)
    pixel_zero = p0 - v0 * slope
    return v1, pixel_zero, pixel_zero + v1 * slope


def _tick_maps(marked: SvgDocument, ox: float, oy: float):
    """Fit value->pixel maps from tick labels left of / below the origin."""
    x_pairs, y_pairs = [], []
    for t in _texts(marked):
        v = _numeric(t)
        if v is None:
            continue
        if _attr(t, "x", 1e9) < ox:
            y_pairs.append((v, _attr(t, "y")))
        elif _attr(t, "y", -1e9) > oy:
            x_pairs.append((v, _attr(t, "x")))
    return x_pairs, y_pairs


def _fixed_params(origin_x, origin_y, chart_width, chart_height) -> list[ParameterSpec]:
    return [
        ParameterSpec("chart_width", ParamKind.NUMBER, float(chart_width)),
        ParameterSpec("chart_height", ParamKind.NUMBER, float(chart_height)),
        ParameterSpec("origin_x", ParamKind.NUMBER, float(origin_x)),
        ParameterSpec("origin_y", ParamKind.NUMBER, float(origin_y)),
    ]


def _field_params(dataset: Dataset) -> list[ParameterSpec]:
    return [
        ParameterSpec(f"{name}_field", ParamKind.TEXT, name)
        for name, _ in dataset.columns
    ]


def _schema(dataset: Dataset) -> list[tuple[str, ColumnKind]]:
    return list(dataset.columns)


def _x_range() -> list[Expr]:
    return [param("origin_x"), op("+", param("origin_x"), param("chart_width"))]


def _y_range() -> list[Expr]:
    return [param("origin_y"), op("-", param("origin_y"), param("chart_height"))]


def _linear(scale_id: str, vmax: float, range_: list[Expr]) -> ScaleDef:
    return ScaleDef(scale_id, ScaleKind.LINEAR, [lit(0.0), lit(float(vmax))], range_)


def _members(marked: SvgDocument, ir: IntermediateRepresentation) -> list[SvgNode]:
    return [marked.find_by_id(i) for i in ir.marks[0].member_ids]


def synthesize_heuristic(marked: SvgDocument,
                         ir: IntermediateRepresentation) -> TemplateProgram:
    """Deterministic synthesis for the recognized prototypes."""
    if not ir.marks:
        raise SynthesisFailed("the IR declares no marks")
    proto = ir.globals.prototype
    if proto is Prototype.BAR:
        program = _synth_bar(marked, ir)
    elif proto is Prototype.SCATTERPLOT:
        program = _synth_scatter(marked, ir)
    elif proto in (Prototype.LINE, Prototype.AREA):
        program = _synth_trend(marked, ir, closed=proto is Prototype.AREA)
    elif proto is Prototype.RADAR:
        program = _synth_radar(marked, ir)
    elif proto is Prototype.PIE:
        program = _synth_pie(marked, ir)
    else:
        raise SynthesisFailed(f"no deterministic recipe for prototype {proto.value}")
    # Canonicalize through the textual form so the program is a fixed
    # point of print/parse; recovered constants (e.g. band padding) may
    # otherwise carry float dust their printed form does not.
    return parse_program(print_program(program))


def _synth_bar(marked, ir) -> TemplateProgram:
    ox, oy = ir.globals.origin
    rects = sorted(_members(marked, ir), key=lambda r: _attr(r, "x"))
    n = len(rects)
    width = _attr(rects[0], "width")
    step = _attr(rects[1], "x") - _attr(rects[0], "x") if n > 1 else width
    if step <= 0:
        raise SynthesisFailed("bar positions are not increasing")
    padding = max(0.0, 1.0 - width / step)
    range_start = _attr(rects[0], "x") - step * padding / 2

    _, y_pairs = _tick_maps(marked, ox, oy)
    vmax, baseline, top = _fit_axis(y_pairs)

    cat_col, val_col = ir.dataset.columns[0][0], ir.dataset.columns[1][0]
    program = TemplateProgram(
        params=_fixed_params(range_start, baseline, step * n, baseline - top)
        + _field_params(ir.dataset),
        scales=[
            ScaleDef("x", ScaleKind.BAND, FieldDomain(cat_col), _x_range(), padding),
            _linear("y", vmax, _y_range()),
        ],
        required_schema=_schema(ir.dataset),
    )
    y_expr = scale_apply("y", _field(val_col))
    emit = Emit("rect", [
        ("x", scale_apply("x", _field(cat_col))),
        ("y", y_expr),
        ("width", Expr("band-width", ("x",))),
        ("height", op("-", param("origin_y"), y_expr)),
        ("fill", lit(ir.marks[0].fixed_attributes.get("fill", "#4682b4"))),
    ])
    program.directives.append(Slot(MARKS_SLOT, [ForEach([emit])]))
    return program


def _synth_scatter(marked, ir) -> TemplateProgram:
    ox, oy = ir.globals.origin
    x_pairs, y_pairs = _tick_maps(marked, ox, oy)
    xmax, x_zero, x_end = _fit_axis(x_pairs)
    ymax, y_zero, y_end = _fit_axis(y_pairs)

    x_col, y_col = ir.dataset.columns[0][0], ir.dataset.columns[1][0]
    fixed = ir.marks[0].fixed_attributes
    program = TemplateProgram(
        params=_fixed_params(x_zero, y_zero, x_end - x_zero, y_zero - y_end)
        + _field_params(ir.dataset),
        scales=[
            _linear("x", xmax, _x_range()),
            _linear("y", ymax, _y_range()),
        ],
        required_schema=_schema(ir.dataset),
    )
    emit = Emit("circle", [
        ("cx", scale_apply("x", _field(x_col))),
        ("cy", scale_apply("y", _field(y_col))),
        ("r", lit(float(fixed.get("r", 4)))),
        ("fill", lit(fixed.get("fill", "#333333"))),
    ])
    program.directives.append(Slot(MARKS_SLOT, [ForEach([emit])]))
    return program


def _move_or_draw(x_expr: Expr, y_expr: Expr) -> Expr:
    """Per-row ``M x y`` for the first vertex, ``L x y`` after."""
    head = op("if", op("=", Expr("index", ()), lit(0.0)), lit("M"), lit("L"))
    return Expr("rows", (lit(" "), Expr("concat", (head, lit(" "), x_expr, lit(" "), y_expr))))


def _synth_trend(marked, ir, closed: bool) -> TemplateProgram:
    ox, oy = ir.globals.origin
    x_pairs, y_pairs = _tick_maps(marked, ox, oy)
    xmax, x_zero, x_end = _fit_axis(x_pairs)
    ymax, y_zero, y_end = _fit_axis(y_pairs)

    x_col, y_col = ir.dataset.columns[0][0], ir.dataset.columns[1][0]
    program = TemplateProgram(
        params=_fixed_params(x_zero, y_zero, x_end - x_zero, y_zero - y_end)
        + _field_params(ir.dataset),
        scales=[
            _linear("x", xmax, _x_range()),
            _linear("y", ymax, _y_range()),
        ],
        required_schema=_schema(ir.dataset),
    )
    x_expr = scale_apply("x", _field(x_col))
    y_expr = scale_apply("y", _field(y_col))
    if closed:
        skeleton = [
            "M ", Expr("first", (x_expr,)), " ", param("origin_y"), " ",
            _move_or_draw_closed(x_expr, y_expr),
            " L ", Expr("last", (x_expr,)), " ", param("origin_y"), " Z",
        ]
    else:
        skeleton = [_move_or_draw(x_expr, y_expr)]
    bindings = [
        (k, lit(v))
        for k, v in ir.marks[0].fixed_attributes.items()
        if k != "d"
    ]
    program.directives.append(Slot(MARKS_SLOT, [PathTemplate(skeleton, bindings)]))
    return program


def _move_or_draw_closed(x_expr: Expr, y_expr: Expr) -> Expr:
    # Area interiors always draw: the baseline anchor holds the initial M.
    return Expr("rows", (lit(" "), Expr("concat", (lit("L "), x_expr, lit(" "), y_expr))))


def _synth_radar(marked, ir) -> TemplateProgram:
    cx, cy = ir.globals.origin
    tick_pairs = []
    for t in _texts(marked):
        v = _numeric(t)
        if v is not None:
            tick_pairs.append((v, math.hypot(_attr(t, "x") - cx, _attr(t, "y") - cy)))
    if len(tick_pairs) < 2:
        raise SynthesisFailed("radar chart needs at least two numeric tick labels")
    pairs = sorted(tick_pairs)
    vmax, rho_max = pairs[-1]
    # Tick labels sit a fixed offset off the upward spoke; radius scales
    # through the origin, so one (value, rho) pair fixes the slope.
    radius = rho_max * 1.0

    cat_col, val_col = ir.dataset.columns[0][0], ir.dataset.columns[1][0]
    program = TemplateProgram(
        params=_fixed_params(cx - radius, cy + radius, 2 * radius, 2 * radius)
        + [ParameterSpec("radius", ParamKind.NUMBER, float(radius))]
        + _field_params(ir.dataset),
        scales=[
            ScaleDef("r", ScaleKind.LINEAR, [lit(0.0), lit(float(vmax))],
                     [lit(0.0), param("radius")]),
        ],
        required_schema=_schema(ir.dataset),
    )
    angle = op(
        "-",
        op("/", op("*", lit(2.0), Expr("pi", ()), Expr("index", ())), Expr("count", ())),
        op("/", Expr("pi", ()), lit(2.0)),
    )
    rho = scale_apply("r", _field(val_col))
    x_expr = op("+", lit(float(cx)), op("*", rho, Expr("cos", (angle,))))
    y_expr = op("+", lit(float(cy)), op("*", rho, Expr("sin", (angle,))))
    skeleton = [_move_or_draw(x_expr, y_expr), " Z"]
    bindings = [
        (k, lit(v))
        for k, v in ir.marks[0].fixed_attributes.items()
        if k != "d"
    ]
    program.directives.append(Slot(MARKS_SLOT, [PathTemplate(skeleton, bindings)]))
    return program


def _synth_pie(marked, ir) -> TemplateProgram:
    cx, cy = ir.globals.origin
    sectors = _members(marked, ir)
    radius = 0.0
    fills = []
    for s in sectors:
        arc = next(c for c in parse_path(s.get("d", "")) if c.letter == "A")
        radius = max(radius, arc.args[0])
        fill = s.get("fill", "#999999")
        if fill not in fills:
            fills.append(fill)

    cat_col, val_col = ir.dataset.columns[0][0], ir.dataset.columns[1][0]
    program = TemplateProgram(
        params=_fixed_params(cx - radius, cy + radius, 2 * radius, 2 * radius)
        + [ParameterSpec("radius", ParamKind.NUMBER, float(radius))]
        + _field_params(ir.dataset),
        scales=[
            ScaleDef("c", ScaleKind.ORDINAL_COLOR, FieldDomain(cat_col),
                     [lit(f) for f in fills]),
        ],
        required_schema=_schema(ir.dataset),
    )
    tau_frac = lambda numer: op(  # noqa: E731 - local shorthand
        "*", lit(2.0), Expr("pi", ()), op("/", numer, Expr("sum", (val_col,)))
    )
    a0 = op("-", tau_frac(Expr("cumsum", (val_col,))), op("/", Expr("pi", ()), lit(2.0)))
    a1 = op("+", a0, tau_frac(_field(val_col)))

    def point(angle):
        return (
            op("+", lit(float(cx)), op("*", param("radius"), Expr("cos", (angle,)))),
            op("+", lit(float(cy)), op("*", param("radius"), Expr("sin", (angle,)))),
        )

    x0, y0 = point(a0)
    x1, y1 = point(a1)
    laf = op(
        "if",
        op(">", op("/", _field(val_col), Expr("sum", (val_col,))), lit(0.5)),
        lit(1.0),
        lit(0.0),
    )
    skeleton = [
        "M ", lit_expr(cx), " ", lit_expr(cy),
        " L ", x0, " ", y0,
        " A ", param("radius"), " ", param("radius"), " 0 ", laf, " 1 ",
        x1, " ", y1, " Z",
    ]
    path = PathTemplate(skeleton, [("fill", scale_apply("c", _field(cat_col)))])
    program.directives.append(Slot(MARKS_SLOT, [ForEach([path])]))
    return program


def lit_expr(v: float) -> Expr:
    return lit(float(v))


# ---------------------------------------------------------------------------
# Model-backed synthesis


def synthesize_template(marked: SvgDocument, ir: IntermediateRepresentation,
                        complete=None, prompt: str = "") -> TemplateProgram:
    """Synthesize a template, via a completion callable when given.

    ``complete(prompt) -> str`` must return template source. A program
    that fails to parse or validate triggers one retry with the issues
    appended; a second failure raises SynthesisFailed. Without a
    callable, falls back to the deterministic recipes.
    """
    if complete is None:
        return synthesize_heuristic(marked, ir)
    last_error = ""
    request = prompt
    for _ in range(2):
        source = extract_source(complete(request))
        try:
            program = parse_program(source)
        except Exception as exc:
            last_error = str(exc)
            request = prompt + f"\n\nThe previous attempt failed to parse: {last_error}\n"
            continue
        report = validate_program(program, marked, schema=list(ir.dataset.columns))
        if report.ok:
            return program
        last_error = str(report)
        request = prompt + f"\n\nThe previous attempt had validation issues: {last_error}\n"
    raise SynthesisFailed(f"model synthesis failed twice: {last_error}")


def extract_source(reply: str) -> str:
    """Pull template source out of a fenced code block, if present."""
    if "```" not in reply:
        return reply.strip()
    parts = reply.split("```")
    # parts[1] is the first fenced block; drop a language tag line.
    block = parts[1]
    if "\n" in block:
        first, rest = block.split("\n", 1)
        if first.strip() and " " not in first.strip():
            return rest.strip()
    return block.strip()
