"""Deterministic structure recovery for recognizable chart prototypes.

Serves as the offline fallback and as the oracle the model-backed chain
is tested against. Only positional encodings are inverted (x, y, height,
radius, arc angle); color and size channels are treated as fixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import UnrecognizedStructure
from .ir import (
    AxisOrientation,
    AxisSpec,
    ColumnKind,
    Coordinate,
    Dataset,
    GlobalProperties,
    IntermediateRepresentation,
    MarkSpec,
    MarkType,
    Prototype,
    ValidationReport,
)
from .layers import LayerRole
from .svg.markers import GroupMarker, insert_markers, is_marker, strip_markers
from .svg.model import ID_ATTR, SvgDocument, SvgNode, serialize
from .svg.path import flatten, parse_path

CONFIG_TAGS = {"style", "defs", "script", "metadata"}
MARKS_SLOT = "marks"


def _num(node: SvgNode, attr: str, default=None) -> float | None:
    v = node.get(attr)
    if v is None:
        return default
    try:
        return float(v)
    except ValueError:
        return default


def _is_numeric_text(node: SvgNode) -> bool:
    if node.text is None:
        return False
    try:
        float(node.text.strip())
        return True
    except ValueError:
        return False


@dataclass
class _Classified:
    config: list[SvgNode] = field(default_factory=list)
    decorative: list[SvgNode] = field(default_factory=list)
    lines: list[SvgNode] = field(default_factory=list)
    texts: list[SvgNode] = field(default_factory=list)
    shapes: list[SvgNode] = field(default_factory=list)


def _classify_children(doc: SvgDocument) -> _Classified:
    w, h = doc.canvas_size()
    out = _Classified()
    for child in doc.root.children:
        if child.is_comment:
            continue
        tag = child.tag
        if tag in CONFIG_TAGS:
            out.config.append(child)
        elif tag == "line":
            out.lines.append(child)
        elif tag == "text":
            out.texts.append(child)
        elif tag == "rect" and _covers_canvas(child, w, h):
            out.decorative.append(child)
        elif tag == "image":
            out.decorative.append(child)
        elif tag in ("rect", "circle", "path", "polygon", "polyline", "ellipse"):
            out.shapes.append(child)
        elif tag == "g":
            raise UnrecognizedStructure("nested groups are not handled by the heuristic")
        else:
            out.decorative.append(child)
    return out


def _covers_canvas(rect: SvgNode, w: float, h: float) -> bool:
    rw, rh = _num(rect, "width", 0), _num(rect, "height", 0)
    return rw is not None and rh is not None and rw * rh >= 0.85 * w * h


@dataclass
class _TickMap:
    """Linear value <-> pixel map fitted from axis tick labels."""

    v0: float
    p0: float
    v1: float
    p1: float

    def pixel(self, v: float) -> float:
        return self.p0 + (v - self.v0) / (self.v1 - self.v0) * (self.p1 - self.p0)

    def value(self, p: float) -> float:
        return self.v0 + (p - self.p0) / (self.p1 - self.p0) * (self.v1 - self.v0)

    @property
    def span(self) -> float:
        return abs(self.v1 - self.v0)


def _fit_ticks(pairs: list[tuple[float, float]]) -> _TickMap | None:
    """pairs: (value, pixel), needs two distinct values."""
    if len(pairs) < 2:
        return None
    pairs = sorted(pairs)
    (v0, p0), (v1, p1) = pairs[0], pairs[-1]
    if v0 == v1:
        return None
    return _TickMap(v0, p0, v1, p1)


def heuristic_decompose(doc: SvgDocument):
    """Returns (marked-up document, recovered dataset, IR).

    Raises UnrecognizedStructure when the document does not match one of
    the known prototypes.
    """
    if not doc.element_ids():
        raise UnrecognizedStructure("document has no assigned element ids")
    parts = _classify_children(doc)

    polar = _detect_polar_center(parts.lines)
    if polar is not None:
        return _decompose_radar(doc, parts, polar)
    arcs = _detect_pie_sectors(parts.shapes)
    if arcs is not None and not parts.lines:
        return _decompose_pie(doc, parts, arcs)
    return _decompose_cartesian(doc, parts)


# ---------------------------------------------------------------------------
# Cartesian prototypes


def _decompose_cartesian(doc: SvgDocument, parts: _Classified):
    vertical = [l for l in parts.lines if _num(l, "x1") == _num(l, "x2")]
    horizontal = [l for l in parts.lines if _num(l, "y1") == _num(l, "y2")]
    if not vertical or not horizontal:
        raise UnrecognizedStructure("no recognizable axis lines")
    y_axis = min(vertical, key=lambda l: _num(l, "x1"))
    x_axis = max(horizontal, key=lambda l: _num(l, "y1"))
    ox = _num(y_axis, "x1")
    oy = _num(x_axis, "y1")

    y_labels = [t for t in parts.texts if _num(t, "x", 1e9) < ox and _is_numeric_text(t)]
    x_labels = [t for t in parts.texts if _num(t, "y", -1e9) > oy]
    label_ids = {id(t) for t in y_labels + x_labels}
    title_texts = [t for t in parts.texts if id(t) not in label_ids]

    y_map = _fit_ticks([(float(t.text.strip()), _num(t, "y")) for t in y_labels])
    x_numeric = all(_is_numeric_text(t) for t in x_labels) and x_labels
    x_map = (
        _fit_ticks([(float(t.text.strip()), _num(t, "x")) for t in x_labels])
        if x_numeric
        else None
    )

    rects = [s for s in parts.shapes if s.tag == "rect"]
    circles = [s for s in parts.shapes if s.tag == "circle"]
    paths = [s for s in parts.shapes if s.tag == "path"]

    if len(rects) >= 3 and not circles and not paths:
        return _decompose_bar(doc, parts, rects, x_labels, y_labels, y_map,
                              x_axis, y_axis, title_texts, ox, oy)
    if len(circles) >= 3 and not rects and not paths:
        return _decompose_scatter(doc, parts, circles, x_labels, y_labels, x_map, y_map,
                                  x_axis, y_axis, title_texts, ox, oy)
    if len(paths) == 1 and not rects and not circles:
        return _decompose_trend(doc, parts, paths[0], x_labels, y_labels, x_map, y_map,
                                x_axis, y_axis, title_texts, ox, oy)
    raise UnrecognizedStructure("no recognizable mark series")


def _ids(nodes) -> list[int]:
    out = []
    for n in nodes:
        for e in n.iter_elements():
            if e.element_id is not None:
                out.append(e.element_id)
    return out


def _base_markers(parts: _Classified, title_texts) -> list[GroupMarker]:
    markers = []
    if parts.config:
        markers.append(
            GroupMarker(LayerRole.CONFIGURATION, "style and definitions", _ids(parts.config))
        )
    if parts.decorative:
        markers.append(
            GroupMarker(LayerRole.DECORATIVE, "background decoration", _ids(parts.decorative))
        )
    if title_texts:
        markers.append(GroupMarker(LayerRole.TEXT, "title and captions", _ids(title_texts)))
    return markers


def _axis_markers(x_nodes, y_nodes) -> list[GroupMarker]:
    markers = []
    if y_nodes:
        markers.append(
            GroupMarker(LayerRole.DATA_DRIVEN, "y axis", _ids(y_nodes), kind="axis")
        )
    if x_nodes:
        markers.append(
            GroupMarker(LayerRole.DATA_DRIVEN, "x axis", _ids(x_nodes), kind="axis")
        )
    return markers


def _globals(doc: SvgDocument, coordinate, origin, prototype) -> GlobalProperties:
    w, h = doc.canvas_size()
    return GlobalProperties(coordinate, origin, (0.0, 0.0, w, h), prototype)


def _assemble(doc, parts, markers, dataset, ir) -> tuple[SvgDocument, Dataset, IntermediateRepresentation]:
    marked = insert_markers(doc, markers)
    return marked, dataset, ir


def _root_and_unclaimed_ids(doc: SvgDocument, claimed: set[int]) -> list[int]:
    return [i for i in doc.element_ids() if i not in claimed]


def _decompose_bar(doc, parts, rects, x_labels, y_labels, y_map,
                   x_axis, y_axis, title_texts, ox, oy):
    rects = sorted(rects, key=lambda r: _num(r, "x"))
    widths = [_num(r, "width") for r in rects]
    if max(widths) - min(widths) > 0.5:
        raise UnrecognizedStructure("bars have unequal widths")
    bottoms = [_num(r, "y") + _num(r, "height") for r in rects]
    if max(bottoms) - min(bottoms) > 1.0:
        raise UnrecognizedStructure("bars do not share a baseline")
    x_sorted_labels = sorted(x_labels, key=lambda t: _num(t, "x"))
    if len(x_sorted_labels) != len(rects):
        raise UnrecognizedStructure("category label count does not match bar count")
    categories = [t.text.strip() for t in x_sorted_labels]

    values = []
    for r in rects:
        if y_map is not None:
            values.append(y_map.value(_num(r, "y")))
        else:
            values.append(_num(r, "height") / max(_num(x, "height") for x in rects))
    dataset = Dataset(
        [("category", ColumnKind.STRING), ("value", ColumnKind.NUMBER)],
        list(zip(categories, values)),
    )

    mark = MarkSpec(
        MarkType.ATOMIC_SHAPES,
        encoded_attributes=[("x", "category", "x"), ("y", "value", "y"), ("height", "value", "y")],
        fixed_attributes={"fill": rects[0].get("fill", "")},
        member_ids=_ids(rects),
    )
    axes = [
        AxisSpec(AxisOrientation.Y, _ids([y_axis]), _ids(y_labels), "y"),
        AxisSpec(AxisOrientation.X, _ids([x_axis]), _ids(x_sorted_labels), "x"),
    ]
    markers = _base_markers(parts, title_texts)
    markers += _axis_markers([x_axis] + x_labels, [y_axis] + y_labels)
    markers.append(
        GroupMarker(LayerRole.DATA_DRIVEN, "bars", _ids(rects), kind="mark", slot=MARKS_SLOT)
    )
    claimed = set(mark.member_ids)
    for a in axes:
        claimed |= set(a.gridline_ids) | set(a.label_ids)
    text_ids = _ids(title_texts)
    deco_ids = _ids(parts.decorative)
    config_ids = _ids(parts.config)
    claimed |= set(text_ids) | set(deco_ids) | set(config_ids)
    ir = IntermediateRepresentation(
        globals=_globals(doc, Coordinate.CARTESIAN, (ox, oy), Prototype.BAR),
        marks=[mark],
        axes=axes,
        legends=[],
        text_layer_ids=text_ids,
        decorative_layer_ids=deco_ids,
        configuration_layer_ids=config_ids + _root_and_unclaimed_ids(doc, claimed),
        dataset=dataset,
    )
    return _assemble(doc, parts, markers, dataset, ir)


def _decompose_scatter(doc, parts, circles, x_labels, y_labels, x_map, y_map,
                       x_axis, y_axis, title_texts, ox, oy):
    if x_map is None or y_map is None:
        raise UnrecognizedStructure("scatterplot needs numeric tick labels on both axes")
    circles = sorted(circles, key=lambda c: _num(c, "cx"))
    rows = [(x_map.value(_num(c, "cx")), y_map.value(_num(c, "cy"))) for c in circles]
    dataset = Dataset([("x", ColumnKind.NUMBER), ("y", ColumnKind.NUMBER)], rows)
    mark = MarkSpec(
        MarkType.ATOMIC_SHAPES,
        encoded_attributes=[("cx", "x", "x"), ("cy", "y", "y")],
        fixed_attributes={"fill": circles[0].get("fill", ""), "r": circles[0].get("r", "")},
        member_ids=_ids(circles),
    )
    axes = [
        AxisSpec(AxisOrientation.Y, _ids([y_axis]), _ids(y_labels), "y"),
        AxisSpec(AxisOrientation.X, _ids([x_axis]), _ids(x_labels), "x"),
    ]
    markers = _base_markers(parts, title_texts)
    markers += _axis_markers([x_axis] + x_labels, [y_axis] + y_labels)
    markers.append(
        GroupMarker(LayerRole.DATA_DRIVEN, "points", _ids(circles), kind="mark", slot=MARKS_SLOT)
    )
    claimed = set(mark.member_ids)
    for a in axes:
        claimed |= set(a.gridline_ids) | set(a.label_ids)
    text_ids, deco_ids, config_ids = _ids(title_texts), _ids(parts.decorative), _ids(parts.config)
    claimed |= set(text_ids) | set(deco_ids) | set(config_ids)
    ir = IntermediateRepresentation(
        globals=_globals(doc, Coordinate.CARTESIAN, (ox, oy), Prototype.SCATTERPLOT),
        marks=[mark],
        axes=axes,
        legends=[],
        text_layer_ids=text_ids,
        decorative_layer_ids=deco_ids,
        configuration_layer_ids=config_ids + _root_and_unclaimed_ids(doc, claimed),
        dataset=dataset,
    )
    return _assemble(doc, parts, markers, dataset, ir)


def _decompose_trend(doc, parts, path_node, x_labels, y_labels, x_map, y_map,
                     x_axis, y_axis, title_texts, ox, oy):
    if x_map is None or y_map is None:
        raise UnrecognizedStructure("trend chart needs numeric tick labels on both axes")
    subpaths = flatten(parse_path(path_node.get("d", "")), samples_per_curve=1)
    if len(subpaths) != 1:
        raise UnrecognizedStructure("trend path must be a single subpath")
    sp = subpaths[0]
    closed = sp.closed
    points = list(sp.points)
    if closed:
        # Area: drop the two baseline anchor points.
        baseline = oy
        points = [p for p in points if abs(p[1] - baseline) > 0.5]
        if len(points) < 2:
            raise UnrecognizedStructure("closed path does not look like an area chart")
        prototype = Prototype.AREA
    else:
        prototype = Prototype.LINE
    rows = [(x_map.value(x), y_map.value(y)) for x, y in points]
    dataset = Dataset([("x", ColumnKind.NUMBER), ("y", ColumnKind.NUMBER)], rows)
    mark = MarkSpec(
        MarkType.TREND_PATH,
        encoded_attributes=[("d", "x", "x"), ("d", "y", "y")],
        fixed_attributes={
            k: v for k, v in path_node.attrs if k not in ("d", ID_ATTR)
        },
        member_ids=_ids([path_node]),
    )
    axes = [
        AxisSpec(AxisOrientation.Y, _ids([y_axis]), _ids(y_labels), "y"),
        AxisSpec(AxisOrientation.X, _ids([x_axis]), _ids(x_labels), "x"),
    ]
    markers = _base_markers(parts, title_texts)
    markers += _axis_markers([x_axis] + x_labels, [y_axis] + y_labels)
    markers.append(
        GroupMarker(
            LayerRole.DATA_DRIVEN, "trend path", _ids([path_node]), kind="mark", slot=MARKS_SLOT
        )
    )
    claimed = set(mark.member_ids)
    for a in axes:
        claimed |= set(a.gridline_ids) | set(a.label_ids)
    text_ids, deco_ids, config_ids = _ids(title_texts), _ids(parts.decorative), _ids(parts.config)
    claimed |= set(text_ids) | set(deco_ids) | set(config_ids)
    ir = IntermediateRepresentation(
        globals=_globals(doc, Coordinate.CARTESIAN, (ox, oy), prototype),
        marks=[mark],
        axes=axes,
        legends=[],
        text_layer_ids=text_ids,
        decorative_layer_ids=deco_ids,
        configuration_layer_ids=config_ids + _root_and_unclaimed_ids(doc, claimed),
        dataset=dataset,
    )
    return _assemble(doc, parts, markers, dataset, ir)


# ---------------------------------------------------------------------------
# Polar prototypes


def _detect_polar_center(lines) -> tuple[float, float] | None:
    if len(lines) < 3:
        return None
    starts = [(_num(l, "x1"), _num(l, "y1")) for l in lines]
    cx, cy = starts[0]
    if all(abs(x - cx) < 1 and abs(y - cy) < 1 for x, y in starts):
        return (cx, cy)
    return None


def _detect_pie_sectors(shapes) -> list[SvgNode] | None:
    sectors = [
        s for s in shapes if s.tag == "path" and "A" in (s.get("d") or "").upper()
    ]
    if len(sectors) < 2:
        return None
    firsts = []
    for s in sectors:
        cmds = parse_path(s.get("d"))
        if not cmds or cmds[0].letter != "M":
            return None
        firsts.append((cmds[0].args[0], cmds[0].args[1]))
    cx, cy = firsts[0]
    if all(abs(x - cx) < 1 and abs(y - cy) < 1 for x, y in firsts):
        return sectors
    return None


def _decompose_radar(doc, parts, center):
    cx, cy = center
    spokes = parts.lines
    radius = max(
        math.hypot(_num(l, "x2") - cx, _num(l, "y2") - cy) for l in spokes
    )
    tick_texts = [t for t in parts.texts if _is_numeric_text(t)]
    tick_pairs = [(float(t.text.strip()), math.hypot(_num(t, "x") - cx, _num(t, "y") - cy))
                  for t in tick_texts]
    # Tick labels sit just off a spoke; their radial offset is small.
    tick_map = _fit_ticks(tick_pairs)

    non_numeric = [t for t in parts.texts if not _is_numeric_text(t)]
    cat_labels = []
    title_texts = []
    for t in non_numeric:
        dist = math.hypot(_num(t, "x") - cx, _num(t, "y") - cy)
        if dist <= radius + 30:
            cat_labels.append(t)
        else:
            title_texts.append(t)
    polys = [s for s in parts.shapes if s.tag == "path"]
    if len(polys) != 1:
        raise UnrecognizedStructure("radar chart needs exactly one polygon path")
    poly = polys[0]
    subpaths = flatten(parse_path(poly.get("d", "")), samples_per_curve=1)
    if len(subpaths) != 1 or not subpaths[0].closed:
        raise UnrecognizedStructure("radar polygon must be a closed path")
    points = subpaths[0].points

    def vertex_angle(p):
        return math.atan2(p[1] - cy, p[0] - cx)

    n = len(points)
    cats = [t.text.strip() for t in sorted(
        cat_labels, key=lambda t: _angle_order(_num(t, "x") - cx, _num(t, "y") - cy))]
    if len(cats) != n:
        cats = [f"axis-{i + 1}" for i in range(n)]
    values = []
    ordered = sorted(points, key=lambda p: _angle_order(p[0] - cx, p[1] - cy))
    for p in ordered:
        rho = math.hypot(p[0] - cx, p[1] - cy)
        if tick_map is not None:
            # radius is proportional to value with intercept 0
            vmax_value, vmax_rho = tick_map.v1, tick_map.p1
            values.append(rho / (vmax_rho / vmax_value))
        else:
            values.append(rho / radius)
    dataset = Dataset(
        [("axis", ColumnKind.STRING), ("value", ColumnKind.NUMBER)],
        list(zip(cats, values)),
    )
    mark = MarkSpec(
        MarkType.TREND_PATH,
        encoded_attributes=[("d", "value", "r")],
        fixed_attributes={k: v for k, v in poly.attrs if k not in ("d", ID_ATTR)},
        member_ids=_ids([poly]),
    )
    axes = [AxisSpec(AxisOrientation.RADIAL, _ids(spokes), _ids(tick_texts + cat_labels), "r")]
    markers = _base_markers(parts, title_texts)
    markers.append(
        GroupMarker(
            LayerRole.DATA_DRIVEN, "radial axes", _ids(spokes), kind="axis"
        )
    )
    if tick_texts or cat_labels:
        markers.append(
            GroupMarker(
                LayerRole.DATA_DRIVEN, "axis labels", _ids(tick_texts + cat_labels), kind="axis"
            )
        )
    markers.append(
        GroupMarker(LayerRole.DATA_DRIVEN, "radar polygon", _ids([poly]), kind="mark", slot=MARKS_SLOT)
    )
    claimed = set(mark.member_ids) | set(axes[0].gridline_ids) | set(axes[0].label_ids)
    text_ids, deco_ids, config_ids = _ids(title_texts), _ids(parts.decorative), _ids(parts.config)
    claimed |= set(text_ids) | set(deco_ids) | set(config_ids)
    ir = IntermediateRepresentation(
        globals=_globals(doc, Coordinate.POLAR, (cx, cy), Prototype.RADAR),
        marks=[mark],
        axes=axes,
        legends=[],
        text_layer_ids=text_ids,
        decorative_layer_ids=deco_ids,
        configuration_layer_ids=config_ids + _root_and_unclaimed_ids(doc, claimed),
        dataset=dataset,
    )
    return _assemble(doc, parts, markers, dataset, ir)


def _angle_order(dx, dy):
    """Order angles starting at 12 o'clock, clockwise."""
    a = math.atan2(dy, dx) + math.pi / 2
    if a < -1e-9:
        a += 2 * math.pi
    return a


def _decompose_pie(doc, parts, sectors):
    cmds0 = parse_path(sectors[0].get("d"))
    cx, cy = cmds0[0].args[0], cmds0[0].args[1]
    title_texts = list(parts.texts)
    fractions = []
    radius = 0.0
    for s in sectors:
        cmds = parse_path(s.get("d"))
        line = next(c for c in cmds if c.letter == "L")
        arc = next(c for c in cmds if c.letter == "A")
        radius = max(radius, arc.args[0])
        a0 = math.atan2(line.args[1] - cy, line.args[0] - cx)
        a1 = math.atan2(arc.args[6] - cy, arc.args[5] - cx)
        sweep = a1 - a0
        if sweep <= 0:
            sweep += 2 * math.pi
        fractions.append(sweep / (2 * math.pi))
    values = [f * 100.0 for f in fractions]
    dataset = Dataset(
        [("category", ColumnKind.STRING), ("value", ColumnKind.NUMBER)],
        [(f"slice-{i + 1}", v) for i, v in enumerate(values)],
    )
    mark = MarkSpec(
        MarkType.ATOMIC_SHAPES,
        encoded_attributes=[("d", "value", "angle")],
        fixed_attributes={},
        member_ids=_ids(sectors),
    )
    markers = _base_markers(parts, title_texts)
    markers.append(
        GroupMarker(LayerRole.DATA_DRIVEN, "pie sectors", _ids(sectors), kind="mark", slot=MARKS_SLOT)
    )
    claimed = set(mark.member_ids)
    text_ids, deco_ids, config_ids = _ids(title_texts), _ids(parts.decorative), _ids(parts.config)
    claimed |= set(text_ids) | set(deco_ids) | set(config_ids)
    ir = IntermediateRepresentation(
        globals=_globals(doc, Coordinate.POLAR, (cx, cy), Prototype.PIE),
        marks=[mark],
        axes=[],
        legends=[],
        text_layer_ids=text_ids,
        decorative_layer_ids=deco_ids,
        configuration_layer_ids=config_ids + _root_and_unclaimed_ids(doc, claimed),
        dataset=dataset,
    )
    return _assemble(doc, parts, markers, dataset, ir)


# ---------------------------------------------------------------------------
# Markup validation


def validate_markup(marked: SvgDocument, original: SvgDocument) -> ValidationReport:
    """Marker well-formedness, id preservation, strip-inverse property."""
    report = ValidationReport()
    for node in marked.iter_elements():
        if is_marker(node):
            role = node.get("role")
            if node.tag == "dw:group" and role is None:
                report.add("marker-malformed", "dw:group without a role attribute")
            elif role is not None:
                try:
                    LayerRole.from_string(role)
                except ValueError:
                    report.add("marker-malformed", f"unknown role {role!r}")
    orig_ids = set(original.element_ids())
    marked_ids = set(marked.element_ids())
    for missing in sorted(orig_ids - marked_ids):
        report.add("missing-id", f"missing id {missing}")
    for extra in sorted(marked_ids - orig_ids):
        report.add("extra-id", f"unexpected id {extra}")
    if serialize(strip_markers(marked)) != serialize(original):
        report.add("inverse-violation", "stripping markers does not restore the original")
    return report
