"""Synthetic chart corpus with known ground-truth data.

Each generator builds a complete SVG document (config layer, decorative
background, axes with tick labels, marks, title) from explicit data, so
decomposition results can be checked against the truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ir import ColumnKind, Dataset, Prototype
from .numfmt import format_number as fn
from .svg.model import SvgDocument, SvgNode, assign_ids, parse, serialize

CANVAS_W, CANVAS_H = 420.0, 300.0
ORIGIN_X, ORIGIN_Y = 50.0, 260.0
PLOT_W, PLOT_H = 340.0, 220.0

PALETTE = ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948"]


@dataclass
class CorpusChart:
    name: str
    prototype: Prototype
    document: SvgDocument  # id-assigned
    dataset: Dataset  # ground truth
    axis_range: float  # denominator for the 1%-of-range data check


def _svg_root() -> SvgNode:
    return SvgNode(
        "svg",
        [
            ("xmlns", "http://www.w3.org/2000/svg"),
            ("width", fn(CANVAS_W)),
            ("height", fn(CANVAS_H)),
            ("viewBox", f"0 0 {fn(CANVAS_W)} {fn(CANVAS_H)}"),
        ],
    )


def _style() -> SvgNode:
    return SvgNode("style", [("type", "text/css")], text="text{font-family:sans-serif;font-size:11px}")


def _background() -> SvgNode:
    return SvgNode(
        "rect",
        [("x", "0"), ("y", "0"), ("width", fn(CANVAS_W)), ("height", fn(CANVAS_H)), ("fill", "#f7f7f2")],
    )


def _line(x1, y1, x2, y2, stroke="#333333") -> SvgNode:
    return SvgNode(
        "line",
        [("x1", fn(x1)), ("y1", fn(y1)), ("x2", fn(x2)), ("y2", fn(y2)), ("stroke", stroke)],
    )


def _text(x, y, content, anchor="middle") -> SvgNode:
    return SvgNode(
        "text",
        [("x", fn(x)), ("y", fn(y)), ("text-anchor", anchor), ("dominant-baseline", "middle")],
        text=content,
    )


def _title(content) -> SvgNode:
    return _text(CANVAS_W / 2, 20, content)


def _nice_max(value: float) -> float:
    if value <= 0:
        return 1.0
    magnitude = 10 ** math.floor(math.log10(value))
    for mult in (1, 2, 2.5, 5, 10):
        if value <= mult * magnitude:
            return mult * magnitude
    return 10 * magnitude


def _y_ticks(vmax: float, count: int = 5):
    return [vmax * i / count for i in range(count + 1)]


def _y_axis_nodes(vmax: float) -> list[SvgNode]:
    nodes = [_line(ORIGIN_X, ORIGIN_Y, ORIGIN_X, ORIGIN_Y - PLOT_H)]
    for t in _y_ticks(vmax):
        y = ORIGIN_Y - t / vmax * PLOT_H
        nodes.append(_text(ORIGIN_X - 8, y, fn(t), anchor="end"))
    return nodes


def _x_axis_numeric_nodes(xmax: float, count: int = 5) -> list[SvgNode]:
    nodes = [_line(ORIGIN_X, ORIGIN_Y, ORIGIN_X + PLOT_W, ORIGIN_Y)]
    for i in range(count + 1):
        t = xmax * i / count
        x = ORIGIN_X + t / xmax * PLOT_W
        nodes.append(_text(x, ORIGIN_Y + 16, fn(t)))
    return nodes


def _finish(name, prototype, root, dataset, axis_range) -> CorpusChart:
    doc = assign_ids(parse(serialize(SvgDocument(root)).encode("utf-8")))
    return CorpusChart(name, prototype, doc, dataset, axis_range)


def make_bar_chart(name, categories, values, fill="#4682b4", padding=0.1) -> CorpusChart:
    vmax = _nice_max(max(values))
    n = len(categories)
    step = PLOT_W / n
    width = step * (1 - padding)
    root = _svg_root()
    root.children.append(_style())
    root.children.append(_background())
    root.children.extend(_y_axis_nodes(vmax))
    x_axis = [_line(ORIGIN_X, ORIGIN_Y, ORIGIN_X + PLOT_W, ORIGIN_Y)]
    for i, cat in enumerate(categories):
        x_axis.append(_text(ORIGIN_X + i * step + step * padding / 2 + width / 2, ORIGIN_Y + 16, cat))
    root.children.extend(x_axis)
    for i, v in enumerate(values):
        h = (v - 0.0) / vmax * PLOT_H
        root.children.append(
            SvgNode(
                "rect",
                [
                    ("x", fn(ORIGIN_X + i * step + step * padding / 2)),
                    ("y", fn(ORIGIN_Y - h)),
                    ("width", fn(width)),
                    ("height", fn(h)),
                    ("fill", fill),
                ],
            )
        )
    root.children.append(_title(name))
    dataset = Dataset(
        [("category", ColumnKind.STRING), ("value", ColumnKind.NUMBER)],
        [(c, float(v)) for c, v in zip(categories, values)],
    )
    return _finish(name, Prototype.BAR, root, dataset, vmax)


def make_scatter_chart(name, xs, ys, fill="#e15759", radius=5.0) -> CorpusChart:
    xmax, ymax = _nice_max(max(xs)), _nice_max(max(ys))
    root = _svg_root()
    root.children.append(_style())
    root.children.append(_background())
    root.children.extend(_y_axis_nodes(ymax))
    root.children.extend(_x_axis_numeric_nodes(xmax))
    for x, y in zip(xs, ys):
        root.children.append(
            SvgNode(
                "circle",
                [
                    ("cx", fn(ORIGIN_X + x / xmax * PLOT_W)),
                    ("cy", fn(ORIGIN_Y - y / ymax * PLOT_H)),
                    ("r", fn(radius)),
                    ("fill", fill),
                ],
            )
        )
    root.children.append(_title(name))
    dataset = Dataset(
        [("x", ColumnKind.NUMBER), ("y", ColumnKind.NUMBER)],
        [(float(x), float(y)) for x, y in zip(xs, ys)],
    )
    return _finish(name, Prototype.SCATTERPLOT, root, dataset, max(xmax, ymax))


def _polyline_d(points) -> str:
    parts = [f"M {fn(points[0][0])} {fn(points[0][1])}"]
    for x, y in points[1:]:
        parts.append(f"L {fn(x)} {fn(y)}")
    return " ".join(parts)


def make_line_chart(name, xs, ys, stroke="#4e79a7") -> CorpusChart:
    xmax, ymax = _nice_max(max(xs)), _nice_max(max(ys))
    points = [
        (ORIGIN_X + x / xmax * PLOT_W, ORIGIN_Y - y / ymax * PLOT_H) for x, y in zip(xs, ys)
    ]
    root = _svg_root()
    root.children.append(_style())
    root.children.append(_background())
    root.children.extend(_y_axis_nodes(ymax))
    root.children.extend(_x_axis_numeric_nodes(xmax))
    root.children.append(
        SvgNode(
            "path",
            [("d", _polyline_d(points)), ("fill", "none"), ("stroke", stroke), ("stroke-width", "2")],
        )
    )
    root.children.append(_title(name))
    dataset = Dataset(
        [("x", ColumnKind.NUMBER), ("y", ColumnKind.NUMBER)],
        [(float(x), float(y)) for x, y in zip(xs, ys)],
    )
    return _finish(name, Prototype.LINE, root, dataset, max(xmax, ymax))


def make_area_chart(name, xs, ys, fill="#76b7b2") -> CorpusChart:
    xmax, ymax = _nice_max(max(xs)), _nice_max(max(ys))
    points = [
        (ORIGIN_X + x / xmax * PLOT_W, ORIGIN_Y - y / ymax * PLOT_H) for x, y in zip(xs, ys)
    ]
    d = (
        f"M {fn(points[0][0])} {fn(ORIGIN_Y)} "
        + " ".join(f"L {fn(x)} {fn(y)}" for x, y in points)
        + f" L {fn(points[-1][0])} {fn(ORIGIN_Y)} Z"
    )
    root = _svg_root()
    root.children.append(_style())
    root.children.append(_background())
    root.children.extend(_y_axis_nodes(ymax))
    root.children.extend(_x_axis_numeric_nodes(xmax))
    root.children.append(SvgNode("path", [("d", d), ("fill", fill), ("stroke", "none")]))
    root.children.append(_title(name))
    dataset = Dataset(
        [("x", ColumnKind.NUMBER), ("y", ColumnKind.NUMBER)],
        [(float(x), float(y)) for x, y in zip(xs, ys)],
    )
    return _finish(name, Prototype.AREA, root, dataset, max(xmax, ymax))


RADAR_CX, RADAR_CY, RADAR_R = 210.0, 165.0, 105.0


def make_radar_chart(name, categories, values, fill="#f28e2b") -> CorpusChart:
    vmax = _nice_max(max(values))
    n = len(categories)
    root = _svg_root()
    root.children.append(_style())
    root.children.append(_background())
    spokes = []
    cat_labels = []
    for i, cat in enumerate(categories):
        angle = (2 * math.pi) / n * i - math.pi / 2
        ex = RADAR_CX + RADAR_R * math.cos(angle)
        ey = RADAR_CY + RADAR_R * math.sin(angle)
        spokes.append(_line(RADAR_CX, RADAR_CY, ex, ey, stroke="#bbbbbb"))
        lx = RADAR_CX + (RADAR_R + 18) * math.cos(angle)
        ly = RADAR_CY + (RADAR_R + 18) * math.sin(angle)
        cat_labels.append(_text(lx, ly, cat))
    root.children.extend(spokes)
    ticks = [vmax * i / 4 for i in range(1, 5)]
    for t in ticks:
        rho = 0.0 + (t - 0.0) / vmax * RADAR_R
        root.children.append(_text(RADAR_CX + 6, RADAR_CY - rho, fn(t), anchor="start"))
    root.children.extend(cat_labels)
    pts = []
    for i, v in enumerate(values):
        angle = (2 * math.pi) / n * i - math.pi / 2
        rho = 0.0 + (v - 0.0) / vmax * RADAR_R
        pts.append((RADAR_CX + rho * math.cos(angle), RADAR_CY + rho * math.sin(angle)))
    d = _polyline_d(pts) + " Z"
    root.children.append(
        SvgNode(
            "path",
            [("d", d), ("fill", fill), ("fill-opacity", "0.5"), ("stroke", fill), ("stroke-width", "2")],
        )
    )
    root.children.append(_title(name))
    dataset = Dataset(
        [("axis", ColumnKind.STRING), ("value", ColumnKind.NUMBER)],
        [(c, float(v)) for c, v in zip(categories, values)],
    )
    return _finish(name, Prototype.RADAR, root, dataset, vmax)


PIE_CX, PIE_CY, PIE_R = 210.0, 165.0, 110.0


def make_pie_chart(name, shares) -> CorpusChart:
    """shares: percentages summing to 100."""
    total = float(sum(shares))
    root = _svg_root()
    root.children.append(_style())
    root.children.append(_background())
    cum = 0.0
    for i, v in enumerate(shares):
        a0 = (2 * math.pi) * (cum / total) - math.pi / 2
        a1 = a0 + (2 * math.pi) * (v / total)
        x0 = PIE_CX + PIE_R * math.cos(a0)
        y0 = PIE_CY + PIE_R * math.sin(a0)
        x1 = PIE_CX + PIE_R * math.cos(a1)
        y1 = PIE_CY + PIE_R * math.sin(a1)
        laf = 1 if (v / total) > 0.5 else 0
        d = (
            f"M {fn(PIE_CX)} {fn(PIE_CY)} L {fn(x0)} {fn(y0)} "
            f"A {fn(PIE_R)} {fn(PIE_R)} 0 {laf} 1 {fn(x1)} {fn(y1)} Z"
        )
        root.children.append(
            SvgNode("path", [("d", d), ("fill", PALETTE[i % len(PALETTE)])])
        )
        cum += v
    root.children.append(_title(name))
    dataset = Dataset(
        [("category", ColumnKind.STRING), ("value", ColumnKind.NUMBER)],
        [(f"slice-{i + 1}", float(v)) for i, v in enumerate(shares)],
    )
    return _finish(name, Prototype.PIE, root, dataset, total)


def standard_corpus() -> list[CorpusChart]:
    """Twelve charts, two per prototype."""
    return [
        make_bar_chart("Quarterly revenue", ["Q1", "Q2", "Q3", "Q4"], [10, 20, 30, 40]),
        make_bar_chart(
            "Rainfall by month",
            ["Jan", "Feb", "Mar", "Apr", "May", "Jun"],
            [34, 48, 62, 81, 57, 23],
            fill="#59a14f",
            padding=0.2,
        ),
        make_scatter_chart("Height vs weight", [12, 30, 45, 61, 74, 88], [18, 25, 41, 52, 66, 79]),
        make_scatter_chart(
            "Study time vs score", [5, 15, 25, 40, 55, 70, 85, 95], [22, 30, 45, 48, 61, 70, 82, 90],
            fill="#b07aa1", radius=4,
        ),
        make_line_chart("Temperature over time", [0, 20, 40, 60, 80, 100], [12, 35, 28, 51, 46, 68]),
        make_line_chart(
            "Daily visitors", [0, 10, 25, 40, 55, 70, 90], [5, 18, 12, 30, 26, 44, 39],
            stroke="#e15759",
        ),
        make_area_chart("Cumulative sales", [0, 25, 50, 75, 100], [8, 22, 36, 31, 50]),
        make_area_chart(
            "Storage used", [0, 15, 30, 50, 70, 90], [10, 16, 29, 27, 43, 55], fill="#edc948",
        ),
        make_radar_chart("Skill profile", ["A", "B", "C", "D", "E"], [6, 8, 4, 9, 7]),
        make_radar_chart(
            "Team metrics", ["Spd", "Pwr", "Acc", "Sta", "Tec", "Def"], [55, 72, 64, 80, 47, 69],
        ),
        make_pie_chart("Market share", [45, 30, 15, 10]),
        make_pie_chart("Budget split", [35, 25, 20, 12, 8]),
    ]
