"""Layered intermediate representation of a decomposed visualization.

Global properties plus role-tagged layers, serialized as canonical JSON
(``.ir.json``, schema version 1) so byte equality implies semantic
equality.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

from .errors import IrParseError
from .svg.model import SvgDocument

IR_VERSION = 1


class Coordinate(enum.Enum):
    CARTESIAN = "Cartesian"
    POLAR = "Polar"
    CUSTOMIZED = "Customized"


class Prototype(enum.Enum):
    BAR = "Bar"
    SCATTERPLOT = "Scatterplot"
    LINE = "Line"
    AREA = "Area"
    RADAR = "Radar"
    PIE = "Pie"
    OTHER = "Other"


class MarkType(enum.Enum):
    DEFORMED_PATH = "DeformedPath"
    TREND_PATH = "TrendPath"
    ATOMIC_SHAPES = "AtomicShapes"


class ColumnKind(enum.Enum):
    NUMBER = "Number"
    STRING = "String"


class AxisOrientation(enum.Enum):
    X = "X"
    Y = "Y"
    ANGULAR = "Angular"
    RADIAL = "Radial"


@dataclass
class GlobalProperties:
    coordinate: Coordinate
    origin: tuple[float, float]
    canvas_bbox: tuple[float, float, float, float]  # x, y, width, height
    prototype: Prototype
    prototype_name: str = ""  # only for Prototype.OTHER

    def check(self):
        x, y, w, h = self.canvas_bbox
        if w <= 0 or h <= 0:
            raise IrParseError("canvas width/height must be positive", "globals.canvas_bbox")
        ox, oy = self.origin
        if not (x <= ox <= x + w and y <= oy <= y + h):
            raise IrParseError("origin must lie within the canvas", "globals.origin")


@dataclass
class MarkSpec:
    mark_type: MarkType
    encoded_attributes: list[tuple[str, str, str]]  # (attribute, data field, scale id)
    fixed_attributes: dict[str, str]
    member_ids: list[int]

    def check(self):
        encoded_names = {a for a, _, _ in self.encoded_attributes}
        overlap = encoded_names & set(self.fixed_attributes)
        if overlap:
            raise IrParseError(
                f"attributes both encoded and fixed: {sorted(overlap)}", "marks"
            )


@dataclass
class AxisSpec:
    orientation: AxisOrientation
    gridline_ids: list[int]
    label_ids: list[int]
    scale_id: str


@dataclass
class LegendSpec:
    position: tuple[float, float]
    size: tuple[float, float]
    channel_groups: list[tuple[str, list[tuple[str, int]]]]  # (channel, [(value, swatch id)])

    def check(self):
        if self.size[0] < 0 or self.size[1] < 0:
            raise IrParseError("legend size must be nonnegative", "legends.size")


@dataclass
class Dataset:
    columns: list[tuple[str, ColumnKind]]
    rows: list[tuple]

    def check(self):
        width = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise IrParseError(f"row {i} has {len(row)} cells, expected {width}", "dataset")
        for j, (name, kind) in enumerate(self.columns):
            if kind is ColumnKind.NUMBER:
                for i, row in enumerate(self.rows):
                    v = row[j]
                    if not isinstance(v, (int, float)) or not math.isfinite(v):
                        raise IrParseError(
                            f"cell [{i}][{name}] is not a finite number: {v!r}", "dataset"
                        )

    def column_names(self) -> list[str]:
        return [n for n, _ in self.columns]

    def column_index(self, name: str) -> int:
        return self.column_names().index(name)

    def column_values(self, name: str) -> list:
        j = self.column_index(name)
        return [row[j] for row in self.rows]


@dataclass
class IntermediateRepresentation:
    globals: GlobalProperties
    marks: list[MarkSpec]
    axes: list[AxisSpec]
    legends: list[LegendSpec]
    text_layer_ids: list[int]
    decorative_layer_ids: list[int]
    configuration_layer_ids: list[int]
    dataset: Dataset

    def data_driven_ids(self) -> list[int]:
        ids: list[int] = []
        for m in self.marks:
            ids.extend(m.member_ids)
        for a in self.axes:
            ids.extend(a.gridline_ids)
            ids.extend(a.label_ids)
        for l in self.legends:
            for _, entries in l.channel_groups:
                ids.extend(sid for _, sid in entries)
        return ids

    def all_ids(self) -> list[int]:
        return (
            self.data_driven_ids()
            + list(self.text_layer_ids)
            + list(self.decorative_layer_ids)
            + list(self.configuration_layer_ids)
        )


@dataclass
class ValidationIssue:
    kind: str  # orphan-id | dangling-id | duplicate-id | schema-mismatch | scale-gap | ...
    detail: str


@dataclass
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)

    def add(self, kind: str, detail: str):
        self.issues.append(ValidationIssue(kind, detail))

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self):
        if self.ok:
            return "ok"
        return "; ".join(f"{i.kind}: {i.detail}" for i in self.issues)


def validate_ir(ir: IntermediateRepresentation, doc: SvgDocument,
                known_scale_ids: set[str] | None = None) -> ValidationReport:
    """Check the id partition, dataset schema, and scale references."""
    report = ValidationReport()
    doc_ids = set(doc.element_ids())
    ir_ids = ir.all_ids()
    seen: set[int] = set()
    for i in ir_ids:
        if i in seen:
            report.add("duplicate-id", f"id {i} appears in more than one partition")
        seen.add(i)
    for i in sorted(doc_ids - seen):
        report.add("orphan-id", f"id {i} is in the document but unpartitioned")
    for i in sorted(seen - doc_ids):
        report.add("dangling-id", f"id {i} is in the IR but absent from the document")

    columns = set(ir.dataset.column_names())
    for m in ir.marks:
        for attr, data_field, scale_id in m.encoded_attributes:
            if data_field not in columns:
                report.add(
                    "schema-mismatch",
                    f"mark attribute {attr!r} references unknown field {data_field!r}",
                )
            if known_scale_ids is not None and scale_id not in known_scale_ids:
                report.add("scale-gap", f"mark attribute {attr!r} references scale {scale_id!r}")
    if known_scale_ids is not None:
        for a in ir.axes:
            if a.scale_id and a.scale_id not in known_scale_ids:
                report.add("scale-gap", f"axis references scale {a.scale_id!r}")
    return report


# ---------------------------------------------------------------------------
# Canonical JSON serialization


def _enum(value, cls, path):
    try:
        return cls(value)
    except ValueError:
        raise IrParseError(f"unknown {cls.__name__} value {value!r}", path) from None


def ir_to_dict(ir: IntermediateRepresentation) -> dict:
    g = ir.globals
    return {
        "ir_version": IR_VERSION,
        "globals": {
            "coordinate": g.coordinate.value,
            "origin": list(g.origin),
            "canvas_bbox": list(g.canvas_bbox),
            "prototype": g.prototype.value,
            "prototype_name": g.prototype_name,
        },
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
        "legends": [
            {
                "position": list(l.position),
                "size": list(l.size),
                "channel_groups": [
                    [channel, [[v, sid] for v, sid in entries]]
                    for channel, entries in l.channel_groups
                ],
            }
            for l in ir.legends
        ],
        "text_layer_ids": list(ir.text_layer_ids),
        "decorative_layer_ids": list(ir.decorative_layer_ids),
        "configuration_layer_ids": list(ir.configuration_layer_ids),
        "dataset": {
            "columns": [[n, k.value] for n, k in ir.dataset.columns],
            "rows": [list(r) for r in ir.dataset.rows],
        },
    }


def serialize_ir(ir: IntermediateRepresentation) -> str:
    return json.dumps(ir_to_dict(ir), sort_keys=True, indent=2) + "\n"


def _require(obj, key, path):
    if key not in obj:
        raise IrParseError(f"missing key {key!r}", path)
    return obj[key]


def parse_ir(text: str) -> IntermediateRepresentation:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IrParseError(f"invalid JSON: {exc}") from exc
    if _require(data, "ir_version", "") != IR_VERSION:
        raise IrParseError(f"unsupported ir_version {data.get('ir_version')!r}", "ir_version")

    g = _require(data, "globals", "")
    globals_ = GlobalProperties(
        coordinate=_enum(_require(g, "coordinate", "globals"), Coordinate, "globals.coordinate"),
        origin=tuple(_require(g, "origin", "globals")),
        canvas_bbox=tuple(_require(g, "canvas_bbox", "globals")),
        prototype=_enum(_require(g, "prototype", "globals"), Prototype, "globals.prototype"),
        prototype_name=g.get("prototype_name", ""),
    )
    globals_.check()

    marks = []
    for i, m in enumerate(data.get("marks", [])):
        spec = MarkSpec(
            mark_type=_enum(_require(m, "mark_type", f"marks[{i}]"), MarkType, f"marks[{i}].mark_type"),
            encoded_attributes=[tuple(e) for e in m.get("encoded_attributes", [])],
            fixed_attributes=dict(m.get("fixed_attributes", {})),
            member_ids=[int(x) for x in m.get("member_ids", [])],
        )
        spec.check()
        marks.append(spec)

    axes = [
        AxisSpec(
            orientation=_enum(
                _require(a, "orientation", f"axes[{i}]"), AxisOrientation, f"axes[{i}].orientation"
            ),
            gridline_ids=[int(x) for x in a.get("gridline_ids", [])],
            label_ids=[int(x) for x in a.get("label_ids", [])],
            scale_id=a.get("scale_id", ""),
        )
        for i, a in enumerate(data.get("axes", []))
    ]

    legends = []
    for i, l in enumerate(data.get("legends", [])):
        spec = LegendSpec(
            position=tuple(_require(l, "position", f"legends[{i}]")),
            size=tuple(_require(l, "size", f"legends[{i}]")),
            channel_groups=[
                (channel, [(v, int(sid)) for v, sid in entries])
                for channel, entries in l.get("channel_groups", [])
            ],
        )
        spec.check()
        legends.append(spec)

    ds = _require(data, "dataset", "")
    dataset = Dataset(
        columns=[(n, _enum(k, ColumnKind, "dataset.columns")) for n, k in _require(ds, "columns", "dataset")],
        rows=[tuple(r) for r in ds.get("rows", [])],
    )
    dataset.check()

    return IntermediateRepresentation(
        globals=globals_,
        marks=marks,
        axes=axes,
        legends=legends,
        text_layer_ids=[int(x) for x in data.get("text_layer_ids", [])],
        decorative_layer_ids=[int(x) for x in data.get("decorative_layer_ids", [])],
        configuration_layer_ids=[int(x) for x in data.get("configuration_layer_ids", [])],
        dataset=dataset,
    )
