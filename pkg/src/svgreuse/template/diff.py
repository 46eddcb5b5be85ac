"""Geometry diff between two SVG documents.

Elements are matched by injected id where available, then by (tag,
document order). The score is the maximum positional deviation as a
fraction of the first document's canvas diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..svg.markers import is_marker
from ..svg.model import SvgDocument, SvgNode
from ..svg.path import path_numbers
from .. import preprocess

GEOMETRY_ATTRS = (
    "x", "y", "width", "height", "r", "rx", "ry", "cx", "cy",
    "x1", "y1", "x2", "y2", "points", "d", "transform",
)


@dataclass
class FidelityScore:
    max_deviation: float  # fraction of canvas diagonal; 1.0 on structural mismatch
    attribute_mismatches: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.max_deviation == 0 and not self.attribute_mismatches


def _elements(doc: SvgDocument) -> list[SvgNode]:
    return [n for n in doc.iter_elements() if not is_marker(n)]


def _numbers(attr: str, value: str) -> list[float]:
    if attr == "d":
        try:
            return path_numbers(value)
        except Exception:
            return []
    out = []
    for m in preprocess._NUMBER.finditer(value):
        try:
            out.append(float(m.group(0)))
        except ValueError:
            pass
    return out


def _pair_elements(a: list[SvgNode], b: list[SvgNode]) -> list[tuple[SvgNode, SvgNode]] | None:
    by_id_b = {n.element_id: n for n in b if n.element_id is not None}
    pairs = []
    rest_a = []
    used = set()
    for n in a:
        i = n.element_id
        if i is not None and i in by_id_b:
            pairs.append((n, by_id_b[i]))
            used.add(id(by_id_b[i]))
        else:
            rest_a.append(n)
    rest_b = [n for n in b if id(n) not in used]
    # Remaining elements matched per tag, in document order.
    from collections import defaultdict

    tag_a, tag_b = defaultdict(list), defaultdict(list)
    for n in rest_a:
        tag_a[n.tag].append(n)
    for n in rest_b:
        tag_b[n.tag].append(n)
    if set(tag_a) != set(tag_b):
        return None
    for tag in tag_a:
        if len(tag_a[tag]) != len(tag_b[tag]):
            return None
        pairs.extend(zip(tag_a[tag], tag_b[tag]))
    return pairs


def diff_geometry(a: SvgDocument, b: SvgDocument) -> FidelityScore:
    try:
        diagonal = a.canvas_diagonal()
    except ValueError:
        diagonal = 1.0
    ea, eb = _elements(a), _elements(b)
    pairs = _pair_elements(ea, eb)
    if pairs is None or len(ea) != len(eb):
        return FidelityScore(1.0, notes=[f"element count mismatch: {len(ea)} vs {len(eb)}"])

    worst = 0.0
    mismatches = []
    for na, nb in pairs:
        attrs_a = dict(na.attrs)
        attrs_b = dict(nb.attrs)
        for attr in GEOMETRY_ATTRS:
            va, vb = attrs_a.get(attr), attrs_b.get(attr)
            if va is None and vb is None:
                continue
            if va is None or vb is None:
                mismatches.append(f"<{na.tag}> {attr}: {va!r} vs {vb!r}")
                worst = max(worst, 1.0)
                continue
            nums_a, nums_b = _numbers(attr, va), _numbers(attr, vb)
            if len(nums_a) != len(nums_b):
                mismatches.append(f"<{na.tag}> {attr}: token count {len(nums_a)} vs {len(nums_b)}")
                worst = max(worst, 1.0)
                continue
            for x, y in zip(nums_a, nums_b):
                worst = max(worst, abs(x - y) / diagonal)
        for attr in set(attrs_a) | set(attrs_b):
            if attr in GEOMETRY_ATTRS or attr == "data-dw-id":
                continue
            if attrs_a.get(attr) != attrs_b.get(attr):
                mismatches.append(
                    f"<{na.tag}> {attr}: {attrs_a.get(attr)!r} vs {attrs_b.get(attr)!r}"
                )
    return FidelityScore(worst, attribute_mismatches=mismatches)
