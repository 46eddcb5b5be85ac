"""Role/slot marker grammar.

Markers are elements with the reserved ``dw:`` tag prefix, which is
invalid under the SVG standard, so marked-up files (``.dwsvg``) cannot be
mistaken for plain SVG. Stripping all markers restores the pre-markup
tree exactly (modulo injected id attributes).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import NonContiguousMembers, UnknownId
from ..layers import LayerRole
from .model import SvgDocument, SvgNode

MARKER_PREFIX = "dw:"
GROUP_TAG = "dw:group"
SLOT_TAG = "dw:slot"


@dataclass
class GroupMarker:
    role: LayerRole
    label: str = ""
    member_ids: list[int] = field(default_factory=list)
    kind: str | None = None  # mark | axis | legend, for data-driven groups
    slot: str | None = None  # names the group as a generation target


def is_marker(node: SvgNode) -> bool:
    return node.tag.startswith(MARKER_PREFIX)


def make_group_node(marker: GroupMarker, children: list[SvgNode]) -> SvgNode:
    attrs = [("role", marker.role.value)]
    if marker.label:
        attrs.append(("desc", marker.label))
    if marker.kind:
        attrs.append(("kind", marker.kind))
    if marker.slot:
        attrs.append(("slot", marker.slot))
    return SvgNode(GROUP_TAG, attrs, children)


def insert_markers(doc: SvgDocument, groups: list[GroupMarker]) -> SvgDocument:
    """Wrap each group's members in a ``dw:group`` marker element.

    Members must exist and be contiguous siblings. Returns a marked-up
    copy; the input is untouched.
    """
    out = doc.copy()
    for marker in groups:
        if not marker.member_ids:
            continue
        _wrap(out, marker)
    return out


def _wrap(doc: SvgDocument, marker: GroupMarker):
    members = [doc.find_by_id(i) for i in marker.member_ids]  # raises UnknownId
    parent = doc.find_parent(members[0])
    if parent is None:
        raise NonContiguousMembers("cannot wrap the root element")
    for m in members[1:]:
        if m not in parent.children:
            raise NonContiguousMembers(
                f"members of group {marker.label!r} do not share a parent"
            )
    indices = sorted(parent.children.index(m) for m in members)
    lo, hi = indices[0], indices[-1]
    span = parent.children[lo : hi + 1]
    if [n for n in span if not n.is_comment] != [
        parent.children[i] for i in indices
    ]:
        raise NonContiguousMembers(
            f"members of group {marker.label!r} are not contiguous siblings"
        )
    group = make_group_node(marker, span)
    parent.children[lo : hi + 1] = [group]


def strip_markers(doc: SvgDocument) -> SvgDocument:
    """Remove every ``dw:`` element, splicing children in place (inner first)."""
    out = doc.copy()
    _strip(out.root)
    return out


def _strip(node: SvgNode):
    new_children: list[SvgNode] = []
    for child in node.children:
        if child.is_comment:
            new_children.append(child)
            continue
        _strip(child)
        if is_marker(child):
            new_children.extend(child.children)
        else:
            new_children.append(child)
    node.children = new_children


def iter_groups(doc: SvgDocument):
    """Yield every dw:group node in document order."""
    for node in doc.iter_elements():
        if node.tag == GROUP_TAG:
            yield node


def group_member_ids(group: SvgNode) -> list[int]:
    ids = []
    for child in group.children:
        for n in child.iter_elements():
            if n.element_id is not None and not is_marker(n):
                ids.append(n.element_id)
    return ids


def find_slot(doc: SvgDocument, name: str) -> SvgNode | None:
    for node in doc.iter_elements():
        if is_marker(node) and node.get("slot") == name:
            return node
    return None


def slot_names(doc: SvgDocument) -> list[str]:
    return [n.get("slot") for n in doc.iter_elements() if is_marker(n) and n.get("slot")]
