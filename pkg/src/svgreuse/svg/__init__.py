from .model import (
    ID_ATTR,
    SvgDocument,
    SvgNode,
    assign_ids,
    parse,
    serialize,
    serialize_bytes,
)
from .markers import (
    GROUP_TAG,
    SLOT_TAG,
    GroupMarker,
    find_slot,
    group_member_ids,
    insert_markers,
    is_marker,
    iter_groups,
    strip_markers,
)

__all__ = [
    "ID_ATTR",
    "GROUP_TAG",
    "SLOT_TAG",
    "SvgDocument",
    "SvgNode",
    "GroupMarker",
    "assign_ids",
    "find_slot",
    "group_member_ids",
    "insert_markers",
    "is_marker",
    "iter_groups",
    "parse",
    "serialize",
    "serialize_bytes",
    "strip_markers",
]
