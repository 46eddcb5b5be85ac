"""Lossless SVG document model.

Parsing keeps attribute order and attribute values verbatim; whitespace
between elements is normalized on output (two-space indentation), which
does not affect rendering. Namespaced names (``xlink:href``, ``dw:group``)
are kept as opaque prefixed strings -- no namespace resolution happens.
"""

from __future__ import annotations

import xml.parsers.expat
from dataclasses import dataclass, field

from ..errors import IdCollision, MalformedXml, NotAnSvg, UnknownId

ID_ATTR = "data-dw-id"
COMMENT_TAG = "#comment"


@dataclass
class SvgNode:
    tag: str
    attrs: list[tuple[str, str]] = field(default_factory=list)
    children: list["SvgNode"] = field(default_factory=list)
    text: str | None = None

    def get(self, name, default=None):
        for k, v in self.attrs:
            if k == name:
                return v
        return default

    def set(self, name, value):
        """Set an attribute, keeping its position if it already exists."""
        for i, (k, _) in enumerate(self.attrs):
            if k == name:
                self.attrs[i] = (name, value)
                return
        self.attrs.append((name, value))

    def remove(self, name):
        self.attrs = [(k, v) for k, v in self.attrs if k != name]

    @property
    def is_comment(self):
        return self.tag == COMMENT_TAG

    @property
    def element_id(self) -> int | None:
        v = self.get(ID_ATTR)
        return int(v) if v is not None else None

    def copy(self) -> "SvgNode":
        return SvgNode(
            self.tag,
            list(self.attrs),
            [c.copy() for c in self.children],
            self.text,
        )

    def iter_elements(self):
        """Pre-order traversal over element nodes (comments skipped)."""
        if not self.is_comment:
            yield self
            for c in self.children:
                yield from c.iter_elements()


@dataclass
class SvgDocument:
    root: SvgNode
    source_bytes: bytes = b""
    had_decl: bool = False

    def iter_elements(self):
        return self.root.iter_elements()

    def element_ids(self) -> list[int]:
        return [n.element_id for n in self.iter_elements() if n.element_id is not None]

    def find_by_id(self, element_id: int) -> SvgNode:
        for n in self.iter_elements():
            if n.element_id == element_id:
                return n
        raise UnknownId(f"no element with {ID_ATTR}={element_id}")

    def find_parent(self, node: SvgNode) -> SvgNode | None:
        for n in self.iter_elements():
            if node in n.children:
                return n
        return None

    def copy(self) -> "SvgDocument":
        return SvgDocument(self.root.copy(), self.source_bytes, self.had_decl)

    def canvas_size(self) -> tuple[float, float]:
        """Viewport size from width/height attributes, falling back to viewBox."""
        w, h = self.root.get("width"), self.root.get("height")
        if w is not None and h is not None:
            try:
                return float(strip_unit(w)), float(strip_unit(h))
            except ValueError:
                pass
        vb = self.root.get("viewBox")
        if vb:
            parts = vb.replace(",", " ").split()
            if len(parts) == 4:
                return float(parts[2]), float(parts[3])
        raise ValueError("document has no resolvable viewport")

    def canvas_diagonal(self) -> float:
        w, h = self.canvas_size()
        return (w * w + h * h) ** 0.5


def strip_unit(value: str) -> str:
    return value.strip().removesuffix("px")


def parse(data: bytes | str) -> SvgDocument:
    """Parse SVG bytes into a document tree.

    Raises MalformedXml on broken XML and NotAnSvg when the root element
    is not ``svg``.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    parser = xml.parsers.expat.ParserCreate()
    parser.ordered_attributes = True
    parser.buffer_text = True

    root: list[SvgNode] = []
    stack: list[SvgNode] = []
    pending_text: list[str] = []
    had_decl = [False]

    def flush_text():
        if not stack or not pending_text:
            pending_text.clear()
            return
        chunk = "".join(pending_text)
        pending_text.clear()
        # Pure inter-element whitespace is dropped; real content is kept.
        if chunk.strip() == "":
            return
        node = stack[-1]
        node.text = (node.text or "") + chunk

    def start(name, attr_list):
        flush_text()
        attrs = [(attr_list[i], attr_list[i + 1]) for i in range(0, len(attr_list), 2)]
        node = SvgNode(name, attrs)
        if stack:
            stack[-1].children.append(node)
        else:
            root.append(node)
        stack.append(node)

    def end(name):
        flush_text()
        stack.pop()

    def chardata(text):
        if stack:
            pending_text.append(text)

    def comment(text):
        flush_text()
        node = SvgNode(COMMENT_TAG, text=text)
        if stack:
            stack[-1].children.append(node)
        elif root:
            pass  # trailing top-level comment: dropped (rendering-neutral)

    def xmldecl(version, encoding, standalone):
        had_decl[0] = True

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chardata
    parser.CommentHandler = comment
    parser.XmlDeclHandler = xmldecl

    try:
        parser.Parse(data, True)
    except xml.parsers.expat.ExpatError as exc:
        raise MalformedXml(
            xml.parsers.expat.errors.messages[exc.code],
            offset=parser.ErrorByteIndex,
            line=parser.ErrorLineNumber,
            column=parser.ErrorColumnNumber,
        ) from exc

    if not root:
        raise MalformedXml("empty document", offset=0)
    if root[0].tag != "svg":
        raise NotAnSvg(f"root element is <{root[0].tag}>, expected <svg>")
    return SvgDocument(root[0], source_bytes=data, had_decl=had_decl[0])


def _escape_text(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _escape_attr(value: str) -> str:
    return (
        value.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _write_node(node: SvgNode, out: list[str], depth: int):
    pad = "  " * depth
    if node.is_comment:
        out.append(f"{pad}<!--{node.text or ''}-->")
        return
    attrs = "".join(f' {k}="{_escape_attr(v)}"' for k, v in node.attrs)
    if not node.children and node.text is None:
        out.append(f"{pad}<{node.tag}{attrs}/>")
        return
    if node.text is not None:
        # Mixed/text content serialized inline to keep it verbatim.
        inline = [f"{pad}<{node.tag}{attrs}>{_escape_text(node.text)}"]
        for c in node.children:
            sub: list[str] = []
            _write_node(c, sub, 0)
            inline.append("\n".join(sub))
        inline.append(f"</{node.tag}>")
        out.append("".join(inline))
        return
    out.append(f"{pad}<{node.tag}{attrs}>")
    for c in node.children:
        _write_node(c, out, depth + 1)
    out.append(f"{pad}</{node.tag}>")


def serialize(doc: SvgDocument) -> str:
    out: list[str] = []
    if doc.had_decl:
        out.append('<?xml version="1.0" encoding="UTF-8"?>')
    _write_node(doc.root, out, 0)
    return "\n".join(out) + "\n"


def serialize_bytes(doc: SvgDocument) -> bytes:
    return serialize(doc).encode("utf-8")


def assign_ids(doc: SvgDocument) -> SvgDocument:
    """Return a copy where every element carries a fresh pre-order id.

    Ids are 1..N in pre-order; raises IdCollision when the input already
    carries any id attribute.
    """
    for node in doc.iter_elements():
        if node.get(ID_ATTR) is not None:
            raise IdCollision(f"element <{node.tag}> already has {ID_ATTR}={node.get(ID_ATTR)}")
    out = doc.copy()
    for i, node in enumerate(out.iter_elements(), start=1):
        node.set(ID_ATTR, str(i))
    return out


def ensure_ids(doc: SvgDocument) -> SvgDocument:
    """Assign ids unless every element already carries one (then keep them)."""
    nodes = list(doc.iter_elements())
    with_id = [n for n in nodes if n.get(ID_ATTR) is not None]
    if len(with_id) == len(nodes):
        ids = [n.element_id for n in with_id]
        if len(set(ids)) != len(ids):
            raise IdCollision("duplicate id attributes in document")
        return doc
    if with_id:
        raise IdCollision("document carries partial id attributes")
    return assign_ids(doc)
