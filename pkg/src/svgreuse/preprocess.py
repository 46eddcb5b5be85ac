"""Build the simplified "prompt view" of a reference document.

The original document is never modified; all reductions happen on a
copy that is only ever shown to the model.
"""

from __future__ import annotations

import decimal
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .errors import RendererUnavailable
from .simplify import rdp, rdp_closed
from .svg import model as svg_model
from .svg.model import SvgDocument, SvgNode, serialize
from .svg.path import emit_polyline_path, flatten, parse_path

# Elements whose inner content is only descriptive for rendering purposes
# and can be emptied in the prompt view. Configurable because the set is
# a judgment call, not a standard.
DESCRIPTIVE_TAGS = frozenset({"style", "filter", "script", "metadata"})

GEOMETRIC_ATTRS = frozenset(
    {
        "x", "y", "width", "height", "r", "rx", "ry", "cx", "cy",
        "x1", "y1", "x2", "y2", "points", "d", "transform",
    }
)

_NUMBER = re.compile(r"[-+]?(?:\d*\.\d+|\d+\.?)(?:[eE][-+]?\d+)?")


@dataclass
class Thumbnail:
    width: int
    height: int
    png_bytes: bytes


@dataclass
class PromptViewStats:
    element_count: int
    bytes_before: int
    bytes_after: int


@dataclass
class PromptView:
    simplified: SvgDocument
    thumbnail: Thumbnail | None
    stats: PromptViewStats


def reduce_noise(doc: SvgDocument, descriptive_tags=DESCRIPTIVE_TAGS) -> SvgDocument:
    """Empty the content of descriptive elements; attributes stay intact."""
    out = doc.copy()
    for node in out.iter_elements():
        if node.tag in descriptive_tags:
            node.children = []
            node.text = None
        elif node.tag == "clipPath":
            for inner in node.iter_elements():
                inner.text = None
    return out


def _round_token(token: str, places: int) -> str:
    try:
        value = decimal.Decimal(token)
    except decimal.InvalidOperation:
        return token
    quantum = decimal.Decimal(1).scaleb(-places)
    rounded = value.quantize(quantum, rounding=decimal.ROUND_HALF_EVEN)
    text = format(rounded.normalize(), "f")
    if text == "-0":
        text = "0"
    return text


def round_numeric(doc: SvgDocument, places: int = 2) -> SvgDocument:
    """Round every numeric token in geometric attributes, half-to-even."""
    if places < 0:
        raise ValueError("places must be >= 0")
    out = doc.copy()
    for node in out.iter_elements():
        for i, (name, value) in enumerate(node.attrs):
            if name in GEOMETRIC_ATTRS:
                new = _NUMBER.sub(lambda m: _round_token(m.group(0), places), value)
                node.attrs[i] = (name, new)
    return out


def simplify_path(d: str, tolerance: float, diagonal: float = 1.0,
                  samples_per_curve: int = 16) -> str:
    """Reduce a path's control points with RDP.

    Curves are flattened first, so the output is a pure M/L/Z polyline
    path: a reference value for the model, not a rendering replacement.
    Epsilon is tolerance (a fraction) times the canvas diagonal.
    """
    if not 0 < tolerance < 1:
        raise ValueError("tolerance must be a fraction in (0, 1)")
    epsilon = tolerance * diagonal
    subpaths = flatten(parse_path(d), samples_per_curve)
    for sp in subpaths:
        if sp.closed:
            sp.points = rdp_closed(sp.points, epsilon)
        else:
            sp.points = rdp(sp.points, epsilon)
    return emit_polyline_path(subpaths)


def simplify_document_paths(doc: SvgDocument, tolerance: float) -> SvgDocument:
    out = doc.copy()
    diagonal = out.canvas_diagonal()
    for node in out.iter_elements():
        if node.tag == "path":
            d = node.get("d")
            if d:
                node.set("d", simplify_path(d, tolerance, diagonal))
    return out


def thumbnail_size(width: float, height: float, max_width: int = 400) -> tuple[int, int]:
    """Proportional downscale to max_width; never upscales."""
    if width <= max_width:
        return int(round(width)), int(round(height))
    return max_width, int(round(height * max_width / width))


def make_thumbnail(doc: SvgDocument, max_width: int = 400,
                   renderer_command: str | None = None) -> Thumbnail | None:
    """Rasterize via a pluggable renderer binary.

    The command is invoked as ``cmd <in.svg> <out.png> <width> <height>``.
    Returns None when no renderer is configured, so callers can fall back
    to text-only prompts.
    """
    if not renderer_command:
        return None
    w, h = doc.canvas_size()
    tw, th = thumbnail_size(w, h, max_width)
    with tempfile.TemporaryDirectory() as tmp:
        src = Path(tmp) / "in.svg"
        dst = Path(tmp) / "out.png"
        src.write_text(serialize(doc))
        cmd = shlex.split(renderer_command) + [str(src), str(dst), str(tw), str(th)]
        try:
            subprocess.run(cmd, check=True, capture_output=True, timeout=60)
        except (OSError, subprocess.SubprocessError) as exc:
            raise RendererUnavailable(f"renderer failed: {exc}") from exc
        if not dst.exists():
            raise RendererUnavailable("renderer produced no output")
        return Thumbnail(tw, th, dst.read_bytes())


def build_prompt_view(doc: SvgDocument, places: int = 2, path_tolerance: float = 0.002,
                      max_width: int = 400, renderer_command: str | None = None) -> PromptView:
    """Full pre-processing pipeline for an id-assigned document."""
    before = len(svg_model.serialize_bytes(doc))
    simplified = reduce_noise(doc)
    simplified = round_numeric(simplified, places)
    simplified = simplify_document_paths(simplified, path_tolerance)
    after = len(svg_model.serialize_bytes(simplified))
    try:
        thumb = make_thumbnail(doc, max_width, renderer_command)
    except RendererUnavailable:
        thumb = None
    count = sum(1 for _ in simplified.iter_elements())
    return PromptView(simplified, thumb, PromptViewStats(count, before, after))
