"""Reverse-engineer SVG charts into layered IR and reusable templates."""

from .chain import (
    DecomposeResult,
    decompose_document,
    run_chain,
    synthesize_with_adapter,
)
from .corpus import CorpusChart, standard_corpus
from .decompose import heuristic_decompose, validate_markup
from .ir import (
    ColumnKind,
    Coordinate,
    Dataset,
    IntermediateRepresentation,
    MarkType,
    Prototype,
    parse_ir,
    serialize_ir,
    validate_ir,
)
from .layers import LayerRole
from .lmm import LmmAdapter, Mode, ModelRequest, Transcript
from .preprocess import build_prompt_view
from .refine import RefinementResult, WidgetSpec, materialize_widgets, refine
from .svg.markers import GroupMarker, insert_markers, strip_markers
from .svg.model import SvgDocument, SvgNode, assign_ids, ensure_ids, parse, serialize
from .template import (
    TemplateProgram,
    diff_geometry,
    evaluate,
    minimal_change_score,
    parse_program,
    print_program,
    validate_program,
)
from .template.synthesize import synthesize_heuristic, synthesize_template

__version__ = "0.1.0"
